fn main() {
    std::process::exit(svprolif::cli::run(std::env::args()));
}
