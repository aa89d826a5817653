use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use svprolif::manifest;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_svprolif"));
    c.env_remove("SVPROLIF_OUT");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// CSV text with the trailing `runtime_s` column removed.
fn without_runtime(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn check_two_point_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("check");
    let cfg = configs().join("two_point.json");
    let o = run(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("all support vectors: true"));
    assert!(out.join("check.json").is_file());
}

#[test]
fn non_separable_solve_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "ns.json", r#"{"data":{"inline":{"x":[[1,0],[1,0]],"y":[1,-1]}}}"#);
    let out = tmp.path().join("o");
    let o = run(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not linearly separable"));
}

#[test]
fn unknown_key_suggests_nearest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"cells":[{"n":5,"d":5}],"solver":{"tol_kt":1e-9}}"#);
    let o = run(&["sweep", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("/solver/tol_kt"), "{err}");
    assert!(err.contains("did you mean `tol_kkt`"), "{err}");
}

#[test]
fn cell_with_d_below_n_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"cells":[{"n":5,"d":5},{"n":20,"d":10}]}"#);
    let o = run(&["sweep", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/cells/1"), "{}", stderr(&o));
}

#[test]
fn malformed_json_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", "{\"cells\": [");
    let o = run(&["sweep", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("malformed JSON"));

    let cfg = write(tmp.path(), "t.json", r#"{"cells":[{"n":"five","d":5}]}"#);
    let o = run(&["sweep", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/cells/0/n"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--workers", "many"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_rerun_is_byte_identical_modulo_runtime() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("sweep_small.json");
    let mut csv = Vec::new();
    for (tag, workers) in [("a", "1"), ("b", "1"), ("c", "2")] {
        let out = tmp.path().join(tag);
        let o = run(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
            "--trials",
            "20",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        csv.push(without_runtime(&fs::read_to_string(out.join("sweep.csv")).unwrap()));
    }
    assert_eq!(csv[0], csv[1]);
    assert_eq!(csv[0], csv[2]);
    let header = csv[0].lines().next().unwrap();
    assert_eq!(
        header,
        "n,d,ensemble,law,trials,proliferation_count,singular,ambiguous,p_hat,ci_halfwidth,sv_fraction_mean"
    );
}

#[test]
fn manifest_echoes_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let cfg = configs().join("sweep_small.json");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
        "--trials",
        "5",
        "--tol-kkt",
        "1e-9",
        "--set",
        "tol_amb=1e-8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest::read_manifest(&out).unwrap();
    assert_eq!(m.schema_version, manifest::SCHEMA_VERSION);
    assert_eq!(m.subcommand, "sweep");
    assert_eq!(m.seed, Some(99));
    assert_eq!(m.exit_code, 0);
    assert_eq!(m.config["trials"], 5);
    assert_eq!(m.config["solver"]["tol_kkt"], 1e-9);
    assert_eq!(m.config["tol_amb"], 1e-8);
    assert_eq!(m.config["mode"], "condition2");
    for f in &m.outputs {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert!(m.outputs.iter().any(|f| f == "sweep.csv"));

    // The echoed config alone reproduces the run.
    let echo = tmp.path().join("echo.json");
    fs::write(&echo, serde_json::to_string(&m.config).unwrap()).unwrap();
    let again = tmp.path().join("again");
    let o = run(&["sweep", "--config", echo.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let b = fs::read_to_string(again.join("sweep.csv")).unwrap();
    assert_eq!(without_runtime(&a), without_runtime(&b));
}

#[test]
fn out_root_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .env("SVPROLIF_OUT", tmp.path())
        .args(["bounds", "--set", r#"requests=[{"name":"thm3","n":50,"d":100}]"#])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(tmp.path().join("bounds/bounds.json").is_file());
    assert!(tmp.path().join("bounds/manifest.json").is_file());
}

#[test]
fn gen_then_check_from_files() {
    let tmp = tempfile::tempdir().unwrap();
    let gen_out = tmp.path().join("gen");
    let o = run(&["gen", "--out", gen_out.to_str().unwrap(), "--set", "n=6", "--set", "d=40"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let prefix = gen_out.join("dataset");
    let cfg = write(
        tmp.path(),
        "c.json",
        &format!(r#"{{"data":{{"files":{{"prefix":{:?}}}}},"direct_loo":true}}"#, prefix.to_str().unwrap()),
    );
    let o = run(&["check", "--config", &cfg, "--out", tmp.path().join("chk").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("all support vectors: "));
}
