//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or IO error, 2 numerical failure
//! (singular or non-separable data in single-instance commands), 3
//! disagreement between the equivalent proliferation conditions.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use svprolif_core::bounds::{self, BoundValue};
use svprolif_core::ensembles::{Dataset, SeedRecord};
use svprolif_core::equivalence::{self, EquivalenceOptions, EquivalenceReport};
use svprolif_core::kernel;
use svprolif_core::svm::{self, SvmSolution};
use svprolif_core::Error;

use crate::config::{
    self, BoundRequest, BoundsConfig, BuhotConfig, CheckConfig, ConcentrationConfig, ConfigError,
    ConverseConfig, DataSource, Figure1Config, GenConfig, SolveConfig, SweepConfig,
};
use crate::experiments;
use crate::io::{self, IoError};
use crate::manifest::{self, Manifest, RunClock};

#[derive(Debug, Parser)]
#[command(name = "svprolif", version, about = "Support-vector proliferation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Sample a dataset and write it as CSV plus a JSON sidecar.
    Gen(Flags),
    /// Solve the hard-margin SVM on one dataset.
    Solve(Flags),
    /// Evaluate the three proliferation conditions on one dataset.
    Check(Flags),
    /// Estimate proliferation probabilities over a grid of cells.
    Sweep(Flags),
    /// Compare non-proliferation frequencies with the Gaussian lower bound.
    Converse(Flags),
    /// Compare mean support-vector fractions with the asymptotic prediction.
    Buhot(Flags),
    /// Frequencies of the Gram eigenvalue events.
    Concentration(Flags),
    /// SVM against the minimum-norm interpolator on trigonometric features.
    Figure1(Flags),
    /// Evaluate closed-form probability bounds.
    Bounds(Flags),
}

impl Command {
    fn split(self) -> (&'static str, Flags) {
        match self {
            Command::Gen(f) => ("gen", f),
            Command::Solve(f) => ("solve", f),
            Command::Check(f) => ("check", f),
            Command::Sweep(f) => ("sweep", f),
            Command::Converse(f) => ("converse", f),
            Command::Buhot(f) => ("buhot", f),
            Command::Concentration(f) => ("concentration", f),
            Command::Figure1(f) => ("figure1", f),
            Command::Bounds(f) => ("bounds", f),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default: `$SVPROLIF_OUT/<subcommand>` or `out/<subcommand>`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    tol_kkt: Option<f64>,
    #[arg(long)]
    tol_sv: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Override any config key, e.g. `--set solver.max_sweeps=5000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io(IoError),
    Numerical(String),
    Inconsistent(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Inconsistent(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Inconsistent(m) => write!(f, "internal inconsistency: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistent(m) => CliError::Inconsistent(m),
            Error::InvalidSpectrum(_)
            | Error::InvalidParameter { .. }
            | Error::DimensionMismatch { .. }
            | Error::PreconditionViolated(_)
            | Error::NoAdmissibleK { .. } => CliError::Config(ConfigError::new("", e.to_string())),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// The subcommand names, in the order shown by `--help`.
pub const SUBCOMMANDS: [&str; 9] = [
    "gen",
    "solve",
    "check",
    "sweep",
    "converse",
    "buhot",
    "concentration",
    "figure1",
    "bounds",
];

/// Config key each flag overrides, per subcommand (`None`: not applicable).
fn flag_key(sub: &str, flag: &str) -> Option<&'static str> {
    let experiment = matches!(sub, "sweep" | "converse" | "buhot" | "concentration" | "figure1");
    match flag {
        "seed" => match sub {
            "gen" => Some("seed"),
            "solve" | "check" => Some("data.generate.seed"),
            _ if experiment => Some("seed"),
            _ => None,
        },
        "workers" if experiment => Some("workers"),
        "trials" => match sub {
            "sweep" | "converse" | "buhot" | "concentration" => Some("trials"),
            "figure1" => Some("seeds"),
            _ => None,
        },
        "tol_kkt" | "tol_sv" => match sub {
            "solve" | "check" | "sweep" | "buhot" | "figure1" => {
                Some(if flag == "tol_kkt" { "solver.tol_kkt" } else { "solver.tol_sv" })
            }
            _ => None,
        },
        _ => None,
    }
}

/// Config document after `--set` pairs and then flags (flags win).
fn build_document(sub: &str, flags: &Flags) -> CliResult<Value> {
    let mut doc = config::read_value(flags.config.as_deref())?;
    for s in &flags.set {
        let (k, v) = config::split_override(s)?;
        config::apply_override(&mut doc, &k, &v)?;
    }
    let pairs: [(&str, Option<String>); 5] = [
        ("seed", flags.seed.map(|v| v.to_string())),
        ("workers", flags.workers.map(|v| v.to_string())),
        ("trials", flags.trials.map(|v| v.to_string())),
        ("tol_kkt", flags.tol_kkt.map(|v| format!("{v:e}"))),
        ("tol_sv", flags.tol_sv.map(|v| format!("{v:e}"))),
    ];
    for (flag, value) in pairs {
        let Some(value) = value else { continue };
        let cli_name = format!("--{}", flag.replace('_', "-"));
        let key = flag_key(sub, flag).ok_or_else(|| {
            ConfigError::new("", format!("{cli_name} does not apply to `{sub}`"))
        })?;
        if key.starts_with("data.") && doc.pointer("/data/generate").is_none() {
            return Err(ConfigError::new(
                "/data",
                format!("{cli_name} applies only to a `generate` data source"),
            )
            .into());
        }
        config::apply_override(&mut doc, key, &value)?;
    }
    Ok(doc)
}

fn default_out(sub: &str) -> PathBuf {
    let root = std::env::var_os(config::OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));
    root.join(sub)
}

/// What a subcommand reports back for the manifest.
struct Finished {
    config: Value,
    seed: Option<u64>,
    workers: Option<usize>,
    outputs: Vec<String>,
    exit_code: i32,
}

struct Ctx<'a> {
    out: &'a Path,
    outputs: Vec<String>,
}

impl Ctx<'_> {
    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> CliResult<()> {
        io::write_json(&self.out.join(name), v)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> CliResult<()> {
        io::write_csv(&self.out.join(name), rows)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        io::write_table(&self.out.join(name), header, rows)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> CliResult<()> {
        let path = self.out.join(name);
        std::fs::write(&path, body).map_err(|source| IoError::Io { path, source })?;
        self.outputs.push(name.to_string());
        Ok(())
    }
}

fn echo<T: Serialize>(cfg: &T) -> Value {
    serde_json::to_value(cfg).expect("configs serialise")
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let (sub, flags) = match parse(&argv) {
        Ok(Some(x)) => x,
        Ok(None) => return 0,
        Err(code) => return code,
    };
    let clock = RunClock::start();
    let out = flags.out.clone().unwrap_or_else(|| default_out(&sub));
    let result = build_document(&sub, &flags).and_then(|doc| {
        io::ensure_dir(&out)?;
        dispatch(&sub, doc, &out)
    });
    match result {
        Ok(done) => {
            let m = Manifest {
                schema_version: manifest::SCHEMA_VERSION,
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                subcommand: sub.clone(),
                argv,
                config: done.config,
                seed: done.seed,
                workers: done.workers,
                outputs: done.outputs,
                exit_code: done.exit_code,
                started_unix_s: clock.started_unix_s(),
                wall_time_s: clock.elapsed_s(),
            };
            if let Err(e) = manifest::write_manifest(&out, &m) {
                eprintln!("error: io error: {e}");
                return 1;
            }
            done.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// `Ok(None)` for `--help`/`--version`, `Err(code)` for usage errors.
fn parse(argv: &[String]) -> Result<Option<(String, Flags)>, i32> {
    use clap::error::ErrorKind;
    match Cli::try_parse_from(argv) {
        Ok(cli) => {
            let (sub, flags) = cli.command.split();
            Ok(Some((sub.to_string(), flags)))
        }
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(None),
                _ => Err(1),
            }
        }
    }
}

fn dispatch(sub: &str, doc: Value, out: &Path) -> CliResult<Finished> {
    let mut ctx = Ctx {
        out,
        outputs: Vec::new(),
    };
    let (config, seed, workers, exit_code) = match sub {
        "gen" => {
            let cfg: GenConfig = config::from_value(doc)?;
            cmd_gen(&cfg, &mut ctx)?;
            (echo(&cfg), Some(cfg.seed), None, 0)
        }
        "solve" => {
            let cfg: SolveConfig = config::from_value(doc)?;
            config::validate_solver(&cfg.solver, "/solver")?;
            cmd_solve(&cfg, &mut ctx)?;
            (echo(&cfg), data_seed(&cfg.data), None, 0)
        }
        "check" => {
            let cfg: CheckConfig = config::from_value(doc)?;
            config::validate_solver(&cfg.solver, "/solver")?;
            cmd_check(&cfg, &mut ctx)?;
            (echo(&cfg), data_seed(&cfg.data), None, 0)
        }
        "sweep" => {
            let cfg: SweepConfig = config::from_value(doc)?;
            let code = cmd_sweep(&cfg, &mut ctx)?;
            (echo(&cfg), Some(cfg.seed), Some(cfg.workers), code)
        }
        "converse" => {
            let cfg: ConverseConfig = config::from_value(doc)?;
            cmd_converse(&cfg, &mut ctx)?;
            (echo(&cfg), Some(cfg.seed), Some(cfg.workers), 0)
        }
        "buhot" => {
            let cfg: BuhotConfig = config::from_value(doc)?;
            cmd_buhot(&cfg, &mut ctx)?;
            (echo(&cfg), Some(cfg.seed), Some(cfg.workers), 0)
        }
        "concentration" => {
            let cfg: ConcentrationConfig = config::from_value(doc)?;
            cmd_concentration(&cfg, &mut ctx)?;
            (echo(&cfg), Some(cfg.seed), Some(cfg.workers), 0)
        }
        "figure1" => {
            let cfg: Figure1Config = config::from_value(doc)?;
            cmd_figure1(&cfg, &mut ctx)?;
            (echo(&cfg), Some(cfg.seed), Some(cfg.workers), 0)
        }
        "bounds" => {
            let cfg: BoundsConfig = config::from_value(doc)?;
            cmd_bounds(&cfg, &mut ctx)?;
            (echo(&cfg), None, None, 0)
        }
        other => unreachable!("clap accepted unknown subcommand {other}"),
    };
    ctx.json("config.json", &config)?;
    Ok(Finished {
        config,
        seed,
        workers,
        outputs: ctx.outputs,
        exit_code,
    })
}

fn data_seed(d: &DataSource) -> Option<u64> {
    match d {
        DataSource::Generate(g) => Some(g.seed),
        _ => None,
    }
}

fn generate_one(cfg: &GenConfig) -> CliResult<Dataset> {
    let cell = cfg.validate()?;
    let seed = SeedRecord::new(cfg.seed, 0, cfg.trial);
    Ok(experiments::generate(&cell, cfg.features, &cfg.labels, seed)?)
}

fn load_data(src: &DataSource) -> CliResult<Dataset> {
    match src {
        DataSource::Inline(d) => Ok(d.to_dataset()?),
        DataSource::Files { prefix } => Ok(io::read_dataset(Path::new(prefix))?),
        DataSource::Generate(g) => generate_one(g),
    }
}

fn cmd_gen(cfg: &GenConfig, ctx: &mut Ctx) -> CliResult<()> {
    let ds = generate_one(cfg)?;
    io::write_dataset(&ctx.out.join("dataset"), &ds)?;
    ctx.outputs.extend(["dataset.csv".to_string(), "dataset.json".to_string()]);
    println!(
        "wrote n = {}, d = {} ({}) to {}",
        ds.n(),
        ds.d(),
        ds.features().kind().law_name(),
        ctx.out.join("dataset.csv").display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    n: usize,
    d: usize,
    gram_singular: bool,
    all_support_vectors: bool,
    support_count: usize,
    solution: &'a SvmSolution,
}

fn cmd_solve(cfg: &SolveConfig, ctx: &mut Ctx) -> CliResult<()> {
    let ds = load_data(&cfg.data)?;
    let gf = kernel::gram_of(&ds)?;
    let sol = svm::solve_dual(&ds, &gf, &cfg.solver)?;
    println!(
        "support vectors: {} of {} (margin {:.6e}, {} sweeps, converged: {})",
        sol.support.len(),
        ds.n(),
        sol.gamma_star,
        sol.diagnostics.sweeps,
        sol.diagnostics.converged
    );
    ctx.json(
        "solution.json",
        &SolveOutput {
            n: ds.n(),
            d: ds.d(),
            gram_singular: gf.is_singular(),
            all_support_vectors: sol.all_support_vectors(),
            support_count: sol.support.len(),
            solution: &sol,
        },
    )
}

#[derive(Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
enum CheckOutput<'a> {
    /// Gram matrix invertible: all three conditions evaluated.
    Full {
        all_support_vectors: bool,
        report: &'a EquivalenceReport,
    },
    /// Singular Gram matrix: only the solver verdict is defined.
    SolverOnly {
        all_support_vectors: bool,
        solution: &'a SvmSolution,
    },
}

fn cmd_check(cfg: &CheckConfig, ctx: &mut Ctx) -> CliResult<()> {
    let ds = load_data(&cfg.data)?;
    let gf = kernel::gram_of(&ds)?;
    if gf.is_singular() {
        let sol = svm::solve_dual(&ds, &gf, &cfg.solver)?;
        println!("all support vectors: {}", sol.all_support_vectors());
        println!("note: Gram matrix is singular; verdict from the SVM solver only");
        println!("{:>5} {:>3} {:>14}", "i", "y", "beta*");
        for i in 0..ds.n() {
            println!("{:>5} {:>3} {:>14.6e}", i, ds.y()[i], sol.beta_star[i]);
        }
        return ctx.json(
            "check.json",
            &CheckOutput::SolverOnly {
                all_support_vectors: sol.all_support_vectors(),
                solution: &sol,
            },
        );
    }
    let opts = EquivalenceOptions {
        solver: cfg.solver,
        run_solver: true,
        tol_amb: cfg.tol_amb,
        direct_loo: cfg.direct_loo,
    };
    let r = equivalence::check_equivalence(&ds, &gf, &opts)?;
    let verdict = r.verdicts.cond1_all_sv.unwrap_or(r.verdicts.cond2_all_positive);
    println!("all support vectors: {verdict}");
    let v = r.verdicts;
    println!(
        "condition 1 (solver): {:?}, condition 2 (y_i beta_i > 0): {}, condition 3 (h_i < 1): {}",
        v.cond1_all_sv, v.cond2_all_positive, v.cond3_all_below_one
    );
    if r.is_ambiguous() {
        println!("ambiguous indices: {:?}", r.ambiguous);
    }
    println!(
        "{:>5} {:>3} {:>14} {:>14} {:>14} {:>14} {:>4}",
        "i", "y", "y_i beta_i", "h_i", "s_i", "beta*", "sv"
    );
    let sol = r.solution.as_ref().expect("solver ran");
    for i in 0..r.n() {
        println!(
            "{:>5} {:>3} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>4}",
            i,
            ds.y()[i],
            r.signed_margins[i],
            r.loo_stats[i],
            r.schur[i],
            sol.beta_star[i],
            if sol.support.contains(i) { "yes" } else { "no" }
        );
    }
    ctx.json(
        "check.json",
        &CheckOutput::Full {
            all_support_vectors: verdict,
            report: &r,
        },
    )
}

fn cmd_sweep(cfg: &SweepConfig, ctx: &mut Ctx) -> CliResult<i32> {
    let res = experiments::proliferation_sweep(cfg)?;
    let rows: Vec<_> = res.cells.iter().map(|c| c.csv_row()).collect();
    ctx.csv("sweep.csv", &rows)?;
    ctx.json("sweep.json", &res)?;
    println!(
        "{:>6} {:>7} {:>12} {:>7} {:>9} {:>9} {:>8} {:>8}",
        "n", "d", "law", "valid", "p_hat", "ci", "singular", "ambig"
    );
    for c in &res.cells {
        println!(
            "{:>6} {:>7} {:>12} {:>7} {:>9.4} {:>9.4} {:>8} {:>8}",
            c.n,
            c.d,
            c.law,
            c.valid,
            c.p_hat.unwrap_or(f64::NAN),
            c.ci_halfwidth.unwrap_or(f64::NAN),
            c.singular,
            c.ambiguous
        );
    }
    let bad = res.inconsistent_total();
    if bad > 0 {
        eprintln!("error: internal inconsistency: {bad} trial(s) with disagreeing verdicts");
        return Ok(3);
    }
    Ok(0)
}

fn cmd_converse(cfg: &ConverseConfig, ctx: &mut Ctx) -> CliResult<()> {
    let rows = experiments::converse_probe(cfg)?;
    ctx.csv("converse.csv", &rows)?;
    ctx.json("converse.json", &rows)?;
    println!("{:>6} {:>7} {:>9} {:>9} {:>10} {:>6}", "n", "d", "q_hat", "ci", "bound", "holds");
    for r in &rows {
        println!(
            "{:>6} {:>7} {:>9.4} {:>9.4} {:>10.3e} {:>6}",
            r.n,
            r.d,
            r.q_hat.unwrap_or(f64::NAN),
            r.ci_halfwidth.unwrap_or(f64::NAN),
            r.bound,
            r.holds
        );
    }
    Ok(())
}

fn cmd_buhot(cfg: &BuhotConfig, ctx: &mut Ctx) -> CliResult<()> {
    let rows = experiments::buhot_compare(cfg)?;
    ctx.csv("buhot.csv", &rows)?;
    ctx.json("buhot.json", &rows)?;
    println!("{:>8} {:>7} {:>10} {:>10} {:>10} {:>9}", "delta", "d", "sv_frac", "buhot", "gap", "resamples");
    for r in &rows {
        println!(
            "{:>8} {:>7} {:>10.6} {:>10.6} {:>10.6} {:>9}",
            r.delta,
            r.d,
            r.sv_fraction_mean.unwrap_or(f64::NAN),
            r.buhot,
            r.gap.unwrap_or(f64::NAN),
            r.resamples
        );
    }
    Ok(())
}

fn cmd_concentration(cfg: &ConcentrationConfig, ctx: &mut Ctx) -> CliResult<()> {
    let r = experiments::concentration_probe(cfg)?;
    ctx.csv("concentration.csv", std::slice::from_ref(&Flat::from(&r)))?;
    ctx.json("concentration.json", &r)?;
    println!(
        "n = {}, d = {}, d2 = {:.4}, d_inf = {:.4}: Pr[eigmin >= |lambda|_1/2] = {:.4}, Pr[|K|_op <= 2|lambda|_1] = {:.4}",
        r.n, r.d, r.dims.d2, r.dims.d_inf, r.eigmin_event, r.opnorm_event
    );
    Ok(())
}

#[derive(Serialize)]
struct Flat {
    n: usize,
    d: usize,
    law: &'static str,
    trials: usize,
    d2: f64,
    d_inf: f64,
    eigmin_event: f64,
    opnorm_event: f64,
    average_bound: f64,
}

impl From<&experiments::ConcentrationReport> for Flat {
    fn from(r: &experiments::ConcentrationReport) -> Self {
        Self {
            n: r.n,
            d: r.d,
            law: r.law.name(),
            trials: r.trials,
            d2: r.dims.d2,
            d_inf: r.dims.d_inf,
            eigmin_event: r.eigmin_event,
            opnorm_event: r.opnorm_event,
            average_bound: r.average_bound,
        }
    }
}

fn cmd_figure1(cfg: &Figure1Config, ctx: &mut Ctx) -> CliResult<()> {
    let rep = experiments::figure1_repro(cfg)?;
    let f = io::fmt_f64;
    let opt = |v: Option<f64>| v.map(f).unwrap_or_default();
    let rows: Vec<Vec<String>> = rep
        .points
        .iter()
        .map(|p| {
            vec![
                p.decay.to_string(),
                p.seed.to_string(),
                p.n_sv.to_string(),
                p.all_sv.to_string(),
                p.coincide.to_string(),
                opt(p.rel_gap),
                f(p.lambda_dims.d2),
                f(p.lambda_dims.d_inf),
                f(p.gram_dims.d2),
                f(p.gram_dims.d_inf),
            ]
        })
        .collect();
    ctx.table(
        "figure1_points.csv",
        &["decay", "seed", "n_sv", "all_sv", "coincide", "rel_gap", "d2_lambda", "dinf_lambda", "d2_gram", "dinf_gram"],
        &rows,
    )?;
    for c in &rep.curves {
        let tag = format!("decay{}_seed{}", c.decay, c.seed);
        let rows: Vec<Vec<String>> = (0..c.t.len())
            .map(|i| {
                vec![
                    f(c.t[i]),
                    f(c.svm[i]),
                    c.interp.as_ref().map(|v| f(v[i])).unwrap_or_default(),
                ]
            })
            .collect();
        ctx.table(&format!("figure1_curve_{tag}.csv"), &["t", "svm", "interp"], &rows)?;
        let train: Vec<Vec<String>> = c.train_t.iter().zip(&c.train_y).map(|(&t, &y)| vec![f(t), f(y)]).collect();
        ctx.table(&format!("figure1_train_{tag}.csv"), &["t", "y"], &train)?;
    }
    ctx.text("figure1.gp", &experiments::figure1_gnuplot(&rep))?;
    ctx.json("figure1_summary.json", &rep.summaries)?;
    for s in &rep.summaries {
        println!(
            "decay {}: {:.0}% of {} seeds all-SV and equal to the interpolator, median |sv| = {}, d_inf = {:.4}, d2 = {:.4}",
            s.decay,
            100.0 * s.coincide_fraction,
            s.seeds,
            s.median_sv,
            s.lambda_dims.d_inf,
            s.lambda_dims.d2
        );
    }
    Ok(())
}

/// Evaluates one request.
pub fn evaluate_bound(req: &BoundRequest) -> svprolif_core::Result<BoundValue> {
    match req {
        BoundRequest::Thm1 { n, d2, d_inf, v, big_c, c } => bounds::thm1_bound(*n, *d2, *d_inf, *v, *big_c, *c),
        BoundRequest::Thm2 { n, d, d_inf, big_c, c } => bounds::thm2_bound(*n, *d, *d_inf, *big_c, *c),
        BoundRequest::Thm3 { n, d } => bounds::thm3_bound(*n, *d),
        BoundRequest::Thm4 { n, spectrum, c, c_prime } => {
            let s = spectrum
                .resolve(*n, None)
                .map_err(svprolif_core::Error::InvalidSpectrum)?;
            bounds::thm4_bound(*n, &s, *c, *c_prime)
        }
        BoundRequest::Buhot { delta } => {
            let b = bounds::buhot_fraction(*delta)?;
            let mut inputs = std::collections::BTreeMap::new();
            inputs.insert("delta".to_string(), *delta);
            Ok(BoundValue {
                name: "buhot".into(),
                value: b.value,
                raw: b.value,
                clipped: false,
                inputs,
                k: None,
                b: None,
            })
        }
    }
}

fn cmd_bounds(cfg: &BoundsConfig, ctx: &mut Ctx) -> CliResult<()> {
    let values = cfg
        .requests
        .iter()
        .enumerate()
        .map(|(i, r)| {
            evaluate_bound(r).map_err(|e| ConfigError::new(format!("/requests/{i}"), e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    println!("{}", serde_json::to_string_pretty(&values).expect("serialisable"));
    ctx.json("bounds.json", &values)
}
