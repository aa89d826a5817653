//! Monte-Carlo experiments.
//!
//! Every trial is an independent task keyed by `(master seed, cell, trial)`.
//! Tasks run on a private rayon pool and are collected in cell/trial order,
//! so results do not depend on the worker count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use svprolif_core::bounds;
use svprolif_core::ensembles::{self, Dataset, EntryLaw, SeedRecord};
use svprolif_core::equivalence::{self, EquivalenceOptions};
use svprolif_core::kernel::{self, GramFactor};
use svprolif_core::numeric;
use svprolif_core::spectra::{EffectiveDims, Spectrum};
use svprolif_core::svm::{self, SolverOptions};
use svprolif_core::Error;

use crate::config::{
    BuhotConfig, ConcentrationConfig, ConfigResult, ConverseConfig, FeatureSpec, Figure1Config,
    LabelSpec, ResolvedCell, SweepConfig, SweepMode,
};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes out of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilson {
    pub p_hat: f64,
    pub center: f64,
    pub halfwidth: f64,
}

impl Wilson {
    pub fn new(k: usize, m: usize) -> Option<Self> {
        if m == 0 {
            return None;
        }
        let (k, m) = (k as f64, m as f64);
        let p = k / m;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / m;
        Some(Self {
            p_hat: p,
            center: (p + z2 / (2.0 * m)) / denom,
            halfwidth: Z95 / denom * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt(),
        })
    }

    pub fn low(&self) -> f64 {
        (self.center - self.halfwidth).max(0.0)
    }

    pub fn high(&self) -> f64 {
        (self.center + self.halfwidth).min(1.0)
    }
}

/// Maps `f` over `items` on `workers` threads, preserving order.
pub fn par_map<T, R, F>(workers: usize, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| items.into_par_iter().map(f).collect())
}

/// Samples one dataset of a cell.
pub fn generate(
    cell: &ResolvedCell,
    features: FeatureSpec,
    labels: &LabelSpec,
    seed: SeedRecord,
) -> svprolif_core::Result<Dataset> {
    let f = match features {
        FeatureSpec::Independent { law } => {
            ensembles::sample_independent(cell.n, &cell.spectrum, law, seed)?
        }
        FeatureSpec::Haar => ensembles::sample_haar(cell.n, &cell.spectrum, seed)?,
        FeatureSpec::Trig => {
            let (k, decay) = cell.trig.ok_or(Error::InvalidParameter {
                name: "features",
                reason: "trig features need a trig spectrum".into(),
            })?;
            ensembles::sample_trig(cell.n, k, decay, seed)?
        }
    };
    let model = labels.model(cell.n, cell.d(), seed);
    ensembles::apply_labels(f, &model, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Proliferation,
    NoProliferation,
    Singular,
    Ambiguous,
    /// Conditions disagreed outside the ambiguity band.
    Inconsistent,
    /// Any other numerical failure (non-separable, too large).
    Failed,
}

impl TrialStatus {
    pub fn is_valid(self) -> bool {
        matches!(self, TrialStatus::Proliferation | TrialStatus::NoProliferation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub cell: usize,
    pub trial: u64,
    pub status: TrialStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sv_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip)]
    pub runtime_s: f64,
}

/// Runs the configured decision rule on one dataset.
pub fn evaluate_trial(
    ds: &Dataset,
    mode: SweepMode,
    solver: SolverOptions,
    tol_amb: f64,
) -> (TrialStatus, Option<f64>, Option<f64>, Option<f64>, Option<String>) {
    let gf = match kernel::gram_of(ds) {
        Ok(gf) => gf,
        Err(e) => return (TrialStatus::Failed, None, None, None, Some(e.to_string())),
    };
    if gf.is_singular() {
        return (TrialStatus::Singular, None, None, None, None);
    }
    let opts = EquivalenceOptions {
        solver,
        run_solver: mode == SweepMode::Solver,
        tol_amb,
        direct_loo: mode == SweepMode::Condition3,
    };
    match equivalence::check_equivalence(ds, &gf, &opts) {
        Ok(r) => {
            let sv = r.solution.as_ref().map(|s| s.sv_fraction());
            let (mm, mh) = (Some(r.min_signed_margin()), Some(r.max_loo()));
            if r.is_ambiguous() {
                (TrialStatus::Ambiguous, sv, mm, mh, None)
            } else if r.verdicts.proliferation() {
                (TrialStatus::Proliferation, sv, mm, mh, None)
            } else {
                (TrialStatus::NoProliferation, sv, mm, mh, None)
            }
        }
        Err(Error::SingularGram | Error::SingularLeaveOneOut { .. }) => {
            (TrialStatus::Singular, None, None, None, None)
        }
        Err(e @ Error::Inconsistent(_)) => {
            (TrialStatus::Inconsistent, None, None, None, Some(e.to_string()))
        }
        Err(e) => (TrialStatus::Failed, None, None, None, Some(e.to_string())),
    }
}

/// Per-cell summary. Counts of singular, ambiguous, inconsistent and failed
/// trials are excluded from `p_hat`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub d: usize,
    pub ensemble: String,
    pub law: String,
    pub trials: usize,
    pub proliferation_count: usize,
    pub singular: usize,
    pub ambiguous: usize,
    pub inconsistent: usize,
    pub failed: usize,
    pub valid: usize,
    pub p_hat: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub sv_fraction_mean: Option<f64>,
    pub min_margin_mean: Option<f64>,
    pub max_h_mean: Option<f64>,
    pub d2: f64,
    pub d_inf: f64,
    pub runtime_s: f64,
}

/// The CSV projection of [`CellResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellCsvRow {
    pub n: usize,
    pub d: usize,
    pub ensemble: String,
    pub law: String,
    pub trials: usize,
    pub proliferation_count: usize,
    pub singular: usize,
    pub ambiguous: usize,
    pub p_hat: String,
    pub ci_halfwidth: String,
    pub sv_fraction_mean: String,
    pub runtime_s: String,
}

fn opt_fmt(v: Option<f64>) -> String {
    v.map(crate::io::fmt_f64).unwrap_or_default()
}

impl CellResult {
    pub fn csv_row(&self) -> CellCsvRow {
        CellCsvRow {
            n: self.n,
            d: self.d,
            ensemble: self.ensemble.clone(),
            law: self.law.clone(),
            trials: self.trials,
            proliferation_count: self.proliferation_count,
            singular: self.singular,
            ambiguous: self.ambiguous,
            p_hat: opt_fmt(self.p_hat),
            ci_halfwidth: opt_fmt(self.ci_halfwidth),
            sv_fraction_mean: opt_fmt(self.sv_fraction_mean),
            runtime_s: format!("{:.6}", self.runtime_s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub cells: Vec<CellResult>,
    pub trials: Vec<TrialOutcome>,
}

impl SweepResult {
    pub fn inconsistent_total(&self) -> usize {
        self.cells.iter().map(|c| c.inconsistent).sum()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| numeric::sum(v.iter().copied()) / v.len() as f64)
}

pub fn summarize_cell(
    cell: &ResolvedCell,
    features: FeatureSpec,
    outcomes: &[TrialOutcome],
) -> CellResult {
    let count = |s: TrialStatus| outcomes.iter().filter(|o| o.status == s).count();
    let prolif = count(TrialStatus::Proliferation);
    let valid = prolif + count(TrialStatus::NoProliferation);
    let w = Wilson::new(prolif, valid);
    let valid_iter = || outcomes.iter().filter(|o| o.status.is_valid());
    let kind = features.kind();
    let dims = cell.spectrum.effective_dims();
    CellResult {
        n: cell.n,
        d: cell.d(),
        ensemble: kind.ensemble_name().to_string(),
        law: kind.law_name().to_string(),
        trials: outcomes.len(),
        proliferation_count: prolif,
        singular: count(TrialStatus::Singular),
        ambiguous: count(TrialStatus::Ambiguous),
        inconsistent: count(TrialStatus::Inconsistent),
        failed: count(TrialStatus::Failed),
        valid,
        p_hat: w.map(|w| w.p_hat),
        ci_halfwidth: w.map(|w| w.halfwidth),
        ci_low: w.map(|w| w.low()),
        ci_high: w.map(|w| w.high()),
        sv_fraction_mean: mean(valid_iter().filter_map(|o| o.sv_fraction)),
        min_margin_mean: mean(valid_iter().filter_map(|o| o.min_margin)),
        max_h_mean: mean(valid_iter().filter_map(|o| o.max_h)),
        d2: dims.d2,
        d_inf: dims.d_inf,
        runtime_s: outcomes.iter().map(|o| o.runtime_s).sum(),
    }
}

/// Estimates the proliferation probability in every cell of `cfg`.
pub fn proliferation_sweep(cfg: &SweepConfig) -> ConfigResult<SweepResult> {
    let cells = cfg.validate()?;
    let tasks: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials as u64).map(move |t| (c, t)))
        .collect();
    let outcomes = par_map(cfg.workers, tasks, |(c, t)| {
        let start = Instant::now();
        let seed = SeedRecord::new(cfg.seed, c as u64, t);
        let (status, sv_fraction, min_margin, max_h, message) =
            match generate(&cells[c], cfg.features, &cfg.labels, seed) {
                Ok(ds) => evaluate_trial(&ds, cfg.mode, cfg.solver, cfg.tol_amb),
                Err(e) => (TrialStatus::Failed, None, None, None, Some(e.to_string())),
            };
        TrialOutcome {
            cell: c,
            trial: t,
            status,
            sv_fraction,
            min_margin,
            max_h,
            message,
            runtime_s: start.elapsed().as_secs_f64(),
        }
    });
    let results = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let chunk = &outcomes[c * cfg.trials..(c + 1) * cfg.trials];
            summarize_cell(cell, cfg.features, chunk)
        })
        .collect();
    Ok(SweepResult {
        mode: cfg.mode,
        cells: results,
        trials: outcomes,
    })
}

/// One row of the converse (non-proliferation) table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseRow {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub non_sv_count: usize,
    pub singular: usize,
    pub ambiguous: usize,
    pub valid: usize,
    pub q_hat: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub bound: f64,
    /// `q_hat + ci_halfwidth >= bound`.
    pub holds: bool,
    pub runtime_s: f64,
}

/// Probability that at least one example is not a support vector, against
/// the Gaussian lower bound, under fixed labels.
pub fn converse_probe(cfg: &ConverseConfig) -> ConfigResult<Vec<ConverseRow>> {
    let cells = cfg.validate()?;
    let sweep = SweepConfig {
        cells: Vec::new(),
        grid: None,
        spectrum: None,
        features: FeatureSpec::Independent {
            law: EntryLaw::Gaussian,
        },
        labels: cfg.labels.clone(),
        trials: cfg.trials,
        mode: SweepMode::Condition2,
        solver: SolverOptions::default(),
        tol_amb: cfg.tol_amb,
        seed: cfg.seed,
        workers: cfg.workers,
    };
    let sweep = SweepConfig {
        cells: cells
            .iter()
            .map(|&(n, d)| crate::config::CellSpec {
                n,
                d: Some(d),
                spectrum: None,
            })
            .collect(),
        ..sweep
    };
    let res = proliferation_sweep(&sweep)?;
    Ok(res
        .cells
        .iter()
        .map(|c| {
            let bound = bounds::thm3_bound(c.n, c.d).map(|b| b.value).unwrap_or(0.0);
            let non_sv = c.valid - c.proliferation_count;
            let w = Wilson::new(non_sv, c.valid);
            let q_hat = w.map(|w| w.p_hat);
            let half = w.map(|w| w.halfwidth);
            ConverseRow {
                n: c.n,
                d: c.d,
                trials: c.trials,
                non_sv_count: non_sv,
                singular: c.singular,
                ambiguous: c.ambiguous,
                valid: c.valid,
                q_hat,
                ci_halfwidth: half,
                bound,
                holds: q_hat.zip(half).is_some_and(|(q, h)| q + h >= bound),
                runtime_s: c.runtime_s,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub d: usize,
    pub law: EntryLaw,
    pub trials: usize,
    pub l1: f64,
    pub dims: EffectiveDims,
    /// Frequency of `eigmin(K) >= ||lambda||_1 / 2`.
    pub eigmin_event: f64,
    /// Frequency of `||K||_op <= 2 ||lambda||_1`.
    pub opnorm_event: f64,
    /// Frequency of `eigmin(K) <= tr(K) / n` (always 1).
    pub average_bound: f64,
    pub eigmin_mean: f64,
    pub opnorm_mean: f64,
}

pub fn concentration_probe(cfg: &ConcentrationConfig) -> ConfigResult<ConcentrationReport> {
    let spectrum = cfg.validate()?;
    let l1 = spectrum.l1();
    let rows = par_map(cfg.workers, (0..cfg.trials as u64).collect(), |t| {
        let seed = SeedRecord::new(cfg.seed, 0, t);
        let f = ensembles::sample_independent(cfg.n, &spectrum, cfg.law, seed)
            .expect("validated dimensions");
        let gf = kernel::gram(&f).expect("validated size");
        let ev = gf.eigenvalues();
        let eigmin = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let opnorm = ev.iter().copied().fold(0.0, f64::max);
        (eigmin, opnorm, gf.trace() / cfg.n as f64)
    });
    let m = rows.len() as f64;
    let freq = |p: &dyn Fn(&(f64, f64, f64)) -> bool| rows.iter().filter(|r| p(r)).count() as f64 / m;
    Ok(ConcentrationReport {
        n: cfg.n,
        d: spectrum.dim(),
        law: cfg.law,
        trials: cfg.trials,
        l1,
        dims: spectrum.effective_dims(),
        eigmin_event: freq(&|r| r.0 >= 0.5 * l1),
        opnorm_event: freq(&|r| r.1 <= 2.0 * l1),
        average_bound: freq(&|r| r.0 <= r.2 * (1.0 + 1e-12)),
        eigmin_mean: numeric::sum(rows.iter().map(|r| r.0)) / m,
        opnorm_mean: numeric::sum(rows.iter().map(|r| r.1)) / m,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuhotRow {
    pub delta: f64,
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    /// Extra draws needed because an instance was not separable.
    pub resamples: u64,
    /// Trials that exhausted `max_resamples` or failed to converge.
    pub failed: usize,
    pub sv_fraction_mean: Option<f64>,
    pub buhot: f64,
    pub small_delta: f64,
    pub large_delta: f64,
    pub gap: Option<f64>,
}

/// Mean support-vector fraction at `d = round(n / delta)` against the
/// asymptotic prediction.
pub fn buhot_compare(cfg: &BuhotConfig) -> ConfigResult<Vec<BuhotRow>> {
    cfg.validate()?;
    let cells: Vec<(usize, f64, usize)> = cfg
        .delta
        .iter()
        .enumerate()
        .map(|(c, &delta)| (c, delta, ((cfg.n as f64 / delta).round() as usize).max(1)))
        .collect();
    let tasks: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials as u64).map(move |t| (c, t)))
        .collect();
    let outcomes = par_map(cfg.workers, tasks, |(c, t)| {
        let (_, _, d) = cells[c];
        let spectrum = Spectrum::isotropic(d).expect("d >= 1");
        let mut resamples = 0u64;
        for attempt in 0..=cfg.max_resamples {
            let seed = SeedRecord::new(cfg.seed, c as u64, t + attempt * (1 << 32));
            let model = cfg.labels.model(cfg.n, d, seed);
            let sol = ensembles::sample_independent_any_shape(cfg.n, &spectrum, EntryLaw::Gaussian, seed)
                .and_then(|f| ensembles::apply_labels(f, &model, seed))
                .and_then(|ds| {
                    let gf = kernel::gram_of(&ds)?;
                    svm::solve_dual(&ds, &gf, &cfg.solver)
                });
            match sol {
                Ok(s) if s.diagnostics.converged => return (Some(s.sv_fraction()), resamples),
                Ok(_) => return (None, resamples),
                Err(Error::NotSeparable) => resamples += 1,
                Err(_) => return (None, resamples),
            }
        }
        (None, resamples)
    });
    Ok(cells
        .iter()
        .map(|&(c, delta, d)| {
            let chunk = &outcomes[c * cfg.trials..(c + 1) * cfg.trials];
            let b = bounds::buhot_fraction(delta).expect("validated delta");
            let sv = mean(chunk.iter().filter_map(|o| o.0));
            BuhotRow {
                delta,
                n: cfg.n,
                d,
                trials: cfg.trials,
                resamples: chunk.iter().map(|o| o.1).sum(),
                failed: chunk.iter().filter(|o| o.0.is_none()).count(),
                sv_fraction_mean: sv,
                buhot: b.value,
                small_delta: b.small_delta,
                large_delta: b.large_delta,
                gap: sv.map(|s| (s - b.value).abs()),
            }
        })
        .collect())
}

/// One `(decay, seed)` fit on trigonometric features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Point {
    pub decay: f64,
    pub seed: u64,
    pub n_sv: usize,
    pub all_sv: bool,
    /// `||w_svm - w_interp||_2 / ||w_interp||_2`.
    pub rel_gap: Option<f64>,
    /// Every example is a support vector and the gap is at most `1e-6`.
    pub coincide: bool,
    pub lambda_dims: EffectiveDims,
    pub gram_dims: EffectiveDims,
    pub gram_singular: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Decision functions on a grid of `t`, with the training sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Curve {
    pub decay: f64,
    pub seed: u64,
    pub t: Vec<f64>,
    pub svm: Vec<f64>,
    pub interp: Option<Vec<f64>>,
    pub train_t: Vec<f64>,
    pub train_y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Summary {
    pub decay: f64,
    pub seeds: usize,
    /// Fraction of seeds with every example a support vector and SVM equal
    /// to the interpolator.
    pub coincide_fraction: f64,
    pub all_sv_fraction: f64,
    pub median_sv: f64,
    pub lambda_dims: EffectiveDims,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Report {
    pub n: usize,
    pub k: usize,
    pub summaries: Vec<Figure1Summary>,
    pub points: Vec<Figure1Point>,
    pub curves: Vec<Figure1Curve>,
}

/// Tolerance for "SVM equals the interpolator".
pub const COINCIDE_TOL: f64 = 1e-6;

/// `t -> sum_j sqrt(lambda_j) phi_j(t) w_j` on `points` equispaced inputs.
fn decision_curve(k: usize, lambda: &[f64], w: &[f64], ts: &[f64]) -> Vec<f64> {
    let sw: Vec<f64> = lambda.iter().zip(w).map(|(l, w)| l.sqrt() * w).collect();
    ts.iter()
        .map(|&t| numeric::dot(&ensembles::trig_row(t, k), &sw))
        .collect()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn figure1_task(
    cfg: &Figure1Config,
    c: usize,
    decay: f64,
    s: u64,
) -> (Figure1Point, Option<Figure1Curve>) {
    let seed = SeedRecord::new(cfg.seed, c as u64, s);
    let lambda_dims = svprolif_core::spectra::trig_spectrum(cfg.k, decay)
        .expect("validated decay")
        .effective_dims();
    let mut point = Figure1Point {
        decay,
        seed: s,
        n_sv: 0,
        all_sv: false,
        rel_gap: None,
        coincide: false,
        lambda_dims,
        gram_dims: EffectiveDims::from_weights(&[]),
        gram_singular: false,
        error: None,
    };
    let model = cfg.labels.model(cfg.n, 2 * cfg.k + 1, seed);
    let fit = ensembles::trig_dataset(cfg.n, cfg.k, decay, &model, seed).and_then(|ds| {
        let gf = kernel::gram_of(&ds)?;
        let sol = svm::solve_dual(&ds, &gf, &cfg.solver)?;
        Ok((ds, gf, sol))
    });
    let (ds, gf, sol): (Dataset, GramFactor, _) = match fit {
        Ok(x) => x,
        Err(e) => {
            point.error = Some(e.to_string());
            return (point, None);
        }
    };
    point.n_sv = sol.support.len();
    point.all_sv = sol.all_support_vectors();
    point.gram_dims = gf.gram_effective_dims();
    point.gram_singular = gf.is_singular();
    let interp = equivalence::ridgeless(&ds, &gf).ok();
    if let Some(r) = &interp {
        let diff: Vec<f64> = sol.w_star.iter().zip(&r.w).map(|(a, b)| a - b).collect();
        let gap = numeric::norm2(&diff) / numeric::norm2(&r.w);
        point.rel_gap = Some(gap);
        point.coincide = point.all_sv && gap <= COINCIDE_TOL;
    }
    let curve = ((s as usize) < cfg.curve_seeds).then(|| {
        let ts: Vec<f64> = (0..cfg.curve_points)
            .map(|i| std::f64::consts::TAU * i as f64 / cfg.curve_points as f64)
            .collect();
        let lambda = ds.spectrum().lambda();
        Figure1Curve {
            decay,
            seed: s,
            svm: decision_curve(cfg.k, lambda, &sol.w_star, &ts),
            interp: interp.as_ref().map(|r| decision_curve(cfg.k, lambda, &r.w, &ts)),
            t: ts,
            train_t: ds.features().inputs().unwrap_or_default().to_vec(),
            train_y: ds.y().to_vec(),
        }
    });
    (point, curve)
}

/// SVM against the minimum-norm interpolator on trigonometric features for
/// each decay.
pub fn figure1_repro(cfg: &Figure1Config) -> ConfigResult<Figure1Report> {
    cfg.validate()?;
    let tasks: Vec<(usize, f64, u64)> = cfg
        .decays
        .iter()
        .enumerate()
        .flat_map(|(c, &decay)| (0..cfg.seeds as u64).map(move |s| (c, decay, s)))
        .collect();
    let out = par_map(cfg.workers, tasks, |(c, decay, s)| figure1_task(cfg, c, decay, s));
    let mut points = Vec::with_capacity(out.len());
    let mut curves = Vec::new();
    for (p, c) in out {
        points.push(p);
        curves.extend(c);
    }
    let summaries = cfg
        .decays
        .iter()
        .enumerate()
        .map(|(c, &decay)| {
            let pts = &points[c * cfg.seeds..(c + 1) * cfg.seeds];
            let m = pts.len() as f64;
            let mut sv: Vec<f64> = pts.iter().map(|p| p.n_sv as f64).collect();
            Figure1Summary {
                decay,
                seeds: cfg.seeds,
                coincide_fraction: pts.iter().filter(|p| p.coincide).count() as f64 / m,
                all_sv_fraction: pts.iter().filter(|p| p.all_sv).count() as f64 / m,
                median_sv: median(&mut sv),
                lambda_dims: pts[0].lambda_dims,
                errors: pts.iter().filter(|p| p.error.is_some()).count(),
            }
        })
        .collect();
    Ok(Figure1Report {
        n: cfg.n,
        k: cfg.k,
        summaries,
        points,
        curves,
    })
}

/// Gnuplot script for the curve files written by the CLI.
pub fn figure1_gnuplot(report: &Figure1Report) -> String {
    let mut s = String::new();
    s.push_str("# Decision functions of the SVM and the minimum-norm interpolator.\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key top right\nset xrange [0:2*pi]\nset xlabel 't'\n");
    let panels = report.curves.len().max(1);
    s.push_str("set terminal pngcairo size 1200,450\nset output 'figure1.png'\n");
    s.push_str(&format!("set multiplot layout 1,{panels}\n"));
    for c in &report.curves {
        let tag = format!("decay{}_seed{}", c.decay, c.seed);
        s.push_str(&format!("set title 'decay {} (seed {})'\n", c.decay, c.seed));
        s.push_str(&format!(
            "plot 'figure1_curve_{tag}.csv' using 2:3 every ::1 with lines title 'SVM', \\\n"
        ));
        if c.interp.is_some() {
            s.push_str(&format!(
                "     'figure1_curve_{tag}.csv' using 2:4 every ::1 with lines dashtype 2 title 'interpolator', \\\n"
            ));
        }
        s.push_str(&format!(
            "     'figure1_train_{tag}.csv' using 1:2 every ::1 with points pt 7 title 'training'\n"
        ));
    }
    s.push_str("unset multiplot\n");
    s
}
