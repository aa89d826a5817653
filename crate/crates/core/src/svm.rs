//! Hard-margin homogeneous SVM through its sign-constrained dual
//!
//! ```text
//! max_beta  y^T beta - 1/2 beta^T K beta   s.t.  y_i beta_i >= 0,
//! ```
//!
//! whose solution gives `w* = sum_i beta_i x_i`. Example `i` is a support
//! vector iff `beta_i != 0`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ensembles::Dataset;
use crate::kernel::GramFactor;
use crate::linalg::{self, Cholesky, Matrix};
use crate::numeric;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// KKT tolerance relative to the magnitude of the terms of the gradient
    /// `y - K beta`.
    pub tol_kkt: f64,
    pub max_sweeps: usize,
    /// Support-vector threshold relative to `max_j |beta_j|`.
    pub tol_sv: f64,
    /// Attempt an exact solve on the current support every this many sweeps.
    pub polish_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_kkt: 1e-10,
            max_sweeps: 100_000,
            tol_sv: 1e-6,
            polish_every: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sweeps: usize,
    pub max_kkt_violation: f64,
    pub kkt_threshold: f64,
    pub converged: bool,
    pub separable: bool,
    pub objective: f64,
    /// Dual objective never decreased between sweeps.
    pub objective_monotone: bool,
    pub polish_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    pub indices: Vec<usize>,
    /// Indices whose `|beta_i| / max|beta|` lies in `[tol/10, 10 tol]`.
    pub boundary_count: usize,
}

impl SupportSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSolution {
    pub beta_star: Vec<f64>,
    pub w_star: Vec<f64>,
    /// `1 / ||w*||_2`.
    pub gamma_star: f64,
    pub support: SupportSet,
    pub diagnostics: Diagnostics,
}

impl SvmSolution {
    pub fn all_support_vectors(&self) -> bool {
        self.support.len() == self.beta_star.len()
    }

    pub fn sv_fraction(&self) -> f64 {
        self.support.len() as f64 / self.beta_star.len() as f64
    }

    /// Functional margins `y_i x_i^T w*`.
    pub fn functional_margins(&self, ds: &Dataset) -> Vec<f64> {
        ds.features()
            .project(&self.w_star)
            .into_iter()
            .zip(ds.y())
            .map(|(t, y)| t * y)
            .collect()
    }

    pub fn dual_objective(&self, gf: &GramFactor, y: &[f64]) -> f64 {
        dual_objective(gf.matrix(), y, &self.beta_star)
    }
}

/// `{i : |beta_i| > tol_sv * max_j |beta_j|}` plus the ambiguity count.
pub fn support_vectors(beta: &[f64], tol_sv: f64) -> SupportSet {
    let max = numeric::max_abs(beta);
    if max == 0.0 {
        return SupportSet {
            indices: Vec::new(),
            boundary_count: 0,
        };
    }
    let indices = (0..beta.len())
        .filter(|&i| beta[i].abs() > tol_sv * max)
        .collect();
    let boundary_count = beta
        .iter()
        .map(|b| b.abs() / max)
        .filter(|&r| r >= 0.1 * tol_sv && r <= 10.0 * tol_sv)
        .count();
    SupportSet {
        indices,
        boundary_count,
    }
}

pub fn dual_objective(k: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    let kb = k.mul_vec(beta);
    numeric::dot(y, beta) - 0.5 * numeric::dot(beta, &kb)
}

fn clip_to_sign(v: f64, y: f64) -> f64 {
    if y > 0.0 {
        v.max(0.0)
    } else {
        v.min(0.0)
    }
}

/// Maximum projected-gradient KKT residual and the scale it is judged
/// against.
fn kkt_violation(k: &Matrix, y: &[f64], beta: &[f64]) -> (f64, f64) {
    let mut worst: f64 = 0.0;
    let mut scale = numeric::max_abs(y);
    for i in 0..y.len() {
        let row = k.row(i);
        let mut acc = numeric::CompensatedSum::new();
        let mut mag = 0.0;
        acc.add(y[i]);
        for (kij, bj) in row.iter().zip(beta) {
            acc.add(-kij * bj);
            mag += (kij * bj).abs();
        }
        scale = scale.max(mag);
        let g = acc.value();
        let v = if beta[i] != 0.0 { g.abs() } else { (y[i] * g).max(0.0) };
        worst = worst.max(v);
    }
    (worst, scale)
}

/// Active-set step on the current support.
///
/// Solves the unconstrained dual restricted to the support. If that breaks a
/// sign, moves towards it until the first coordinate reaches zero, drops that
/// coordinate and repeats. The objective never decreases along the way since
/// it is concave and the restricted maximiser lies at the end of each segment.
fn polish(k: &Matrix, y: &[f64], beta: &[f64]) -> Option<Vec<f64>> {
    let mut cur = beta.to_vec();
    let mut moved = false;
    loop {
        let support: Vec<usize> = (0..cur.len()).filter(|&i| cur[i] != 0.0).collect();
        if support.is_empty() {
            return moved.then_some(cur);
        }
        let sub = k.principal(&support);
        let chol = match Cholesky::factor(&sub) {
            Ok(c) if !c.is_numerically_singular() => c,
            _ => return moved.then_some(cur),
        };
        let rhs: Vec<f64> = support.iter().map(|&i| y[i]).collect();
        let sol = chol.solve_refined(&sub, &rhs);
        let mut step = f64::INFINITY;
        let mut blocking = None;
        for (&i, &b) in support.iter().zip(&sol) {
            if !(y[i] * b > 0.0) {
                let t = cur[i] / (cur[i] - b);
                if blocking.is_none() || t < step {
                    step = t;
                    blocking = Some(i);
                }
            }
        }
        if step.is_nan() || sol.iter().any(|b| !b.is_finite()) {
            return moved.then_some(cur);
        }
        let step = step.clamp(0.0, 1.0);
        match blocking {
            None => {
                for (&i, &b) in support.iter().zip(&sol) {
                    cur[i] = b;
                }
                return Some(cur);
            }
            Some(j) => {
                for (&i, &b) in support.iter().zip(&sol) {
                    let v = cur[i] + step * (b - cur[i]);
                    cur[i] = if y[i] * v > 0.0 { v } else { 0.0 };
                }
                cur[j] = 0.0;
                moved = true;
            }
        }
    }
}

/// Relative ridge used to pick the minimum-norm optimal dual vector.
const MIN_NORM_RIDGE: f64 = 1e-12;

/// With singular `K` the optimal `beta` is not unique: any vector with the
/// same `K beta` is optimal if sign-feasible. Returns the one orthogonal to
/// the null space of `K`, `lim_{mu -> 0} (K + mu I)^{-1} K beta`, when it keeps
/// the signs and the KKT conditions.
fn min_norm_representative(k: &Matrix, y: &[f64], beta: &[f64], tol_kkt: f64) -> Option<Vec<f64>> {
    let n = k.rows();
    let mu = MIN_NORM_RIDGE * k.trace() / n as f64;
    let mut shifted = k.clone();
    for i in 0..n {
        shifted.row_mut(i)[i] += mu;
    }
    let chol = Cholesky::factor(&shifted).ok()?;
    let kb = k.mul_vec(beta);
    let mut cand = chol.solve_refined(&shifted, &kb);
    let scale = numeric::max_abs(&cand);
    for (b, yi) in cand.iter_mut().zip(y) {
        if yi * *b < 0.0 {
            if -yi * *b > 1e-9 * scale {
                return None;
            }
            *b = 0.0;
        }
    }
    let (viol, kkt_scale) = kkt_violation(k, y, &cand);
    (viol <= tol_kkt * kkt_scale).then_some(cand)
}

const TREND_WINDOW: usize = 1000;

/// Cyclic exact coordinate ascent on the dual, given the Gram matrix.
///
/// Each coordinate step sets `beta_i` to the clipped maximiser
/// `(y_i - sum_{j != i} K_ij beta_j) / K_ii`. Every `polish_every` sweeps the
/// unconstrained problem on the current support is solved exactly and the
/// result adopted when sign-feasible (it can only raise the objective).
///
/// `NotSeparable` is reported only for singular `K`: a non-singular Gram
/// matrix always admits an interpolating, hence separating, `w`.
pub fn dual_coordinate_ascent(
    gf: &GramFactor,
    y: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Diagnostics)> {
    let k = gf.matrix();
    let n = k.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "labels vs. Gram order",
            expected: n,
            got: y.len(),
        });
    }
    if let Some(i) = (0..n).find(|&i| !(k[(i, i)] > 0.0)) {
        return Err(Error::SingularCoordinate { index: i });
    }
    let diverge_guard = 1.0 / opts.tol_kkt;
    let mut beta = vec![0.0; n];
    let mut kb = vec![0.0; n];
    let mut objective: f64 = 0.0;
    let mut monotone = true;
    let mut polish_steps = 0;
    let mut window_start = 0.0;
    let mut window_gains: Vec<f64> = Vec::new();
    let mut last = (f64::INFINITY, 0.0);

    for sweep in 1..=opts.max_sweeps {
        for i in 0..n {
            let target = beta[i] + (y[i] - kb[i]) / k[(i, i)];
            let new = clip_to_sign(target, y[i]);
            let delta = new - beta[i];
            if delta != 0.0 {
                beta[i] = new;
                kb.iter_mut()
                    .zip(k.row(i))
                    .for_each(|(acc, kij)| *acc += delta * kij);
            }
        }
        if opts.polish_every > 0 && sweep % opts.polish_every == 0 {
            if let Some(p) = polish(k, y, &beta) {
                if dual_objective(k, y, &p) >= dual_objective(k, y, &beta) {
                    beta = p;
                    polish_steps += 1;
                }
            }
        }
        kb = k.mul_vec(&beta);
        let obj = numeric::dot(y, &beta) - 0.5 * numeric::dot(&beta, &kb);
        if obj < objective - 1e-12 * objective.abs().max(1.0) {
            monotone = false;
        }
        objective = obj;
        if gf.is_singular() && objective > diverge_guard {
            return Err(Error::NotSeparable);
        }
        let (viol, scale) = kkt_violation(k, y, &beta);
        last = (viol, scale);
        if viol <= opts.tol_kkt * scale {
            if gf.is_singular() {
                if let Some(b) = min_norm_representative(k, y, &beta, opts.tol_kkt) {
                    beta = b;
                }
            }
            return Ok((
                beta,
                Diagnostics {
                    sweeps: sweep,
                    max_kkt_violation: viol,
                    kkt_threshold: opts.tol_kkt * scale,
                    converged: true,
                    separable: true,
                    objective,
                    objective_monotone: monotone,
                    polish_steps,
                },
            ));
        }
        if gf.is_singular() && sweep % TREND_WINDOW == 0 {
            window_gains.push(objective - window_start);
            window_start = objective;
            if diverging(&window_gains, objective, k, y, &beta) {
                return Err(Error::NotSeparable);
            }
        }
    }
    if gf.is_singular() && diverging(&window_gains, objective, k, y, &beta) {
        return Err(Error::NotSeparable);
    }
    Ok((
        beta,
        Diagnostics {
            sweeps: opts.max_sweeps,
            max_kkt_violation: last.0,
            kkt_threshold: opts.tol_kkt * last.1,
            converged: false,
            separable: true,
            objective,
            objective_monotone: monotone,
            polish_steps,
        },
    ))
}

/// Largest `beta^T K beta / y^T beta` still read as divergence. Every dual
/// optimum has ratio 1; an unbounded ascent along `ker K` drives it to 0.
const DIVERGENCE_RATIO: f64 = 1e-2;

/// Linear (non-decaying) objective growth over the last three windows, with
/// the iterate escaping along the null space of `K`.
fn diverging(gains: &[f64], objective: f64, k: &Matrix, y: &[f64], beta: &[f64]) -> bool {
    if gains.len() < 4 {
        return false;
    }
    let g = &gains[gains.len() - 3..];
    let floor = 1e-9 * objective.abs().max(1.0);
    let linear = g.iter().all(|&x| x > floor) && g[1] >= 0.9 * g[0] && g[2] >= 0.9 * g[1];
    linear && {
        let quad = numeric::dot(beta, &k.mul_vec(beta));
        quad <= DIVERGENCE_RATIO * numeric::dot(y, beta)
    }
}

fn assemble(ds: &Dataset, beta: Vec<f64>, diagnostics: Diagnostics, tol_sv: f64) -> SvmSolution {
    let w_star = ds.combine_rows(&beta);
    let wn = numeric::norm2(&w_star);
    let support = support_vectors(&beta, tol_sv);
    SvmSolution {
        beta_star: beta,
        w_star,
        gamma_star: if wn > 0.0 { 1.0 / wn } else { f64::INFINITY },
        support,
        diagnostics,
    }
}

fn check_sizes(ds: &Dataset, gf: &GramFactor) -> Result<()> {
    if ds.n() != gf.n() {
        return Err(Error::DimensionMismatch {
            what: "dataset size vs. Gram order",
            expected: gf.n(),
            got: ds.n(),
        });
    }
    Ok(())
}

/// Solves the hard-margin SVM for `ds` by dual coordinate ascent.
pub fn solve_dual(ds: &Dataset, gf: &GramFactor, opts: &SolverOptions) -> Result<SvmSolution> {
    check_sizes(ds, gf)?;
    let (beta, diag) = dual_coordinate_ascent(gf, ds.y(), opts)?;
    Ok(assemble(ds, beta, diag, opts.tol_sv))
}

/// Largest `n` accepted by [`solve_exact_smalln`].
pub const EXACT_MAX_N: usize = 12;

/// Reference solver: tries every active set `A`, solves `K_AA beta_A = y_A`
/// and returns the first candidate (fewest active indices first) satisfying
/// dual sign feasibility and primal feasibility `y_i x_i^T w >= 1`.
pub fn solve_exact_smalln(ds: &Dataset, gf: &GramFactor, tol_sv: f64) -> Result<SvmSolution> {
    check_sizes(ds, gf)?;
    let n = ds.n();
    if n > EXACT_MAX_N {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("active-set enumeration limited to n <= {EXACT_MAX_N}, got {n}"),
        });
    }
    let k = gf.matrix();
    let y = ds.y();
    const TOL: f64 = 1e-9;

    let mut subsets: Vec<u32> = (1..(1u32 << n)).collect();
    subsets.sort_by_key(|m| (m.count_ones(), *m));
    for (tried, mask) in subsets.into_iter().enumerate() {
        let active: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub = k.principal(&active);
        let Ok(chol) = Cholesky::factor(&sub) else { continue };
        if chol.is_numerically_singular() {
            continue;
        }
        let rhs: Vec<f64> = active.iter().map(|&i| y[i]).collect();
        let sol = chol.solve_refined(&sub, &rhs);
        let scale = numeric::max_abs(&sol);
        if active.iter().zip(&sol).any(|(&i, &b)| y[i] * b < -TOL * scale) {
            continue;
        }
        let mut beta = vec![0.0; n];
        for (&i, &b) in active.iter().zip(&sol) {
            beta[i] = b;
        }
        let kb = k.mul_vec(&beta);
        if (0..n).any(|i| y[i] * kb[i] < 1.0 - TOL) {
            continue;
        }
        if gf.is_singular() {
            if let Some(b) = min_norm_representative(k, y, &beta, TOL) {
                beta = b;
            }
        }
        let (viol, scale) = kkt_violation(k, y, &beta);
        let diag = Diagnostics {
            sweeps: tried + 1,
            max_kkt_violation: viol,
            kkt_threshold: TOL * scale,
            converged: true,
            separable: true,
            objective: dual_objective(k, y, &beta),
            objective_monotone: true,
            polish_steps: 0,
        };
        return Ok(assemble(ds, beta, diag, tol_sv));
    }
    Err(Error::NotSeparable)
}

/// Quantities of the margin-based generalisation bound under proliferation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginAudit {
    pub wnorm_sq: f64,
    pub y_k_inv_y: f64,
    pub opnorm: f64,
    /// `n / ||K||_op`.
    pub lower_bound_n_over_opnorm: f64,
    /// `n / (2 ||lambda||_1)`.
    pub half_trace_bound: f64,
    /// `(||w*||^2 / n) * ||lambda||_1`.
    pub bound_value: f64,
    pub equality_holds: bool,
    pub rayleigh_holds: bool,
    /// `||K||_op <= 2 ||lambda||_1`.
    pub opnorm_event: bool,
    /// `opnorm_event => bound_value >= 1/2`.
    pub implication_holds: bool,
}

/// Relative tolerance used by the audit's comparisons.
pub const AUDIT_TOL: f64 = 1e-8;

/// Evaluates `||w*||^2 = y^T K^{-1} y >= n / ||K||_op >= n / (2||lambda||_1)`
/// for a solution in which every example is a support vector.
pub fn margin_audit(ds: &Dataset, sol: &SvmSolution, gf: &GramFactor) -> Result<MarginAudit> {
    check_sizes(ds, gf)?;
    let n = ds.n();
    if !sol.all_support_vectors() {
        return Err(Error::PreconditionViolated(format!(
            "margin audit needs every example to be a support vector ({} of {n})",
            sol.support.len()
        )));
    }
    let y = ds.y();
    let beta = gf.solve(y)?;
    let y_k_inv_y = numeric::dot(y, &beta);
    let wnorm_sq = numeric::dot(&sol.w_star, &sol.w_star);
    let opnorm = gf.opnorm();
    let l1 = ds.spectrum().l1();
    let nf = n as f64;
    let lower = nf / opnorm;
    let bound_value = wnorm_sq / nf * l1;
    let opnorm_event = opnorm <= 2.0 * l1;
    Ok(MarginAudit {
        wnorm_sq,
        y_k_inv_y,
        opnorm,
        lower_bound_n_over_opnorm: lower,
        half_trace_bound: nf / (2.0 * l1),
        bound_value,
        equality_holds: (wnorm_sq - y_k_inv_y).abs() <= AUDIT_TOL * y_k_inv_y,
        rayleigh_holds: y_k_inv_y >= lower * (1.0 - AUDIT_TOL),
        opnorm_event,
        implication_holds: !opnorm_event || bound_value >= 0.5 * (1.0 - AUDIT_TOL),
    })
}

/// `||K beta - y||_2 / ||y||_2` for a dual vector.
pub fn interpolation_residual(gf: &GramFactor, y: &[f64], beta: &[f64]) -> f64 {
    numeric::norm2(&linalg::residual(gf.matrix(), beta, y)) / numeric::norm2(y)
}
