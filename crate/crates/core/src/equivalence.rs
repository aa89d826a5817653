//! Support-vector proliferation versus the minimum-norm interpolator.
//!
//! For linearly independent examples the following are equivalent:
//!
//! 1. every example is a support vector of the hard-margin SVM;
//! 2. `y_i beta_i > 0` for every `i`, with `beta = K^{-1} y`;
//! 3. `h_i < 1` for every `i`, where `h_i = y_i x_i^T w_{\i}` and `w_{\i}` is
//!    the interpolator fitted without example `i`.
//!
//! Conditions 2 and 3 are tied index by index through
//! `y_i beta_i = (K^{-1})_ii (1 - h_i)`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ensembles::Dataset;
use crate::kernel::GramFactor;
use crate::{linalg, numeric};
use crate::svm::{self, SolverOptions, SvmSolution};
use crate::{Error, Result};

/// Minimum-norm interpolator `w = X^T K^{-1} y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridgeless {
    pub beta: Vec<f64>,
    pub w: Vec<f64>,
}

pub fn ridgeless(ds: &Dataset, gf: &GramFactor) -> Result<Ridgeless> {
    let beta = gf.solve(ds.y())?;
    let w = ds.combine_rows(&beta);
    Ok(Ridgeless { beta, w })
}

/// Leave-one-out statistics obtained from a single factorisation of `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooStatistics {
    /// `h_i = 1 - y_i beta_i / (K^{-1})_ii`.
    pub h: Vec<f64>,
    pub inverse_diagonal: Vec<f64>,
    /// Schur complements `s_i = K_ii - a_i^T K_{\i}^{-1} a_i = 1 / (K^{-1})_ii`.
    pub schur: Vec<f64>,
    pub y_beta: Vec<f64>,
}

/// Leave-one-out statistics through the inverse diagonal of `K`.
///
/// By interlacing, every `K_{\i}` is positive definite whenever `K` is, so
/// a non-singular `K` needs no further checks.
pub fn loo_statistics(ds: &Dataset, gf: &GramFactor) -> Result<LooStatistics> {
    let rl = ridgeless(ds, gf)?;
    let inverse_diagonal = gf.inverse_diagonal()?;
    let y = ds.y();
    let y_beta: Vec<f64> = y.iter().zip(&rl.beta).map(|(y, b)| y * b).collect();
    let h = if ds.n() == 1 {
        alloc::vec![0.0]
    } else {
        y_beta
            .iter()
            .zip(&inverse_diagonal)
            .map(|(yb, q)| 1.0 - yb / q)
            .collect()
    };
    let schur = inverse_diagonal.iter().map(|q| 1.0 / q).collect();
    Ok(LooStatistics {
        h,
        inverse_diagonal,
        schur,
        y_beta,
    })
}

/// `h_i` computed by refitting without example `i`:
/// `h_i = y_i a_i^T K_{\i}^{-1} y_{\i}` with `a_i` column `i` of `K` minus
/// its diagonal entry. `h_i = 0` when `n = 1`.
pub fn loo_direct(ds: &Dataset, gf: &GramFactor, i: usize) -> Result<f64> {
    let n = ds.n();
    if i >= n {
        return Err(Error::InvalidParameter {
            name: "i",
            reason: format!("index {i} out of range for n = {n}"),
        });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let sub = gf.leave_one_out(i)?;
    let keep = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &x)| x)
            .collect()
    };
    let y_rest = keep(ds.y());
    let a = keep(gf.matrix().row(i));
    let coef = sub
        .solve(&y_rest)
        .map_err(|_| Error::SingularLeaveOneOut { index: i })?;
    // `coef` can be large enough that its own rounding dominates `a^T coef`;
    // one more correction, kept separate, restores the lost digits.
    let r = linalg::residual(sub.matrix(), &coef, &y_rest);
    let lo = sub
        .solve(&r)
        .map_err(|_| Error::SingularLeaveOneOut { index: i })?;
    Ok(ds.y()[i] * (numeric::dot2(&a, &coef) + numeric::dot(&a, &lo)))
}

/// Every `h_i` by direct refitting, one factorisation per index.
pub fn loo_direct_all(ds: &Dataset, gf: &GramFactor) -> Result<Vec<f64>> {
    (0..ds.n()).map(|i| loo_direct(ds, gf, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceOptions {
    pub solver: SolverOptions,
    /// Also solve the SVM and evaluate condition 1.
    pub run_solver: bool,
    /// Relative width of the band in which a verdict counts as ambiguous.
    /// Widened to `AMB_COND_FACTOR * cond(K) * eps` on ill-conditioned Grams.
    pub tol_amb: f64,
    /// Refit for each `h_i` instead of using the inverse diagonal.
    pub direct_loo: bool,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            run_solver: true,
            tol_amb: 1e-9,
            direct_loo: false,
        }
    }
}

/// Multiplier on `cond(K) * eps` for the ambiguity band.
pub const AMB_COND_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    /// Condition 1: every example is a support vector (solver runs only).
    pub cond1_all_sv: Option<bool>,
    /// Condition 2: every `y_i beta_i > 0`.
    pub cond2_all_positive: bool,
    /// Condition 3: every `h_i < 1`.
    pub cond3_all_below_one: bool,
}

impl Verdicts {
    pub fn consistent(&self) -> bool {
        self.cond2_all_positive == self.cond3_all_below_one
            && self.cond1_all_sv.map_or(true, |c| c == self.cond2_all_positive)
    }

    /// The common verdict, taken from condition 2.
    pub fn proliferation(&self) -> bool {
        self.cond2_all_positive
    }
}

/// Verdicts of the three conditions on one dataset, with per-index data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `K^{-1} y`.
    pub beta: Vec<f64>,
    /// `y_i beta_i`.
    pub signed_margins: Vec<f64>,
    /// `h_i`.
    pub loo_stats: Vec<f64>,
    /// `s_i = 1 / (K^{-1})_ii`.
    pub schur: Vec<f64>,
    pub verdicts: Verdicts,
    /// Indices whose verdict sits inside the tolerance band.
    pub ambiguous: Vec<usize>,
    /// `max_i |y_i beta_i s_i - (1 - h_i)| / max(1, |h_i|)`.
    pub identity_residual: f64,
    pub condition_number: f64,
    /// Relative ambiguity band actually used.
    pub band: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_indices: Option<Vec<usize>>,
    /// `||beta* - K^{-1} y||_inf / ||K^{-1} y||_inf` when every example is a
    /// support vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svm_interpolator_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SvmSolution>,
}

impl EquivalenceReport {
    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn is_ambiguous(&self) -> bool {
        !self.ambiguous.is_empty()
    }

    pub fn min_signed_margin(&self) -> f64 {
        self.signed_margins.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_loo(&self) -> f64 {
        self.loo_stats.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates conditions 2 and 3 (and 1 when `run_solver`) and cross-checks
/// them.
///
/// Returns `Inconsistent` when verdicts disagree outside the ambiguity band.
/// Requires a non-singular Gram matrix.
pub fn check_equivalence(
    ds: &Dataset,
    gf: &GramFactor,
    opts: &EquivalenceOptions,
) -> Result<EquivalenceReport> {
    let n = ds.n();
    let y = ds.y();
    let stats = loo_statistics(ds, gf)?;
    let h = if opts.direct_loo {
        loo_direct_all(ds, gf)?
    } else {
        stats.h.clone()
    };
    let sol = if opts.run_solver {
        Some(svm::solve_dual(ds, gf, &opts.solver)?)
    } else {
        None
    };
    let beta: Vec<f64> = stats.y_beta.iter().zip(y).map(|(yb, y)| yb * y).collect();

    let identity_residual = (0..n)
        .map(|i| {
            let lhs = stats.y_beta[i] * stats.schur[i];
            (lhs - (1.0 - h[i])).abs() / h[i].abs().max(1.0)
        })
        .fold(0.0, f64::max);

    let condition_number = gf.condition_number();
    let band = opts
        .tol_amb
        .max(AMB_COND_FACTOR * condition_number * f64::EPSILON);
    let beta_scale = numeric::max_abs(&stats.y_beta);
    let tol_sv = opts.solver.tol_sv;
    let ambiguous: Vec<usize> = (0..n)
        .filter(|&i| {
            let in_sv_band = sol.as_ref().is_some_and(|s| {
                let scale = numeric::max_abs(&s.beta_star);
                let r = if scale > 0.0 { s.beta_star[i].abs() / scale } else { 0.0 };
                (0.1 * tol_sv..=10.0 * tol_sv).contains(&r)
            });
            stats.y_beta[i].abs() <= band * beta_scale
                || (h[i] - 1.0).abs() <= band * h[i].abs().max(1.0)
                || in_sv_band
        })
        .collect();

    let verdicts = Verdicts {
        cond1_all_sv: sol.as_ref().map(SvmSolution::all_support_vectors),
        cond2_all_positive: stats.y_beta.iter().all(|&v| v > 0.0),
        cond3_all_below_one: h.iter().all(|&v| v < 1.0),
    };
    let pointwise_mismatch = (0..n).find(|&i| (stats.y_beta[i] > 0.0) != (h[i] < 1.0));

    let svm_interpolator_gap = sol.as_ref().filter(|s| s.all_support_vectors()).map(|s| {
        let diff: Vec<f64> = s.beta_star.iter().zip(&beta).map(|(a, b)| a - b).collect();
        numeric::max_abs(&diff) / numeric::max_abs(&beta)
    });

    let report = EquivalenceReport {
        beta,
        signed_margins: stats.y_beta,
        loo_stats: h,
        schur: stats.schur,
        verdicts,
        ambiguous,
        identity_residual,
        condition_number,
        band,
        support_indices: sol.as_ref().map(|s| s.support.indices.clone()),
        svm_interpolator_gap,
        solution: sol,
    };
    if report.is_ambiguous() {
        return Ok(report);
    }
    if let Some(i) = pointwise_mismatch {
        return Err(Error::Inconsistent(format!(
            "index {i}: y_i beta_i = {:e} but h_i = {:e}",
            report.signed_margins[i], report.loo_stats[i]
        )));
    }
    if !report.verdicts.consistent() {
        let v = report.verdicts;
        return Err(Error::Inconsistent(format!(
            "all support vectors = {:?}, all y_i beta_i > 0 = {}, all h_i < 1 = {}",
            v.cond1_all_sv, v.cond2_all_positive, v.cond3_all_below_one
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_haar, sample_independent, EntryLaw, Features, SeedRecord};
    use crate::kernel::gram;
    use crate::linalg::Matrix;
    use crate::spectra::Spectrum;
    use alloc::vec;

    fn explicit(rows: &[&[f64]], y: &[f64]) -> (Dataset, GramFactor) {
        let z = Matrix::from_rows(rows).unwrap();
        let f = Features::explicit(z.clone(), Spectrum::isotropic(z.cols()).unwrap()).unwrap();
        let gf = gram(&f).unwrap();
        (Dataset::new(f, y.to_vec()).unwrap(), gf)
    }

    fn all_true() -> Verdicts {
        Verdicts {
            cond1_all_sv: Some(true),
            cond2_all_positive: true,
            cond3_all_below_one: true,
        }
    }

    #[test]
    fn two_by_two_reference() {
        // Rows with Gram [[2, 1], [1, 2]].
        let s3 = 3.0f64.sqrt();
        let r = 1.0 / 2.0f64.sqrt();
        let (ds, gf) = explicit(&[&[2.0 * r, 0.0], &[r, r * s3]], &[1.0, 1.0]);
        let k = gf.matrix();
        assert!((k[(0, 0)] - 2.0).abs() < 1e-14 && (k[(0, 1)] - 1.0).abs() < 1e-14);
        let st = loo_statistics(&ds, &gf).unwrap();
        for i in 0..2 {
            assert!((st.y_beta[i] - 1.0 / 3.0).abs() < 1e-14);
            assert!((st.inverse_diagonal[i] - 2.0 / 3.0).abs() < 1e-14);
            assert!((st.schur[i] - 1.5).abs() < 1e-14);
            assert!((st.h[i] - 0.5).abs() < 1e-14);
            assert!((loo_direct(&ds, &gf, i).unwrap() - 0.5).abs() < 1e-14);
        }
        let rep = check_equivalence(&ds, &gf, &EquivalenceOptions::default()).unwrap();
        assert_eq!(rep.verdicts, all_true());
        assert!(rep.identity_residual < 1e-14);
        assert!(rep.svm_interpolator_gap.unwrap() < 1e-12);
    }

    #[test]
    fn adversarial_pair_fails_every_condition() {
        let (ds, gf) = explicit(&[&[1.0, 0.0], &[3.0, 0.1]], &[1.0, 1.0]);
        let rep = check_equivalence(&ds, &gf, &EquivalenceOptions::default()).unwrap();
        let v = rep.verdicts;
        assert_eq!(v.cond1_all_sv, Some(false));
        assert!(!v.cond2_all_positive && !v.cond3_all_below_one);
        assert_eq!(rep.support_indices, Some(vec![0]));
        assert!(rep.signed_margins[1] < 0.0 && rep.loo_stats[1] > 1.0);
        assert!(rep.ambiguous.is_empty());
        // Cofactor oracle: K = [[1, 3], [3, 9.01]], det = 0.01.
        assert!((rep.beta[0] - (9.01 - 3.0) / 0.01).abs() < 1e-9);
        assert!((rep.beta[1] - (1.0 - 3.0) / 0.01).abs() < 1e-9);
    }

    #[test]
    fn single_example_has_zero_leverage() {
        let (ds, gf) = explicit(&[&[2.0, 0.0]], &[-1.0]);
        assert_eq!(loo_direct(&ds, &gf, 0).unwrap(), 0.0);
        let st = loo_statistics(&ds, &gf).unwrap();
        assert_eq!(st.h, vec![0.0]);
        let rep = check_equivalence(&ds, &gf, &EquivalenceOptions::default()).unwrap();
        assert_eq!(rep.verdicts, all_true());
    }

    #[test]
    fn isotropic_haar_proliferates() {
        let f = sample_haar(6, &Spectrum::isotropic(20).unwrap(), SeedRecord::new(3, 0, 0)).unwrap();
        let gf = gram(&f).unwrap();
        let ds = Dataset::new(f, vec![1.0, -1.0, 1.0, 1.0, -1.0, -1.0]).unwrap();
        let opts = EquivalenceOptions {
            direct_loo: true,
            ..EquivalenceOptions::default()
        };
        let rep = check_equivalence(&ds, &gf, &opts).unwrap();
        assert_eq!(rep.verdicts, all_true());
        for (i, &h) in rep.loo_stats.iter().enumerate() {
            assert!(h.abs() < 1e-12);
            assert!((rep.beta[i] - ds.y()[i] / 20.0).abs() < 1e-15);
        }
    }

    #[test]
    fn direct_and_inverse_diagonal_routes_agree() {
        for trial in 0..20 {
            let seed = SeedRecord::new(11, 0, trial);
            let f = sample_independent(8, &Spectrum::isotropic(10).unwrap(), EntryLaw::Gaussian, seed)
                .unwrap();
            let gf = gram(&f).unwrap();
            let y: Vec<f64> = (0..8).map(|i| if (i + trial) % 3 == 0 { -1.0 } else { 1.0 }).collect();
            let ds = Dataset::new(f, y).unwrap();
            let st = loo_statistics(&ds, &gf).unwrap();
            let direct = loo_direct_all(&ds, &gf).unwrap();
            for (a, b) in st.h.iter().zip(&direct) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn singular_gram_is_reported() {
        let (ds, gf) = explicit(&[&[1.0, 0.0], &[2.0, 0.0]], &[1.0, 1.0]);
        assert_eq!(ridgeless(&ds, &gf).unwrap_err(), Error::SingularGram);
        assert_eq!(
            check_equivalence(&ds, &gf, &EquivalenceOptions::default()).unwrap_err(),
            Error::SingularGram
        );
    }
}
