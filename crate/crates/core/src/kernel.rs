//! Gram matrix `K = Z diag(lambda) Z^T`, its Cholesky factor and spectral
//! diagnostics.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::ensembles::{Dataset, Features};
use crate::linalg::{self, Cholesky, Matrix};
use crate::numeric;
use crate::spectra::EffectiveDims;
use crate::{Error, Result};

/// Largest Gram order handled by the dense routines.
pub const MAX_ORDER: usize = 2000;

/// Gram matrix with its factorisation.
///
/// `singular` is set when the Cholesky factorisation breaks down or its
/// smallest pivot is at most `n * eps` times its largest.
#[derive(Debug, Clone)]
pub struct GramFactor {
    k: Matrix,
    chol: Option<Cholesky>,
    singular: bool,
}

/// Gram matrix of the scaled features, symmetrised and factorised.
pub fn gram(features: &Features) -> Result<GramFactor> {
    let n = features.n();
    if n > MAX_ORDER {
        return Err(Error::TooLarge { n, limit: MAX_ORDER });
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| features.scaled_row(i)).collect();
    let x = Matrix::from_rows(&rows).expect("equal row lengths");
    let mut k = x.mul_transpose(&x);
    k.symmetrize();
    GramFactor::from_matrix(k)
}

/// [`gram`] for a labelled dataset.
pub fn gram_of(ds: &Dataset) -> Result<GramFactor> {
    gram(ds.features())
}

impl GramFactor {
    /// Factorises a caller-supplied symmetric positive semi-definite matrix.
    pub fn from_matrix(k: Matrix) -> Result<Self> {
        let n = k.rows();
        if k.cols() != n {
            return Err(Error::DimensionMismatch {
                what: "Gram matrix must be square",
                expected: n,
                got: k.cols(),
            });
        }
        if n > MAX_ORDER {
            return Err(Error::TooLarge { n, limit: MAX_ORDER });
        }
        let (chol, singular) = match Cholesky::factor(&k) {
            Ok(c) => {
                let s = c.is_numerically_singular();
                (Some(c), s)
            }
            Err(_) => (None, true),
        };
        Ok(Self { k, chol, singular })
    }

    pub fn n(&self) -> usize {
        self.k.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.k
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn cholesky(&self) -> Option<&Cholesky> {
        self.chol.as_ref()
    }

    /// Ratio of largest to smallest Cholesky pivot; infinite on breakdown.
    pub fn pivot_ratio(&self) -> f64 {
        match &self.chol {
            Some(c) => c.max_pivot() / c.min_pivot(),
            None => f64::INFINITY,
        }
    }

    fn factor(&self) -> Result<&Cholesky> {
        match (&self.chol, self.singular) {
            (Some(c), false) => Ok(c),
            _ => Err(Error::SingularGram),
        }
    }

    /// Solves `K x = rhs` with iterative refinement.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "right-hand side vs. Gram order",
                expected: self.n(),
                got: rhs.len(),
            });
        }
        Ok(self.factor()?.solve_refined(&self.k, rhs))
    }

    /// Diagonal of `K^{-1}`, one column solve per entry.
    pub fn inverse_diagonal(&self) -> Result<Vec<f64>> {
        let c = self.factor()?;
        let n = self.n();
        let mut e = alloc::vec![0.0; n];
        Ok((0..n)
            .map(|i| {
                e[i] = 1.0;
                let col = c.solve_refined(&self.k, &e);
                e[i] = 0.0;
                col[i]
            })
            .collect())
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::symmetric_eigenvalues(&self.k)
    }

    pub fn eigmin(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `||K||_op`, the largest eigenvalue.
    pub fn opnorm(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Spectral condition number `mu_max / mu_min`.
    pub fn condition_number(&self) -> f64 {
        let ev = self.eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }

    /// Effective dimensions of the Gram eigenvalues (negative round-off
    /// eigenvalues are clamped to zero).
    pub fn gram_effective_dims(&self) -> EffectiveDims {
        let ev: Vec<f64> = self.eigenvalues().into_iter().map(|m| m.max(0.0)).collect();
        EffectiveDims::from_weights(&ev)
    }

    pub fn trace(&self) -> f64 {
        self.k.trace()
    }

    /// Gram matrix of the data with example `i` removed.
    pub fn leave_one_out(&self, i: usize) -> Result<GramFactor> {
        GramFactor::from_matrix(self.k.without_index(i))
    }

    /// `||K x - rhs||_2 / ||rhs||_2`.
    pub fn relative_residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let r = linalg::residual(&self.k, x, rhs);
        numeric::norm2(&r) / numeric::norm2(rhs)
    }
}
