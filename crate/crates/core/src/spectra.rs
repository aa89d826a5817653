//! The diagonal covariance parameter `lambda` and its effective dimensions.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::numeric::CompensatedSum;
use crate::{Error, Result};

/// Strictly positive weights `lambda_1, ..., lambda_d`.
///
/// Serialises as `{"d": <int>, "lambda": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum", into = "RawSpectrum")]
pub struct Spectrum {
    lambda: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    d: usize,
    lambda: Vec<f64>,
}

impl TryFrom<RawSpectrum> for Spectrum {
    type Error = Error;
    fn try_from(raw: RawSpectrum) -> Result<Self> {
        if raw.d != raw.lambda.len() {
            return Err(Error::InvalidSpectrum(format!(
                "d = {} but lambda has {} entries",
                raw.d,
                raw.lambda.len()
            )));
        }
        Spectrum::new(raw.lambda)
    }
}

impl From<Spectrum> for RawSpectrum {
    fn from(s: Spectrum) -> Self {
        RawSpectrum {
            d: s.lambda.len(),
            lambda: s.lambda,
        }
    }
}

impl Spectrum {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidSpectrum("d must be at least 1".into()));
        }
        if let Some((j, v)) = lambda
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidSpectrum(format!(
                "lambda[{j}] = {v} is not strictly positive and finite"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn isotropic(d: usize) -> Result<Self> {
        Self::new(vec![1.0; d])
    }

    /// Two-level spectrum with `k` spikes carrying total mass `a * d` and
    /// `d - k` flat entries carrying the remaining `(1 - a) * d`.
    pub fn bilevel_from_counts(d: usize, k: usize, a: f64) -> Result<Self> {
        if k == 0 || k >= d {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("need 1 <= k < d, got k = {k}, d = {d}"),
            });
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("spike mass fraction must lie in (0, 1), got {a}"),
            });
        }
        let df = d as f64;
        let spike = a * df / k as f64;
        let flat = (1.0 - a) * df / (d - k) as f64;
        let mut lambda = vec![flat; d];
        lambda[..k].iter_mut().for_each(|v| *v = spike);
        Self::new(lambda)
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `||lambda||_1`.
    pub fn l1(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.extend(descending(&self.lambda));
        acc.value()
    }

    pub fn max(&self) -> f64 {
        self.lambda.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_isotropic(&self) -> bool {
        self.lambda.iter().all(|&v| v == self.lambda[0])
    }

    /// Multiplies every weight by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.lambda.iter().map(|v| v * c).collect())
    }

    pub fn effective_dims(&self) -> EffectiveDims {
        EffectiveDims::from_weights(&self.lambda)
    }
}

fn descending(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    v
}

/// `d2 = ||w||_1^2 / ||w||_2^2` and `d_inf = ||w||_1 / ||w||_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDims {
    pub d: usize,
    pub d2: f64,
    pub d_inf: f64,
}

impl EffectiveDims {
    /// Effective dimensions of a non-negative weight vector. Used for both
    /// `lambda` and Gram eigenvalues; zero entries contribute nothing.
    pub fn from_weights(weights: &[f64]) -> Self {
        let sorted = descending(weights);
        let mut s1 = CompensatedSum::new();
        let mut s2 = CompensatedSum::new();
        for &w in &sorted {
            s1.add(w);
            s2.add(w * w);
        }
        let (l1, l2sq) = (s1.value(), s2.value());
        let max = sorted.first().copied().unwrap_or(0.0);
        let (d2, d_inf) = if max > 0.0 {
            (l1 * l1 / l2sq, l1 / max)
        } else {
            (0.0, 0.0)
        };
        Self {
            d: weights.len(),
            d2,
            d_inf,
        }
    }
}

/// Exponents `(p, q, r)` of the bi-level ensemble: `d = n^p` features,
/// `n^r` spikes and spike mass fraction `n^{-q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRegionPoint {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl RateRegionPoint {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("need p > 1, got {p}"),
            });
        }
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: format!("need q >= 0, got {q}"),
            });
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: format!("need 0 < r < 1, got {r}"),
            });
        }
        Ok(Self { p, q, r })
    }
}

fn floor_pow(n: usize, e: f64) -> usize {
    // Guard against pow landing just below an exact integer.
    let v = (n as f64).powf(e);
    (v * (1.0 + 1e-12)).floor() as usize
}

/// Bi-level spiked spectrum for sample size `n`: `d = floor(n^p)`,
/// `k = floor(n^r)` spikes of height `a d / k` and `d - k` entries of height
/// `(1 - a) d / (d - k)`, where `a = n^{-q}`. The total mass is `d`.
pub fn bilevel_spectrum(pt: RateRegionPoint, n: usize) -> Result<Spectrum> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("bi-level spectrum needs n >= 2, got {n}"),
        });
    }
    let d = floor_pow(n, pt.p);
    let k = floor_pow(n, pt.r);
    if k < 1 || d <= k {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("need 1 <= floor(n^r) < floor(n^p); got k = {k}, d = {d}"),
        });
    }
    let a = (n as f64).powf(-pt.q);
    if a >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: "spike mass n^-q must be below 1 (q = 0 leaves no mass for the flat part)".into(),
        });
    }
    Spectrum::bilevel_from_counts(d, k, a)
}

/// Weights of the trigonometric feature map
/// `t -> (1, sqrt(eta_1) cos t, sqrt(eta_1) sin t, ..., sqrt(eta_k) sin kt)`
/// with `eta_i = i^{-decay}`: `lambda = (1, eta_1, eta_1, ..., eta_k, eta_k)`.
pub fn trig_spectrum(k: usize, decay: f64) -> Result<Spectrum> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "need at least one frequency".into(),
        });
    }
    let mut lambda = Vec::with_capacity(2 * k + 1);
    lambda.push(1.0);
    for i in 1..=k {
        let eta = (i as f64).powf(-decay);
        lambda.push(eta);
        lambda.push(eta);
    }
    Spectrum::new(lambda)
}

/// Absolute tolerance for deciding that a point sits on a region boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `q < 1 - r`: margin-based bounds already certify generalisation.
    BenignMargin,
    /// `1 - r < q < 1 - r + (p - 1)/2`: benign through proliferation.
    BenignProliferation,
    /// `q >= 1 - r + (p - 1)/2`.
    Outside,
    /// Within [`BOUNDARY_TOL`] of `q = 1 - r` or `q = 1 - r + (p - 1)/2`.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionClass {
    pub region: Region,
    /// Benign, but not covered by the earlier region
    /// `{q < 1-r} ∪ {p > 2, 3/2 - r < q < 1 - r + (p-1)/2}`.
    pub prior_work_gap: bool,
}

pub fn rate_region_classify(pt: RateRegionPoint) -> RegionClass {
    let RateRegionPoint { p, q, r } = pt;
    let margin_edge = 1.0 - r;
    let upper_edge = 1.0 - r + (p - 1.0) / 2.0;
    let near = |edge: f64| (q - edge).abs() <= BOUNDARY_TOL;

    let region = if near(margin_edge) || near(upper_edge) {
        Region::Boundary
    } else if q < margin_edge {
        Region::BenignMargin
    } else if q < upper_edge {
        Region::BenignProliferation
    } else {
        Region::Outside
    };

    let in_prior = q < margin_edge - BOUNDARY_TOL
        || (p > 2.0 && q > 1.5 - r + BOUNDARY_TOL && q < upper_edge - BOUNDARY_TOL);
    let prior_work_gap = region == Region::BenignProliferation && !in_prior;
    RegionClass {
        region,
        prior_work_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_dims_equal_d() {
        let e = Spectrum::isotropic(5).unwrap().effective_dims();
        assert_eq!((e.d, e.d2, e.d_inf), (5, 5.0, 5.0));
    }

    #[test]
    fn two_one_one_one() {
        let e = Spectrum::new(vec![2.0, 1.0, 1.0, 1.0]).unwrap().effective_dims();
        assert!((e.d2 - 25.0 / 7.0).abs() < 1e-15);
        assert_eq!(e.d_inf, 2.5);
    }

    #[test]
    fn rejects_non_positive_entries() {
        assert!(Spectrum::new(vec![]).is_err());
        assert!(Spectrum::new(vec![1.0, 0.0]).is_err());
        assert!(Spectrum::new(vec![1.0, -2.0]).is_err());
        assert!(Spectrum::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn bilevel_reference_case() {
        let pt = RateRegionPoint::new(2.0, 0.5, 0.5).unwrap();
        let s = bilevel_spectrum(pt, 100).unwrap();
        assert_eq!(s.dim(), 10_000);
        let lam = s.lambda();
        assert!(lam[..10].iter().all(|&v| (v - 100.0).abs() < 1e-9));
        assert!(lam[10..].iter().all(|&v| (v - 9000.0 / 9990.0).abs() < 1e-12));
        assert!((s.l1() - 10_000.0).abs() < 1e-8);
    }

    #[test]
    fn bilevel_rejects_q_zero() {
        let pt = RateRegionPoint::new(2.0, 0.0, 0.5).unwrap();
        assert!(bilevel_spectrum(pt, 100).is_err());
        assert!(bilevel_spectrum(RateRegionPoint::new(2.0, 0.5, 0.5).unwrap(), 1).is_err());
    }

    #[test]
    fn bilevel_exponents_at_n_100() {
        for &(p, q, r) in &[(2.0, 0.5, 0.5), (2.0, 0.9, 0.3), (1.5, 0.3, 0.6), (2.5, 1.2, 0.4)] {
            let n = 100.0_f64;
            let s = bilevel_spectrum(RateRegionPoint::new(p, q, r).unwrap(), 100).unwrap();
            let e = s.effective_dims();
            let dinf_target = n.powf(q + r);
            let d2_target = n.powf((2.0 * q + r).min(p));
            assert!(e.d_inf / dinf_target < 2.0 && dinf_target / e.d_inf < 2.0, "{p},{q},{r}");
            assert!(e.d2 / d2_target < 4.0 && d2_target / e.d2 < 4.0, "{p},{q},{r}");
        }
    }

    #[test]
    fn trig_small_and_figure_one_cases() {
        assert_eq!(trig_spectrum(1, 1.0).unwrap().lambda(), &[1.0, 1.0, 1.0]);
        // Harmonic-sum oracle: d_inf = 1 + 2 H_k with H_k summed exactly in
        // reverse order.
        let k = 1 << 14;
        let h: f64 = (1..=k).rev().map(|i| 1.0 / i as f64).sum();
        let e = trig_spectrum(k, 1.0).unwrap().effective_dims();
        assert!((e.d_inf - (1.0 + 2.0 * h)).abs() < 1e-11);
        assert!((e.d_inf - 21.5626).abs() < 1e-4);
        let z3: f64 = (1..=k).rev().map(|i| (i as f64).powi(-3)).sum();
        let e3 = trig_spectrum(k, 3.0).unwrap().effective_dims();
        assert!((e3.d_inf - (1.0 + 2.0 * z3)).abs() < 1e-12);
        assert!((e3.d_inf - 3.404).abs() < 1e-3);
    }

    #[test]
    fn classify_examples() {
        let c = |p, q, r| rate_region_classify(RateRegionPoint::new(p, q, r).unwrap());
        assert_eq!(c(3.0, 0.2, 0.5).region, Region::BenignMargin);
        let prolif = c(3.0, 1.2, 0.5);
        assert_eq!(prolif.region, Region::BenignProliferation);
        assert!(!prolif.prior_work_gap);
        assert_eq!(c(1.1, 1.6, 0.5).region, Region::Outside);
        assert_eq!(c(3.0, 0.5, 0.5).region, Region::Boundary);
        assert_eq!(c(3.0, 1.5, 0.5).region, Region::Boundary);
        // Between 1 - r and 3/2 - r the earlier analysis says nothing.
        assert!(c(3.0, 0.8, 0.5).prior_work_gap);
        // With p <= 2 the earlier analysis never applied.
        assert!(c(1.8, 0.7, 0.5).prior_work_gap);
    }

    #[test]
    fn json_form_round_trips_and_validates() {
        let s = Spectrum::new(vec![2.0, 1.0]).unwrap();
        let raw = RawSpectrum::from(s.clone());
        assert_eq!(raw.d, 2);
        assert_eq!(Spectrum::try_from(raw).unwrap(), s);
        assert!(Spectrum::try_from(RawSpectrum { d: 3, lambda: vec![1.0] }).is_err());
    }
}
