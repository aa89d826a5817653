//! Closed-form probability bounds and asymptotic support-vector fractions.
//!
//! The universal constants of the bounds are unspecified, so they are
//! parameters here (`C = c = c' = 1` by default in the command-line tool).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::numeric::{self, normal_cdf};
use crate::spectra::Spectrum;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub name: String,
    /// Clipped to `[0, 1]` for probability bounds.
    pub value: f64,
    /// The formula before clipping.
    pub raw: f64,
    pub clipped: bool,
    pub inputs: BTreeMap<String, f64>,
    /// Maximising index for the spectrum-search bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl BoundValue {
    fn probability(name: &str, raw: f64, inputs: &[(&str, f64)]) -> Self {
        let value = raw.clamp(0.0, 1.0);
        Self {
            name: name.to_string(),
            value,
            raw,
            clipped: value != raw,
            inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            k: None,
            b: None,
        }
    }
}

fn require_positive(pairs: &[(&'static str, f64)]) -> Result<()> {
    for &(name, v) in pairs {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be positive and finite, got {v}"),
            });
        }
    }
    Ok(())
}

/// Lower bound on the probability that every example is a support vector,
/// independent sub-Gaussian features with variance proxy `v`:
///
/// `1 - exp(-c min(d2/v^2, d_inf/v) + C n) - exp(-c d_inf/(v n) + C ln n)`.
pub fn thm1_bound(n: usize, d2: f64, d_inf: f64, v: f64, big_c: f64, c: f64) -> Result<BoundValue> {
    let nf = n as f64;
    require_positive(&[("n", nf), ("d2", d2), ("d_inf", d_inf), ("v", v), ("C", big_c), ("c", c)])?;
    let first = (-c * (d2 / (v * v)).min(d_inf / v) + big_c * nf).exp();
    let second = (-c * d_inf / (v * nf) + big_c * nf.ln()).exp();
    Ok(BoundValue::probability(
        "thm1",
        1.0 - first - second,
        &[("n", nf), ("d2", d2), ("d_inf", d_inf), ("v", v), ("C", big_c), ("c", c)],
    ))
}

/// Same event under Haar features:
///
/// `1 - exp(-c d_inf + C n) - exp(-c ((d-n+1)/d) (d_inf/n) + C ln n)`.
pub fn thm2_bound(n: usize, d: usize, d_inf: f64, big_c: f64, c: f64) -> Result<BoundValue> {
    let (nf, df) = (n as f64, d as f64);
    require_positive(&[("n", nf), ("d_inf", d_inf), ("C", big_c), ("c", c)])?;
    if d < n {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("need d >= n, got d = {d}, n = {n}"),
        });
    }
    let first = (-c * d_inf + big_c * nf).exp();
    let second = (-c * ((df - nf + 1.0) / df) * (d_inf / nf) + big_c * nf.ln()).exp();
    Ok(BoundValue::probability(
        "thm2",
        1.0 - first - second,
        &[("n", nf), ("d", df), ("d_inf", d_inf), ("C", big_c), ("c", c)],
    ))
}

/// Lower bound on the probability that some example is not a support
/// vector, isotropic Gaussian features:
///
/// `Phi(-sqrt((d - n + 4 + 2 sqrt(d - n + 2)) / (n - 1))) (1 - 1/e)`.
pub fn thm3_bound(n: usize, d: usize) -> Result<BoundValue> {
    if n < 2 || d < n {
        return Err(Error::InvalidParameter {
            name: "n, d",
            reason: format!("need d >= n >= 2, got n = {n}, d = {d}"),
        });
    }
    let (nf, gap) = (n as f64, (d - n) as f64);
    let arg = ((gap + 4.0 + 2.0 * (gap + 2.0).sqrt()) / (nf - 1.0)).sqrt();
    let raw = normal_cdf(-arg) * (1.0 - (-1.0f64).exp());
    Ok(BoundValue::probability("thm3", raw, &[("n", nf), ("d", d as f64)]))
}

/// Slack keeping `b` strictly above one.
pub const B_EPS: f64 = 1e-12;

/// Spectrum-dependent lower bound on the probability that some example is
/// not a support vector. Searches `k < (n-1)/c` for
/// `b = max(1 + eps, sum_{j>k} lambda_j / (lambda_{k+1} (n-1)))` and keeps
/// the largest `c' Phi(-sqrt(2 c b^2 (n-1)/(k+1))) (1 - 10 exp(-(n-1)/c))`.
pub fn thm4_bound(n: usize, spectrum: &Spectrum, c: f64, c_prime: f64) -> Result<BoundValue> {
    require_positive(&[("c", c), ("c_prime", c_prime)])?;
    let d = spectrum.dim();
    if n < 2 || d <= n {
        return Err(Error::InvalidParameter {
            name: "n, d",
            reason: format!("need d > n >= 2, got n = {n}, d = {d}"),
        });
    }
    let m = (n - 1) as f64;
    let ratio = m / c;
    if ratio <= 1.0 {
        return Err(Error::NoAdmissibleK { ratio });
    }
    let mut lambda = spectrum.lambda().to_vec();
    lambda.sort_by(|a, b| b.total_cmp(a));
    // tails[k] = sum_{j >= k} lambda_j (0-based), summed smallest first.
    let mut tails = alloc::vec![0.0; d + 1];
    let mut acc = numeric::CompensatedSum::new();
    for j in (0..d).rev() {
        acc.add(lambda[j]);
        tails[j] = acc.value();
    }
    let factor = c_prime * (1.0 - 10.0 * (-ratio).exp());
    let mut best: Option<(f64, usize, f64)> = None;
    let mut k = 0;
    while (k as f64) < ratio && k < d {
        let b = (tails[k] / (lambda[k] * m)).max(1.0 + B_EPS);
        let arg = (2.0 * c * b * b * m / (k as f64 + 1.0)).sqrt();
        let value = factor * normal_cdf(-arg);
        if best.map_or(true, |(v, _, _)| value > v) {
            best = Some((value, k, b));
        }
        k += 1;
    }
    let (raw, k, b) = best.expect("k = 0 is always admissible");
    let mut out = BoundValue::probability(
        "thm4",
        raw,
        &[("n", n as f64), ("d", d as f64), ("c", c), ("c_prime", c_prime)],
    );
    out.k = Some(k);
    out.b = Some(b);
    Ok(out)
}

/// Asymptotic support-vector fraction at `delta = n/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuhotFraction {
    pub delta: f64,
    /// Branch selected by `delta`.
    pub value: f64,
    /// `0.952 / delta`.
    pub large_delta: f64,
    /// `1 - sqrt(2 delta / pi) exp(-1 / (2 delta))`.
    pub small_delta: f64,
}

pub fn buhot_fraction(delta: f64) -> Result<BuhotFraction> {
    require_positive(&[("delta", delta)])?;
    let large_delta = 0.952 / delta;
    let small_delta =
        1.0 - (2.0 * delta / core::f64::consts::PI).sqrt() * (-1.0 / (2.0 * delta)).exp();
    Ok(BuhotFraction {
        delta,
        value: if delta >= 1.0 { large_delta } else { small_delta },
        large_delta,
        small_delta,
    })
}

/// Named evaluations for tabulating several bounds at once.
pub fn thm3_grid(n: usize, ds: &[usize]) -> Result<Vec<BoundValue>> {
    ds.iter().map(|&d| thm3_bound(n, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn thm1_reference_values() {
        let v = thm1_bound(5, 50.0, 50.0, 1.0, 1.0, 1.0).unwrap();
        assert!(close(v.value, 0.9997730003511875757, 1e-14));
        assert!(!v.clipped);
        // exp(-9950) underflows and 50 e^{-200} ~ 6.9e-86 is below one ulp.
        let v = thm1_bound(50, 1e4, 1e4, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(v.value, 1.0);
        let v = thm1_bound(50, 10.0, 10.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.clipped && v.raw < 0.0);
        assert!(thm1_bound(5, -1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn thm2_reference_values() {
        let v = thm2_bound(5, 50, 50.0, 1.0, 1.0).unwrap();
        assert!(close(v.value, 0.9994948029908145332, 1e-14));
        assert!(thm2_bound(50, 50, 5.0, 1.0, 1.0).unwrap().clipped);
        assert!(thm2_bound(5, 1 << 20, 1e6, 1.0, 1.0).unwrap().value > 1.0 - 1e-12);
        assert!(thm2_bound(5, 4, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn thm3_reference_values() {
        let cases = [
            (2, 2, 0.002835637119462211493),
            (50, 50, 0.2240622180876848514),
            (10, 30, 0.01710531282589774191),
        ];
        for (n, d, want) in cases {
            let v = thm3_bound(n, d).unwrap();
            assert!(close(v.value, want, 1e-12), "{n} {d}: {}", v.value);
        }
        let limit = (1.0 - (-1.0f64).exp()) / 2.0;
        let big = thm3_bound(1_000_000, 1_000_000).unwrap().value;
        assert!((big - limit).abs() < 2e-3);
        assert!(thm3_bound(10, 1_000_000).unwrap().value < 1e-100);
        assert!(thm3_bound(1, 5).is_err());
    }

    #[test]
    fn thm3_monotone_in_d() {
        for n in [2, 5, 20, 100] {
            let mut prev = f64::INFINITY;
            for d in n..n + 400 {
                let v = thm3_bound(n, d).unwrap().value;
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn thm4_bilevel_reference() {
        let mut lambda = alloc::vec![100.0; 98];
        lambda.extend(core::iter::repeat(1.0).take(99));
        let s = Spectrum::new(lambda).unwrap();
        let v = thm4_bound(100, &s, 1.0, 1.0).unwrap();
        assert_eq!(v.k, Some(98));
        assert!((v.b.unwrap() - 1.0).abs() < 1e-11);
        assert!(close(v.value, 0.07864960352514256533, 1e-10));
    }

    #[test]
    fn thm4_isotropic_is_tiny() {
        let s = Spectrum::isotropic(10_000).unwrap();
        let v = thm4_bound(20, &s, 1.0, 1.0).unwrap();
        assert!(v.value < 1e-10);
        assert_eq!(
            thm4_bound(20, &s, 19.0, 1.0).unwrap_err(),
            Error::NoAdmissibleK { ratio: 1.0 }
        );
    }

    #[test]
    fn buhot_reference_values() {
        let b = buhot_fraction(10.0).unwrap();
        assert!(close(b.value, 0.0952, 1e-15));
        let b = buhot_fraction(0.1).unwrap();
        assert!(close(b.value, 0.9982999266794959316, 1e-14));
        assert!(close(b.large_delta, 9.52, 1e-15));
        let b = buhot_fraction(0.05).unwrap();
        assert!(close(b.value, 0.9999919000890439109, 1e-14));
        assert_eq!(buhot_fraction(1e-3).unwrap().value, 1.0);
        assert!(buhot_fraction(0.0).is_err());
    }
}
