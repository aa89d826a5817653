//! Scalar helpers shared across modules.

// Float methods come from std when tests link it, from libm otherwise.
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::FRAC_1_SQRT_2;

/// Neumaier (improved Kahan) summation accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Adds `a * b` together with its exact rounding error.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        self.add(libm::fma(a, b, -p));
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(iter);
    acc.value()
}

/// Dot product with compensated accumulation.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Dot product accurate to about twice working precision.
pub fn dot2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = CompensatedSum::new();
    a.iter().zip(b).for_each(|(x, y)| acc.add_product(*x, *y));
    acc.value()
}

/// Standard normal CDF, `Phi(x) = erfc(-x / sqrt 2) / 2`.
///
/// Going through `erfc` keeps full relative accuracy in the lower tail.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Logistic link `1 / (1 + e^{-t})`, evaluated without overflow.
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(sum(v.iter().map(|x| x * x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = alloc::vec![1.0e16, 1.0, -1.0e16];
        assert_eq!(sum(xs.iter().copied()), 1.0);
        xs.reverse();
        assert_eq!(sum(xs.iter().copied()), 1.0);
    }

    #[test]
    fn normal_cdf_reference_values() {
        // Reference values from mpmath at 30 digits.
        assert_eq!(normal_cdf(0.0), 0.5);
        let cases = [
            (-1.0, 0.158_655_253_931_457_05),
            (-2.613_125_929_752_753, 4.485_911_872_123_252e-3),
            (-10.0, 7.619_853_024_160_527e-24),
            (-30.0, 4.906_713_927_148_187e-198),
            (1.959_963_984_540_054, 0.975),
        ];
        for (x, want) in cases {
            let got = normal_cdf(x);
            assert!(((got - want) / want).abs() < 1e-12, "Phi({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn logistic_is_symmetric_and_finite() {
        assert_eq!(logistic(0.0), 0.5);
        assert!((logistic(3.0) + logistic(-3.0) - 1.0).abs() < 1e-15);
        assert_eq!(logistic(-1000.0), 0.0);
        assert_eq!(logistic(1000.0), 1.0);
    }
}
