use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use svprolif_core::bounds::{thm1_bound, thm2_bound, thm3_bound, thm4_bound};
use svprolif_core::ensembles::{
    apply_labels, sample_haar, sample_independent, Dataset, EntryLaw, Features, LabelModel,
    SeedRecord,
};
use svprolif_core::equivalence::{check_equivalence, loo_direct_all, loo_statistics, EquivalenceOptions};
use svprolif_core::kernel::{gram, GramFactor};
use svprolif_core::spectra::{
    rate_region_classify, RateRegionPoint, Spectrum, BOUNDARY_TOL,
};
use svprolif_core::svm::{self, SolverOptions};
use svprolif_core::Error;

fn law_strategy() -> impl Strategy<Value = EntryLaw> {
    prop_oneof![
        Just(EntryLaw::Gaussian),
        Just(EntryLaw::Rademacher),
        Just(EntryLaw::UniformSqrt3)
    ]
}

fn spectrum_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1e3, 1..60)
}

/// Random labelled instance with `n <= max_n` and `n <= d <= 3n`.
fn instance(max_n: usize) -> impl Strategy<Value = (Dataset, GramFactor)> {
    (1..=max_n, 0usize..3, any::<u64>(), law_strategy(), any::<bool>(), any::<bool>())
        .prop_flat_map(|(n, extra, seed, law, haar, decay)| {
            let d = n + extra * n;
            (Just((n, d, seed, law, haar, decay)), prop::collection::vec(any::<bool>(), n))
        })
        .prop_map(|((n, d, seed, law, haar, decay), signs)| {
            let lambda: Vec<f64> = (0..d)
                .map(|j| if decay { 1.0 / (1.0 + j as f64) } else { 1.0 })
                .collect();
            let spectrum = Spectrum::new(lambda).unwrap();
            let rec = SeedRecord::new(seed, 0, 0);
            let f = if haar {
                sample_haar(n, &spectrum, rec).unwrap()
            } else {
                sample_independent(n, &spectrum, law, rec).unwrap()
            };
            let y = signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
            let ds = apply_labels(f, &LabelModel::Fixed { values: y }, rec).unwrap();
            let gf = gram(ds.features()).unwrap();
            (ds, gf)
        })
}

/// Flagged-singular Grams are excluded by the pivot rule; exactly singular
/// integer Grams can slip past it with cond(K) near 1/eps.
fn well_posed(gf: &GramFactor) -> bool {
    !gf.is_singular() && gf.condition_number() < 1e12
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        rng_seed: RngSeed::Fixed(0x5eed),
        ..ProptestConfig::default()
    })]

    #[test]
    fn effective_dims_are_ordered(lambda in spectrum_strategy()) {
        let s = Spectrum::new(lambda).unwrap();
        let e = s.effective_dims();
        let d = e.d as f64;
        prop_assert!(e.d2 <= d * (1.0 + 1e-12));
        prop_assert!(e.d_inf <= e.d2 * (1.0 + 1e-12));
        prop_assert!(e.d_inf >= 1.0 - 1e-12);
    }

    #[test]
    fn effective_dims_are_scale_invariant(lambda in spectrum_strategy(), c in 1e-6f64..1e6) {
        let s = Spectrum::new(lambda).unwrap();
        let (a, b) = (s.effective_dims(), s.scaled(c).unwrap().effective_dims());
        prop_assert!((a.d2 - b.d2).abs() <= 1e-12 * a.d2);
        prop_assert!((a.d_inf - b.d_inf).abs() <= 1e-12 * a.d_inf);
    }

    #[test]
    fn classification_is_stable_off_boundaries(
        p in 1.01f64..4.0, q in 0.0f64..3.0, r in 0.01f64..0.99, eps in -1.0f64..1.0
    ) {
        let pt = RateRegionPoint::new(p, q, r).unwrap();
        let base = rate_region_classify(pt);
        let moved = RateRegionPoint::new(p, (q + eps * BOUNDARY_TOL * 0.5).max(0.0), r).unwrap();
        let boundaries = [1.0 - r, 1.0 - r + (p - 1.0) / 2.0, 1.5 - r];
        if boundaries.iter().all(|b| (q - b).abs() > 4.0 * BOUNDARY_TOL) {
            prop_assert_eq!(base, rate_region_classify(moved));
        }
    }

    #[test]
    fn solve_then_multiply((ds, gf) in instance(12)) {
        prop_assume!(well_posed(&gf));
        let x = gf.solve(ds.y()).unwrap();
        // Backward error floor: eps ||K|| ||x|| <= cond(K) eps ||y||.
        let tol = 1e-8f64.max(gf.condition_number() * f64::EPSILON);
        prop_assert!(gf.relative_residual(&x, ds.y()) <= tol, "res {:e} cond {:e} n {} d {} {:?} piv {:e}", gf.relative_residual(&x, ds.y()), gf.condition_number(), ds.n(), ds.d(), ds.features().kind(), gf.pivot_ratio());
    }

    #[test]
    fn gram_spectral_facts((ds, gf) in instance(12)) {
        let n = ds.n();
        let k = gf.matrix();
        let mu_min = gf.eigmin();
        for i in 0..n {
            prop_assert!(mu_min <= k[(i, i)] * (1.0 + 1e-12));
        }
        let e = gf.gram_effective_dims();
        prop_assert!(e.d2 <= n as f64 * (1.0 + 1e-12));
        prop_assert!(e.d_inf <= e.d2 * (1.0 + 1e-12));
        prop_assert!(e.d_inf >= 1.0 - 1e-12);
        if n > 1 {
            for i in 0..n {
                let sub = gf.leave_one_out(i).unwrap();
                prop_assert!(sub.eigmin() >= mu_min - 1e-10 * gf.opnorm());
            }
        }
    }

    #[test]
    fn solver_matches_enumeration((ds, gf) in instance(10)) {
        prop_assume!(well_posed(&gf));
        let fast = svm::solve_dual(&ds, &gf, &SolverOptions::default()).unwrap();
        let exact = svm::solve_exact_smalln(&ds, &gf, 1e-6).unwrap();
        let scale = exact.beta_star.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        prop_assert!(max_abs_diff(&fast.beta_star, &exact.beta_star) <= 1e-7 * scale.max(1.0));
    }

    #[test]
    fn solution_satisfies_kkt((ds, gf) in instance(16)) {
        prop_assume!(well_posed(&gf));
        let sol = svm::solve_dual(&ds, &gf, &SolverOptions::default()).unwrap();
        prop_assert!(sol.diagnostics.converged);
        prop_assert!(sol.diagnostics.objective_monotone);
        let y = ds.y();
        let margins = sol.functional_margins(&ds);
        for i in 0..ds.n() {
            // Dual feasibility, primal feasibility, complementary slackness.
            prop_assert!(y[i] * sol.beta_star[i] >= 0.0);
            prop_assert!(margins[i] >= 1.0 - 1e-8);
            if sol.support.contains(i) {
                prop_assert!((margins[i] - 1.0).abs() <= 1e-8);
            }
        }
        // Representation and margin consistency.
        let w = ds.combine_rows(&sol.beta_star);
        prop_assert!(max_abs_diff(&w, &sol.w_star) == 0.0);
        let wn = sol.w_star.iter().map(|v| v * v).sum::<f64>().sqrt();
        let geo = margins.iter().fold(f64::INFINITY, |m, &v| m.min(v)) / wn;
        prop_assert!((geo - sol.gamma_star).abs() <= 1e-8 * sol.gamma_star);
    }

    #[test]
    fn label_flip_negates_solution((ds, gf) in instance(10)) {
        prop_assume!(well_posed(&gf));
        let opts = SolverOptions::default();
        let a = svm::solve_dual(&ds, &gf, &opts).unwrap();
        let b = svm::solve_dual(&ds.with_flipped_labels(), &gf, &opts).unwrap();
        for (x, y) in a.beta_star.iter().zip(&b.beta_star) {
            prop_assert_eq!(*x, -*y);
        }
        for (x, y) in a.w_star.iter().zip(&b.w_star) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn joint_permutation_permutes_statistics((ds, gf) in instance(10), rot in 0usize..10) {
        prop_assume!(well_posed(&gf));
        let n = ds.n();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let pds = ds.permuted(&perm).unwrap();
        let pgf = gram(pds.features()).unwrap();
        let a = loo_statistics(&ds, &gf).unwrap();
        let b = loo_statistics(&pds, &pgf).unwrap();
        let tol = 1e-9f64.max(gf.condition_number() * f64::EPSILON);
        for (j, &i) in perm.iter().enumerate() {
            prop_assert!((a.h[i] - b.h[j]).abs() <= tol * a.h[i].abs().max(1.0));
            prop_assert!((a.y_beta[i] - b.y_beta[j]).abs() <= tol * a.y_beta[i].abs().max(1.0));
        }
    }

    #[test]
    fn tri_equivalence((ds, gf) in instance(24)) {
        prop_assume!(!gf.is_singular());
        let opts = EquivalenceOptions { direct_loo: true, ..EquivalenceOptions::default() };
        let rep = check_equivalence(&ds, &gf, &opts).unwrap();
        if !rep.is_ambiguous() {
            prop_assert!(rep.verdicts.consistent());
        }
        let tol = 1e-8f64.max(rep.condition_number * f64::EPSILON);
        prop_assert!(rep.identity_residual <= tol, "{} at cond {:e}", rep.identity_residual, rep.condition_number);
        for i in 0..ds.n() {
            if !rep.ambiguous.contains(&i) {
                prop_assert_eq!(rep.signed_margins[i] > 0.0, rep.loo_stats[i] < 1.0);
            }
        }
    }

    #[test]
    fn direct_and_closed_form_leverage_agree((ds, gf) in instance(32)) {
        prop_assume!(!gf.is_singular());
        let fast = loo_statistics(&ds, &gf).unwrap();
        match loo_direct_all(&ds, &gf) {
            Ok(direct) => {
                // Both routes lose about cond(K) * eps in the worst case.
                let tol = 1e-9f64.max(gf.condition_number() * f64::EPSILON);
                for (a, b) in fast.h.iter().zip(&direct) {
                    prop_assert!((a - b).abs() <= tol * b.abs().max(1.0));
                }
            }
            Err(e) => {
                let expected = matches!(e, Error::SingularLeaveOneOut { .. } | Error::SingularGram);
                prop_assert!(expected);
            }
        }
    }

    #[test]
    fn probability_bounds_are_monotone(
        n in 2usize..200, d2 in 1.0f64..1e5, di in 1.0f64..1e5, bump in 1.0f64..10.0
    ) {
        let d_inf = di.min(d2);
        let a = thm1_bound(n, d2, d_inf, 1.0, 1.0, 1.0).unwrap();
        let b = thm1_bound(n, d2 * bump, d_inf, 1.0, 1.0, 1.0).unwrap();
        let c = thm1_bound(n, d2, d_inf * bump, 1.0, 1.0, 1.0).unwrap();
        prop_assert!(b.value >= a.value && c.value >= a.value);
        for v in [&a, &b, &c] {
            prop_assert!((0.0..=1.0).contains(&v.value));
            prop_assert_eq!(v.clipped, v.raw != v.value);
        }
        let d = n + (d2 as usize);
        let e = thm2_bound(n, d, d_inf, 1.0, 1.0).unwrap();
        let f = thm2_bound(n, d, d_inf * bump, 1.0, 1.0).unwrap();
        prop_assert!(f.value >= e.value);
        let t = thm3_bound(n, d).unwrap();
        prop_assert!((0.0..=1.0).contains(&t.value));
    }

    #[test]
    fn heavier_tail_never_raises_thm4(
        head in prop::collection::vec(1.0f64..100.0, 1..20),
        tail in prop::collection::vec(0.01f64..1.0, 30..60),
        extra in 1.0f64..5.0
    ) {
        let mut lambda = head.clone();
        lambda.extend(&tail);
        let n = 25;
        prop_assume!(lambda.len() > n);
        let a = thm4_bound(n, &Spectrum::new(lambda.clone()).unwrap(), 1.0, 1.0).unwrap();
        // Grow the smallest entry's weight by appending mass below every lambda_{k+1}.
        let floor = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        lambda.extend(std::iter::repeat(floor * 0.5).take(extra as usize));
        let b = thm4_bound(n, &Spectrum::new(lambda).unwrap(), 1.0, 1.0).unwrap();
        prop_assert!(b.value <= a.value * (1.0 + 1e-12));
    }
}

#[test]
fn samplers_are_pure_functions_of_the_seed() {
    let s = Spectrum::isotropic(30).unwrap();
    for law in [EntryLaw::Gaussian, EntryLaw::Rademacher, EntryLaw::UniformSqrt3] {
        let rec = SeedRecord::new(99, 4, 7);
        let a = sample_independent(10, &s, law, rec).unwrap();
        let b = sample_independent(10, &s, law, rec).unwrap();
        assert_eq!(a, b);
    }
    let rec = SeedRecord::new(99, 4, 8);
    assert_eq!(sample_haar(10, &s, rec).unwrap(), sample_haar(10, &s, rec).unwrap());
}

#[test]
fn haar_rows_are_orthogonal() {
    for trial in 0..20 {
        let (n, d) = (1 + trial * 3, 2 + trial * 7);
        let f = sample_haar(n, &Spectrum::isotropic(d).unwrap(), SeedRecord::new(5, 0, trial as u64))
            .unwrap();
        let zzt = f.z().mul_transpose(f.z());
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                // Entry-wise bound; the operator norm is at most n times it.
                assert!((zzt[(i, j)] / d as f64 - want).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn gaussian_entry_variance() {
    let f = sample_independent(100, &Spectrum::isotropic(200).unwrap(), EntryLaw::Gaussian, SeedRecord::new(1, 0, 0))
        .unwrap();
    let z = f.z().as_slice();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / z.len() as f64;
    assert!((0.9..=1.1).contains(&var));
    assert!(mean.abs() <= 0.02);
}

#[test]
fn explicit_features_need_matching_spectrum() {
    let z = svprolif_core::linalg::Matrix::zeros(2, 3);
    assert!(Features::explicit(z, Spectrum::isotropic(4).unwrap()).is_err());
}
