use proptest::prelude::*;

use svprolif::config::{self, SweepConfig};
use svprolif::io;
use svprolif_core::ensembles::{Dataset, Features};
use svprolif_core::linalg::Matrix;
use svprolif_core::spectra::Spectrum;

fn dataset(n: usize, d: usize, z: Vec<f64>, y: Vec<f64>) -> Dataset {
    let z = Matrix::from_vec(n, d, z).unwrap();
    let f = Features::explicit(z, Spectrum::isotropic(d).unwrap()).unwrap();
    Dataset::new(f, y).unwrap()
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dataset_round_trip_is_bit_exact(
        (n, d, z, y) in (1usize..6, 1usize..6).prop_flat_map(|(n, d)| (
            Just(n),
            Just(d),
            prop::collection::vec(finite(), n * d),
            prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1.0 } else { -1.0 }), n),
        ))
    ) {
        let ds = dataset(n, d, z, y);
        let tmp = tempfile::tempdir().unwrap();
        let prefix = tmp.path().join("ds");
        io::write_dataset(&prefix, &ds).unwrap();
        let back = io::read_dataset(&prefix).unwrap();
        prop_assert_eq!(back.y(), ds.y());
        let a: Vec<u64> = ds.z().as_slice().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = back.z().as_slice().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(a, b);
        prop_assert_eq!(back.spectrum(), ds.spectrum());
    }

    #[test]
    fn fmt_f64_round_trips(v in finite()) {
        prop_assert_eq!(io::fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}

#[test]
fn ragged_csv_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let prefix = tmp.path().join("ds");
    let ds = dataset(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![1.0, -1.0]);
    let (csv, _) = io::write_dataset(&prefix, &ds).unwrap();
    std::fs::write(&csv, "y,z0,z1\n1,1,0\n").unwrap();
    let err = io::read_dataset(&prefix).unwrap_err().to_string();
    assert!(err.contains("expected 2 rows"), "{err}");
}

#[test]
fn minimal_sweep_config_echoes_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("c.json");
    std::fs::write(&p, r#"{"cells":[{"n":10,"d":30}]}"#).unwrap();
    let (cfg, raw): (SweepConfig, _) = config::load_config(Some(&p), &[]).unwrap();
    assert!(raw.get("mode").is_none());
    let echo = serde_json::to_value(&cfg).unwrap();
    assert_eq!(cfg.trials, 100);
    assert_eq!(cfg.seed, config::DEFAULT_SEED);
    assert_eq!(cfg.workers, 1);
    assert_eq!(echo["mode"], "condition2");
    assert_eq!(echo["features"]["law"], "gaussian");
    assert_eq!(echo["labels"]["kind"], "alternating");
    assert_eq!(echo["solver"]["tol_kkt"], 1e-10);
    let cells = cfg.validate().unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0].spectrum.dim(), 30);
}

#[test]
fn overrides_take_dotted_keys() {
    let (cfg, _): (SweepConfig, _) = config::load_config(
        None,
        &[
            ("cells".into(), r#"[{"n":4,"d":8}]"#.into()),
            ("solver.tol_sv".into(), "1e-7".into()),
            ("mode".into(), "solver".into()),
        ],
    )
    .unwrap();
    assert_eq!(cfg.solver.tol_sv, 1e-7);
    assert_eq!(cfg.cells[0].n, 4);
}

#[test]
fn grid_error_names_the_cell() {
    let (cfg, _): (SweepConfig, _) = config::load_config(
        None,
        &[("grid".into(), r#"{"n":[20],"d":[10, 40]}"#.into())],
    )
    .unwrap();
    let err = cfg.validate().unwrap_err().to_string();
    assert!(err.contains("n = 20, d = 10"), "{err}");
}
