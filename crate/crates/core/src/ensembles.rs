//! Seeded random feature ensembles and label models.
//!
//! # Random streams
//!
//! Every draw comes from a ChaCha8 generator keyed by a [`SeedRecord`]
//! `(master_seed, cell, trial)` and a [`Stream`] selector. The 256-bit key is
//! expanded from the triple with SplitMix64; the stream selector is the
//! ChaCha stream id. Two calls with the same record and stream therefore see
//! identical bits, independently of which thread runs them or what was drawn
//! before, and the feature, label, input and parameter streams of one trial
//! never overlap.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};
use crate::numeric;
use crate::spectra::{self, Spectrum};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master_seed: u64,
    pub cell: u64,
    pub trial: u64,
}

/// Independent random streams available to one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Features = 1,
    Labels = 2,
    Inputs = 3,
    Params = 4,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedRecord {
    pub fn new(master_seed: u64, cell: u64, trial: u64) -> Self {
        Self {
            master_seed,
            cell,
            trial,
        }
    }

    /// 256-bit ChaCha key for this record.
    pub fn key(&self) -> [u8; 32] {
        let mut h = splitmix64(self.master_seed);
        h = splitmix64(h ^ self.cell.wrapping_mul(0xd6e8_feb8_6659_fd93));
        h = splitmix64(h ^ self.trial.wrapping_mul(0xa076_1d64_78bd_642f));
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            let word = splitmix64(h.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN)));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        key
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(stream as u64);
        rng
    }
}

/// Mean-zero, unit-variance, sub-Gaussian entry laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformSqrt3,
}

impl EntryLaw {
    pub fn name(self) -> &'static str {
        match self {
            EntryLaw::Gaussian => "gaussian",
            EntryLaw::Rademacher => "rademacher",
            EntryLaw::UniformSqrt3 => "uniform_sqrt3",
        }
    }

    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            EntryLaw::Gaussian => rng.sample(StandardNormal),
            EntryLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryLaw::UniformSqrt3 => {
                let s = 3.0_f64.sqrt();
                (2.0 * rng.random::<f64>() - 1.0) * s
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    Independent { law: EntryLaw },
    Haar,
    Trig,
    Explicit,
}

impl FeatureKind {
    pub fn ensemble_name(&self) -> &'static str {
        match self {
            FeatureKind::Independent { .. } => "independent",
            FeatureKind::Haar => "haar",
            FeatureKind::Trig => "trig",
            FeatureKind::Explicit => "explicit",
        }
    }

    pub fn law_name(&self) -> &'static str {
        match self {
            FeatureKind::Independent { law } => law.name(),
            FeatureKind::Haar => "haar",
            FeatureKind::Trig => "trig",
            FeatureKind::Explicit => "explicit",
        }
    }
}

/// Raw features `Z` (n x d) and the spectrum that scales them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Features {
    z: Matrix,
    spectrum: Spectrum,
    kind: FeatureKind,
    /// Scalar inputs `t_i` for trigonometric features.
    inputs: Option<Vec<f64>>,
    seed: Option<SeedRecord>,
}

impl Features {
    /// Wraps a caller-supplied raw matrix. No `d >= n` requirement.
    pub fn explicit(z: Matrix, spectrum: Spectrum) -> Result<Self> {
        if z.cols() != spectrum.dim() {
            return Err(Error::DimensionMismatch {
                what: "columns of Z vs. spectrum dimension",
                expected: spectrum.dim(),
                got: z.cols(),
            });
        }
        if z.rows() == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "need at least one example".into(),
            });
        }
        if z.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "z",
                reason: "feature matrix contains non-finite entries".into(),
            });
        }
        Ok(Self {
            z,
            spectrum,
            kind: FeatureKind::Explicit,
            inputs: None,
            seed: None,
        })
    }

    /// Restores features with provenance metadata (used when reading files).
    pub fn with_provenance(
        mut self,
        kind: FeatureKind,
        inputs: Option<Vec<f64>>,
        seed: Option<SeedRecord>,
    ) -> Self {
        self.kind = kind;
        self.inputs = inputs;
        self.seed = seed;
        self
    }

    pub fn n(&self) -> usize {
        self.z.rows()
    }

    pub fn d(&self) -> usize {
        self.z.cols()
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn inputs(&self) -> Option<&[f64]> {
        self.inputs.as_deref()
    }

    pub fn seed(&self) -> Option<SeedRecord> {
        self.seed
    }

    /// `x_i = diag(lambda)^{1/2} z_i`.
    pub fn scaled_row(&self, i: usize) -> Vec<f64> {
        self.z
            .row(i)
            .iter()
            .zip(self.spectrum.lambda())
            .map(|(z, l)| z * l.sqrt())
            .collect()
    }

    /// Inner products `x_i^T v` for every example.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| numeric::dot(&self.scaled_row(i), v))
            .collect()
    }
}

fn require_high_dim(n: usize, d: usize) -> Result<()> {
    if n == 0 || d < n {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("samplers require d >= n >= 1, got n = {n}, d = {d}"),
        });
    }
    Ok(())
}

/// `Z` with i.i.d. entries from `law`.
pub fn sample_independent(
    n: usize,
    spectrum: &Spectrum,
    law: EntryLaw,
    seed: SeedRecord,
) -> Result<Features> {
    require_high_dim(n, spectrum.dim())?;
    sample_independent_any_shape(n, spectrum, law, seed)
}

/// [`sample_independent`] without the `d >= n` requirement, for the
/// low-dimensional (`n > d`) comparisons.
pub fn sample_independent_any_shape(
    n: usize,
    spectrum: &Spectrum,
    law: EntryLaw,
    seed: SeedRecord,
) -> Result<Features> {
    let d = spectrum.dim();
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one example".into(),
        });
    }
    let mut rng = seed.rng(Stream::Features);
    let data: Vec<f64> = (0..n * d).map(|_| law.draw(&mut rng)).collect();
    Ok(Features {
        z: Matrix::from_vec(n, d, data).expect("n*d entries"),
        spectrum: spectrum.clone(),
        kind: FeatureKind::Independent { law },
        inputs: None,
        seed: Some(seed),
    })
}

/// First `n` rows of a Haar-distributed `d x d` orthogonal matrix, scaled by
/// `sqrt d`, so that `Z Z^T = d I_n`.
pub fn sample_haar(n: usize, spectrum: &Spectrum, seed: SeedRecord) -> Result<Features> {
    let d = spectrum.dim();
    require_high_dim(n, d)?;
    let mut rng = seed.rng(Stream::Features);
    let data: Vec<f64> = (0..d * n).map(|_| rng.sample(StandardNormal)).collect();
    let gaussian = Matrix::from_vec(d, n, data).expect("d*n entries");
    let q = linalg::thin_qr_q(&gaussian);
    let scale = (d as f64).sqrt();
    let mut z = q.transpose();
    for i in 0..n {
        z.row_mut(i).iter_mut().for_each(|v| *v *= scale);
    }
    Ok(Features {
        z,
        spectrum: spectrum.clone(),
        kind: FeatureKind::Haar,
        inputs: None,
        seed: Some(seed),
    })
}

/// Unweighted trigonometric map `(1, cos t, sin t, ..., cos kt, sin kt)`.
pub fn trig_row(t: f64, k: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(2 * k + 1);
    row.push(1.0);
    for j in 1..=k {
        let (s, c) = libm::sincos(j as f64 * t);
        row.push(c);
        row.push(s);
    }
    row
}

/// Trigonometric features at inputs drawn uniformly from `[0, 2 pi)`.
pub fn sample_trig(n: usize, k: usize, decay: f64, seed: SeedRecord) -> Result<Features> {
    let spectrum = spectra::trig_spectrum(k, decay)?;
    require_high_dim(n, spectrum.dim())?;
    let mut rng = seed.rng(Stream::Inputs);
    let inputs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
    trig_features_at(&inputs, k, decay).map(|f| Features {
        seed: Some(seed),
        ..f
    })
}

/// Trigonometric features at caller-chosen inputs.
pub fn trig_features_at(inputs: &[f64], k: usize, decay: f64) -> Result<Features> {
    let spectrum = spectra::trig_spectrum(k, decay)?;
    let rows: Vec<Vec<f64>> = inputs.iter().map(|&t| trig_row(t, k)).collect();
    let z = Matrix::from_rows(&rows).ok_or(Error::InvalidParameter {
        name: "inputs",
        reason: "need at least one input".into(),
    })?;
    Ok(Features {
        z,
        spectrum,
        kind: FeatureKind::Trig,
        inputs: Some(inputs.to_vec()),
        seed: None,
    })
}

/// Link `h: R^k -> [0, 1]` of a multi-index model, written as a
/// deterministic rule on `W x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiIndexLink {
    /// `y = +1` iff every coordinate of `W x` is positive (intersection of
    /// half-spaces).
    AllPositive,
    /// `y = prod_j sign((W x)_j)`.
    Parity,
}

/// Conditional law of `y_i` given `x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelModel {
    Fixed { values: Vec<f64> },
    Logistic { w: Vec<f64> },
    Probit { w: Vec<f64> },
    /// `y = sign(x^T w)` with `sign(0) = +1`.
    OneBit { w: Vec<f64> },
    MultiIndex { w: Matrix, link: MultiIndexLink },
    RandomSigns,
}

fn sign(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl LabelModel {
    fn check_dims(&self, n: usize, d: usize) -> Result<()> {
        let mismatch = |what, expected, got| Err(Error::DimensionMismatch { what, expected, got });
        match self {
            LabelModel::Fixed { values } => {
                if values.len() != n {
                    return mismatch("fixed labels vs. n", n, values.len());
                }
                if values.iter().any(|&v| v != 1.0 && v != -1.0) {
                    return Err(Error::InvalidParameter {
                        name: "values",
                        reason: "fixed labels must be +1 or -1".into(),
                    });
                }
            }
            LabelModel::Logistic { w } | LabelModel::Probit { w } | LabelModel::OneBit { w } => {
                if w.len() != d {
                    return mismatch("GLM weight vs. d", d, w.len());
                }
            }
            LabelModel::MultiIndex { w, .. } => {
                if w.cols() != d {
                    return mismatch("multi-index W columns vs. d", d, w.cols());
                }
            }
            LabelModel::RandomSigns => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            LabelModel::Fixed { .. } => "fixed",
            LabelModel::Logistic { .. } => "logistic",
            LabelModel::Probit { .. } => "probit",
            LabelModel::OneBit { .. } => "one_bit",
            LabelModel::MultiIndex { .. } => "multi_index",
            LabelModel::RandomSigns => "random_signs",
        }
    }
}

/// Features together with `+-1` labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Features,
    y: Vec<f64>,
    label_model: LabelModel,
}

impl Dataset {
    /// Attaches explicit labels; checks they are `+-1` and match `n`.
    pub fn new(features: Features, y: Vec<f64>) -> Result<Self> {
        let label_model = LabelModel::Fixed { values: y.clone() };
        label_model.check_dims(features.n(), features.d())?;
        Ok(Self {
            features,
            y,
            label_model,
        })
    }

    pub fn features(&self) -> &Features {
        &self.features
    }

    pub fn label_model(&self) -> &LabelModel {
        &self.label_model
    }

    pub fn n(&self) -> usize {
        self.features.n()
    }

    pub fn d(&self) -> usize {
        self.features.d()
    }

    pub fn z(&self) -> &Matrix {
        self.features.z()
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.features.spectrum()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn scaled_row(&self, i: usize) -> Vec<f64> {
        self.features.scaled_row(i)
    }

    /// `w = sum_i coef_i x_i`.
    pub fn combine_rows(&self, coef: &[f64]) -> Vec<f64> {
        let d = self.d();
        let mut w = alloc::vec![0.0; d];
        let lam = self.spectrum().lambda();
        for j in 0..d {
            let s = numeric::sum((0..self.n()).map(|i| coef[i] * self.z()[(i, j)]));
            w[j] = s * lam[j].sqrt();
        }
        w
    }

    /// Same data with every label negated.
    pub fn with_flipped_labels(&self) -> Self {
        let y: Vec<f64> = self.y.iter().map(|v| -v).collect();
        Self {
            features: self.features.clone(),
            label_model: LabelModel::Fixed { values: y.clone() },
            y,
        }
    }

    /// Rows reordered so that new row `a` is old row `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let rows: Vec<&[f64]> = perm.iter().map(|&i| self.z().row(i)).collect();
        let z = Matrix::from_rows(&rows).expect("rows share d");
        let y: Vec<f64> = perm.iter().map(|&i| self.y[i]).collect();
        let inputs = self
            .features
            .inputs()
            .map(|t| perm.iter().map(|&i| t[i]).collect());
        let features = Features::explicit(z, self.spectrum().clone())?.with_provenance(
            self.features.kind(),
            inputs,
            self.features.seed(),
        );
        Dataset::new(features, y)
    }
}

/// Draws labels for `features` from `model`; randomness comes from the
/// labels stream of `seed`.
pub fn apply_labels(features: Features, model: &LabelModel, seed: SeedRecord) -> Result<Dataset> {
    let n = features.n();
    model.check_dims(n, features.d())?;
    let mut rng = seed.rng(Stream::Labels);
    let coin = |prob_plus: f64, rng: &mut ChaCha8Rng| {
        if rng.random::<f64>() < prob_plus {
            1.0
        } else {
            -1.0
        }
    };
    let y: Vec<f64> = match model {
        LabelModel::Fixed { values } => values.clone(),
        LabelModel::RandomSigns => (0..n).map(|_| coin(0.5, &mut rng)).collect(),
        LabelModel::Logistic { w } => features
            .project(w)
            .into_iter()
            .map(|t| coin(numeric::logistic(t), &mut rng))
            .collect(),
        LabelModel::Probit { w } => features
            .project(w)
            .into_iter()
            .map(|t| coin(numeric::normal_cdf(t), &mut rng))
            .collect(),
        LabelModel::OneBit { w } => features.project(w).into_iter().map(sign).collect(),
        LabelModel::MultiIndex { w, link } => (0..n)
            .map(|i| {
                let proj = w.mul_vec(&features.scaled_row(i));
                match link {
                    MultiIndexLink::AllPositive => {
                        if proj.iter().all(|&v| v > 0.0) {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    MultiIndexLink::Parity => proj.iter().map(|&v| sign(v)).product(),
                }
            })
            .collect(),
    };
    Ok(Dataset {
        features,
        y,
        label_model: model.clone(),
    })
}

/// Trigonometric dataset: uniform inputs on `[0, 2 pi)`, raw map as `Z`,
/// `trig_spectrum(k, decay)` as weights, labels from `model`.
pub fn trig_dataset(
    n: usize,
    k: usize,
    decay: f64,
    model: &LabelModel,
    seed: SeedRecord,
) -> Result<Dataset> {
    apply_labels(sample_trig(n, k, decay, seed)?, model, seed)
}

/// Uniformly random unit vector in `R^d`, drawn from the parameter stream.
pub fn random_unit_vector(d: usize, seed: SeedRecord) -> Vec<f64> {
    let mut rng = seed.rng(Stream::Params);
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = numeric::norm2(&v);
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Random `k x d` matrix with unit-norm rows, drawn from the parameter stream.
pub fn random_index_matrix(k: usize, d: usize, seed: SeedRecord) -> Matrix {
    let mut rng = seed.rng(Stream::Params);
    let mut m = Matrix::zeros(k, d);
    for i in 0..k {
        let row: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = numeric::norm2(&row);
        m.row_mut(i)
            .iter_mut()
            .zip(&row)
            .for_each(|(dst, v)| *dst = v / norm);
    }
    m
}
