//! Strict JSON configuration: parsing, `key=value` overrides, schema errors
//! with JSON-pointer paths and nearest-key suggestions.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use svprolif_core::ensembles::{
    self, EntryLaw, FeatureKind, LabelModel, MultiIndexLink, SeedRecord,
};
use svprolif_core::linalg::Matrix;
use svprolif_core::spectra::{self, RateRegionPoint, Spectrum};

/// Master seed used when neither the config nor `--seed` sets one.
pub const DEFAULT_SEED: u64 = 1729;

/// Environment variable holding the default output root.
pub const OUT_ENV: &str = "SVPROLIF_OUT";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// JSON pointer to the offending value (empty for the document root).
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "config error at {}: {}", self.pointer, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

/// Reads a JSON document; a missing path yields an empty object so that
/// every field takes its default.
pub fn read_value(path: Option<&Path>) -> ConfigResult<Value> {
    let Some(path) = path else {
        return Ok(Value::Object(Default::default()));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        ConfigError::new(
            "",
            format!("{}: malformed JSON at line {}, column {}: {e}", path.display(), e.line(), e.column()),
        )
    })
}

/// Sets `dotted.key.path` to `raw`, parsed as JSON when possible and kept
/// as a string otherwise. Intermediate objects are created as needed.
pub fn apply_override(doc: &mut Value, key: &str, raw: &str) -> ConfigResult<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::new("", format!("bad override key {key:?}")));
    }
    let mut cur = doc;
    for (i, part) in parts.iter().enumerate() {
        let pointer = format!("/{}", parts[..=i].join("/"));
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| ConfigError::new(pointer.clone(), "override path crosses a non-object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("non-empty key")
}

/// Parses `key=value`.
pub fn split_override(s: &str) -> ConfigResult<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.trim().to_string(), v.to_string())),
        _ => Err(ConfigError::new("", format!("override {s:?} is not of the form key=value"))),
    }
}

fn to_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Adds a nearest-key hint to serde's "unknown field" messages.
fn suggest(message: &str) -> String {
    let Some(rest) = message.strip_prefix("unknown field `") else {
        return message.to_string();
    };
    let Some((bad, tail)) = rest.split_once('`') else {
        return message.to_string();
    };
    let expected: Vec<&str> = tail.split('`').skip(1).step_by(2).collect();
    let best = expected
        .iter()
        .map(|k| (strsim::levenshtein(bad, k), *k))
        .min();
    match best {
        Some((dist, key)) if dist <= 3 => format!("{message}; did you mean `{key}`?"),
        _ => message.to_string(),
    }
}

/// Deserialises `value` into `T`, reporting failures with a JSON pointer.
pub fn from_value<T: DeserializeOwned>(value: Value) -> ConfigResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = to_pointer(e.path());
        let message = suggest(&e.inner().to_string());
        ConfigError::new(pointer, message)
    })
}

/// Reads, overrides and deserialises a config file.
pub fn load_config<T: DeserializeOwned>(
    path: Option<&Path>,
    overrides: &[(String, String)],
) -> ConfigResult<(T, Value)> {
    let mut doc = read_value(path)?;
    for (k, v) in overrides {
        apply_override(&mut doc, k, v)?;
    }
    let typed = from_value(doc.clone())?;
    Ok((typed, doc))
}

/// Spectrum as configured: explicit weights or a named constructor.
///
/// Explicit: `{"d": 3, "lambda": [..]}`. Named: `{"kind": "isotropic", "d": 10}`,
/// `{"kind": "bilevel", "p": 2, "q": 0.5, "r": 0.5}` (sized from `n`),
/// `{"kind": "trig", "k": 16384, "decay": 1}` (`d = 2k + 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SpectrumSpec {
    Named(NamedSpectrum),
    Explicit(Spectrum),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NamedSpectrum {
    Isotropic {
        #[serde(default)]
        d: Option<usize>,
    },
    Bilevel { p: f64, q: f64, r: f64 },
    Trig { k: usize, decay: f64 },
}

impl<'de> Deserialize<'de> for SpectrumSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = Value::deserialize(de)?;
        if v.get("kind").is_some() {
            NamedSpectrum::deserialize(v).map(SpectrumSpec::Named).map_err(D::Error::custom)
        } else {
            Spectrum::deserialize(v).map(SpectrumSpec::Explicit).map_err(D::Error::custom)
        }
    }
}

impl SpectrumSpec {
    /// Concrete weights for a cell with `n` examples and optional `d`.
    pub fn resolve(&self, n: usize, d: Option<usize>) -> Result<Spectrum, String> {
        let s = match self {
            SpectrumSpec::Explicit(s) => s.clone(),
            SpectrumSpec::Named(NamedSpectrum::Isotropic { d: sd }) => {
                let dim = sd.or(d).ok_or("isotropic spectrum needs d")?;
                Spectrum::isotropic(dim).map_err(|e| e.to_string())?
            }
            SpectrumSpec::Named(NamedSpectrum::Bilevel { p, q, r }) => {
                let pt = RateRegionPoint::new(*p, *q, *r).map_err(|e| e.to_string())?;
                spectra::bilevel_spectrum(pt, n).map_err(|e| e.to_string())?
            }
            SpectrumSpec::Named(NamedSpectrum::Trig { k, decay }) => {
                spectra::trig_spectrum(*k, *decay).map_err(|e| e.to_string())?
            }
        };
        if let Some(d) = d {
            if d != s.dim() {
                return Err(format!("cell d = {d} but spectrum has dimension {}", s.dim()));
            }
        }
        Ok(s)
    }

    pub fn trig_params(&self) -> Option<(usize, f64)> {
        match self {
            SpectrumSpec::Named(NamedSpectrum::Trig { k, decay }) => Some((*k, *decay)),
            _ => None,
        }
    }
}

/// Feature ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureSpec {
    Independent { law: EntryLaw },
    Haar,
    /// Trigonometric map at uniform random inputs; needs a trig spectrum.
    Trig,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec::Independent {
            law: EntryLaw::Gaussian,
        }
    }
}

impl FeatureSpec {
    pub fn kind(&self) -> FeatureKind {
        match *self {
            FeatureSpec::Independent { law } => FeatureKind::Independent { law },
            FeatureSpec::Haar => FeatureKind::Haar,
            FeatureSpec::Trig => FeatureKind::Trig,
        }
    }
}

/// Label rule; random parameters (`w`, `W`) are drawn per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LabelSpec {
    Fixed { values: Vec<f64> },
    /// `(+1, -1, +1, ...)`.
    Alternating,
    AllOnes,
    RandomSigns,
    /// `w = scale * u` with `u` uniform on the sphere.
    Logistic {
        #[serde(default = "one")]
        scale: f64,
    },
    Probit {
        #[serde(default = "one")]
        scale: f64,
    },
    OneBit,
    MultiIndex { k: usize, link: MultiIndexLink },
}

fn one() -> f64 {
    1.0
}

impl Default for LabelSpec {
    fn default() -> Self {
        LabelSpec::Alternating
    }
}

impl LabelSpec {
    pub fn model(&self, n: usize, d: usize, seed: SeedRecord) -> LabelModel {
        let unit = || ensembles::random_unit_vector(d, seed);
        match self {
            LabelSpec::Fixed { values } => LabelModel::Fixed {
                values: values.clone(),
            },
            LabelSpec::Alternating => LabelModel::Fixed {
                values: (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
            },
            LabelSpec::AllOnes => LabelModel::Fixed {
                values: vec![1.0; n],
            },
            LabelSpec::RandomSigns => LabelModel::RandomSigns,
            LabelSpec::Logistic { scale } => LabelModel::Logistic {
                w: unit().into_iter().map(|v| v * scale).collect(),
            },
            LabelSpec::Probit { scale } => LabelModel::Probit {
                w: unit().into_iter().map(|v| v * scale).collect(),
            },
            LabelSpec::OneBit => LabelModel::OneBit { w: unit() },
            LabelSpec::MultiIndex { k, link } => LabelModel::MultiIndex {
                w: ensembles::random_index_matrix(*k, d, seed),
                link: *link,
            },
        }
    }

    fn check(&self, n: usize) -> Result<(), String> {
        match self {
            LabelSpec::Fixed { values } if values.len() != n => {
                Err(format!("fixed labels have {} entries but n = {n}", values.len()))
            }
            LabelSpec::Fixed { values } if values.iter().any(|&v| v != 1.0 && v != -1.0) => {
                Err("fixed labels must be +1 or -1".into())
            }
            LabelSpec::Logistic { scale } | LabelSpec::Probit { scale } if !scale.is_finite() => {
                Err("scale must be finite".into())
            }
            LabelSpec::MultiIndex { k: 0, .. } => Err("multi-index k must be at least 1".into()),
            _ => Ok(()),
        }
    }
}

/// One grid cell: `n`, and `d` and/or a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub n: usize,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
}

/// Cross product of `n` and `d` lists (isotropic unless a spectrum is set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: Vec<usize>,
    pub d: Vec<usize>,
}

/// Which condition decides proliferation in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Sign of `K^{-1} y` (one solve per trial).
    #[default]
    Condition2,
    /// Leave-one-out refits.
    Condition3,
    /// Full SVM solve, cross-checked against condition 2.
    Solver,
}

pub use svprolif_core::svm::SolverOptions;

fn default_trials() -> usize {
    100
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_workers() -> usize {
    1
}

fn default_tol_amb() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub cells: Vec<CellSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Spectrum applied to cells without their own.
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub features: FeatureSpec,
    #[serde(default)]
    pub labels: LabelSpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub mode: SweepMode,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_tol_amb")]
    pub tol_amb: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

/// A validated cell with concrete weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCell {
    pub n: usize,
    pub spectrum: Spectrum,
    /// `(k, decay)` for trigonometric features.
    pub trig: Option<(usize, f64)>,
}

impl ResolvedCell {
    pub fn d(&self) -> usize {
        self.spectrum.dim()
    }
}

impl SweepConfig {
    pub fn all_cells(&self) -> Vec<CellSpec> {
        let mut cells = self.cells.clone();
        if let Some(g) = &self.grid {
            for &n in &g.n {
                for &d in &g.d {
                    cells.push(CellSpec {
                        n,
                        d: Some(d),
                        spectrum: None,
                    });
                }
            }
        }
        cells
    }

    /// Checks every range before any computation and resolves the cells.
    pub fn validate(&self) -> ConfigResult<Vec<ResolvedCell>> {
        if self.trials == 0 {
            return Err(ConfigError::new("/trials", "trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("/workers", "workers must be at least 1"));
        }
        validate_solver(&self.solver, "/solver")?;
        if !(self.tol_amb >= 0.0 && self.tol_amb < 1.0) {
            return Err(ConfigError::new("/tol_amb", "tol_amb must lie in [0, 1)"));
        }
        let cells = self.all_cells();
        if cells.is_empty() {
            return Err(ConfigError::new("", "no cells: set `cells` or `grid`"));
        }
        let n_explicit = self.cells.len();
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let r = resolve_cell(c, self.spectrum.as_ref(), self.features).map_err(|m| {
                    if i < n_explicit {
                        ConfigError::new(format!("/cells/{i}"), m)
                    } else {
                        let d = c.d.unwrap_or_default();
                        ConfigError::new("/grid", format!("cell (n = {}, d = {d}): {m}", c.n))
                    }
                })?;
                self.labels
                    .check(r.n)
                    .map_err(|m| ConfigError::new("/labels", m))?;
                Ok(r)
            })
            .collect()
    }
}

fn resolve_cell(
    c: &CellSpec,
    default_spectrum: Option<&SpectrumSpec>,
    features: FeatureSpec,
) -> Result<ResolvedCell, String> {
    if c.n == 0 {
        return Err("n must be at least 1".into());
    }
    let spec = c.spectrum.as_ref().or(default_spectrum);
    let spectrum = match spec {
        Some(s) => s.resolve(c.n, c.d)?,
        None => {
            let d = c.d.ok_or("cell needs d or a spectrum")?;
            Spectrum::isotropic(d).map_err(|e| e.to_string())?
        }
    };
    if spectrum.dim() < c.n {
        return Err(format!("d = {} < n = {}; every cell needs d >= n", spectrum.dim(), c.n));
    }
    let trig = spec.and_then(SpectrumSpec::trig_params);
    if features == FeatureSpec::Trig && trig.is_none() {
        return Err("trig features need a {\"kind\": \"trig\"} spectrum".into());
    }
    Ok(ResolvedCell {
        n: c.n,
        spectrum,
        trig: if features == FeatureSpec::Trig { trig } else { None },
    })
}

pub fn validate_solver(s: &SolverOptions, pointer: &str) -> ConfigResult<()> {
    if !(s.tol_kkt > 0.0 && s.tol_kkt < 1.0) {
        return Err(ConfigError::new(format!("{pointer}/tol_kkt"), "tol_kkt must lie in (0, 1)"));
    }
    if !(s.tol_sv > 0.0 && s.tol_sv < 1.0) {
        return Err(ConfigError::new(format!("{pointer}/tol_sv"), "tol_sv must lie in (0, 1)"));
    }
    if s.max_sweeps == 0 {
        return Err(ConfigError::new(format!("{pointer}/max_sweeps"), "max_sweeps must be at least 1"));
    }
    Ok(())
}

/// Dataset generation (`gen`, and the `generate` data source).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub n: usize,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub features: FeatureSpec,
    #[serde(default = "random_signs")]
    pub labels: LabelSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub trial: u64,
}

fn random_signs() -> LabelSpec {
    LabelSpec::RandomSigns
}

impl GenConfig {
    pub fn validate(&self) -> ConfigResult<ResolvedCell> {
        let cell = CellSpec {
            n: self.n,
            d: self.d,
            spectrum: self.spectrum.clone(),
        };
        let r = resolve_cell(&cell, None, self.features).map_err(|m| ConfigError::new("", m))?;
        self.labels
            .check(self.n)
            .map_err(|m| ConfigError::new("/labels", m))?;
        Ok(r)
    }
}

/// Explicit data given in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineData {
    /// Rows of `Z`.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Weights; isotropic (all ones) when absent.
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Inline(InlineData),
    /// Prefix of a dataset written by `gen` (without extension).
    Files { prefix: String },
    Generate(GenConfig),
}

impl InlineData {
    pub fn to_dataset(&self) -> ConfigResult<ensembles::Dataset> {
        let z = Matrix::from_rows(&self.x)
            .filter(|m| m.rows() > 0 && m.cols() > 0)
            .ok_or_else(|| ConfigError::new("/data/inline/x", "rows must be non-empty and of equal length"))?;
        let lambda = self.lambda.clone().unwrap_or_else(|| vec![1.0; z.cols()]);
        let spectrum =
            Spectrum::new(lambda).map_err(|e| ConfigError::new("/data/inline/lambda", e.to_string()))?;
        let f = ensembles::Features::explicit(z, spectrum)
            .map_err(|e| ConfigError::new("/data/inline", e.to_string()))?;
        ensembles::Dataset::new(f, self.y.clone())
            .map_err(|e| ConfigError::new("/data/inline/y", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub data: DataSource,
    #[serde(default)]
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub data: DataSource,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_tol_amb")]
    pub tol_amb: f64,
    /// Condition 3 by explicit refits rather than the closed form.
    #[serde(default)]
    pub direct_loo: bool,
}

fn default_converse_n() -> Vec<usize> {
    vec![50, 100]
}

fn default_converse_ratio() -> Vec<f64> {
    vec![1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverseConfig {
    #[serde(default = "default_converse_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_converse_ratio")]
    pub d_over_n: Vec<f64>,
    /// Explicit `(n, d)` pairs, added to the `n x d_over_n` grid.
    #[serde(default)]
    pub cells: Vec<(usize, usize)>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub labels: LabelSpec,
    #[serde(default = "default_tol_amb")]
    pub tol_amb: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ConverseConfig {
    pub fn validate(&self) -> ConfigResult<Vec<(usize, usize)>> {
        if self.trials == 0 {
            return Err(ConfigError::new("/trials", "trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("/workers", "workers must be at least 1"));
        }
        let mut cells = Vec::new();
        for &n in &self.n {
            for (j, &r) in self.d_over_n.iter().enumerate() {
                if !(r >= 1.0 && r.is_finite()) {
                    return Err(ConfigError::new(format!("/d_over_n/{j}"), "d/n must be at least 1"));
                }
                cells.push((n, (n as f64 * r).round() as usize));
            }
        }
        cells.extend(self.cells.iter().copied());
        for (i, &(n, d)) in cells.iter().enumerate() {
            if n < 2 || d < n {
                return Err(ConfigError::new(
                    format!("/cells/{i}"),
                    format!("cell (n = {n}, d = {d}) needs d >= n >= 2"),
                ));
            }
            self.labels.check(n).map_err(|m| ConfigError::new("/labels", m))?;
        }
        if cells.is_empty() {
            return Err(ConfigError::new("", "no cells"));
        }
        Ok(cells)
    }
}

fn default_deltas() -> Vec<f64> {
    vec![0.05, 0.1, 0.5, 2.0, 5.0]
}

fn default_buhot_n() -> usize {
    50
}

fn one_bit() -> LabelSpec {
    LabelSpec::OneBit
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuhotConfig {
    #[serde(default = "default_deltas")]
    pub delta: Vec<f64>,
    #[serde(default = "default_buhot_n")]
    pub n: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Teacher labels (`one_bit`) keep every instance separable.
    #[serde(default = "one_bit")]
    pub labels: LabelSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Resampling attempts per trial when an instance is not separable.
    #[serde(default = "default_max_resamples")]
    pub max_resamples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_max_resamples() -> u64 {
    100
}

impl BuhotConfig {
    pub fn validate(&self) -> ConfigResult<()> {
        if self.n == 0 {
            return Err(ConfigError::new("/n", "n must be at least 1"));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("/trials", "trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("/workers", "workers must be at least 1"));
        }
        for (i, &d) in self.delta.iter().enumerate() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(ConfigError::new(format!("/delta/{i}"), "delta must be positive"));
            }
        }
        validate_solver(&self.solver, "/solver")?;
        self.labels.check(self.n).map_err(|m| ConfigError::new("/labels", m))
    }
}

fn default_conc_n() -> usize {
    40
}

fn gaussian() -> EntryLaw {
    EntryLaw::Gaussian
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationConfig {
    #[serde(default = "default_conc_n")]
    pub n: usize,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default = "gaussian")]
    pub law: EntryLaw,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ConcentrationConfig {
    pub fn validate(&self) -> ConfigResult<Spectrum> {
        if self.trials == 0 {
            return Err(ConfigError::new("/trials", "trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("/workers", "workers must be at least 1"));
        }
        let d = self.d.or(if self.spectrum.is_none() { Some(20 * self.n) } else { None });
        let cell = CellSpec {
            n: self.n,
            d,
            spectrum: self.spectrum.clone(),
        };
        resolve_cell(&cell, None, FeatureSpec::default())
            .map(|r| r.spectrum)
            .map_err(|m| ConfigError::new("", m))
    }
}

fn default_fig_n() -> usize {
    32
}

fn default_fig_k() -> usize {
    1 << 14
}

fn default_decays() -> Vec<f64> {
    vec![1.0, 3.0]
}

fn default_fig_seeds() -> usize {
    50
}

fn default_curve_points() -> usize {
    512
}

fn default_curve_seeds() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Config {
    #[serde(default = "default_fig_n")]
    pub n: usize,
    #[serde(default = "default_fig_k")]
    pub k: usize,
    #[serde(default = "default_decays")]
    pub decays: Vec<f64>,
    #[serde(default = "default_fig_seeds")]
    pub seeds: usize,
    #[serde(default = "random_signs")]
    pub labels: LabelSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Number of evaluation points on `[0, 2 pi)`.
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
    /// Curves are emitted for the first this-many seeds of each decay.
    #[serde(default = "default_curve_seeds")]
    pub curve_seeds: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl Figure1Config {
    pub fn validate(&self) -> ConfigResult<()> {
        if self.n == 0 {
            return Err(ConfigError::new("/n", "n must be at least 1"));
        }
        if 2 * self.k + 1 < self.n {
            return Err(ConfigError::new("/k", "need 2k + 1 >= n"));
        }
        if self.seeds == 0 {
            return Err(ConfigError::new("/seeds", "seeds must be at least 1"));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("/workers", "workers must be at least 1"));
        }
        for (i, &d) in self.decays.iter().enumerate() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(ConfigError::new(format!("/decays/{i}"), "decay must be positive"));
            }
        }
        validate_solver(&self.solver, "/solver")?;
        self.labels.check(self.n).map_err(|m| ConfigError::new("/labels", m))
    }
}

/// One closed-form bound evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundRequest {
    Thm1 {
        n: usize,
        d2: f64,
        d_inf: f64,
        #[serde(default = "one")]
        v: f64,
        #[serde(default = "one", rename = "C")]
        big_c: f64,
        #[serde(default = "one")]
        c: f64,
    },
    Thm2 {
        n: usize,
        d: usize,
        d_inf: f64,
        #[serde(default = "one", rename = "C")]
        big_c: f64,
        #[serde(default = "one")]
        c: f64,
    },
    Thm3 { n: usize, d: usize },
    Thm4 {
        n: usize,
        spectrum: SpectrumSpec,
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "one")]
        c_prime: f64,
    },
    Buhot { delta: f64 },
}

fn default_bounds() -> Vec<BoundRequest> {
    vec![
        BoundRequest::Thm3 { n: 50, d: 50 },
        BoundRequest::Thm3 { n: 50, d: 100 },
        BoundRequest::Thm3 { n: 100, d: 100 },
        BoundRequest::Buhot { delta: 0.05 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default = "default_bounds")]
    pub requests: Vec<BoundRequest>,
}
