//! Dataset and table files.
//!
//! A dataset is stored as `<prefix>.csv` (header `y,z0,...,z{d-1}`, one row
//! per example) plus a `<prefix>.json` sidecar with the spectrum and
//! provenance. Floats are written with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use svprolif_core::ensembles::{Dataset, FeatureKind, Features, LabelModel, SeedRecord};
use svprolif_core::linalg::Matrix;
use svprolif_core::spectra::Spectrum;

#[derive(Debug)]
pub enum IoError {
    Io { path: PathBuf, source: std::io::Error },
    Csv { path: PathBuf, source: csv::Error },
    Json { path: PathBuf, source: serde_json::Error },
    Format { path: PathBuf, message: String },
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            IoError::Csv { path, source } => write!(f, "{}: {source}", path.display()),
            IoError::Json { path, source } => write!(f, "{}: {source}", path.display()),
            IoError::Format { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for IoError {}

pub type IoResult<T> = Result<T, IoError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Shortest fixed-width exact representation used in every CSV we write.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn ensure_dir(dir: &Path) -> IoResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> IoResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> IoResult<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Serialises `rows` as CSV with a header from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> IoResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes a header and pre-formatted rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> IoResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Matrix as CSV without a header.
pub fn write_matrix(path: &Path, m: &Matrix) -> IoResult<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
    for row in m.iter_rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(f, "{}", line.join(",")).map_err(io_err(path))?;
    }
    f.flush().map_err(io_err(path))
}

/// Sidecar metadata for a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub n: usize,
    pub d: usize,
    pub spectrum: Spectrum,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedRecord>,
    pub label_model: LabelModel,
}

pub fn dataset_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let mut csv = prefix.as_os_str().to_owned();
    csv.push(".csv");
    let mut json = prefix.as_os_str().to_owned();
    json.push(".json");
    (PathBuf::from(csv), PathBuf::from(json))
}

pub fn write_dataset(prefix: &Path, ds: &Dataset) -> IoResult<(PathBuf, PathBuf)> {
    let (csv_path, json_path) = dataset_paths(prefix);
    let mut header = vec!["y".to_string()];
    header.extend((0..ds.d()).map(|j| format!("z{j}")));
    let rows: Vec<Vec<String>> = (0..ds.n())
        .map(|i| {
            let mut r = vec![fmt_f64(ds.y()[i])];
            r.extend(ds.z().row(i).iter().map(|&v| fmt_f64(v)));
            r
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(&csv_path, &header_refs, &rows)?;
    let f = ds.features();
    let meta = DatasetMeta {
        n: ds.n(),
        d: ds.d(),
        spectrum: ds.spectrum().clone(),
        kind: f.kind(),
        inputs: f.inputs().map(<[f64]>::to_vec),
        seed: f.seed(),
        label_model: ds.label_model().clone(),
    };
    write_json(&json_path, &meta)?;
    Ok((csv_path, json_path))
}

pub fn read_dataset(prefix: &Path) -> IoResult<Dataset> {
    let (csv_path, json_path) = dataset_paths(prefix);
    let meta: DatasetMeta = read_json(&json_path)?;
    let bad = |message: String| IoError::Format {
        path: csv_path.clone(),
        message,
    };
    let mut rdr = csv::Reader::from_path(&csv_path).map_err(csv_err(&csv_path))?;
    let width = rdr.headers().map_err(csv_err(&csv_path))?.len();
    if width != meta.d + 1 {
        return Err(bad(format!("expected {} columns, found {width}", meta.d + 1)));
    }
    let mut y = Vec::with_capacity(meta.n);
    let mut data = Vec::with_capacity(meta.n * meta.d);
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(&csv_path))?;
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}, column {col}: not a number: {field:?}", line + 1)))?;
            if col == 0 {
                y.push(v);
            } else {
                data.push(v);
            }
        }
    }
    if y.len() != meta.n {
        return Err(bad(format!("expected {} rows, found {}", meta.n, y.len())));
    }
    let z = Matrix::from_vec(meta.n, meta.d, data).ok_or_else(|| bad("ragged rows".into()))?;
    let features = Features::explicit(z, meta.spectrum)
        .map_err(|e| bad(e.to_string()))?
        .with_provenance(meta.kind, meta.inputs, meta.seed);
    Dataset::new(features, y).map_err(|e| bad(e.to_string()))
}
