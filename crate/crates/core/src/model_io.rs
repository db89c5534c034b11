//! File formats: JSON for trained models, CSV for datasets, solver grids,
//! and plot-ready tables.
//!
//! # Model files
//!
//! A model file is a single JSON document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "kind": "koopman",
//!   "dictionary": {
//!     "state_dim": 1,
//!     "basis": [{ "family": "gaussian_rbf" }],
//!     "trainable": [true, true]
//!   },
//!   "params": [0.0, -0.91],
//!   "coefficients": { "rows": 1, "cols": 1, "data": [0.99] },
//!   "lag_time": 0.5,
//!   "provenance": { "system": "ou", "seed": 7 }
//! }
//! ```
//!
//! `kind` is one of `koopman`, `sindy`, `pde`. Koopman files carry
//! `lag_time`; PDE files drop the `dictionary` block and instead carry
//! `term_labels` (the library is rebuilt from the labels, and `params`
//! holds the shared nonlinearity parameters). Coefficient matrices are
//! stored row-major. Every numeric field round-trips bit-exactly: values
//! are written in shortest form that parses back to the same 64-bit float,
//! and non-finite numbers are refused on both save and load.
//!
//! # Dataset files
//!
//! Paired training data is CSV with `#`-prefixed metadata lines, then a
//! column-header row, then one row per sample:
//!
//! ```text
//! # system: ou
//! # kind: lagged
//! # d: 1
//! # m: 5000
//! # tau: 0.5
//! # eta: 0.001
//! # seed: 7
//! # param alpha: 1
//! x1,y1
//! 0.25,0.1470799...
//! ```
//!
//! `kind` is `lagged` (y columns are states one lag later, `tau`
//! mandatory) or `derivative` (y columns are time derivatives). Solver
//! grids use `kind: grid` with `nt`/`nx`/`dx`/`dt`/`x0`/`t0` metadata and
//! one row per time slice, no column header.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dictionary::{BasisStructure, Dictionary, DictionaryError};
use crate::koopman::KoopmanModel;
use crate::linalg::{CMatrix, Matrix, Vector};
use crate::optimizers::HistoryRecord;
use crate::simulate::{DatasetMeta, PairKind, TrajectoryData};
use crate::sysid::{GridField, PdeModel, SindyModel};

/// Version written into every model file and required on load.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported schema_version {found}; this reader supports {supported}")]
    Version { found: u64, supported: u32 },
    #[error("model file is missing an integer schema_version field")]
    MissingVersion,
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("model file holds a {found:?} model, expected {expected}")]
    WrongKind { found: ModelKind, expected: &'static str },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("{path}:{line}: expected {expected} columns, found {found}")]
    ColumnCount {
        path: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: unparseable number {token:?}")]
    BadNumber {
        path: String,
        line: usize,
        token: String,
    },
    #[error("non-finite value in data row {row}")]
    NonFiniteRow { row: usize },
    #[error("{path}: no data rows")]
    EmptyDataset { path: String },
    #[error("{path}: missing metadata line `# {key}: ...`")]
    MissingMeta { path: String, key: &'static str },
    #[error("{path}: metadata announces {expected} data rows, file has {found}")]
    RowCount {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
    #[error(transparent)]
    Sysid(#[from] Box<crate::sysid::SysidError>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Koopman,
    Sindy,
    Pde,
}

/// Serialized form of a [`Dictionary`]: structure, trainable mask, no
/// parameter values (those live in the model's `params`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionarySchema {
    pub state_dim: usize,
    pub basis: Vec<BasisStructure>,
    pub trainable: Vec<bool>,
}

/// Row-major dense matrix block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSchema {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixSchema {
    fn from_matrix(m: &Matrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        MatrixSchema {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    fn to_matrix(&self) -> Result<Matrix, ModelIoError> {
        if self.rows * self.cols != self.data.len() {
            return Err(ModelIoError::Malformed(format!(
                "coefficient block says {}x{} but holds {} numbers",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(Matrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

/// Free-form run description stored with a model; never interpreted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Provenance {
    pub system: Option<String>,
    pub seed: Option<u64>,
    pub optimizer: Option<String>,
    pub final_loss_coeff: Option<f64>,
    pub final_loss_param: Option<f64>,
}

/// Top-level model document. Prefer the typed `save_*`/`load_*` helpers;
/// this type is public so callers can dispatch on `kind`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<DictionarySchema>,
    pub params: Vec<f64>,
    pub coefficients: MatrixSchema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_labels: Option<Vec<String>>,
    #[serde(default)]
    pub provenance: Provenance,
}

fn io_err(path: &Path, source: std::io::Error) -> ModelIoError {
    ModelIoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn check_model_finite(file: &ModelFile) -> Result<(), ModelIoError> {
    if file.params.iter().any(|v| !v.is_finite()) {
        return Err(ModelIoError::NonFinite { what: "params" });
    }
    if file.coefficients.data.iter().any(|v| !v.is_finite()) {
        return Err(ModelIoError::NonFinite {
            what: "coefficients",
        });
    }
    if let Some(tau) = file.lag_time {
        if !tau.is_finite() {
            return Err(ModelIoError::NonFinite { what: "lag_time" });
        }
    }
    Ok(())
}

/// Serializes and writes any model document, refusing non-finite numbers.
pub fn write_model_file(file: &ModelFile, path: &Path) -> Result<(), ModelIoError> {
    check_model_finite(file)?;
    let mut text = serde_json::to_string_pretty(file)
        .map_err(|e| ModelIoError::Malformed(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Reads and validates a model document of any kind.
///
/// The version field is checked before anything else is interpreted, so a
/// newer schema fails cleanly with no partial load.
pub fn read_model_file(path: &Path) -> Result<ModelFile, ModelIoError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ModelIoError::Malformed(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or(ModelIoError::MissingVersion)?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(ModelIoError::Version {
            found: version,
            supported: SCHEMA_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| ModelIoError::Malformed(e.to_string()))?;
    check_model_finite(&file)?;
    Ok(file)
}

fn require_dictionary(file: &ModelFile) -> Result<(Dictionary, Vector), ModelIoError> {
    let schema = file
        .dictionary
        .as_ref()
        .ok_or_else(|| ModelIoError::Malformed("model is missing the dictionary block".into()))?;
    let dict = Dictionary::from_parts(
        schema.state_dim,
        schema.basis.clone(),
        schema.trainable.clone(),
    )?;
    if file.params.len() != dict.param_len() {
        return Err(ModelIoError::Malformed(format!(
            "params has length {}, dictionary expects {}",
            file.params.len(),
            dict.param_len()
        )));
    }
    Ok((dict, Vector::from_vec(file.params.clone())))
}

fn dictionary_schema(dict: &Dictionary) -> DictionarySchema {
    DictionarySchema {
        state_dim: dict.state_dim(),
        basis: dict.basis().to_vec(),
        trainable: dict.trainable().to_vec(),
    }
}

pub fn save_koopman_model(
    model: &KoopmanModel,
    provenance: &Provenance,
    path: &Path,
) -> Result<(), ModelIoError> {
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        kind: ModelKind::Koopman,
        dictionary: Some(dictionary_schema(&model.dictionary)),
        params: model.params.iter().cloned().collect(),
        coefficients: MatrixSchema::from_matrix(&model.k),
        lag_time: Some(model.lag_time),
        term_labels: None,
        provenance: provenance.clone(),
    };
    write_model_file(&file, path)
}

pub fn load_koopman_model(path: &Path) -> Result<(KoopmanModel, Provenance), ModelIoError> {
    let file = read_model_file(path)?;
    if file.kind != ModelKind::Koopman {
        return Err(ModelIoError::WrongKind {
            found: file.kind,
            expected: "koopman",
        });
    }
    let (dictionary, params) = require_dictionary(&file)?;
    let k = file.coefficients.to_matrix()?;
    if k.nrows() != dictionary.len() || k.ncols() != dictionary.len() {
        return Err(ModelIoError::Malformed(format!(
            "operator is {}x{}, dictionary has {} functions",
            k.nrows(),
            k.ncols(),
            dictionary.len()
        )));
    }
    let lag_time = file
        .lag_time
        .ok_or_else(|| ModelIoError::Malformed("koopman model is missing lag_time".into()))?;
    Ok((
        KoopmanModel {
            dictionary,
            params,
            k,
            lag_time,
        },
        file.provenance,
    ))
}

pub fn save_sindy_model(
    model: &SindyModel,
    provenance: &Provenance,
    path: &Path,
) -> Result<(), ModelIoError> {
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        kind: ModelKind::Sindy,
        dictionary: Some(dictionary_schema(&model.dictionary)),
        params: model.params.iter().cloned().collect(),
        coefficients: MatrixSchema::from_matrix(&model.xi),
        lag_time: None,
        term_labels: None,
        provenance: provenance.clone(),
    };
    write_model_file(&file, path)
}

pub fn load_sindy_model(path: &Path) -> Result<(SindyModel, Provenance), ModelIoError> {
    let file = read_model_file(path)?;
    if file.kind != ModelKind::Sindy {
        return Err(ModelIoError::WrongKind {
            found: file.kind,
            expected: "sindy",
        });
    }
    let (dictionary, params) = require_dictionary(&file)?;
    let xi = file.coefficients.to_matrix()?;
    if xi.nrows() != dictionary.len() {
        return Err(ModelIoError::Malformed(format!(
            "coefficients have {} rows, dictionary has {} functions",
            xi.nrows(),
            dictionary.len()
        )));
    }
    Ok((
        SindyModel {
            dictionary,
            params,
            xi,
        },
        file.provenance,
    ))
}

pub fn save_pde_model(
    model: &PdeModel,
    provenance: &Provenance,
    path: &Path,
) -> Result<(), ModelIoError> {
    let xi = Matrix::from_column_slice(model.xi.len(), 1, model.xi.as_slice());
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        kind: ModelKind::Pde,
        dictionary: None,
        params: model.w.iter().cloned().collect(),
        coefficients: MatrixSchema::from_matrix(&xi),
        lag_time: None,
        term_labels: Some(model.labels.clone()),
        provenance: provenance.clone(),
    };
    write_model_file(&file, path)
}

pub fn load_pde_model(path: &Path) -> Result<(PdeModel, Provenance), ModelIoError> {
    let file = read_model_file(path)?;
    if file.kind != ModelKind::Pde {
        return Err(ModelIoError::WrongKind {
            found: file.kind,
            expected: "pde",
        });
    }
    let labels = file
        .term_labels
        .clone()
        .ok_or_else(|| ModelIoError::Malformed("pde model is missing term_labels".into()))?;
    let xi = file.coefficients.to_matrix()?;
    if xi.ncols() != 1 || xi.nrows() != labels.len() {
        return Err(ModelIoError::Malformed(format!(
            "coefficients are {}x{}, expected {}x1 to match the term labels",
            xi.nrows(),
            xi.ncols(),
            labels.len()
        )));
    }
    Ok((
        PdeModel {
            xi: xi.column(0).into_owned(),
            w: Vector::from_vec(file.params.clone()),
            labels,
        },
        file.provenance,
    ))
}

/// Shortest decimal form that parses back to exactly the same float.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn meta_lines(meta: &DatasetMeta, out: &mut String) {
    for (name, value) in &meta.params {
        let _ = writeln!(out, "# param {name}: {}", fmt_f64(*value));
    }
    if let Some(eta) = meta.eta {
        let _ = writeln!(out, "# eta: {}", fmt_f64(eta));
    }
    if let Some(seed) = meta.seed {
        let _ = writeln!(out, "# seed: {seed}");
    }
}

/// Writes paired training data as CSV (see the module docs for the layout).
pub fn write_dataset(data: &TrajectoryData, path: &Path) -> Result<(), ModelIoError> {
    let d = data.x.nrows();
    let m = data.x.ncols();
    for (j, col) in data.x.column_iter().chain(data.y.column_iter()).enumerate() {
        if col.iter().any(|v| !v.is_finite()) {
            return Err(ModelIoError::NonFiniteRow { row: j % m });
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "# system: {}", data.meta.system);
    match data.kind {
        PairKind::Lagged { tau } => {
            let _ = writeln!(out, "# kind: lagged");
            let _ = writeln!(out, "# d: {d}");
            let _ = writeln!(out, "# m: {m}");
            let _ = writeln!(out, "# tau: {}", fmt_f64(tau));
        }
        PairKind::Derivative => {
            let _ = writeln!(out, "# kind: derivative");
            let _ = writeln!(out, "# d: {d}");
            let _ = writeln!(out, "# m: {m}");
        }
    }
    meta_lines(&data.meta, &mut out);
    let mut header = Vec::with_capacity(2 * d);
    for k in 1..=d {
        header.push(format!("x{k}"));
    }
    for k in 1..=d {
        match data.kind {
            PairKind::Lagged { .. } => header.push(format!("y{k}")),
            PairKind::Derivative => header.push(format!("dx{k}")),
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    let mut fields = Vec::with_capacity(2 * d);
    for j in 0..m {
        fields.clear();
        for i in 0..d {
            fields.push(fmt_f64(data.x[(i, j)]));
        }
        for i in 0..d {
            fields.push(fmt_f64(data.y[(i, j)]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

struct MetaBlock {
    system: Option<String>,
    kind: Option<String>,
    d: Option<usize>,
    m: Option<usize>,
    nt: Option<usize>,
    nx: Option<usize>,
    tau: Option<f64>,
    eta: Option<f64>,
    seed: Option<u64>,
    dx: Option<f64>,
    dt: Option<f64>,
    x0: Option<f64>,
    t0: Option<f64>,
    params: Vec<(String, f64)>,
}

fn parse_meta_line(
    block: &mut MetaBlock,
    body: &str,
    path: &str,
    line_no: usize,
) -> Result<(), ModelIoError> {
    let Some((key, value)) = body.split_once(':') else {
        // comment line without a key; ignored
        return Ok(());
    };
    let key = key.trim();
    let value = value.trim();
    let bad = |token: &str| ModelIoError::BadNumber {
        path: path.to_string(),
        line: line_no,
        token: token.to_string(),
    };
    let parse_f64 = |v: &str| v.parse::<f64>().map_err(|_| bad(v));
    let parse_usize = |v: &str| v.parse::<usize>().map_err(|_| bad(v));
    match key {
        "system" => block.system = Some(value.to_string()),
        "kind" => block.kind = Some(value.to_string()),
        "d" => block.d = Some(parse_usize(value)?),
        "m" => block.m = Some(parse_usize(value)?),
        "nt" => block.nt = Some(parse_usize(value)?),
        "nx" => block.nx = Some(parse_usize(value)?),
        "tau" => block.tau = Some(parse_f64(value)?),
        "eta" => block.eta = Some(parse_f64(value)?),
        "seed" => block.seed = Some(value.parse::<u64>().map_err(|_| bad(value))?),
        "dx" => block.dx = Some(parse_f64(value)?),
        "dt" => block.dt = Some(parse_f64(value)?),
        "x0" => block.x0 = Some(parse_f64(value)?),
        "t0" => block.t0 = Some(parse_f64(value)?),
        _ => {
            if let Some(name) = key.strip_prefix("param ") {
                block.params.push((name.trim().to_string(), parse_f64(value)?));
            }
            // unrecognized metadata keys are skipped so future writers can
            // annotate freely without breaking old readers
        }
    }
    Ok(())
}

fn split_rows(
    text: &str,
    path: &str,
) -> Result<(MetaBlock, Vec<(usize, Vec<f64>)>), ModelIoError> {
    let mut block = MetaBlock {
        system: None,
        kind: None,
        d: None,
        m: None,
        nt: None,
        nx: None,
        tau: None,
        eta: None,
        seed: None,
        dx: None,
        dt: None,
        x0: None,
        t0: None,
        params: Vec::new(),
    };
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(body) = line.strip_prefix('#') {
            parse_meta_line(&mut block, body.trim(), path, line_no)?;
            continue;
        }
        // the first plain row may be a textual column header
        if !header_seen {
            header_seen = true;
            let first_field = line.split(',').next().unwrap_or("");
            if first_field.trim().parse::<f64>().is_err() {
                continue;
            }
        }
        let mut values = Vec::new();
        for token in line.split(',') {
            let token = token.trim();
            let v = token.parse::<f64>().map_err(|_| ModelIoError::BadNumber {
                path: path.to_string(),
                line: line_no,
                token: token.to_string(),
            })?;
            values.push(v);
        }
        rows.push((line_no, values));
    }
    Ok((block, rows))
}

fn require_meta<T>(
    value: Option<T>,
    key: &'static str,
    path: &str,
) -> Result<T, ModelIoError> {
    value.ok_or(ModelIoError::MissingMeta {
        path: path.to_string(),
        key,
    })
}

/// Reads a paired dataset written by [`write_dataset`].
///
/// Values round-trip bit-exactly; malformed rows fail with the file line,
/// non-finite entries fail with the data-row index.
pub fn read_dataset(path: &Path) -> Result<TrajectoryData, ModelIoError> {
    let path_str = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let (block, rows) = split_rows(&text, &path_str)?;
    let kind_tag = require_meta(block.kind.clone(), "kind", &path_str)?;
    let kind = match kind_tag.as_str() {
        "lagged" => PairKind::Lagged {
            tau: require_meta(block.tau, "tau", &path_str)?,
        },
        "derivative" => PairKind::Derivative,
        other => {
            return Err(ModelIoError::Malformed(format!(
                "unknown dataset kind {other:?} in {path_str}"
            )))
        }
    };
    let d = require_meta(block.d, "d", &path_str)?;
    if rows.is_empty() {
        return Err(ModelIoError::EmptyDataset { path: path_str });
    }
    if let Some(m) = block.m {
        if m != rows.len() {
            return Err(ModelIoError::RowCount {
                path: path_str,
                expected: m,
                found: rows.len(),
            });
        }
    }
    let m = rows.len();
    let mut x = Matrix::zeros(d, m);
    let mut y = Matrix::zeros(d, m);
    for (j, (line_no, values)) in rows.iter().enumerate() {
        if values.len() != 2 * d {
            return Err(ModelIoError::ColumnCount {
                path: path_str,
                line: *line_no,
                expected: 2 * d,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelIoError::NonFiniteRow { row: j });
        }
        for i in 0..d {
            x[(i, j)] = values[i];
            y[(i, j)] = values[d + i];
        }
    }
    let meta = DatasetMeta {
        system: block.system.unwrap_or_default(),
        params: block.params,
        seed: block.seed,
        eta: block.eta,
    };
    TrajectoryData::new(x, y, kind, meta)
        .map_err(|e| ModelIoError::Malformed(e.to_string()))
}

/// Writes a space-time solution grid (rows are time slices).
pub fn write_grid(
    field: &GridField,
    meta: &DatasetMeta,
    path: &Path,
) -> Result<(), ModelIoError> {
    if field.values.iter().any(|v| !v.is_finite()) {
        return Err(ModelIoError::NonFinite { what: "grid values" });
    }
    let mut out = String::new();
    let _ = writeln!(out, "# system: {}", meta.system);
    let _ = writeln!(out, "# kind: grid");
    let _ = writeln!(out, "# nt: {}", field.nt());
    let _ = writeln!(out, "# nx: {}", field.nx());
    let _ = writeln!(out, "# dx: {}", fmt_f64(field.dx));
    let _ = writeln!(out, "# dt: {}", fmt_f64(field.dt));
    let _ = writeln!(out, "# x0: {}", fmt_f64(field.x0));
    let _ = writeln!(out, "# t0: {}", fmt_f64(field.t0));
    meta_lines(meta, &mut out);
    let mut fields = Vec::with_capacity(field.nx());
    for i in 0..field.nt() {
        fields.clear();
        for j in 0..field.nx() {
            fields.push(fmt_f64(field.values[(i, j)]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Reads a grid written by [`write_grid`].
pub fn read_grid(path: &Path) -> Result<(GridField, DatasetMeta), ModelIoError> {
    let path_str = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let (block, rows) = split_rows(&text, &path_str)?;
    match block.kind.as_deref() {
        Some("grid") => {}
        Some(other) => {
            return Err(ModelIoError::Malformed(format!(
                "expected a grid file, found kind {other:?} in {path_str}"
            )))
        }
        None => {
            return Err(ModelIoError::MissingMeta {
                path: path_str,
                key: "kind",
            })
        }
    }
    let nt = require_meta(block.nt, "nt", &path_str)?;
    let nx = require_meta(block.nx, "nx", &path_str)?;
    let dx = require_meta(block.dx, "dx", &path_str)?;
    let dt = require_meta(block.dt, "dt", &path_str)?;
    let x0 = require_meta(block.x0, "x0", &path_str)?;
    let t0 = require_meta(block.t0, "t0", &path_str)?;
    if rows.is_empty() {
        return Err(ModelIoError::EmptyDataset { path: path_str });
    }
    if rows.len() != nt {
        return Err(ModelIoError::RowCount {
            path: path_str,
            expected: nt,
            found: rows.len(),
        });
    }
    let mut values = Matrix::zeros(nt, nx);
    for (i, (line_no, row)) in rows.iter().enumerate() {
        if row.len() != nx {
            return Err(ModelIoError::ColumnCount {
                path: path_str,
                line: *line_no,
                expected: nx,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ModelIoError::NonFiniteRow { row: i });
        }
        for (j, &v) in row.iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    let meta = DatasetMeta {
        system: block.system.unwrap_or_default(),
        params: block.params,
        seed: block.seed,
        eta: block.eta,
    };
    let field = GridField::new(values, dx, dt, x0, t0).map_err(Box::new)?;
    Ok((field, meta))
}

/// Per-iteration optimization trace as CSV.
pub fn write_history(history: &[HistoryRecord], path: &Path) -> Result<(), ModelIoError> {
    let mut out =
        String::from("iteration,loss_coeff,loss_param,grad_coeff_norm,grad_param_norm\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration,
            fmt_f64(r.loss_coeff),
            fmt_f64(r.loss_param),
            fmt_f64(r.grad_coeff_norm),
            fmt_f64(r.grad_param_norm)
        );
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// One-parameter loss landscape as CSV rows of `value,loss`.
pub fn write_landscape(points: &[(f64, f64)], path: &Path) -> Result<(), ModelIoError> {
    let mut out = String::from("value,loss\n");
    for (v, loss) in points {
        let _ = writeln!(out, "{},{}", fmt_f64(*v), fmt_f64(*loss));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Eigenvalue table as CSV rows of `index,re,im,modulus` (index 1-based,
/// rows in the spectrum's modulus-descending order).
pub fn write_eigenvalues(eigenvalues: &[Complex64], path: &Path) -> Result<(), ModelIoError> {
    let mut out = String::from("index,re,im,modulus\n");
    for (i, l) in eigenvalues.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            fmt_f64(l.re),
            fmt_f64(l.im),
            fmt_f64(l.norm())
        );
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Eigenfunction values on a grid of states.
///
/// `points` is `d x g`; `values` is `modes x g` as produced by the spectral
/// decomposition. Columns: the state coordinates, then `phi{i}_re,phi{i}_im`
/// per mode.
pub fn write_eigenfunctions(
    points: &Matrix,
    values: &CMatrix,
    path: &Path,
) -> Result<(), ModelIoError> {
    let d = points.nrows();
    let g = points.ncols();
    if values.ncols() != g {
        return Err(ModelIoError::Malformed(format!(
            "eigenfunction block has {} columns, grid has {g} points",
            values.ncols()
        )));
    }
    let modes = values.nrows();
    let mut header = Vec::with_capacity(d + 2 * modes);
    for k in 1..=d {
        header.push(format!("x{k}"));
    }
    for i in 1..=modes {
        header.push(format!("phi{i}_re"));
        header.push(format!("phi{i}_im"));
    }
    let mut out = header.join(",");
    out.push('\n');
    let mut fields = Vec::with_capacity(d + 2 * modes);
    for j in 0..g {
        fields.clear();
        for i in 0..d {
            fields.push(fmt_f64(points[(i, j)]));
        }
        for i in 0..modes {
            fields.push(fmt_f64(values[(i, j)].re));
            fields.push(fmt_f64(values[(i, j)].im));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::BasisSpec;
    use approx::assert_relative_eq;
    use tempfile::tempdir;

    fn awkward_values(n: usize, seed: u64) -> Vec<f64> {
        // bit-twiddled values exercising many mantissa patterns
        (0..n)
            .map(|i| {
                let bits = (seed
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add((i as u64).wrapping_mul(1442695040888963407)))
                    >> 12;
                f64::from_bits(bits | 0x3ff0000000000000) - 1.5
            })
            .collect()
    }

    fn sample_koopman() -> KoopmanModel {
        let (dictionary, params) = Dictionary::build(
            1,
            &[
                BasisSpec::Constant,
                BasisSpec::GaussianRbf {
                    center: vec![0.3],
                    bandwidth: 0.7,
                },
                BasisSpec::GaussianRbf {
                    center: vec![-1.1],
                    bandwidth: 0.4,
                },
            ],
        )
        .unwrap();
        let vals = awkward_values(9, 3);
        KoopmanModel {
            dictionary,
            params,
            k: Matrix::from_row_slice(3, 3, &vals),
            lag_time: 0.5,
        }
    }

    #[test]
    fn koopman_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = sample_koopman();
        let prov = Provenance {
            system: Some("ou".into()),
            seed: Some(7),
            optimizer: Some("adam".into()),
            final_loss_coeff: Some(1.0 / 3.0),
            final_loss_param: Some(0.1),
        };
        save_koopman_model(&model, &prov, &path).unwrap();
        let (loaded, prov2) = load_koopman_model(&path).unwrap();
        assert_eq!(loaded.k, model.k);
        assert_eq!(loaded.params, model.params);
        assert_eq!(loaded.lag_time, model.lag_time);
        assert_eq!(loaded.dictionary, model.dictionary);
        assert_eq!(prov2, prov);
    }

    #[test]
    fn koopman_round_trip_preserves_eigenvalues() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = sample_koopman();
        save_koopman_model(&model, &Provenance::default(), &path).unwrap();
        let (loaded, _) = load_koopman_model(&path).unwrap();
        let a = model.spectral().unwrap();
        let b = loaded.spectral().unwrap();
        assert_eq!(a.spectrum.eigenvalues, b.spectrum.eigenvalues);
    }

    #[test]
    fn sindy_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let (dictionary, params) = Dictionary::build(
            2,
            &[
                BasisSpec::Coordinate(0),
                BasisSpec::Coordinate(1),
                BasisSpec::SineFreq {
                    frequency: vec![1.2, 0.0],
                    phase: 0.0,
                },
            ],
        )
        .unwrap();
        let model = SindyModel {
            dictionary,
            params,
            xi: Matrix::from_row_slice(3, 2, &awkward_values(6, 11)),
        };
        save_sindy_model(&model, &Provenance::default(), &path).unwrap();
        let (loaded, _) = load_sindy_model(&path).unwrap();
        assert_eq!(loaded.xi, model.xi);
        assert_eq!(loaded.params, model.params);
        assert_eq!(loaded.dictionary, model.dictionary);
    }

    #[test]
    fn pde_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = PdeModel {
            xi: Vector::from_vec(awkward_values(2, 5)),
            w: Vector::from_vec(vec![-1.095]),
            labels: vec!["exp(chi*u)*u_x^2".into(), "exp(chi*u)*u_xx".into()],
        };
        save_pde_model(&model, &Provenance::default(), &path).unwrap();
        let (loaded, _) = load_pde_model(&path).unwrap();
        assert_eq!(loaded.xi, model.xi);
        assert_eq!(loaded.w, model.w);
        assert_eq!(loaded.labels, model.labels);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_koopman_model(&sample_koopman(), &Provenance::default(), &path).unwrap();
        assert!(matches!(
            load_sindy_model(&path),
            Err(ModelIoError::WrongKind {
                found: ModelKind::Koopman,
                expected: "sindy"
            })
        ));
    }

    #[test]
    fn newer_schema_version_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let text = r#"{ "schema_version": 2, "kind": "koopman", "params": [],
            "coefficients": { "rows": 0, "cols": 0, "data": [] } }"#;
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_model_file(&path),
            Err(ModelIoError::Version {
                found: 2,
                supported: 1
            })
        ));
    }

    #[test]
    fn missing_schema_version_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, "{}").unwrap();
        assert!(matches!(
            read_model_file(&path),
            Err(ModelIoError::MissingVersion)
        ));
    }

    #[test]
    fn unknown_basis_family_error_names_the_tag() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let text = r#"{
            "schema_version": 1,
            "kind": "koopman",
            "dictionary": {
                "state_dim": 1,
                "basis": [{ "family": "wavelet" }],
                "trainable": []
            },
            "params": [],
            "coefficients": { "rows": 1, "cols": 1, "data": [1.0] },
            "lag_time": 0.5
        }"#;
        std::fs::write(&path, text).unwrap();
        match read_model_file(&path) {
            Err(ModelIoError::Malformed(msg)) => assert!(msg.contains("wavelet"), "{msg}"),
            other => panic!("expected a malformed-file error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_model_refused_on_save() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut model = sample_koopman();
        model.k[(0, 0)] = f64::NAN;
        assert!(matches!(
            save_koopman_model(&model, &Provenance::default(), &path),
            Err(ModelIoError::NonFinite {
                what: "coefficients"
            })
        ));
        assert!(!path.exists());
    }

    #[test]
    fn overflowing_literal_refused_on_load() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let text = r#"{
            "schema_version": 1,
            "kind": "pde",
            "params": [1e999],
            "coefficients": { "rows": 0, "cols": 0, "data": [] },
            "term_labels": []
        }"#;
        std::fs::write(&path, text).unwrap();
        // the JSON parser rejects out-of-range literals before the finite
        // check ever sees them; either way the load must fail cleanly
        assert!(matches!(
            read_model_file(&path),
            Err(ModelIoError::Malformed(_) | ModelIoError::NonFinite { .. })
        ));
    }

    #[test]
    fn malformed_json_is_reported() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, "{ definitely not json").unwrap();
        assert!(matches!(
            read_model_file(&path),
            Err(ModelIoError::Malformed(_))
        ));
    }

    fn sample_dataset(kind: PairKind) -> TrajectoryData {
        let vals = awkward_values(2 * 2 * 50, 99);
        let x = Matrix::from_row_slice(2, 50, &vals[..100]);
        let y = Matrix::from_row_slice(2, 50, &vals[100..]);
        TrajectoryData::new(
            x,
            y,
            kind,
            DatasetMeta {
                system: "chua".into(),
                params: vec![("alpha".into(), 10.2), ("beta".into(), 14.286)],
                seed: Some(7),
                eta: Some(0.005),
            },
        )
        .unwrap()
    }

    #[test]
    fn dataset_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        for kind in [PairKind::Lagged { tau: 0.5 }, PairKind::Derivative] {
            let path = dir.path().join("data.csv");
            let data = sample_dataset(kind);
            write_dataset(&data, &path).unwrap();
            let loaded = read_dataset(&path).unwrap();
            assert_eq!(loaded.x, data.x);
            assert_eq!(loaded.y, data.y);
            assert_eq!(loaded.kind, data.kind);
            assert_eq!(loaded.meta, data.meta);
        }
    }

    #[test]
    fn dataset_nan_rejected_with_row_index() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let text = "# kind: derivative\n# d: 1\nx1,dx1\n0.5,1.0\nNaN,2.0\n";
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(ModelIoError::NonFiniteRow { row: 1 })
        ));
    }

    #[test]
    fn dataset_column_mismatch_reports_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let text = "# kind: derivative\n# d: 2\nx1,x2,dx1,dx2\n1,2,3,4\n1,2,3\n";
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(ModelIoError::ColumnCount {
                line: 5,
                expected: 4,
                found: 3,
                ..
            })
        ));
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "# kind: derivative\n# d: 1\nx1,dx1\n").unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(ModelIoError::EmptyDataset { .. })
        ));
    }

    #[test]
    fn dataset_row_count_cross_checked_against_metadata() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let text = "# kind: derivative\n# d: 1\n# m: 3\nx1,dx1\n1,2\n3,4\n";
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(ModelIoError::RowCount {
                expected: 3,
                found: 2,
                ..
            })
        ));
    }

    #[test]
    fn lagged_dataset_requires_tau() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "# kind: lagged\n# d: 1\nx1,y1\n1,2\n").unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(ModelIoError::MissingMeta { key: "tau", .. })
        ));
    }

    #[test]
    fn grid_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        let values = Matrix::from_row_slice(5, 6, &awkward_values(30, 21));
        let field = GridField::new(values, 0.02, 0.1, 1.0, 0.0).unwrap();
        let meta = DatasetMeta {
            system: "heat".into(),
            params: vec![("kappa0".into(), 0.1), ("chi".into(), -1.0)],
            seed: None,
            eta: None,
        };
        write_grid(&field, &meta, &path).unwrap();
        let (loaded, meta2) = read_grid(&path).unwrap();
        assert_eq!(loaded.values, field.values);
        assert_eq!(loaded.dx, field.dx);
        assert_eq!(loaded.dt, field.dt);
        assert_eq!(loaded.x0, field.x0);
        assert_eq!(loaded.t0, field.t0);
        assert_eq!(meta2, meta);
    }

    #[test]
    fn history_and_landscape_files_have_expected_shape() {
        let dir = tempdir().unwrap();
        let hist_path = dir.path().join("history.csv");
        let history = vec![
            HistoryRecord {
                iteration: 0,
                loss_coeff: 1.5,
                loss_param: 2.5,
                grad_coeff_norm: 0.25,
                grad_param_norm: 0.125,
            },
            HistoryRecord {
                iteration: 1,
                loss_coeff: 0.75,
                loss_param: 2.75,
                grad_coeff_norm: 0.2,
                grad_param_norm: 0.1,
            },
        ];
        write_history(&history, &hist_path).unwrap();
        let text = std::fs::read_to_string(&hist_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "iteration,loss_coeff,loss_param,grad_coeff_norm,grad_param_norm"
        );
        assert_eq!(lines[2], "1,0.75,2.75,0.2,0.1");

        let scan_path = dir.path().join("scan.csv");
        write_landscape(&[(0.2, 3.5), (0.3, 1.25)], &scan_path).unwrap();
        let text = std::fs::read_to_string(&scan_path).unwrap();
        assert_eq!(text, "value,loss\n0.2,3.5\n0.3,1.25\n");
    }

    #[test]
    fn eigenvalue_and_eigenfunction_tables() {
        let dir = tempdir().unwrap();
        let eig_path = dir.path().join("eigs.csv");
        let eigs = vec![Complex64::new(1.0, 0.0), Complex64::new(0.3, -0.4)];
        write_eigenvalues(&eigs, &eig_path).unwrap();
        let text = std::fs::read_to_string(&eig_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,re,im,modulus");
        assert_eq!(lines[1], "1,1,0,1");
        assert_eq!(lines[2], "2,0.3,-0.4,0.5");

        let fun_path = dir.path().join("phi.csv");
        let points = Matrix::from_row_slice(1, 3, &[-1.0, 0.0, 1.0]);
        let values = CMatrix::from_row_slice(
            2,
            3,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(0.5, -0.5),
                Complex64::new(0.25, 0.0),
                Complex64::new(0.125, 0.5),
            ],
        );
        write_eigenfunctions(&points, &values, &fun_path).unwrap();
        let text = std::fs::read_to_string(&fun_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,phi1_re,phi1_im,phi2_re,phi2_im");
        assert_eq!(lines[1], "-1,1,0,0.5,-0.5");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn shortest_form_survives_display_parse_cycle() {
        for v in awkward_values(200, 17) {
            let parsed: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
        assert_relative_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
