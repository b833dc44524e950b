//! On-disk formats.
//!
//! * Trajectory CSV: header `t,x1,...,xn`, one sample per row.
//! * Dataset manifest (`manifest.toml`): dimension, count, generation
//!   parameters and the list of trajectory CSVs relative to the manifest.
//! * Model file (TOML): method, `λ`, `μ_r`, quadrature rule, the
//!   coefficient matrix row by row and a reference to its training dataset.
//! * Sweep table (`.dat`): `#` comments, then `lambda okr_err sldmd_err`.
//!
//! Every float is written with 17 significant digits, so finite values
//! survive a round trip bit for bit.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::DatasetSpec;
use crate::error::{Error, Result};
use crate::estimators::{Method, Model, OccupationBasis};
use crate::kernel::KernelParams;
use crate::sweep::SweepRow;
use crate::trajectory::{QuadratureRule, QuadratureSpec, Trajectory};

pub const DATASET_FORMAT: &str = "liouville-dmd-dataset";
pub const MODEL_FORMAT: &str = "liouville-dmd-model";
pub const MANIFEST_NAME: &str = "manifest.toml";

/// Formats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn schema_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn toml_err(path: &Path, text: &str, err: toml::de::Error) -> Error {
    let line = err
        .span()
        .map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
    parse_err(path, line, err.message().to_string())
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for i in 1..=traj.dim() {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    for (t, s) in traj.times().iter().zip(traj.states()) {
        out.push_str(&fmt_f64(*t));
        for v in s {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    write_string(path, &trajectory_csv(traj))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let text = read_to_string(path)?;
    parse_trajectory_csv(&text, path)
}

/// Parses trajectory CSV text; `path` is used only in error messages.
pub fn parse_trajectory_csv(text: &str, path: &Path) -> Result<Trajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let dim = header.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=dim).map(|i| format!("x{i}")))
        .collect();
    if dim == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(parse_err(
            path,
            1,
            format!("header must be `t,x1,...,xn`, got `{}`", header.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut times = Vec::new();
    let mut states = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut values = Vec::with_capacity(record.len());
        for field in &record {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        let t = values[0];
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(parse_err(
                    path,
                    line,
                    format!("time {t} does not increase past {prev}"),
                ));
            }
        }
        times.push(t);
        states.extend_from_slice(&values[1..]);
    }
    Trajectory::from_flat(times, dim, states).map_err(|e| schema_err(path, e.to_string()))
}

/// How a dataset was produced, when it came from a built-in system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub system: String,
    pub grid_min: Vec<f64>,
    pub grid_max: Vec<f64>,
    pub grid_counts: Vec<usize>,
    pub duration: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub n: usize,
    pub m: usize,
    pub noise_std: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<Generation>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn describe(trajs: &[Trajectory], spec: Option<&DatasetSpec>) -> Self {
        Self {
            format: DATASET_FORMAT.to_string(),
            n: trajs.first().map_or(0, Trajectory::dim),
            m: trajs.len(),
            noise_std: spec.map_or(0.0, |s| s.noise_std),
            seed: spec.map_or(0, |s| s.seed),
            generation: spec.map(|s| Generation {
                system: s.system.name().to_string(),
                grid_min: s.grid.min.clone(),
                grid_max: s.grid.max.clone(),
                grid_counts: s.grid.counts.clone(),
                duration: s.duration,
                dt: s.dt,
            }),
            files: (0..trajs.len()).map(|j| format!("traj_{j:04}.csv")).collect(),
        }
    }
}

/// Writes `dir/manifest.toml` plus one CSV per trajectory. Returns the manifest path.
pub fn write_trajectories(trajs: &[Trajectory], dir: &Path, spec: Option<&DatasetSpec>) -> Result<PathBuf> {
    let manifest = Manifest::describe(trajs, spec);
    for (traj, name) in trajs.iter().zip(&manifest.files) {
        write_trajectory_csv(traj, &dir.join(name))?;
    }
    let path = dir.join(MANIFEST_NAME);
    let text = toml::to_string(&manifest).map_err(|e| schema_err(&path, e.to_string()))?;
    write_string(&path, &text)?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = read_to_string(path)?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| toml_err(path, &text, e))?;
    if manifest.format != DATASET_FORMAT {
        return Err(schema_err(path, format!("unexpected format {:?}", manifest.format)));
    }
    if manifest.files.len() != manifest.m {
        return Err(schema_err(
            path,
            format!("m = {} but {} files listed", manifest.m, manifest.files.len()),
        ));
    }
    Ok(manifest)
}

/// Reads a dataset from its manifest, checking the declared shape.
pub fn read_trajectories(manifest_path: &Path) -> Result<Vec<Trajectory>> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    manifest
        .files
        .iter()
        .map(|f| {
            let p = base.join(f);
            let traj = read_trajectory_csv(&p)?;
            if traj.dim() != manifest.n {
                return Err(schema_err(
                    &p,
                    format!("dimension {} does not match manifest n = {}", traj.dim(), manifest.n),
                ));
            }
            Ok(traj)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    n: usize,
    m: usize,
    method: Method,
    lambda: f64,
    mu_r: f64,
    quad: QuadratureRule,
    /// Dataset manifest, relative to the model file.
    dataset: String,
    /// Row-major coefficient matrix, `n` rows of `m` entries.
    a: Vec<Vec<f64>>,
}

fn data_dir_for(model_path: &Path) -> String {
    let stem = model_path
        .file_stem()
        .map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned());
    format!("{stem}_data")
}

/// Writes the model file and, next to it, its training trajectories.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let dir_name = data_dir_for(path);
    let base = path.parent().unwrap_or(Path::new(""));
    write_trajectories(model.basis().trajectories(), &base.join(&dir_name), None)?;
    let a = model.coefficients();
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        n: a.nrows(),
        m: a.ncols(),
        method: model.method(),
        lambda: model.lambda(),
        mu_r: model.basis().params().mu(),
        quad: model.basis().quad().rule,
        dataset: format!("{dir_name}/{MANIFEST_NAME}"),
        a: a.row_iter().map(|r| r.iter().copied().collect()).collect(),
    };
    let text = toml::to_string(&file).map_err(|e| schema_err(path, e.to_string()))?;
    write_string(path, &text)
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = read_to_string(path)?;
    let file: ModelFile = toml::from_str(&text).map_err(|e| toml_err(path, &text, e))?;
    if file.format != MODEL_FORMAT {
        return Err(schema_err(path, format!("unexpected format {:?}", file.format)));
    }
    if file.a.len() != file.n || file.a.iter().any(|r| r.len() != file.m) {
        return Err(schema_err(path, format!("coefficient matrix is not {}×{}", file.n, file.m)));
    }
    let base = path.parent().unwrap_or(Path::new(""));
    let trajs = read_trajectories(&base.join(&file.dataset))?;
    if trajs.len() != file.m || trajs.iter().any(|t| t.dim() != file.n) {
        return Err(schema_err(
            path,
            format!("dataset does not provide {} trajectories of dimension {}", file.m, file.n),
        ));
    }
    let params = KernelParams::new(file.mu_r).map_err(|e| schema_err(path, e.to_string()))?;
    let quad = QuadratureSpec { rule: file.quad };
    let basis = OccupationBasis::new(Arc::from(trajs), params, quad).map_err(|e| schema_err(path, e.to_string()))?;
    let a = DMatrix::from_fn(file.n, file.m, |i, j| file.a[i][j]);
    Model::new(a, basis, file.method, file.lambda).map_err(|e| schema_err(path, e.to_string()))
}

pub const DAT_HEADER: &str = "# lambda okr_err sldmd_err\n";

pub fn sweep_dat(rows: &[SweepRow], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(DAT_HEADER);
    for r in rows {
        out.push_str(&format!(
            "{} {} {}\n",
            fmt_f64(r.lambda),
            fmt_f64(r.okr_err),
            fmt_f64(r.sldmd_err)
        ));
    }
    out
}

pub fn write_dat(rows: &[SweepRow], path: &Path, comments: &[String]) -> Result<()> {
    write_string(path, &sweep_dat(rows, comments))
}

pub fn read_dat(path: &Path) -> Result<Vec<SweepRow>> {
    let text = read_to_string(path)?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let values = trimmed
            .split_whitespace()
            .map(|f| f.parse::<f64>().map_err(|_| parse_err(path, line_no, format!("not a number: {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let [lambda, okr_err, sldmd_err] = values[..] else {
            return Err(parse_err(path, line_no, format!("expected 3 columns, got {}", values.len())));
        };
        rows.push(SweepRow {
            lambda,
            okr_err,
            sldmd_err,
        });
    }
    Ok(rows)
}

/// Writes columns of equal length as a whitespace-separated table.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = format!("# {}\n", header.join(" "));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    write_string(path, &out)
}
