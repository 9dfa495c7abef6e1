//! On-disk formats: the surface observation CSV, the self-describing
//! coefficient JSON, cluster reports, label tables, and per-command run
//! manifests. Output files are staged in a temporary file and renamed into
//! place so readers never observe a partial write.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use surfclust_core::splines::BasisSpec;
use surfclust_core::tensorfit::{SamplePoint, SurfaceSamples};

use crate::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `content` atomically: temp file in the target directory, then
/// rename.
pub fn atomic_write(path: &Path, content: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {}", dir.display(), e)))?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| CliError::Data(format!("cannot stage {}: {}", path.display(), e)))?;
    tmp.write_all(content.as_bytes())
        .map_err(|e| CliError::Data(format!("cannot write {}: {}", path.display(), e)))?;
    tmp.persist(path)
        .map_err(|e| CliError::Data(format!("cannot finalize {}: {}", path.display(), e)))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Surface observation table: CSV `surface_id,x,y,z`.
// ---------------------------------------------------------------------------

pub fn read_surface_table(path: &Path) -> Result<Vec<SurfaceSamples>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {}", path.display(), e)))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {}", path.display(), e)))?
        .clone();
    let expected = ["surface_id", "x", "y", "z"];
    let names: Vec<&str> = headers.iter().collect();
    if names != expected {
        return Err(CliError::Data(format!(
            "{}: expected header {:?}, found {:?}",
            path.display(),
            expected.join(","),
            names.join(",")
        )));
    }

    let mut order: Vec<String> = Vec::new();
    let mut grouped: std::collections::HashMap<String, Vec<SamplePoint>> =
        std::collections::HashMap::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // 1-based, after the header
        let record = record
            .map_err(|e| CliError::Data(format!("{}: line {}: {}", path.display(), line, e)))?;
        if record.len() != 4 {
            return Err(CliError::Data(format!(
                "{}: line {}: expected 4 fields, found {}",
                path.display(),
                line,
                record.len()
            )));
        }
        let id = record[0].to_string();
        let parse = |field: usize, name: &str| -> Result<f64, CliError> {
            let raw = &record[field];
            let value: f64 = raw.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {}: cannot parse {} value {:?}",
                    path.display(),
                    line,
                    name,
                    raw
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Data(format!(
                    "{}: line {}: non-finite {} value {:?}",
                    path.display(),
                    line,
                    name,
                    raw
                )));
            }
            Ok(value)
        };
        let point = SamplePoint { x: parse(1, "x")?, y: parse(2, "y")?, z: parse(3, "z")? };
        if !grouped.contains_key(&id) {
            order.push(id.clone());
        }
        grouped.entry(id).or_default().push(point);
    }
    if order.is_empty() {
        return Err(CliError::Data(format!("{}: no observation rows", path.display())));
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let points = grouped.remove(&id).expect("id collected from this map");
            SurfaceSamples::new(id, points)
        })
        .collect())
}

pub fn surface_table_to_csv(surfaces: &[SurfaceSamples]) -> String {
    let mut out = String::from("surface_id,x,y,z\n");
    for s in surfaces {
        for p in &s.points {
            // Display of f64 is shortest-round-trip, so values survive the
            // trip exactly.
            out.push_str(&format!("{},{},{},{}\n", s.id, p.x, p.y, p.z));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Coefficient file: shared bases plus one R x L block per surface.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct CoefficientFile {
    pub artifact_version: String,
    pub degree_x: usize,
    pub knots_x: Vec<f64>,
    pub degree_y: usize,
    pub knots_y: Vec<f64>,
    pub surfaces: Vec<CoefficientBlock>,
    pub failures: Vec<FitFailure>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CoefficientBlock {
    pub id: String,
    pub rows: usize,
    pub cols: usize,
    /// Column-major entries, matching the devec layout.
    pub values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitFailure {
    pub id: String,
    pub error: String,
}

impl CoefficientFile {
    pub fn specs(&self) -> Result<(BasisSpec, BasisSpec), CliError> {
        let spec_x = BasisSpec::from_knots(self.degree_x, self.knots_x.clone())
            .map_err(|e| CliError::Data(format!("invalid x basis: {}", e)))?;
        let spec_y = BasisSpec::from_knots(self.degree_y, self.knots_y.clone())
            .map_err(|e| CliError::Data(format!("invalid y basis: {}", e)))?;
        Ok((spec_x, spec_y))
    }

    pub fn matrices(&self) -> Result<Vec<(String, DMatrix<f64>)>, CliError> {
        let (spec_x, spec_y) = self.specs()?;
        let rows = spec_x.basis_count();
        let cols = spec_y.basis_count();
        self.surfaces
            .iter()
            .map(|block| {
                if block.rows != rows || block.cols != cols {
                    return Err(CliError::Data(format!(
                        "surface {}: block is {}x{}, bases imply {}x{}",
                        block.id, block.rows, block.cols, rows, cols
                    )));
                }
                if block.values.len() != rows * cols {
                    return Err(CliError::Data(format!(
                        "surface {}: {} values for a {}x{} block",
                        block.id,
                        block.values.len(),
                        rows,
                        cols
                    )));
                }
                if block.values.iter().any(|v| !v.is_finite()) {
                    return Err(CliError::Data(format!(
                        "surface {}: non-finite coefficient",
                        block.id
                    )));
                }
                Ok((block.id.clone(), DMatrix::from_column_slice(rows, cols, &block.values)))
            })
            .collect()
    }
}

pub fn read_coefficient_file(path: &Path) -> Result<CoefficientFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {}", path.display(), e)))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: corrupt coefficient file: {}", path.display(), e)))
}

// ---------------------------------------------------------------------------
// Cluster report.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterReportFile {
    pub artifact_version: String,
    pub k: usize,
    pub seed: u64,
    pub init_method: String,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// 1-based cluster labels, one per surface.
    pub labels: Vec<LabelRow>,
    pub centers: Vec<CenterBlock>,
}

#[derive(Debug, Serialize, Deserialize, Clone)]
pub struct LabelRow {
    pub surface_id: String,
    pub label: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CenterBlock {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Label table: CSV `surface_id,label` with 1-based labels.
// ---------------------------------------------------------------------------

pub fn read_label_table(path: &Path) -> Result<Vec<(String, usize)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {}", path.display(), e)))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {}", path.display(), e)))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != ["surface_id", "label"] {
        return Err(CliError::Data(format!(
            "{}: expected header surface_id,label, found {:?}",
            path.display(),
            names.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record
            .map_err(|e| CliError::Data(format!("{}: line {}: {}", path.display(), line, e)))?;
        let label: usize = record[1].parse().map_err(|_| {
            CliError::Data(format!(
                "{}: line {}: unknown label {:?}",
                path.display(),
                line,
                &record[1]
            ))
        })?;
        if label == 0 {
            return Err(CliError::Data(format!(
                "{}: line {}: labels are 1-based, found 0",
                path.display(),
                line
            )));
        }
        rows.push((record[0].to_string(), label));
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no label rows", path.display())));
    }
    Ok(rows)
}

pub fn label_table_to_csv(rows: &[LabelRow]) -> String {
    let mut out = String::from("surface_id,label\n");
    for row in rows {
        out.push_str(&format!("{},{}\n", row.surface_id, row.label));
    }
    out
}

// ---------------------------------------------------------------------------
// Run manifest.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub arguments: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, arguments: Value, inputs: &[&Path], outputs: &[&Path]) -> Self {
        Self {
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: command.to_string(),
            arguments,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        }
    }

    pub fn write_next_to(&self, output: &Path) -> Result<PathBuf, CliError> {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = output.with_file_name(name);
        self.write_to(&path)?;
        Ok(path)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Data(format!("cannot serialize manifest: {}", e)))?;
        text.push('\n');
        atomic_write(path, &text)
    }
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("serialization failed: {}", e)))?;
    text.push('\n');
    Ok(text)
}
