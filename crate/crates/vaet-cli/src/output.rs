//! Result serialization: CSV/JSON tables, run manifests, FNV-1a run IDs.
//!
//! Data files carry no timestamps, so re-running a command with the same
//! inputs reproduces them byte for byte; wall time lives only in the
//! manifest, outside the hashed input core.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Data-file format selected by `--format`; manifests are always JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// One table cell. Floats render through Rust's shortest round-trip
/// formatting, which is deterministic for identical bit patterns.
#[derive(Debug, Clone)]
pub enum Cell {
    Str(String),
    F64(f64),
    U64(u64),
    Usize(usize),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::F64(v) => {
                if v.is_finite() {
                    format!("{v}")
                } else {
                    String::new()
                }
            }
            Cell::U64(v) => format!("{v}"),
            Cell::Usize(v) => format!("{v}"),
            Cell::Bool(v) => format!("{v}"),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Str(s) => serde_json::Value::String(s.clone()),
            Cell::F64(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::U64(v) => serde_json::Value::from(*v),
            Cell::Usize(v) => serde_json::Value::from(*v),
            Cell::Bool(v) => serde_json::Value::from(*v),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Header row plus data rows; every row must match the header width.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: &[&str]) -> Self {
        Self {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.headers.len(), "row width mismatch in table {}", self.name);
        self.rows.push(row);
    }
}

/// Writes a table as `<name>.<ext>` under `dir`; returns the file name.
pub fn write_table(dir: &Path, table: &Table, format: OutputFormat) -> anyhow::Result<String> {
    fs::create_dir_all(dir)?;
    let file_name = format!("{}.{}", table.name, format.extension());
    let path = dir.join(&file_name);
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&table.headers)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
                .rows
                .iter()
                .map(|row| {
                    table
                        .headers
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.clone(), c.to_json()))
                        .collect()
                })
                .collect();
            let mut f = fs::File::create(&path)?;
            serde_json::to_writer_pretty(&mut f, &rows)?;
            f.write_all(b"\n")?;
        }
    }
    Ok(file_name)
}

/// 64-bit FNV-1a digest.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

/// The deterministic part of a manifest: everything needed to reconstruct
/// the run's inputs. The run ID is the FNV-1a digest of its canonical JSON.
#[derive(Debug, Clone, Serialize)]
pub struct InputCore {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub command: String,
    pub label: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl InputCore {
    pub fn new(
        command: &str,
        label: &str,
        params: serde_json::Value,
        seed: u64,
        rtol: f64,
        atol: f64,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION,
            command: command.to_string(),
            label: label.to_string(),
            params,
            seed,
            tolerances: Tolerances { rtol, atol },
        }
    }

    pub fn run_id(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("manifest core serializes");
        format!("{:016x}", fnv1a64(&bytes))
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub core: InputCore,
    pub run_id: String,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub notes: Vec<String>,
}

/// Writes `<label>_manifest.json` under `dir`; returns the run ID.
pub fn write_manifest(
    dir: &Path,
    core: InputCore,
    outputs: Vec<String>,
    wall_time_s: f64,
    notes: Vec<String>,
) -> anyhow::Result<String> {
    fs::create_dir_all(dir)?;
    let run_id = core.run_id();
    let label = core.label.clone();
    let manifest = Manifest { core, run_id: run_id.clone(), outputs, wall_time_s, notes };
    let path = dir.join(format!("{label}_manifest.json"));
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.write_all(b"\n")?;
    Ok(run_id)
}
