//! On-disk run layout: raw frames, a JSON manifest and a diagnostics CSV.
//!
//! ```text
//! <output_dir>/
//!   manifest.json      run metadata, frame index and completion status
//!   initial.bin        field at t = 0
//!   frame_00001.bin    field at the first output time, and so on
//!   diagnostics.csv    time,free_energy,mean,max_abs
//! ```
//!
//! Frames are headerless little-endian arrays in row-major order
//! (`index = i * n + j`, `x` along `i`), `f64` or `f32` per the run precision.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{GridConfig, RunConfig};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Precision};
use crate::integrators::Method;
use crate::spectral::RealField;

pub const OUTPUT_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const INITIAL_FILE: &str = "initial.bin";
pub const DIAGNOSTICS_HEADER: &str = "time,free_energy,mean,max_abs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
    Diverged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub index: u64,
    pub step: u64,
    pub time: f64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    /// Canonical text of the configuration that produced the run.
    pub config: String,
    pub model: String,
    pub method: Method,
    pub h: f64,
    pub grid: GridConfig,
    pub precision: Precision,
    pub dtype: String,
    pub layout: String,
    pub initial: FrameEntry,
    pub frames: Vec<FrameEntry>,
    pub diagnostics: String,
    pub status: RunStatus,
    pub error: Option<String>,
}

impl Manifest {
    pub fn new(config: &RunConfig) -> Self {
        Manifest {
            format_version: OUTPUT_FORMAT_VERSION,
            config: config.to_config_string(),
            model: config.model.name().to_string(),
            method: config.method,
            h: config.h,
            grid: config.grid,
            precision: config.precision,
            dtype: config.precision.dtype().to_string(),
            layout: "row-major, index = i * n + j, x along i".to_string(),
            initial: FrameEntry {
                index: 0,
                step: 0,
                time: 0.0,
                file: INITIAL_FILE.to_string(),
            },
            frames: Vec::new(),
            diagnostics: DIAGNOSTICS_FILE.to_string(),
            status: RunStatus::Running,
            error: None,
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        self.grid.build(self.precision)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        self.config.parse()
    }
}

pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:05}.bin")
}

/// Encodes field values as little-endian bytes at the given precision.
pub fn encode_values(values: &[f64], precision: Precision) -> Vec<u8> {
    match precision {
        Precision::Double => values.iter().flat_map(|v| v.to_le_bytes()).collect(),
        Precision::Single => values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect(),
    }
}

pub fn decode_values(bytes: &[u8], precision: Precision) -> Vec<f64> {
    match precision {
        Precision::Double => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect(),
        Precision::Single => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64)
            .collect(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes frames, diagnostics and the manifest of one run.
#[derive(Debug)]
pub struct RunWriter {
    dir: PathBuf,
    manifest: Manifest,
    diagnostics: BufWriter<fs::File>,
}

impl RunWriter {
    pub fn create(dir: impl Into<PathBuf>, config: &RunConfig) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let diag_path = dir.join(DIAGNOSTICS_FILE);
        let file = fs::File::create(&diag_path).map_err(|e| Error::io(&diag_path, e))?;
        let mut diagnostics = BufWriter::new(file);
        writeln!(diagnostics, "{DIAGNOSTICS_HEADER}").map_err(|e| Error::io(&diag_path, e))?;
        let writer = RunWriter {
            dir,
            manifest: Manifest::new(config),
            diagnostics,
        };
        writer.write_manifest()?;
        Ok(writer)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn write_initial(&mut self, field: &RealField) -> Result<()> {
        let path = self.dir.join(INITIAL_FILE);
        write_file(&path, &encode_values(field.values(), self.manifest.precision))
    }

    pub fn write_frame(&mut self, index: u64, step: u64, field: &RealField) -> Result<()> {
        let file = frame_file_name(index);
        let path = self.dir.join(&file);
        write_file(&path, &encode_values(field.values(), self.manifest.precision))?;
        self.manifest.frames.push(FrameEntry {
            index,
            step,
            time: field.time(),
            file,
        });
        Ok(())
    }

    pub fn write_diagnostics(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        let energy = r.free_energy.map(|e| format!("{e:e}")).unwrap_or_default();
        writeln!(
            self.diagnostics,
            "{:e},{},{:e},{:e}",
            r.time, energy, r.mean_value, r.max_abs
        )
        .map_err(|e| Error::io(self.dir.join(DIAGNOSTICS_FILE), e))
    }

    fn write_manifest(&self) -> Result<()> {
        let path = self.dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        write_file(&path, json.as_bytes())
    }

    /// Flushes diagnostics and records the final status in the manifest.
    pub fn finish(mut self, status: RunStatus, error: Option<String>) -> Result<Manifest> {
        self.diagnostics
            .flush()
            .map_err(|e| Error::io(self.dir.join(DIAGNOSTICS_FILE), e))?;
        self.manifest.status = status;
        self.manifest.error = error;
        self.write_manifest()?;
        Ok(self.manifest)
    }
}

/// Read access to a finished (or interrupted) run directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    dir: PathBuf,
    manifest: Manifest,
}

impl RunDir {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Format {
            what: "manifest",
            msg: e.to_string(),
        })?;
        if manifest.format_version != OUTPUT_FORMAT_VERSION {
            return Err(Error::Format {
                what: "manifest",
                msg: format!(
                    "unsupported format_version {} (this build reads {OUTPUT_FORMAT_VERSION})",
                    manifest.format_version
                ),
            });
        }
        Ok(RunDir { dir, manifest })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn read_entry(&self, entry: &FrameEntry) -> Result<RealField> {
        let grid = self.manifest.grid_spec()?;
        let path = self.dir.join(&entry.file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let expected = grid.total_points() * self.manifest.precision.bytes_per_value();
        if bytes.len() != expected {
            return Err(Error::Format {
                what: "frame",
                msg: format!("{} has {} bytes, expected {expected}", path.display(), bytes.len()),
            });
        }
        RealField::new(grid, decode_values(&bytes, self.manifest.precision), entry.time)
    }

    pub fn read_initial(&self) -> Result<RealField> {
        self.read_entry(&self.manifest.initial)
    }

    /// Frame with 1-based `index`; 0 is the initial field.
    pub fn read_frame(&self, index: u64) -> Result<RealField> {
        if index == 0 {
            return self.read_initial();
        }
        let entry = self
            .manifest
            .frames
            .iter()
            .find(|f| f.index == index)
            .ok_or_else(|| {
                Error::config(
                    "frame",
                    format!("no frame {index} (run has {})", self.manifest.frames.len()),
                )
            })?;
        self.read_entry(entry)
    }

    pub fn read_last_frame(&self) -> Result<RealField> {
        match self.manifest.frames.last() {
            Some(entry) => self.read_entry(entry),
            None => self.read_initial(),
        }
    }

    pub fn read_diagnostics(&self) -> Result<Vec<DiagnosticsRecord>> {
        let path = self.dir.join(&self.manifest.diagnostics);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        parse_diagnostics(&text)
    }
}

pub fn parse_diagnostics(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let bad = |msg: String| Error::Format {
        what: "diagnostics",
        msg,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == DIAGNOSTICS_HEADER => {}
        other => return Err(bad(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad(format!("expected 4 columns in `{line}`")));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
            Ok(DiagnosticsRecord {
                time: num(cols[0])?,
                free_energy: if cols[1].trim().is_empty() {
                    None
                } else {
                    Some(num(cols[1])?)
                },
                mean_value: num(cols[2])?,
                max_abs: num(cols[3])?,
            })
        })
        .collect()
}
