//! Simulation driver, full runs with output, and convergence studies.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, WavenumberTable};
use crate::initial::build_initial;
use crate::integrators::{Method, SchemeTables, Stepper};
use crate::models::ModelSpec;
use crate::output::{Manifest, RunStatus, RunWriter};
use crate::spectral::{Fourier, RealField};

/// A configured model, its tables and a stepper positioned at some step.
#[derive(Debug)]
pub struct Simulation {
    config: RunConfig,
    grid: GridSpec,
    model: Arc<ModelSpec>,
    stepper: Stepper,
    fourier: Fourier,
}

impl Simulation {
    /// Builds the initial field from the configured recipe and seed.
    pub fn new(config: &RunConfig) -> Result<Self> {
        let grid = config.grid_spec()?;
        let initial = build_initial(&config.ic, &grid, config.seed)?;
        Self::from_field(config, &initial)
    }

    /// Starts from an explicit initial field on the configured grid.
    pub fn from_field(config: &RunConfig, initial: &RealField) -> Result<Self> {
        config.validate()?;
        let grid = config.grid_spec()?;
        if !grid.same_geometry(initial.grid()) {
            return Err(Error::Shape("initial field is not on the configured grid".into()));
        }
        let initial = RealField::new(grid, initial.values().to_vec(), 0.0)?;
        let ktab = WavenumberTable::new(&grid);
        let model = Arc::new(config.model.build(&ktab)?);
        let tables = Arc::new(SchemeTables::build(
            config.method,
            config.h,
            &model,
            &ktab,
            config.precision,
        )?);
        let stepper = Stepper::new(&initial, Arc::clone(&model), tables)?;
        Ok(Simulation {
            config: config.clone(),
            grid,
            model,
            stepper,
            fourier: Fourier::new(&grid),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn step_index(&self) -> u64 {
        self.stepper.step_index()
    }

    pub fn time(&self) -> f64 {
        self.stepper.time()
    }

    /// True when IMEX is used beyond `h max|L| < 1`.
    pub fn imex_bound_exceeded(&self) -> bool {
        self.config.method == Method::Imex && self.stepper.tables().exceeds_imex_bound()
    }

    pub fn advance(&mut self, steps: u64) -> Result<()> {
        self.stepper.advance(steps)
    }

    /// Advances to the first step with `n h >= t`.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let target = self.config.steps_to(t);
        let here = self.stepper.step_index();
        if target > here {
            self.stepper.advance(target - here)?;
        }
        Ok(())
    }

    pub fn field(&self) -> RealField {
        self.stepper.real_field()
    }

    pub fn values(&self) -> &[f64] {
        self.stepper.values()
    }

    pub fn diagnostics(&mut self) -> Result<DiagnosticsRecord> {
        let field = self.stepper.real_field();
        diagnostics::record(&field, &self.model, &mut self.fourier)
    }
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub final_field: RealField,
}

/// Runs `config` to `t_final`, writing frames to `out_dir`.
///
/// On divergence the frames written so far are kept, the manifest is marked
/// `diverged` and [`Error::Diverged`] is returned.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    let mut sim = Simulation::new(config)?;
    let mut writer = RunWriter::create(out_dir, config)?;
    match drive(&mut sim, &mut writer) {
        Ok(diagnostics) => {
            let manifest = writer.finish(RunStatus::Complete, None)?;
            Ok(RunOutcome {
                manifest,
                diagnostics,
                final_field: sim.field(),
            })
        }
        Err(err) => {
            let status = match err {
                Error::Diverged { .. } => RunStatus::Diverged,
                _ => RunStatus::Failed,
            };
            // the original error matters more than a failure to record it
            let _ = writer.finish(status, Some(err.to_string()));
            Err(err)
        }
    }
}

fn drive(sim: &mut Simulation, writer: &mut RunWriter) -> Result<Vec<DiagnosticsRecord>> {
    let config = sim.config().clone();
    writer.write_initial(&sim.field())?;
    let mut records = vec![sim.diagnostics()?];
    writer.write_diagnostics(&records[0])?;
    for i in 1..=config.frame_count() {
        let target = config.frame_step(i);
        sim.advance(target - sim.step_index())?;
        let field = sim.field();
        writer.write_frame(i, sim.step_index(), &field)?;
        let r = sim.diagnostics()?;
        writer.write_diagnostics(&r)?;
        records.push(r);
    }
    Ok(records)
}

/// Evolves `config` in memory and returns the field at `t`.
pub fn evolve(config: &RunConfig, t: f64) -> Result<RealField> {
    let mut sim = Simulation::new(config)?;
    sim.advance_to(t)?;
    Ok(sim.field())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum StudyCell {
    Ok { error: f64 },
    Diverged,
}

impl StudyCell {
    pub fn error(&self) -> Option<f64> {
        match *self {
            StudyCell::Ok { error } => Some(error),
            StudyCell::Diverged => None,
        }
    }
}

/// Errors of each `(h, method)` pair against a fine ETD reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub format_version: u32,
    pub h_values: Vec<f64>,
    pub methods: Vec<Method>,
    pub h_ref: f64,
    pub t_eval: f64,
    /// `cells[i][j]` is the error at `h_values[i]` with `methods[j]`.
    pub cells: Vec<Vec<StudyCell>>,
}

pub const STUDY_FORMAT_VERSION: u32 = 1;

impl StudyTable {
    pub fn cell(&self, h: f64, method: Method) -> Option<StudyCell> {
        let i = self.h_values.iter().position(|&x| x == h)?;
        let j = self.methods.iter().position(|&m| m == method)?;
        Some(self.cells[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h");
        for m in &self.methods {
            s.push(',');
            s.push_str(m.as_str());
        }
        s.push('\n');
        for (h, row) in self.h_values.iter().zip(&self.cells) {
            let _ = write!(s, "{h:e}");
            for c in row {
                match c {
                    StudyCell::Ok { error } => {
                        let _ = write!(s, ",{error:e}");
                    }
                    StudyCell::Diverged => s.push_str(",diverged"),
                }
            }
            s.push('\n');
        }
        s
    }

    /// Writes `errors.csv` and `study.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = dir.join("errors.csv");
        fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        let json = dir.join("study.json");
        let text = serde_json::to_string_pretty(self).expect("study serializes");
        fs::write(&json, text).map_err(|e| Error::io(&json, e))
    }
}

/// Runs every `(h, method)` pair from the same initial field and measures the
/// L2 error at `t_eval` against ETD with step `h_ref`.
///
/// Cells run in parallel; a diverging cell is recorded, not fatal. The
/// reference run must not diverge.
pub fn convergence_study(
    base: &RunConfig,
    h_values: &[f64],
    methods: &[Method],
    h_ref: f64,
    t_eval: f64,
) -> Result<StudyTable> {
    if h_values.is_empty() {
        return Err(Error::config("h", "need at least one step size"));
    }
    if methods.is_empty() {
        return Err(Error::config("methods", "need at least one method"));
    }
    if let Some(&h) = h_values.iter().find(|&&h| !(h.is_finite() && h > 0.0)) {
        return Err(Error::config("h", format!("step sizes must be > 0, got {h}")));
    }
    if !(t_eval.is_finite() && t_eval > 0.0) {
        return Err(Error::config("t_eval", format!("must be > 0, got {t_eval}")));
    }
    let h_min = h_values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(h_ref > 0.0 && h_ref <= h_min) {
        return Err(Error::config(
            "href",
            format!("reference step must be in (0, {h_min}], got {h_ref}"),
        ));
    }
    for &h in h_values.iter().chain([&h_ref]) {
        let n = t_eval / h;
        if (n - n.round()).abs() > 1e-6 * n.max(1.0) {
            return Err(Error::config(
                "t_eval",
                format!("{t_eval} is not a whole number of steps of {h}"),
            ));
        }
    }

    let grid = base.grid_spec()?;
    let initial = build_initial(&base.ic, &grid, base.seed)?;
    let at = |method: Method, h: f64| -> Result<RealField> {
        let config = RunConfig {
            method,
            h,
            t_final: t_eval,
            frame_interval: t_eval,
            ..base.clone()
        };
        let mut sim = Simulation::from_field(&config, &initial)?;
        sim.advance_to(t_eval)?;
        Ok(sim.field())
    };

    let reference = at(Method::Etd, h_ref)?;
    let pairs: Vec<(usize, usize)> = (0..h_values.len())
        .flat_map(|i| (0..methods.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<StudyCell>> = pairs
        .par_iter()
        .map(|&(i, j)| match at(methods[j], h_values[i]) {
            Ok(f) => Ok(StudyCell::Ok {
                error: diagnostics::l2_error(&f, &reference)?,
            }),
            Err(Error::Diverged { .. }) => Ok(StudyCell::Diverged),
            Err(e) => Err(e),
        })
        .collect();

    let mut cells = vec![Vec::with_capacity(methods.len()); h_values.len()];
    for (&(i, _), r) in pairs.iter().zip(results) {
        cells[i].push(r?);
    }
    Ok(StudyTable {
        format_version: STUDY_FORMAT_VERSION,
        h_values: h_values.to_vec(),
        methods: methods.to_vec(),
        h_ref,
        t_eval,
        cells,
    })
}
