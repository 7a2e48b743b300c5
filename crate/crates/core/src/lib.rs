//! Pseudo-spectral solver for stiff semi-linear PDEs on periodic domains.
//!
//! Fields are advanced with one of three first-order one-step schemes
//! (IMEX, integrating factor, exponential time differencing) built from a
//! model's linear symbol and nonlinear operator. The catalog covers
//! Cahn-Hilliard, the phase-field crystal equation, 1D advection-diffusion
//! and 1D viscous Burgers.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod initial;
pub mod integrators;
pub mod models;
pub mod output;
pub mod run;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{GridSpec, Precision, WavenumberTable};
pub use integrators::{phi1, Method, SchemeTables, Stepper, StepperState};
pub use models::{ModelKind, ModelSpec};
pub use spectral::{spectral_derivative, Fourier, RealField, SpectralField};
pub use config::{InitialCondition, RunConfig};
pub use run::{convergence_study, run, Simulation, StudyTable};
pub use num_complex::Complex64;
