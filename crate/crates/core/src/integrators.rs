//! One-step marching schemes for `d/dt u_k = L_k u_k + N_k(u)`.
//!
//! All three methods share the update
//!
//! ```text
//! u_k(t + h) = T_lin,k * u_k(t) + T_non,k * N_k(u(t))
//! ```
//!
//! and differ only in the per-mode tables:
//!
//! | method | `T_lin`          | `T_non`                  |
//! |--------|------------------|--------------------------|
//! | IMEX   | `1 / (1 - hL)`   | `mask * h / (1 - hL)`    |
//! | IF     | `exp(hL)`        | `mask * h * exp(hL)`     |
//! | ETD    | `exp(hL)`        | `mask * h * phi1(hL)`    |
//!
//! with `phi1(z) = (e^z - 1) / z` and the 2/3-rule dealias mask folded
//! into `T_non`. The tables depend only on the model, the grid and `h`, so
//! they are built once and shared by every step.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Precision, WavenumberTable};
use crate::models::ModelSpec;
use crate::spectral::{Fourier, RealField, SpectralField};

/// Any `|eta|` above this is treated as a blow-up.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

/// Below this modulus `phi1` switches to its Taylor polynomial.
const PHI1_SERIES_RADIUS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Imex,
    If,
    Etd,
}

pub const METHOD_NAMES: &str = "imex, if, etd";

impl Method {
    pub const ALL: [Method; 3] = [Method::Imex, Method::If, Method::Etd];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Imex => "imex",
            Method::If => "if",
            Method::Etd => "etd",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "imex" => Ok(Method::Imex),
            "if" => Ok(Method::If),
            "etd" => Ok(Method::Etd),
            other => Err(Error::config(
                "time.method",
                format!("undefined integrator `{other}` (expected one of: {METHOD_NAMES})"),
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(e^z - 1) / z` without cancellation near `z = 0`.
///
/// Returns exactly 1 at the origin. The real part of `e^z - 1` is formed
/// as `expm1(x) cos(y) - 2 sin^2(y/2)` so that small arguments keep full
/// relative accuracy.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < PHI1_SERIES_RADIUS {
        // 1 + z/2 + z^2/6 + z^3/24; the next term is below 1e-21
        let one = Complex64::new(1.0, 0.0);
        return one + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0)));
    }
    if z.im == 0.0 {
        return Complex64::new(z.re.exp_m1() / z.re, 0.0);
    }
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    let em1 = Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin());
    em1 / z
}

/// Per-mode marching multipliers for one `(method, h, model, grid)`.
#[derive(Debug, Clone)]
pub struct SchemeTables {
    method: Method,
    h: f64,
    t_linear: Vec<Complex64>,
    t_non: Vec<Complex64>,
    stiffness_metric: f64,
}

impl SchemeTables {
    /// Builds the tables; `precision` rounds them to the storage precision.
    pub fn build(
        method: Method,
        h: f64,
        model: &ModelSpec,
        ktab: &WavenumberTable,
        precision: Precision,
    ) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::config("time.h", format!("step must be > 0, got {h}")));
        }
        let linear = model.linear_symbol();
        if linear.len() != ktab.len() {
            return Err(Error::Shape("model and wavenumber table disagree".into()));
        }
        if let Some(i) = linear.iter().position(|l| !(l.re.is_finite() && l.im.is_finite())) {
            return Err(Error::NonFinite {
                what: "linear symbol",
                index: i,
            });
        }

        let one = Complex64::new(1.0, 0.0);
        let mut t_linear = Vec::with_capacity(linear.len());
        let mut t_non = Vec::with_capacity(linear.len());
        for (i, (&l, &keep)) in linear.iter().zip(ktab.dealias_mask()).enumerate() {
            let z = l * h;
            let mask = if keep { 1.0 } else { 0.0 };
            let (tl, tn) = match method {
                Method::Imex => {
                    let denom = one - z;
                    if denom == Complex64::new(0.0, 0.0) {
                        return Err(Error::SingularTable { mode: i });
                    }
                    let inv = one / denom;
                    (inv, inv * (mask * h))
                }
                Method::If => {
                    let e = z.exp();
                    (e, e * (mask * h))
                }
                Method::Etd => (z.exp(), phi1(z) * (mask * h)),
            };
            t_linear.push(round_complex(tl, precision));
            t_non.push(round_complex(tn, precision));
        }
        let stiffness_metric = h * linear.iter().map(|l| l.norm()).fold(0.0, f64::max);

        Ok(SchemeTables {
            method,
            h,
            t_linear,
            t_non,
            stiffness_metric,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn t_linear(&self) -> &[Complex64] {
        &self.t_linear
    }

    pub fn t_non(&self) -> &[Complex64] {
        &self.t_non
    }

    /// `h * max_k |L_k|`.
    pub fn stiffness_metric(&self) -> f64 {
        self.stiffness_metric
    }

    /// True when an IMEX table exceeds the `h |L| < 1` accuracy bound.
    pub fn exceeds_imex_bound(&self) -> bool {
        self.method == Method::Imex && self.stiffness_metric >= 1.0
    }

    /// `spectral <- spectral * T_lin + nonlinear * T_non`, mode by mode.
    pub fn apply(&self, spectral: &mut [Complex64], nonlinear: &[Complex64]) {
        for (((u, n), tl), tn) in spectral
            .iter_mut()
            .zip(nonlinear)
            .zip(&self.t_linear)
            .zip(&self.t_non)
        {
            *u = *u * tl + n * tn;
        }
    }
}

/// Restores `u_{-k} = conj(u_k)`, the spectrum of a real field.
fn project_hermitian(spectral: &mut [Complex64], mirror: &[usize]) {
    for (i, &m) in mirror.iter().enumerate() {
        if i < m {
            let avg = (spectral[i] + spectral[m].conj()) * 0.5;
            spectral[i] = avg;
            spectral[m] = avg.conj();
        } else if i == m {
            spectral[i].im = 0.0;
        }
    }
}

fn round_complex(c: Complex64, precision: Precision) -> Complex64 {
    Complex64::new(precision.round(c.re), precision.round(c.im))
}

/// Snapshot of a stepper: spectral state, its real-space view and clock.
#[derive(Debug, Clone)]
pub struct StepperState {
    pub spectral: SpectralField,
    pub real_view: RealField,
    pub step_index: u64,
    pub time: f64,
}

/// Advances one simulation in time. Sequential by construction.
#[derive(Debug)]
pub struct Stepper {
    model: Arc<ModelSpec>,
    tables: Arc<SchemeTables>,
    fourier: Fourier,
    grid: GridSpec,
    spectral: Vec<Complex64>,
    real: Vec<f64>,
    nonlinear: Vec<Complex64>,
    work: Vec<Complex64>,
    mirror: Vec<usize>,
    step_index: u64,
}

impl Stepper {
    pub fn new(initial: &RealField, model: Arc<ModelSpec>, tables: Arc<SchemeTables>) -> Result<Self> {
        initial.check_finite()?;
        let grid = *initial.grid();
        if model.linear_symbol().len() != grid.total_points()
            || tables.t_linear().len() != grid.total_points()
        {
            return Err(Error::Shape("initial field does not match model tables".into()));
        }
        let precision = grid.precision();
        let mut fourier = Fourier::new(&grid);
        let real: Vec<f64> = initial.values().iter().map(|&v| precision.round(v)).collect();
        let mut spectral: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fourier.forward_in_place(&mut spectral);
        let ktab = WavenumberTable::new(&grid);
        let mirror: Vec<usize> = (0..ktab.len()).map(|i| ktab.mirror_index(i)).collect();
        project_hermitian(&mut spectral, &mirror);
        let n = real.len();
        Ok(Stepper {
            model,
            tables,
            fourier,
            grid,
            spectral,
            real,
            nonlinear: vec![Complex64::default(); n],
            work: vec![Complex64::default(); n],
            mirror,
            step_index: 0,
        })
    }

    pub fn tables(&self) -> &SchemeTables {
        &self.tables
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.tables.h()
    }

    /// Current real-space samples.
    pub fn values(&self) -> &[f64] {
        &self.real
    }

    pub fn spectral(&self) -> &[Complex64] {
        &self.spectral
    }

    pub fn real_field(&self) -> RealField {
        RealField::new(self.grid, self.real.clone(), self.time()).expect("stepper keeps grid size")
    }

    pub fn state(&self) -> StepperState {
        let time = self.time();
        StepperState {
            spectral: SpectralField::new(self.grid, self.spectral.clone(), time)
                .expect("stepper keeps grid size"),
            real_view: self.real_field(),
            step_index: self.step_index,
            time,
        }
    }

    /// Advances by one step of size `h`.
    ///
    /// On a non-finite state or `max|eta| > 1e8` returns
    /// [`Error::Diverged`]; the stepper must not be advanced further.
    pub fn step(&mut self) -> Result<()> {
        self.model
            .nonlinear_into(&self.real, &mut self.fourier, &mut self.nonlinear);
        self.tables.apply(&mut self.spectral, &self.nonlinear);
        project_hermitian(&mut self.spectral, &self.mirror);

        let precision = self.grid.precision();
        if precision == Precision::Single {
            for c in self.spectral.iter_mut() {
                *c = round_complex(*c, precision);
            }
        }
        self.work.copy_from_slice(&self.spectral);
        self.fourier.inverse_in_place(&mut self.work);
        let mut max_abs = 0.0f64;
        let mut finite = true;
        for (r, c) in self.real.iter_mut().zip(&self.work) {
            let v = precision.round(c.re);
            finite &= v.is_finite();
            max_abs = max_abs.max(v.abs());
            *r = v;
        }
        self.step_index += 1;
        if !finite || max_abs > DIVERGENCE_THRESHOLD {
            return Err(Error::Diverged {
                step: self.step_index,
                max_abs: if finite { max_abs } else { f64::NAN },
            });
        }
        Ok(())
    }

    pub fn advance(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }
}

/// One row of [`limit_consistency_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub h: f64,
    /// `max_k |T_lin^IF - T_lin^IMEX|`
    pub linear_gap: f64,
    /// `max_k |T_non^ETD - T_non^IMEX|`
    pub nonlinear_gap: f64,
    /// Gap ratios against the previous (larger) `h`.
    pub linear_ratio: Option<f64>,
    pub nonlinear_ratio: Option<f64>,
}

/// How fast the IF and ETD tables collapse onto IMEX as `h -> 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    /// Largest gap over all `h` at the zero mode (0 for conserved models).
    pub zero_mode_gap: f64,
}

/// Compares IMEX, IF and ETD tables at each `h` in `h_values`.
///
/// Both gaps scale as `h^2 L^2` once `h |L| << 1`, so halving `h` should
/// shrink them by about 4.
pub fn limit_consistency_check(
    h_values: &[f64],
    model: &ModelSpec,
    ktab: &WavenumberTable,
) -> Result<ConsistencyReport> {
    if h_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::config("h_values", "step sizes must be strictly decreasing"));
    }
    let mut rows: Vec<ConsistencyRow> = Vec::with_capacity(h_values.len());
    let mut zero_mode_gap = 0.0f64;
    for &h in h_values {
        let build = |m| SchemeTables::build(m, h, model, ktab, Precision::Double);
        let (imex, ifac, etd) = (build(Method::Imex)?, build(Method::If)?, build(Method::Etd)?);
        let max_gap = |a: &[Complex64], b: &[Complex64]| {
            a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        };
        let linear_gap = max_gap(ifac.t_linear(), imex.t_linear());
        let nonlinear_gap = max_gap(etd.t_non(), imex.t_non());
        zero_mode_gap = zero_mode_gap
            .max((ifac.t_linear()[0] - imex.t_linear()[0]).norm())
            .max((etd.t_linear()[0] - imex.t_linear()[0]).norm())
            .max((etd.t_non()[0] - imex.t_non()[0]).norm())
            .max((ifac.t_non()[0] - imex.t_non()[0]).norm());
        let prev = rows.last();
        rows.push(ConsistencyRow {
            h,
            linear_gap,
            nonlinear_gap,
            linear_ratio: prev.map(|p| p.linear_gap / linear_gap),
            nonlinear_ratio: prev.map(|p| p.nonlinear_gap / nonlinear_gap),
        });
    }
    Ok(ConsistencyReport {
        rows,
        zero_mode_gap,
    })
}
