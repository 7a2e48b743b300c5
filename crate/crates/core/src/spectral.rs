//! Real and spectral fields, the FFT pair and spectral derivatives.
//!
//! The forward transform is unnormalized; the inverse carries the `1/N^dim`
//! factor, so a lone zero-mode coefficient `c` maps back to the constant
//! field `c / N^dim`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, WavenumberTable};

/// The order parameter sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
    time: f64,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(Error::Shape(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.total_points()
            )));
        }
        Ok(RealField { grid, values, time })
    }

    /// Samples `f(x, y)` at every grid point (`y` is 0 in 1D).
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let c = grid.coords();
        let values = match grid.dim() {
            1 => c.iter().map(|&x| f(x, 0.0)).collect(),
            _ => c
                .iter()
                .flat_map(|&x| c.iter().map(move |&y| (x, y)))
                .map(|(x, y)| f(x, y))
                .collect(),
        };
        RealField {
            grid,
            values,
            time: 0.0,
        }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        RealField {
            grid,
            values: vec![value; grid.total_points()],
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Fails with the index of the first NaN or infinity.
    pub fn check_finite(&self) -> Result<()> {
        check_finite(&self.values, "real field")
    }
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// Fourier coefficients of a field, in FFT mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    time: f64,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>, time: f64) -> Result<Self> {
        if coeffs.len() != grid.total_points() {
            return Err(Error::Shape(format!(
                "spectrum has {} modes, grid has {}",
                coeffs.len(),
                grid.total_points()
            )));
        }
        Ok(SpectralField { grid, coeffs, time })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Spatial mean of the represented field.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / self.coeffs.len() as f64
    }
}

/// Planned forward/inverse FFTs for one grid, with reusable work buffers.
pub struct Fourier {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    transpose: Vec<Complex64>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let transpose = if grid.dim() == 2 {
            vec![Complex64::default(); grid.total_points()]
        } else {
            Vec::new()
        };
        Fourier {
            grid: *grid,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            transpose,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Unnormalized forward transform of `f`.
    pub fn forward(&mut self, f: &RealField) -> Result<SpectralField> {
        self.expect_grid(f.grid())?;
        f.check_finite()?;
        let mut coeffs: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut coeffs);
        Ok(SpectralField {
            grid: *f.grid(),
            coeffs,
            time: f.time(),
        })
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&mut self, spec: &SpectralField) -> Result<RealField> {
        self.expect_grid(spec.grid())?;
        let mut buf = spec.coeffs().to_vec();
        self.inverse_in_place(&mut buf);
        Ok(RealField {
            grid: *spec.grid(),
            values: buf.iter().map(|c| c.re).collect(),
            time: spec.time(),
        })
    }

    /// In-place unnormalized forward transform of a full complex buffer.
    pub fn forward_in_place(&mut self, buf: &mut [Complex64]) {
        let plan = Arc::clone(&self.forward);
        self.transform(buf, plan.as_ref());
    }

    /// In-place inverse transform including the `1/N^dim` factor.
    pub fn inverse_in_place(&mut self, buf: &mut [Complex64]) {
        let plan = Arc::clone(&self.inverse);
        self.transform(buf, plan.as_ref());
        let norm = 1.0 / buf.len() as f64;
        for c in buf.iter_mut() {
            *c = c.scale(norm);
        }
    }

    fn transform(&mut self, buf: &mut [Complex64], plan: &dyn Fft<f64>) {
        debug_assert_eq!(buf.len(), self.grid.total_points());
        let n = self.grid.n_points();
        // rustfft runs the plan over every contiguous chunk of length n
        plan.process_with_scratch(buf, &mut self.scratch);
        if self.grid.dim() == 2 {
            transpose_square(buf, &mut self.transpose, n);
            plan.process_with_scratch(&mut self.transpose, &mut self.scratch);
            transpose_square(&self.transpose, buf, n);
        }
    }

    fn expect_grid(&self, other: &GridSpec) -> Result<()> {
        if self.grid.same_geometry(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "transform planned for {:?}, field lives on {:?}",
                self.grid, other
            )))
        }
    }
}

fn transpose_square(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Per-mode multiplier tables for spectral derivatives of a given order.
///
/// Even orders use `(-k^2)^(order/2)`, applied one Laplacian at a time so
/// that composing derivatives reproduces higher orders bit for bit. Odd
/// orders (1D only) add one factor of `ik` with the Nyquist entry zeroed.
pub fn spectral_derivative(
    spec: &SpectralField,
    order: u32,
    ktab: &WavenumberTable,
) -> Result<SpectralField> {
    if ktab.len() != spec.coeffs().len() || ktab.dim() != spec.grid().dim() {
        return Err(Error::Shape("wavenumber table does not match field".into()));
    }
    if order % 2 == 1 && spec.grid().dim() != 1 {
        return Err(Error::Unsupported(format!(
            "odd derivative order {order} on a {}D grid",
            spec.grid().dim()
        )));
    }
    let mut out = spec.clone();
    for _ in 0..order / 2 {
        for (c, &k2) in out.coeffs.iter_mut().zip(ktab.k2()) {
            *c = c.scale(-k2);
        }
    }
    if order % 2 == 1 {
        for (c, k) in out.coeffs.iter_mut().zip(ktab.k_axis_odd()) {
            *c = Complex64::new(-k * c.im, k * c.re);
        }
    }
    Ok(out)
}
