//! Periodic sampling geometry and its Fourier-space mirror.
//!
//! Grids are square: every axis shares the same point count, length and
//! origin. Two-dimensional data is stored row-major with the first (x) axis
//! slowest, so flat index `i * n + j` addresses the point `(x_i, y_j)` and,
//! in Fourier space, the mode `(k_i, k_j)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floating-point storage precision of the simulation state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    #[default]
    Double,
}

impl Precision {
    /// Rounds `x` to the storage precision.
    #[inline]
    pub fn round(self, x: f64) -> f64 {
        match self {
            Precision::Single => x as f32 as f64,
            Precision::Double => x,
        }
    }

    pub fn bytes_per_value(self) -> usize {
        match self {
            Precision::Single => 4,
            Precision::Double => 8,
        }
    }

    pub fn dtype(self) -> &'static str {
        match self {
            Precision::Single => "f32le",
            Precision::Double => "f64le",
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "f32" => Ok(Precision::Single),
            "double" | "f64" => Ok(Precision::Double),
            other => Err(Error::config(
                "run.precision",
                format!("unknown precision `{other}` (expected one of: single, double)"),
            )),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Single => "single",
            Precision::Double => "double",
        })
    }
}

/// A uniform periodic grid in one or two dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n_points: usize,
    length: f64,
    origin: f64,
    precision: Precision,
}

impl GridSpec {
    /// Builds a grid of `n_points` per axis on `[origin, origin + length)`.
    ///
    /// The right endpoint is excluded, so `dx = length / n_points`.
    pub fn new(dim: usize, n_points: usize, length: f64, origin: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::config("grid.dim", format!("dimension must be 1 or 2, got {dim}")));
        }
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(Error::config(
                "grid.n",
                format!("point count must be a power of two >= 4, got {n_points}"),
            ));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::config(
                "grid.length",
                format!("domain length must be positive and finite, got {length}"),
            ));
        }
        if !origin.is_finite() {
            return Err(Error::config("grid.origin", "origin must be finite"));
        }
        Ok(GridSpec {
            dim,
            n_points,
            length,
            origin,
            precision: Precision::Double,
        })
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Total number of grid points, `n_points^dim`.
    pub fn total_points(&self) -> usize {
        self.n_points.pow(self.dim as u32)
    }

    /// Domain volume (length or area).
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Volume element used by Riemann-sum integrals.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Coordinates of the grid points along one axis.
    pub fn coords(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points)
            .map(|j| self.origin + j as f64 * dx)
            .collect()
    }

    /// Whether two grids sample the same points (precision is ignored).
    pub fn same_geometry(&self, other: &GridSpec) -> bool {
        self.dim == other.dim
            && self.n_points == other.n_points
            && self.length == other.length
            && self.origin == other.origin
    }
}

/// Signed FFT-ordered wavenumbers, `|k|^2` per mode and the 2/3-rule mask.
#[derive(Debug, Clone)]
pub struct WavenumberTable {
    dim: usize,
    n_points: usize,
    k_axis: Vec<f64>,
    k2: Vec<f64>,
    dealias_mask: Vec<bool>,
    k_cut: f64,
}

impl WavenumberTable {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n_points();
        let scale = 2.0 * PI / grid.length();
        let k_axis: Vec<f64> = (0..n)
            .map(|j| {
                let signed = if j < n / 2 { j as isize } else { j as isize - n as isize };
                scale * signed as f64
            })
            .collect();
        let k_max = k_axis.iter().copied().fold(f64::MIN, f64::max);
        let k_cut = 2.0 / 3.0 * k_max;
        let keep = |k: f64| k.abs() < k_cut;

        let (k2, dealias_mask) = match grid.dim() {
            1 => (
                k_axis.iter().map(|k| k * k).collect(),
                k_axis.iter().map(|&k| keep(k)).collect(),
            ),
            _ => {
                let mut k2 = Vec::with_capacity(n * n);
                let mut mask = Vec::with_capacity(n * n);
                for &kx in &k_axis {
                    for &ky in &k_axis {
                        k2.push(kx * kx + ky * ky);
                        mask.push(keep(kx) && keep(ky));
                    }
                }
                (k2, mask)
            }
        };

        WavenumberTable {
            dim: grid.dim(),
            n_points: n,
            k_axis,
            k2,
            dealias_mask,
            k_cut,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Number of Fourier modes, equal to the number of grid points.
    pub fn len(&self) -> usize {
        self.k2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k2.is_empty()
    }

    /// Signed wavenumbers along one axis, in FFT order.
    pub fn k_axis(&self) -> &[f64] {
        &self.k_axis
    }

    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias_mask
    }

    pub fn k_cut(&self) -> f64 {
        self.k_cut
    }

    /// Largest `|k|` over all modes.
    pub fn k_norm_max(&self) -> f64 {
        self.k2.iter().copied().fold(0.0, f64::max).sqrt()
    }

    /// Wavenumber components `(kx, ky)` of flat mode index `idx` (2D only).
    pub fn k_vec(&self, idx: usize) -> (f64, f64) {
        match self.dim {
            1 => (self.k_axis[idx], 0.0),
            _ => (self.k_axis[idx / self.n_points], self.k_axis[idx % self.n_points]),
        }
    }

    /// Axis wavenumbers for odd-order derivatives: the unpaired Nyquist
    /// entry is zeroed so that real fields stay Hermitian.
    pub fn k_axis_odd(&self) -> Vec<f64> {
        let mut k = self.k_axis.clone();
        k[self.n_points / 2] = 0.0;
        k
    }

    /// Flat index of the mode `-k` paired with `idx`.
    pub fn mirror_index(&self, idx: usize) -> usize {
        let n = self.n_points;
        let neg = |j: usize| (n - j) % n;
        match self.dim {
            1 => neg(idx),
            _ => neg(idx / n) * n + neg(idx % n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_excludes_endpoint() {
        let g = GridSpec::new(1, 4, 2.0 * PI, 0.0).unwrap();
        assert_eq!(g.dx(), PI / 2.0);
        let c = g.coords();
        assert_eq!(c, vec![0.0, PI / 2.0, PI, 1.5 * PI]);
    }

    #[test]
    fn large_pattern_grid() {
        let g = GridSpec::new(2, 256, 16.0 * PI, 0.0).unwrap();
        assert!((g.dx() - PI / 16.0).abs() < 1e-15);
        assert_eq!(g.total_points(), 65536);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(GridSpec::new(1, 3, 1.0, 0.0), Err(Error::Config { .. })));
        assert!(matches!(GridSpec::new(1, 2, 1.0, 0.0), Err(Error::Config { .. })));
        assert!(matches!(GridSpec::new(1, 8, 0.0, 0.0), Err(Error::Config { .. })));
        assert!(matches!(GridSpec::new(1, 8, -1.0, 0.0), Err(Error::Config { .. })));
        assert!(matches!(GridSpec::new(3, 8, 1.0, 0.0), Err(Error::Config { .. })));
    }

    #[test]
    fn fft_ordering() {
        let g = GridSpec::new(1, 4, 2.0 * PI, 0.0).unwrap();
        let t = WavenumberTable::new(&g);
        assert_eq!(t.k_axis(), &[0.0, 1.0, -2.0, -1.0]);
    }

    #[test]
    fn dealias_mask_is_strict() {
        let g = GridSpec::new(1, 8, 2.0 * PI, 0.0).unwrap();
        let t = WavenumberTable::new(&g);
        assert!((t.k_cut() - 2.0).abs() < 1e-15);
        let kept: Vec<f64> = t
            .k_axis()
            .iter()
            .zip(t.dealias_mask())
            .filter(|(_, &m)| m)
            .map(|(&k, _)| k)
            .collect();
        assert_eq!(kept, vec![0.0, 1.0, -1.0]);
    }

    #[test]
    fn k2_zero_only_at_origin_and_mask_symmetric() {
        for dim in 1..=2 {
            let g = GridSpec::new(dim, 16, 5.0, 0.0).unwrap();
            let t = WavenumberTable::new(&g);
            assert_eq!(t.k_axis()[0], 0.0);
            for (i, &k2) in t.k2().iter().enumerate() {
                assert!(k2 >= 0.0);
                assert_eq!(k2 == 0.0, i == 0);
                let m = t.mirror_index(i);
                assert_eq!(t.dealias_mask()[i], t.dealias_mask()[m]);
            }
        }
    }
}
