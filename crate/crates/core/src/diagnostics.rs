//! Scalar and spectral observables of a field snapshot.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::WavenumberTable;
use crate::models::ModelSpec;
use crate::spectral::{Fourier, RealField};

/// One row of the diagnostics stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub free_energy: Option<f64>,
    pub mean_value: f64,
    pub max_abs: f64,
}

/// `||f - reference||_2 / N^dim`.
pub fn l2_error(f: &RealField, reference: &RealField) -> Result<f64> {
    if !f.grid().same_geometry(reference.grid()) {
        return Err(Error::Shape(format!(
            "cannot compare fields on {:?} and {:?}",
            f.grid(),
            reference.grid()
        )));
    }
    let sum: f64 = f
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum.sqrt() / f.values().len() as f64)
}

/// Mean, `max|eta|` and (when the model has one) free energy of `f`.
pub fn record(f: &RealField, model: &ModelSpec, fourier: &mut Fourier) -> Result<DiagnosticsRecord> {
    f.check_finite()?;
    Ok(DiagnosticsRecord {
        time: f.time(),
        free_energy: model.free_energy(f, fourier)?,
        mean_value: f.mean(),
        max_abs: f.max_abs(),
    })
}

/// Shell-averaged power spectrum `|eta_k|^2` over uniform `|k|` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSpectrum {
    pub bin_centers: Vec<f64>,
    /// Mean power of the modes in each shell (0 for empty shells).
    pub power: Vec<f64>,
    pub counts: Vec<usize>,
    pub bin_width: f64,
    /// Power-weighted mean `|k|` inside the strongest shell.
    pub dominant_k: f64,
    /// Power of the zero mode, kept out of the shells.
    pub zero_mode_power: f64,
}

impl RadialSpectrum {
    /// Sum of `|eta_k|^2` over all modes, zero mode included.
    pub fn total_power(&self) -> f64 {
        self.zero_mode_power
            + self
                .power
                .iter()
                .zip(&self.counts)
                .map(|(p, &c)| p * c as f64)
                .sum::<f64>()
    }
}

fn spectrum_2d(f: &RealField, what: &str) -> Result<(WavenumberTable, Vec<f64>)> {
    if f.grid().dim() != 2 {
        return Err(Error::Unsupported(format!(
            "{what} needs a 2D field, got {}D",
            f.grid().dim()
        )));
    }
    let ktab = WavenumberTable::new(f.grid());
    let spec = Fourier::new(f.grid()).forward(f)?;
    let power = spec.coeffs().iter().map(|c| c.norm_sqr()).collect();
    Ok((ktab, power))
}

/// Radially averaged structure factor of a 2D field.
pub fn radial_spectrum(f: &RealField, n_bins: usize) -> Result<RadialSpectrum> {
    if n_bins < 8 {
        return Err(Error::config("bins", format!("need at least 8 bins, got {n_bins}")));
    }
    let (ktab, mode_power) = spectrum_2d(f, "radial spectrum")?;
    let k_max = ktab.k_norm_max();
    let width = k_max / n_bins as f64;

    let mut sums = vec![0.0; n_bins];
    let mut weighted_k = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (&k2, &p) in ktab.k2().iter().zip(&mode_power).skip(1) {
        let k = k2.sqrt();
        let bin = ((k / width) as usize).min(n_bins - 1);
        sums[bin] += p;
        weighted_k[bin] += p * k;
        counts[bin] += 1;
    }
    let power: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let bin_centers = (0..n_bins).map(|b| (b as f64 + 0.5) * width).collect::<Vec<_>>();

    let best = (0..n_bins)
        .filter(|&b| counts[b] > 0)
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .unwrap_or(0);
    let dominant_k = if sums[best] > 0.0 {
        weighted_k[best] / sums[best]
    } else {
        bin_centers[best]
    };

    Ok(RadialSpectrum {
        bin_centers,
        power,
        counts,
        bin_width: width,
        dominant_k,
        zero_mode_power: mode_power[0],
    })
}

/// Number of distinct wave-vector directions carrying the power of a shell.
///
/// Modes with `k_lo <= |k| < k_hi` whose power is at least
/// `rel_threshold` times the strongest one are grouped by angle; directions
/// within `merge_angle` radians of each other count once. A stripe pattern
/// yields 2 (`+k` and `-k`), a hexagonal crystal 6.
pub fn shell_sectors(
    f: &RealField,
    k_lo: f64,
    k_hi: f64,
    rel_threshold: f64,
    merge_angle: f64,
) -> Result<usize> {
    let (ktab, mode_power) = spectrum_2d(f, "sector analysis")?;
    let in_shell: Vec<(f64, f64)> = ktab
        .k2()
        .iter()
        .zip(&mode_power)
        .enumerate()
        .filter(|(_, (&k2, _))| k2 >= k_lo * k_lo && k2 < k_hi * k_hi && k2 > 0.0)
        .map(|(i, (_, &p))| {
            let (kx, ky) = ktab.k_vec(i);
            (ky.atan2(kx).rem_euclid(2.0 * PI), p)
        })
        .collect();
    let peak = in_shell.iter().map(|&(_, p)| p).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0);
    }
    let mut angles: Vec<f64> = in_shell
        .iter()
        .filter(|&&(_, p)| p >= rel_threshold * peak)
        .map(|&(a, _)| a)
        .collect();
    angles.sort_by(f64::total_cmp);

    let mut groups = 1;
    for w in angles.windows(2) {
        if w[1] - w[0] > merge_angle {
            groups += 1;
        }
    }
    // the first and last groups may meet across the 0 / 2pi seam
    if groups > 1 && angles[0] + 2.0 * PI - angles[angles.len() - 1] <= merge_angle {
        groups -= 1;
    }
    Ok(groups)
}
