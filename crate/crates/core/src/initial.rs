//! Initial fields built from a recipe and a seed.

use std::f64::consts::TAU;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::config::InitialCondition;
use crate::error::Result;
use crate::grid::GridSpec;
use crate::spectral::RealField;

/// Standard normal deviates from a ChaCha20 stream via Box-Muller.
///
/// Each pair of 64-bit draws yields two deviates, so the sequence depends
/// only on the seed and is identical on every platform.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Samples the initial condition on `grid`; values are rounded to the grid precision.
pub fn build_initial(ic: &InitialCondition, grid: &GridSpec, seed: u64) -> Result<RealField> {
    let mut field = match *ic {
        InitialCondition::UniformNoise { eta0, noise } => {
            let mut normal = NormalStream::new(seed);
            let values = (0..grid.total_points())
                .map(|_| eta0 + noise * normal.sample())
                .collect();
            RealField::new(*grid, values, 0.0)?
        }
        InitialCondition::TopHat { x0, width, intensity } => {
            let inside = |x: f64| x >= x0 && x < x0 + width;
            if grid.dim() == 1 {
                RealField::from_fn(*grid, |x, _| if inside(x) { intensity } else { 0.0 })
            } else {
                RealField::from_fn(*grid, |x, y| {
                    if inside(x) && inside(y) {
                        intensity
                    } else {
                        0.0
                    }
                })
            }
        }
        InitialCondition::GaussianBump => {
            let bump = |x: f64| (-10.0 * (x / 2.0) * (x / 2.0)).exp();
            if grid.dim() == 1 {
                RealField::from_fn(*grid, |x, _| bump(x))
            } else {
                RealField::from_fn(*grid, |x, y| bump(x) * bump(y))
            }
        }
        InitialCondition::CosineProbe { eta0, epsilon, k0 } => {
            RealField::from_fn(*grid, |x, _| eta0 + epsilon * (k0 * x).cos())
        }
    };
    let precision = grid.precision();
    for v in field.values_mut() {
        *v = precision.round(*v);
    }
    field.check_finite()?;
    Ok(field)
}
