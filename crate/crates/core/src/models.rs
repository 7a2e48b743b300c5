//! Concrete PDE models in the split form `d/dt u_k = L_k u_k + N_k(u)`.
//!
//! Every nonlinear operator in the catalog has the shape
//! `N_k(u) = P_k * F{g(u)}_k` for a pointwise function `g` and a per-mode
//! prefactor `P_k`, so a model is stored as the two symbol tables plus the
//! choice of `g`. Dealiasing is not applied here; it belongs to the scheme
//! tables.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, WavenumberTable};
use crate::spectral::{Fourier, RealField, SpectralField};

/// Cahn-Hilliard parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CHParams {
    /// Double-well height.
    pub w: f64,
    /// Gradient-energy coefficient.
    pub kappa: f64,
    /// Mobility.
    pub mobility: f64,
}

impl CHParams {
    pub fn new(w: f64, kappa: f64, mobility: f64) -> Result<Self> {
        positive("model.W", w)?;
        positive("model.kappa", kappa)?;
        positive("model.M", mobility)?;
        Ok(CHParams { w, kappa, mobility })
    }
}

impl Default for CHParams {
    fn default() -> Self {
        CHParams {
            w: 1.0,
            kappa: 0.1,
            mobility: 1.0,
        }
    }
}

/// Phase-field-crystal parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PFCParams {
    /// Undercooling; negative below the melting point.
    pub r: f64,
    pub mobility: f64,
}

impl PFCParams {
    pub fn new(r: f64, mobility: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::config("model.r", "must be finite"));
        }
        positive("model.M", mobility)?;
        Ok(PFCParams { r, mobility })
    }
}

impl Default for PFCParams {
    fn default() -> Self {
        PFCParams {
            r: -0.25,
            mobility: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvDiffParams {
    /// Advection velocity.
    pub u: f64,
    /// Diffusion coefficient.
    pub d: f64,
}

impl AdvDiffParams {
    pub fn new(u: f64, d: f64) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::config("model.u", "must be finite"));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::config("model.D", format!("must be >= 0, got {d}")));
        }
        Ok(AdvDiffParams { u, d })
    }
}

impl Default for AdvDiffParams {
    fn default() -> Self {
        AdvDiffParams { u: 5.0, d: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersParams {
    /// Viscosity.
    pub nu: f64,
}

impl BurgersParams {
    pub fn new(nu: f64) -> Result<Self> {
        positive("model.nu", nu)?;
        Ok(BurgersParams { nu })
    }
}

impl Default for BurgersParams {
    fn default() -> Self {
        BurgersParams { nu: 0.001 }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be > 0, got {v}")))
    }
}

/// Model identity together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum ModelKind {
    #[serde(rename = "ch")]
    CahnHilliard(CHParams),
    #[serde(rename = "pfc")]
    PhaseFieldCrystal(PFCParams),
    #[serde(rename = "advdiff")]
    AdvectionDiffusion(AdvDiffParams),
    Burgers(BurgersParams),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::CahnHilliard(_) => "ch",
            ModelKind::PhaseFieldCrystal(_) => "pfc",
            ModelKind::AdvectionDiffusion(_) => "advdiff",
            ModelKind::Burgers(_) => "burgers",
        }
    }

    pub fn build(&self, ktab: &WavenumberTable) -> Result<ModelSpec> {
        match *self {
            ModelKind::CahnHilliard(p) => Ok(ch_model(p, ktab)),
            ModelKind::PhaseFieldCrystal(p) => Ok(pfc_model(p, ktab)),
            ModelKind::AdvectionDiffusion(p) => advdiff_model(p, ktab),
            ModelKind::Burgers(p) => burgers_model(p, ktab),
        }
    }
}

/// Model names accepted in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    CahnHilliard,
    PhaseFieldCrystal,
    AdvectionDiffusion,
    Burgers,
}

pub const MODEL_NAMES: &str = "ch, pfc, advdiff, burgers";

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ch" | "cahn-hilliard" | "cahn_hilliard" => Ok(ModelName::CahnHilliard),
            "pfc" | "phase-field-crystal" => Ok(ModelName::PhaseFieldCrystal),
            "advdiff" | "advection-diffusion" => Ok(ModelName::AdvectionDiffusion),
            "burgers" => Ok(ModelName::Burgers),
            other => Err(Error::config(
                "model.name",
                format!("unknown model `{other}` (expected one of: {MODEL_NAMES})"),
            )),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pointwise nonlinearity `g` inside `N_k = P_k F{g(u)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pointwise {
    /// `-3u^2 + 2u^3`
    DoubleWell,
    /// `u^3`
    Cubic,
    /// `u^2`
    Square,
}

impl Pointwise {
    #[inline]
    fn eval(self, u: f64) -> f64 {
        match self {
            Pointwise::DoubleWell => u * u * (2.0 * u - 3.0),
            Pointwise::Cubic => u * u * u,
            Pointwise::Square => u * u,
        }
    }
}

/// A model's linear symbol, nonlinear operator and free energy on one grid.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    kind: ModelKind,
    grid_dim: usize,
    linear: Vec<Complex64>,
    nonlinear: Option<(Pointwise, Vec<Complex64>)>,
    k2: Vec<f64>,
}

impl ModelSpec {
    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// The linear symbol `L_k` in FFT mode order.
    pub fn linear_symbol(&self) -> &[Complex64] {
        &self.linear
    }

    pub fn is_linear(&self) -> bool {
        self.nonlinear.is_none()
    }

    pub fn conserves_mass(&self) -> bool {
        // every model in the catalog carries a derivative on both terms
        self.linear[0] == Complex64::new(0.0, 0.0)
            && self
                .nonlinear
                .as_ref()
                .is_none_or(|(_, p)| p[0] == Complex64::new(0.0, 0.0))
    }

    pub fn has_free_energy(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::CahnHilliard(_) | ModelKind::PhaseFieldCrystal(_)
        )
    }

    /// Writes the raw (not dealiased) `N_k(u)` into `out`.
    ///
    /// `values` are the real-space samples; `fourier` must be planned for
    /// the model's grid.
    pub fn nonlinear_into(&self, values: &[f64], fourier: &mut Fourier, out: &mut [Complex64]) {
        match &self.nonlinear {
            None => out.fill(Complex64::default()),
            Some((g, prefactor)) => {
                for (o, &u) in out.iter_mut().zip(values) {
                    *o = Complex64::new(g.eval(u), 0.0);
                }
                fourier.forward_in_place(out);
                for (o, p) in out.iter_mut().zip(prefactor) {
                    *o *= p;
                }
            }
        }
    }

    /// `N_k(u)` for a field.
    pub fn nonlinear(&self, f: &RealField, fourier: &mut Fourier) -> Result<SpectralField> {
        self.check_field(f)?;
        f.check_finite()?;
        let mut out = vec![Complex64::default(); f.values().len()];
        self.nonlinear_into(f.values(), fourier, &mut out);
        SpectralField::new(*f.grid(), out, f.time())
    }

    /// The free energy of `f`, or `None` for models without one.
    pub fn free_energy(&self, f: &RealField, fourier: &mut Fourier) -> Result<Option<f64>> {
        match self.kind {
            ModelKind::CahnHilliard(p) => self.check_and(f, fourier, |s, f, ft| ch_free_energy_with(s, f, &p, ft)),
            ModelKind::PhaseFieldCrystal(p) => {
                self.check_and(f, fourier, |s, f, ft| pfc_free_energy_with(s, f, &p, ft))
            }
            _ => Ok(None),
        }
    }

    fn check_and(
        &self,
        f: &RealField,
        fourier: &mut Fourier,
        eval: impl FnOnce(&[f64], &RealField, &mut Fourier) -> Result<f64>,
    ) -> Result<Option<f64>> {
        self.check_field(f)?;
        eval(&self.k2, f, fourier).map(Some)
    }

    fn check_field(&self, f: &RealField) -> Result<()> {
        if f.values().len() != self.linear.len() || f.grid().dim() != self.grid_dim {
            return Err(Error::Shape(format!(
                "{} model built for {} modes, field has {}",
                self.name(),
                self.linear.len(),
                f.values().len()
            )));
        }
        Ok(())
    }
}

/// Cahn-Hilliard: `L_k = -M(kappa k^4 + 2W k^2)`,
/// `N_k = -2MW k^2 F{-3u^2 + 2u^3}`.
pub fn ch_model(params: CHParams, ktab: &WavenumberTable) -> ModelSpec {
    let CHParams { w, kappa, mobility: m } = params;
    let linear = ktab
        .k2()
        .iter()
        .map(|&k2| Complex64::new(-m * (kappa * k2 * k2 + 2.0 * w * k2), 0.0))
        .collect();
    let prefactor = ktab
        .k2()
        .iter()
        .map(|&k2| Complex64::new(-2.0 * m * w * k2, 0.0))
        .collect();
    ModelSpec {
        kind: ModelKind::CahnHilliard(params),
        grid_dim: ktab.dim(),
        linear,
        nonlinear: Some((Pointwise::DoubleWell, prefactor)),
        k2: ktab.k2().to_vec(),
    }
}

/// Phase-field crystal: `L_k = -M k^2 (k^4 - 2k^2 + 1 + r)`,
/// `N_k = -M k^2 F{u^3}`.
pub fn pfc_model(params: PFCParams, ktab: &WavenumberTable) -> ModelSpec {
    let PFCParams { r, mobility: m } = params;
    let linear = ktab
        .k2()
        .iter()
        .map(|&k2| Complex64::new(-m * k2 * (k2 * k2 - 2.0 * k2 + 1.0 + r), 0.0))
        .collect();
    let prefactor = ktab
        .k2()
        .iter()
        .map(|&k2| Complex64::new(-m * k2, 0.0))
        .collect();
    ModelSpec {
        kind: ModelKind::PhaseFieldCrystal(params),
        grid_dim: ktab.dim(),
        linear,
        nonlinear: Some((Pointwise::Cubic, prefactor)),
        k2: ktab.k2().to_vec(),
    }
}

fn require_1d(ktab: &WavenumberTable, model: &str) -> Result<()> {
    if ktab.dim() == 1 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{model} is defined on 1D grids only, got {}D",
            ktab.dim()
        )))
    }
}

/// Advection-diffusion: `L_k = -(iuk + Dk^2)`, no nonlinear term.
pub fn advdiff_model(params: AdvDiffParams, ktab: &WavenumberTable) -> Result<ModelSpec> {
    require_1d(ktab, "advection-diffusion")?;
    let AdvDiffParams { u, d } = params;
    let linear = ktab
        .k_axis_odd()
        .iter()
        .zip(ktab.k2())
        .map(|(&k, &k2)| Complex64::new(-d * k2, -u * k))
        .collect();
    Ok(ModelSpec {
        kind: ModelKind::AdvectionDiffusion(params),
        grid_dim: 1,
        linear,
        nonlinear: None,
        k2: ktab.k2().to_vec(),
    })
}

/// Burgers in conservative form: `L_k = -nu k^2`, `N_k = -(ik/2) F{u^2}`.
pub fn burgers_model(params: BurgersParams, ktab: &WavenumberTable) -> Result<ModelSpec> {
    require_1d(ktab, "Burgers")?;
    let linear = ktab
        .k2()
        .iter()
        .map(|&k2| Complex64::new(-params.nu * k2, 0.0))
        .collect();
    let prefactor = ktab
        .k_axis_odd()
        .iter()
        .map(|&k| Complex64::new(0.0, -0.5 * k))
        .collect();
    Ok(ModelSpec {
        kind: ModelKind::Burgers(params),
        grid_dim: 1,
        linear,
        nonlinear: Some((Pointwise::Square, prefactor)),
        k2: ktab.k2().to_vec(),
    })
}

/// `sum_k w(k^2) |u_k|^2 * dx^d / N^d`, i.e. `integral of u W(-lap) u`.
fn quadratic_form(
    k2: &[f64],
    f: &RealField,
    fourier: &mut Fourier,
    weight: impl Fn(f64) -> f64,
) -> Result<f64> {
    let spec = fourier.forward(f)?;
    let sum: f64 = spec
        .coeffs()
        .iter()
        .zip(k2)
        .map(|(c, &k2)| weight(k2) * c.norm_sqr())
        .sum();
    let g = f.grid();
    Ok(sum * g.cell_volume() / g.total_points() as f64)
}

fn ch_free_energy_with(k2: &[f64], f: &RealField, p: &CHParams, fourier: &mut Fourier) -> Result<f64> {
    f.check_finite()?;
    let gradient = quadratic_form(k2, f, fourier, |k2| k2)?;
    let bulk: f64 = f
        .values()
        .iter()
        .map(|&u| p.w * u * u * (1.0 - u) * (1.0 - u))
        .sum::<f64>()
        * f.grid().cell_volume();
    Ok(0.5 * p.kappa * gradient + bulk)
}

fn pfc_free_energy_with(k2: &[f64], f: &RealField, p: &PFCParams, fourier: &mut Fourier) -> Result<f64> {
    f.check_finite()?;
    let swift_hohenberg = quadratic_form(k2, f, fourier, |k2| (1.0 - k2) * (1.0 - k2))?;
    let local: f64 = f
        .values()
        .iter()
        .map(|&u| 0.25 * u * u * (2.0 * p.r + u * u))
        .sum::<f64>()
        * f.grid().cell_volume();
    Ok(0.5 * swift_hohenberg + local)
}

/// Cahn-Hilliard free energy `int (kappa/2)|grad u|^2 + W u^2 (1-u)^2`.
pub fn ch_free_energy(f: &RealField, params: &CHParams) -> Result<f64> {
    let ktab = WavenumberTable::new(f.grid());
    ch_free_energy_with(ktab.k2(), f, params, &mut Fourier::new(f.grid()))
}

/// Phase-field-crystal free energy `int u(1+lap)^2 u / 2 + u^2 (2r + u^2) / 4`.
pub fn pfc_free_energy(f: &RealField, params: &PFCParams) -> Result<f64> {
    let ktab = WavenumberTable::new(f.grid());
    pfc_free_energy_with(ktab.k2(), f, params, &mut Fourier::new(f.grid()))
}

/// Exact advection-diffusion solution at time `t`: `u_k(t) = u_k(0) e^{L_k t}`.
pub fn advdiff_exact(f0: &RealField, params: AdvDiffParams, t: f64) -> Result<RealField> {
    let grid: &GridSpec = f0.grid();
    let ktab = WavenumberTable::new(grid);
    let model = advdiff_model(params, &ktab)?;
    let mut fourier = Fourier::new(grid);
    let mut spec = fourier.forward(f0)?;
    for (c, l) in spec.coeffs_mut().iter_mut().zip(model.linear_symbol()) {
        *c *= (l * t).exp();
    }
    Ok(fourier.inverse(&spec)?.with_time(f0.time() + t))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    fn table(dim: usize, n: usize, l: f64) -> (GridSpec, WavenumberTable) {
        let g = GridSpec::new(dim, n, l, 0.0).unwrap();
        let t = WavenumberTable::new(&g);
        (g, t)
    }

    /// Index of the 1D mode with `k = target` on a `2pi` box.
    fn mode(ktab: &WavenumberTable, target: f64) -> usize {
        ktab.k_axis().iter().position(|&k| (k - target).abs() < 1e-12).unwrap()
    }

    #[test]
    fn ch_symbol_values() {
        let (_, t) = table(1, 16, 2.0 * PI);
        let m = ch_model(CHParams::default(), &t);
        assert_eq!(m.linear_symbol()[0], Complex64::new(0.0, 0.0));
        assert!((m.linear_symbol()[1].re + 2.1).abs() < 1e-14);
        assert!(m.linear_symbol().iter().all(|l| l.re <= 0.0 && l.im == 0.0));
        assert!(m.conserves_mass());
        assert!(m.has_free_energy());
    }

    #[test]
    fn pfc_symbol_values() {
        let (_, t) = table(1, 16, 2.0 * PI);
        let m = pfc_model(PFCParams::default(), &t);
        assert_eq!(m.linear_symbol()[0].re, 0.0);
        assert!((m.linear_symbol()[mode(&t, 1.0)].re - 0.25).abs() < 1e-14);
        assert!((m.linear_symbol()[mode(&t, 2.0)].re + 35.0).abs() < 1e-12);
    }

    #[test]
    fn pfc_growth_band() {
        let (_, t) = table(2, 32, 16.0 * PI);
        let r = -0.25;
        let m = pfc_model(PFCParams::new(r, 1.0).unwrap(), &t);
        for (l, &k2) in m.linear_symbol().iter().zip(t.k2()) {
            let in_band = k2 > 0.0 && (k2 - 1.0).powi(2) < -r;
            assert_eq!(l.re > 0.0, in_band, "k2 = {k2}");
        }
    }

    #[test]
    fn advdiff_symbol() {
        let (_, t) = table(1, 16, 2.0 * PI);
        let m = advdiff_model(AdvDiffParams::default(), &t).unwrap();
        assert_eq!(m.linear_symbol()[0], Complex64::new(0.0, 0.0));
        let l1 = m.linear_symbol()[1];
        assert!((l1 - Complex64::new(-0.01, -5.0)).norm() < 1e-15);
        assert!(m.is_linear() && m.conserves_mass() && !m.has_free_energy());
        let (_, t2) = table(2, 8, 1.0);
        assert!(matches!(
            advdiff_model(AdvDiffParams::default(), &t2),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            burgers_model(BurgersParams::default(), &t2),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn burgers_symbol() {
        let (_, t) = table(1, 32, 2.0 * PI);
        let m = burgers_model(BurgersParams::default(), &t).unwrap();
        assert!((m.linear_symbol()[10].re + 0.1).abs() < 1e-15);
    }

    #[test]
    fn burgers_nonlinear_of_sine() {
        let (g, t) = table(1, 32, 2.0 * PI);
        let m = burgers_model(BurgersParams::default(), &t).unwrap();
        let mut ft = Fourier::new(&g);
        let f = RealField::from_fn(g, |x, _| x.sin());
        let nk = m.nonlinear(&f, &mut ft).unwrap();
        for (j, c) in nk.coeffs().iter().enumerate() {
            if j != 2 && j != 30 {
                assert!(c.norm() < 1e-12, "mode {j}: {c}");
            }
        }
        let real = ft.inverse(&nk).unwrap();
        for (x, v) in g.coords().iter().zip(real.values()) {
            assert!((v + (2.0 * x).sin() / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_field_has_no_nonlinear_drive() {
        let (g, t) = table(2, 16, 10.0);
        let mut ft = Fourier::new(&g);
        let f = RealField::constant(g, 0.37);
        for m in [ch_model(CHParams::default(), &t), pfc_model(PFCParams::default(), &t)] {
            let nk = m.nonlinear(&f, &mut ft).unwrap();
            assert!(nk.coeffs().iter().all(|c| c.norm() < 1e-12));
        }
        let (g1, t1) = table(1, 16, 10.0);
        let mut ft1 = Fourier::new(&g1);
        let b = burgers_model(BurgersParams::default(), &t1).unwrap();
        let nk = b.nonlinear(&RealField::constant(g1, 0.5), &mut ft1).unwrap();
        assert!(nk.coeffs().iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn ch_free_energy_uniform() {
        let g = GridSpec::new(2, 16, 16.0 * PI, 0.0).unwrap();
        let p = CHParams::default();
        assert_eq!(ch_free_energy(&RealField::constant(g, 0.0), &p).unwrap(), 0.0);
        assert_eq!(ch_free_energy(&RealField::constant(g, 1.0), &p).unwrap(), 0.0);
        let f = ch_free_energy(&RealField::constant(g, 0.5), &p).unwrap();
        let expected = 0.0625 * (16.0 * PI).powi(2);
        assert!((f - expected).abs() < 1e-10 * expected);
        assert!((f - 157.91367).abs() < 1e-4);
    }

    #[test]
    fn ch_gradient_term_matches_real_space() {
        // (kappa/2) int |u'|^2 for u = a cos(x) on [0, 2pi) is kappa a^2 pi / 2
        let g = GridSpec::new(1, 32, 2.0 * PI, 0.0).unwrap();
        let p = CHParams::new(1.0, 0.3, 1.0).unwrap();
        let a = 0.1;
        let f = RealField::from_fn(g, |x, _| a * x.cos());
        let bulk: f64 = f.values().iter().map(|u| u * u * (1.0 - u) * (1.0 - u)).sum::<f64>() * g.dx();
        let expected = 0.3 * a * a * PI / 2.0 + bulk;
        assert!((ch_free_energy(&f, &p).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn pfc_free_energy_uniform_and_marginal() {
        let g = GridSpec::new(2, 16, 16.0 * PI, 0.0).unwrap();
        let p = PFCParams::default();
        assert_eq!(pfc_free_energy(&RealField::constant(g, 0.0), &p).unwrap(), 0.0);
        let f = pfc_free_energy(&RealField::constant(g, -0.285), &p).unwrap();
        let per_area = f / g.volume();
        let expected = 0.75 * 0.285f64.powi(2) / 2.0 + 0.285f64.powi(4) / 4.0;
        assert!((per_area - expected).abs() < 1e-14);
        assert!((per_area - 0.032109).abs() < 1e-6);

        // a |k| = 1 mode only contributes through the local term
        let eps = 0.01;
        let wave = RealField::from_fn(g, |x, _| eps * x.cos());
        let local: f64 = wave
            .values()
            .iter()
            .map(|u| 0.25 * u * u * (2.0 * p.r + u * u))
            .sum::<f64>()
            * g.cell_volume();
        assert!((pfc_free_energy(&wave, &p).unwrap() - local).abs() < 1e-12);
    }

    #[test]
    fn free_energy_rejects_non_finite() {
        let g = GridSpec::new(1, 8, 1.0, 0.0).unwrap();
        let mut f = RealField::constant(g, 0.1);
        f.values_mut()[0] = f64::INFINITY;
        assert!(ch_free_energy(&f, &CHParams::default()).is_err());
        assert!(pfc_free_energy(&f, &PFCParams::default()).is_err());
    }

    #[test]
    fn advdiff_exact_cases() {
        let g = GridSpec::new(1, 64, 2.0 * PI, 0.0).unwrap();
        let f0 = RealField::from_fn(g, |x, _| x.sin());
        let same = advdiff_exact(&f0, AdvDiffParams::new(5.0, 0.01).unwrap(), 0.0).unwrap();
        for (a, b) in same.values().iter().zip(f0.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        let decayed = advdiff_exact(&f0, AdvDiffParams::new(0.0, 1.0).unwrap(), 1.0).unwrap();
        for (a, b) in decayed.values().iter().zip(f0.values()) {
            assert!((a - (-1.0f64).exp() * b).abs() < 1e-14);
        }
        let moved = advdiff_exact(&f0, AdvDiffParams::new(1.0, 0.0).unwrap(), PI).unwrap();
        for (a, b) in moved.values().iter().zip(f0.values()) {
            assert!((a + b).abs() < 1e-13);
        }
    }

    /// Second-order central differences of the CH right-hand side on a fine
    /// periodic grid, sampled back at the coarse points.
    fn ch_rhs_finite_difference(u: impl Fn(f64) -> f64, p: &CHParams, fine: usize, coarse: usize) -> Vec<f64> {
        let dx = 2.0 * PI / fine as f64;
        let eta: Vec<f64> = (0..fine).map(|j| u(j as f64 * dx)).collect();
        let lap = |v: &[f64]| -> Vec<f64> {
            (0..fine)
                .map(|j| (v[(j + 1) % fine] - 2.0 * v[j] + v[(j + fine - 1) % fine]) / (dx * dx))
                .collect()
        };
        let lap_eta = lap(&eta);
        let mu: Vec<f64> = eta
            .iter()
            .zip(&lap_eta)
            .map(|(&e, &l)| -p.kappa * l + 2.0 * p.w * (e - 3.0 * e * e + 2.0 * e * e * e))
            .collect();
        let rhs = lap(&mu);
        let stride = fine / coarse;
        (0..coarse).map(|j| p.mobility * rhs[j * stride]).collect()
    }

    #[test]
    fn ch_rhs_matches_finite_difference() {
        let (g, t) = table(1, 8, 2.0 * PI);
        let p = CHParams::new(1.0, 0.1, 1.0).unwrap();
        let m = ch_model(p, &t);
        let u = |x: f64| 0.5 + 0.1 * x.cos();
        let f = RealField::from_fn(g, |x, _| u(x));
        let mut ft = Fourier::new(&g);
        let mut rhs = ft.forward(&f).unwrap();
        let nk = m.nonlinear(&f, &mut ft).unwrap();
        for ((c, l), n) in rhs.coeffs_mut().iter_mut().zip(m.linear_symbol()).zip(nk.coeffs()) {
            *c = *c * l + n;
        }
        let spectral = ft.inverse(&rhs).unwrap();
        // Richardson-extrapolate two resolutions; finer grids drown in round-off
        let coarse = ch_rhs_finite_difference(u, &p, 128, 8);
        let fine = ch_rhs_finite_difference(u, &p, 256, 8);
        let fd: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| f + (f - c) / 3.0).collect();
        for (a, b) in spectral.values().iter().zip(&fd) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn nonlinear_is_translation_equivariant(
            values in proptest::collection::vec(-1.0f64..1.0, 16),
            shift in 0usize..16,
            which in 0usize..3,
        ) {
            let (g, t) = table(1, 16, 2.0 * PI);
            let m = match which {
                0 => ch_model(CHParams::default(), &t),
                1 => pfc_model(PFCParams::default(), &t),
                _ => burgers_model(BurgersParams::default(), &t).unwrap(),
            };
            let mut ft = Fourier::new(&g);
            let shifted: Vec<f64> = (0..16).map(|j| values[(j + 16 - shift) % 16]).collect();
            let a = m.nonlinear(&RealField::new(g, values, 0.0).unwrap(), &mut ft).unwrap();
            let b = m.nonlinear(&RealField::new(g, shifted, 0.0).unwrap(), &mut ft).unwrap();
            let scale = a.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
            for (j, (ca, cb)) in a.coeffs().iter().zip(b.coeffs()).enumerate() {
                let k = t.k_axis()[j];
                let phase = Complex64::from_polar(1.0, -k * shift as f64 * g.dx());
                prop_assert!((ca * phase - cb).norm() <= 1e-11 * scale);
            }
            prop_assert_eq!(a.coeffs()[0], Complex64::new(0.0, 0.0));
        }
    }
}
