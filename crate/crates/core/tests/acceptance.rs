//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs with a plain `main` so every line reaches the test log; the process
//! exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use phasefield::diagnostics::{l2_error, radial_spectrum, shell_sectors};
use phasefield::models::{advdiff_exact, AdvDiffParams};
use phasefield::{convergence_study, phi1, run, Complex64, Method, RealField, RunConfig, Simulation};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config(text: &str) -> RunConfig {
    text.parse().unwrap_or_else(|e| panic!("bad test config: {e}\n{text}"))
}

fn ch_spinodal(h: f64, t_final: f64, frame_interval: f64) -> RunConfig {
    config(&format!(
        "model.name = ch\nmodel.W = 1\nmodel.kappa = 0.1\nmodel.M = 1\n\
         grid.n = 64\ngrid.length = 16pi\n\
         time.method = etd\ntime.h = {h}\ntime.t_final = {t_final}\ntime.frame_interval = {frame_interval}\n\
         ic.kind = uniform_noise\nic.eta0 = 0.5\nic.noise = 0.02\nrun.seed = 12345\n"
    ))
}

fn pfc(eta0: f64, method: &str, h: f64, t_final: f64, frame_interval: f64) -> RunConfig {
    config(&format!(
        "model.name = pfc\nmodel.r = -0.25\nmodel.M = 1\n\
         grid.n = 64\ngrid.length = 16pi\n\
         time.method = {method}\ntime.h = {h}\ntime.t_final = {t_final}\ntime.frame_interval = {frame_interval}\n\
         ic.kind = uniform_noise\nic.eta0 = {eta0}\nic.relative_noise = 0.02\nrun.seed = 12345\n"
    ))
}

fn relative_l2(f: &RealField, reference: &RealField) -> f64 {
    let diff: f64 = f
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let norm: f64 = reference.values().iter().map(|b| b * b).sum();
    (diff / norm).sqrt()
}

fn linear_exactness() -> Outcome {
    let start = Instant::now();
    let base = |method: &str| {
        config(&format!(
            "model.name = advdiff\nmodel.u = 5\nmodel.D = 0.01\n\
             grid.n = 4096\ngrid.length = 2pi\ngrid.origin = -pi\n\
             time.method = {method}\ntime.h = 0.01\ntime.t_final = 1\n\
             ic.kind = cosine_probe\nic.eta0 = 0\nic.epsilon = 1\nic.k0 = 3\n"
        ))
    };
    let mut errors = Vec::new();
    for method in ["etd", "if", "imex"] {
        let c = base(method);
        let mut sim = Simulation::new(&c).unwrap();
        let f0 = sim.field();
        sim.advance_to(1.0).unwrap();
        let exact = advdiff_exact(&f0, AdvDiffParams { u: 5.0, d: 0.01 }, sim.time()).unwrap();
        errors.push(relative_l2(&sim.field(), &exact));
    }
    let elapsed = start.elapsed();
    let pass = errors[0] <= 1e-12
        && errors[1] <= 1e-12
        && errors[2] >= 1e-6
        && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "relative L2 etd={:.2e} if={:.2e} (<= 1e-12), imex={:.2e} (>= 1e-6), {:.2?} (< 5 s)",
            errors[0], errors[1], errors[2], elapsed
        ),
    )
}

/// `(e^x - 1) / x` by a 30-term Taylor series near 0 and directly elsewhere.
fn phi1_oracle(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // 1 + x/2 (1 + x/3 (1 + ... (1 + x/31))), i.e. sum_{n<=30} x^n / (n + 1)!
        let mut p = 1.0;
        for n in (2..=31).rev() {
            p = 1.0 + x * p / n as f64;
        }
        p
    } else {
        (x.exp() - 1.0) / x
    }
}

fn phi1_correctness() -> Outcome {
    let n = 5000;
    let (lo, hi) = (1e-14f64.ln(), 50f64.ln());
    let mut worst = 0.0f64;
    let mut worst_z = 0.0;
    for i in 0..n {
        let mag = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
        for z in [mag, -mag] {
            let got = phi1(Complex64::new(z, 0.0));
            let want = phi1_oracle(z);
            let rel = ((got.re - want) / want).abs().max(got.im.abs());
            if rel > worst {
                worst = rel;
                worst_z = z;
            }
        }
    }
    // independently computed with 50-digit arithmetic
    #[allow(clippy::excessive_precision, clippy::approx_constant)]
    let frozen = [
        (-50.0, 0.02),
        (50.0, 103694110571741449281.7291),
        (0.37, 1.210093553144120166),
        (-3.3, 0.2918535856359878771),
        (2f64.ln(), 1.4426950408889634),
        (-1.0, 0.6321205588285577),
    ];
    let mut frozen_worst = 0.0f64;
    for (z, want) in frozen {
        let got = phi1(Complex64::new(z, 0.0)).re;
        frozen_worst = frozen_worst.max(((got - want) / want).abs());
    }
    let complex = phi1(Complex64::new(-0.5, 2.0));
    let complex_err = (complex - Complex64::new(0.406_879_163_291_598_4, 0.524_483_116_831_232_2)).norm()
        / complex.norm();
    let at_zero = phi1(Complex64::new(0.0, 0.0));
    let pass = worst <= 1e-13
        && frozen_worst <= 1e-13
        && complex_err <= 1e-13
        && at_zero == Complex64::new(1.0, 0.0);
    outcome(
        pass,
        format!(
            "max relative error {worst:.2e} at z={worst_z:.3e} over 10^4 points, \
             frozen values {frozen_worst:.2e}, complex {complex_err:.2e} (<= 1e-13), phi1(0) = {at_zero}"
        ),
    )
}

fn ch_reference_run(dir: &Path) -> (phasefield::run::RunOutcome, Duration) {
    let start = Instant::now();
    let out = run(&ch_spinodal(0.01, 50.0, 1.0), dir).expect("CH run completes");
    (out, start.elapsed())
}

fn mass_conservation(out: &phasefield::run::RunOutcome, elapsed: Duration) -> Outcome {
    let m0 = out.diagnostics[0].mean_value;
    let drift = out
        .diagnostics
        .iter()
        .map(|r| (r.mean_value - m0).abs())
        .fold(0.0, f64::max);
    let pass = drift <= 1e-10 && out.diagnostics.len() == 51 && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "max |mean(t) - mean(0)| = {drift:.2e} over {} frames (<= 1e-10), {elapsed:.2?} (< 30 s)",
            out.diagnostics.len() - 1
        ),
    )
}

/// Largest `F_{i+1} - F_i - 1e-8 (1 + |F_i|)`; non-positive means monotone.
fn worst_energy_rise(energies: &[f64]) -> f64 {
    energies
        .windows(2)
        .map(|w| w[1] - w[0] - 1e-8 * (1.0 + w[0].abs()))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn energy_monotonicity(ch: &phasefield::run::RunOutcome, dir: &Path) -> Outcome {
    let ch_f: Vec<f64> = ch.diagnostics.iter().map(|r| r.free_energy.unwrap()).collect();
    let pfc_out = run(&pfc(-0.285, "etd", 0.05, 200.0, 1.0), dir).expect("PFC run completes");
    let pfc_f: Vec<f64> = pfc_out.diagnostics.iter().map(|r| r.free_energy.unwrap()).collect();
    let (a, b) = (worst_energy_rise(&ch_f), worst_energy_rise(&pfc_f));
    outcome(
        a <= 0.0 && b <= 0.0,
        format!(
            "CH F {:.6} -> {:.6} over {} frames, worst excess rise {a:.2e}; \
             PFC F {:.8} -> {:.8} over {} frames, worst excess rise {b:.2e} (<= 0)",
            ch_f[0],
            ch_f[ch_f.len() - 1],
            ch_f.len() - 1,
            pfc_f[0],
            pfc_f[pfc_f.len() - 1],
            pfc_f.len() - 1
        ),
    )
}

fn table_one_trend() -> Outcome {
    let start = Instant::now();
    let hs = [0.1, 0.02, 0.004];
    let table = convergence_study(&ch_spinodal(0.1, 10.0, 10.0), &hs, &Method::ALL, 1e-4, 10.0)
        .expect("study completes");
    let elapsed = start.elapsed();
    let err = |h: f64, m: Method| table.cell(h, m).and_then(|c| c.error()).unwrap_or(f64::NAN);
    let monotone = Method::ALL
        .iter()
        .all(|&m| err(0.1, m) > err(0.02, m) && err(0.02, m) > err(0.004, m));
    let etd_best = hs.iter().all(|&h| err(h, Method::Etd) <= err(h, Method::If));
    let ratio = err(0.004, Method::Etd) / err(0.004, Method::Imex);
    let parity = (0.5..=2.0).contains(&ratio);
    let rows: Vec<String> = hs
        .iter()
        .map(|&h| {
            format!(
                "h={h}: imex {:.2e} if {:.2e} etd {:.2e}",
                err(h, Method::Imex),
                err(h, Method::If),
                err(h, Method::Etd)
            )
        })
        .collect();
    outcome(
        monotone && etd_best && parity && elapsed < Duration::from_secs(600),
        format!(
            "{}; monotone={monotone} etd<=if={etd_best} etd/imex at 0.004 = {ratio:.3} (in [0.5, 2]), {elapsed:.2?}",
            rows.join("; ")
        ),
    )
}

const TABLE_TWO_T_EVAL: f64 = 1000.0;
const TABLE_TWO_H_REF: f64 = 0.01;

fn table_two_gap() -> Outcome {
    let table = convergence_study(
        &pfc(-0.285, "etd", 0.2, TABLE_TWO_T_EVAL, TABLE_TWO_T_EVAL),
        &[0.2],
        &[Method::If, Method::Etd],
        TABLE_TWO_H_REF,
        TABLE_TWO_T_EVAL,
    )
    .expect("study completes");
    let e_if = table.cell(0.2, Method::If).and_then(|c| c.error());
    let e_etd = table.cell(0.2, Method::Etd).and_then(|c| c.error());
    match (e_if, e_etd) {
        (Some(a), Some(b)) => outcome(
            a >= 10.0 * b,
            format!(
                "PFC t={TABLE_TWO_T_EVAL}, h=0.2 vs ETD h_ref={TABLE_TWO_H_REF}: if {a:.2e}, etd {b:.2e}, ratio {:.1} (>= 10)",
                a / b
            ),
        ),
        _ => outcome(false, format!("a cell diverged: {:?}", table.cells)),
    }
}

fn pattern_selection() -> Outcome {
    let crystal = {
        let mut sim = Simulation::new(&pfc(-0.285, "etd", 0.1, 1500.0, 1500.0)).unwrap();
        sim.advance_to(1500.0).unwrap();
        sim.field()
    };
    let lamellar = {
        let mut sim = Simulation::new(&pfc(-0.085, "etd", 0.1, 1000.0, 1000.0)).unwrap();
        sim.advance_to(1000.0).unwrap();
        sim.field()
    };
    let dk = radial_spectrum(&crystal, 64).unwrap().dominant_k;
    let crystal_sectors = shell_sectors(&crystal, 0.8, 1.2, 0.2, 0.3).unwrap();
    let lamellar_sectors = shell_sectors(&lamellar, 0.8, 1.2, 0.2, 0.3).unwrap();
    let lamellar_dk = radial_spectrum(&lamellar, 64).unwrap().dominant_k;
    outcome(
        (0.9..=1.1).contains(&dk) && crystal_sectors >= 6 && lamellar_sectors <= 2,
        format!(
            "crystal dominant k {dk:.4} (in [0.9, 1.1]), sectors {crystal_sectors} (>= 6); \
             lamellar sectors {lamellar_sectors} (<= 2), dominant k {lamellar_dk:.4}"
        ),
    )
}

fn burgers_shock() -> Outcome {
    let at = |h: f64| {
        let c = config(&format!(
            "model.name = burgers\nmodel.nu = 0.001\n\
             grid.n = 4096\ngrid.length = 2pi\ngrid.origin = -pi\n\
             time.method = etd\ntime.h = {h}\ntime.t_final = 1\n\
             ic.kind = gaussian_bump\n"
        ));
        let mut sim = Simulation::new(&c).unwrap();
        let f0 = sim.field();
        sim.advance_to(1.0).unwrap();
        (f0, sim.field())
    };
    let (f0, coarse) = at(1e-3);
    let (_, fine) = at(1e-4);
    let err = l2_error(&coarse, &fine).unwrap();
    let finite = coarse.values().iter().chain(fine.values()).all(|v| v.is_finite());
    let dx = 2.0 * PI / 4096.0;
    let integral = |f: &RealField| f.values().iter().sum::<f64>() * dx;
    let i0 = integral(&f0);
    let drift = ((integral(&coarse) - i0) / i0).abs().max(((integral(&fine) - i0) / i0).abs());
    outcome(
        err <= 1e-3 && finite && drift <= 1e-8,
        format!(
            "L2(h=1e-3 vs 1e-4) = {err:.2e} (<= 1e-3), finite={finite}, integral drift {drift:.2e} (<= 1e-8), max|eta| {:.3}",
            coarse.max_abs()
        ),
    )
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "bin" || e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let c = pfc(-0.285, "etd", 0.1, 20.0, 2.0);
    run(&c, a.path()).unwrap();
    run(&c, b.path()).unwrap();
    let (fa, fb) = (dir_bytes(a.path()), dir_bytes(b.path()));
    let frames = fa.iter().filter(|(n, _)| n.ends_with(".bin")).count();
    outcome(
        fa == fb && frames == 11,
        format!("{frames} frame files and diagnostics compared byte for byte, identical={}", fa == fb),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |name: &'static str, o: Outcome| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };

    record("linear exactness", linear_exactness());
    record("phi1 correctness", phi1_correctness());
    let (ch, elapsed) = ch_reference_run(&tmp.path().join("ch"));
    record("mass conservation", mass_conservation(&ch, elapsed));
    record("free-energy monotonicity", energy_monotonicity(&ch, &tmp.path().join("pfc")));
    record("convergence trend (CH spinodal)", table_one_trend());
    record("IF versus ETD gap (PFC nucleation)", table_two_gap());
    record("PFC pattern selection", pattern_selection());
    record("Burgers shock", burgers_shock());
    record("determinism", determinism());

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {} passed, {} failed",
        results.len() - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
