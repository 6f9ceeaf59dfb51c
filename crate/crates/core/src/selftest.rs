//! Quick runtime checks of the numerical core, run by `tlspr selftest`.
//!
//! Each check draws its own seeded instances and compares the production
//! code against a brute-force or finite-difference reference.

use num_complex::Complex64;
use serde::Serialize;

use crate::correction::{correct_sensing_vector, CorrectionParams};
use crate::cubic::{all_roots, CubicCoefficients};
use crate::error::Result;
use crate::metrics::{dist, rel_dist};
use crate::models::{gaussian_ensemble, synthesize_measurements};
use crate::rng::{complex_gaussian_vector, real_gaussian_vector, Rng};
use crate::solvers::{ls_gradient, objective_ls, solve_ls, solve_tls, tls_envelope, SolverConfig};
use crate::types::{inner, CVector};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn cubic_residuals(seed: u64) -> Result<CheckOutcome> {
    let mut rng = Rng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let mut c = || {
            let scale = 10f64.powf(rng.uniform() * 4.0 - 2.0);
            rng.complex_normal(scale)
        };
        let coeffs = CubicCoefficients::new(c(), c(), c(), c())?;
        let scale = [coeffs.a, coeffs.b, coeffs.c, coeffs.d].iter().map(|z| z.norm()).fold(0.0, f64::max);
        for r in all_roots(&coeffs)? {
            let mag = r.norm().max(1.0).powi(3);
            worst = worst.max(coeffs.eval(r).norm() / (scale * mag));
        }
    }
    Ok(outcome("cubic residuals", worst <= 1e-8, format!("worst scaled residual {worst:.2e}")))
}

/// `λ_a|ν − p|²/s + λ_y(y − |ν|²)²`, minimised over a square grid around
/// `p` covering the disk that must contain the optimum, then refined locally.
fn grid_minimum(p: Complex64, y: f64, s: f64, w: &CorrectionParams) -> f64 {
    let f = |nu: Complex64| w.lambda_a() * (nu - p).norm_sqr() / s + w.lambda_y() * (y - nu.norm_sqr()).powi(2);
    // ν = p costs λ_y(y − |p|²)², so the optimum lies within that distance of p.
    let radius = (f(p) * s / w.lambda_a()).sqrt() + 1e-12;
    let mut best = (f(p), p);
    let steps = 300;
    for i in 0..=steps {
        for j in 0..=steps {
            let nu = p + Complex64::new(
                radius * (2.0 * i as f64 / steps as f64 - 1.0),
                radius * (2.0 * j as f64 / steps as f64 - 1.0),
            );
            let v = f(nu);
            if v < best.0 {
                best = (v, nu);
            }
        }
    }
    let mut h = 2.0 * radius / steps as f64;
    while h > 1e-13 * radius.max(1.0) {
        let mut moved = false;
        for d in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)] {
            let v = f(best.1 + d);
            if v < best.0 {
                best = (v, best.1 + d);
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    best.0
}

fn correction_vs_grid(seed: u64) -> Result<CheckOutcome> {
    let mut rng = Rng::new(seed);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..60 {
        let n = 1 + rng.below(4) as usize;
        let a = complex_gaussian_vector(&mut rng, n, 1.0)?;
        let x = complex_gaussian_vector(&mut rng, n, 1.0)?;
        let y = rng.uniform() * 6.0;
        let w = CorrectionParams::new(1.0, 10f64.powf(rng.uniform() * 4.0 - 2.0))?;
        let got = correct_sensing_vector(&a, y, &x, &w)?;
        let p = inner(&a, &x)?;
        worst = worst.max(got.objective_value - grid_minimum(p, y, x.norm_sqr(), &w));
    }
    Ok(outcome(
        "correction optimality",
        worst <= 1e-6,
        format!("largest excess over grid minimum {worst:.2e}"),
    ))
}

fn gradients_vs_differences(seed: u64) -> Result<CheckOutcome> {
    let mut rng = Rng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = gaussian_ensemble(&mut rng, 6, 24, true)?;
        let truth = real_gaussian_vector(&mut rng, 6, 1.0)?;
        let clean = synthesize_measurements(&a, &truth)?;
        let y = crate::types::MeasurementSet::new(
            clean.values().iter().map(|v| v + 0.3 * rng.normal()).collect(),
            clean.ensemble_ref(),
        )?;
        let x = real_gaussian_vector(&mut rng, 6, 1.0)?;
        let w = CorrectionParams::new(0.5, 0.2)?;
        let g_ls = ls_gradient(&x, &a, &y)?;
        let g_tls = crate::solvers::tls_gradient(&x, &crate::solvers::correct_all(&a, &y, &x, &w)?, &y)?;
        let h = 1e-5;
        let mut fd_ls = vec![0.0; 6];
        let mut fd_tls = vec![0.0; 6];
        for k in 0..6 {
            let mut plus = x.real_parts();
            let mut minus = x.real_parts();
            plus[k] += h;
            minus[k] -= h;
            let (xp, xm) = (CVector::from_real(&plus)?, CVector::from_real(&minus)?);
            fd_ls[k] = (objective_ls(&xp, &a, &y)? - objective_ls(&xm, &a, &y)?) / (2.0 * h);
            fd_tls[k] = (tls_envelope(&xp, &a, &y, &w)? - tls_envelope(&xm, &a, &y, &w)?) / (2.0 * h);
        }
        // Real-mode derivatives: ∂J_LS = 2 Re g_LS, ∂J_TLS = 2λ_y Re g_TLS.
        let rel = |fd: &[f64], g: &CVector, k: f64| {
            let num: f64 = fd.iter().zip(g.iter()).map(|(f, gi)| (f - k * gi.re).powi(2)).sum::<f64>().sqrt();
            let den: f64 = fd.iter().map(|f| f * f).sum::<f64>().sqrt().max(1e-12);
            num / den
        };
        worst = worst.max(rel(&fd_ls, &g_ls, 2.0)).max(rel(&fd_tls, &g_tls, 2.0 * w.lambda_y()));
    }
    Ok(outcome("gradients", worst <= 1e-4, format!("largest relative gap {worst:.2e}")))
}

fn clean_recovery(seed: u64) -> Result<CheckOutcome> {
    let mut rng = Rng::new(seed);
    let x = complex_gaussian_vector(&mut rng, 16, 1.0)?;
    let a = gaussian_ensemble(&mut rng, 16, 128, false)?;
    let y = synthesize_measurements(&a, &x)?;
    let tls = solve_tls(&y, &a, &SolverConfig { threshold: 1e-15, ..SolverConfig::tls() }, None)?;
    let ls = solve_ls(&y, &a, &SolverConfig { threshold: 1e-15, ..SolverConfig::ls() }, None)?;
    let (dt, dl) = (rel_dist(&x, &tls.x_hat)?, rel_dist(&x, &ls.x_hat)?);
    Ok(outcome(
        "clean recovery",
        dt < 1e-5 && dl < 1e-5,
        format!("rel.dist TLS {dt:.2e}, LS {dl:.2e}"),
    ))
}

fn thread_independence(seed: u64) -> Result<CheckOutcome> {
    let mut rng = Rng::new(seed);
    let x = complex_gaussian_vector(&mut rng, 24, 1.0)?;
    let a = gaussian_ensemble(&mut rng, 24, 400, false)?;
    let y = synthesize_measurements(&a, &x)?;
    let cfg = SolverConfig { max_iters: 40, ..SolverConfig::tls() };
    let run = |threads: usize| -> Result<CVector> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::error::Error::Config(e.to_string()))?;
        pool.install(|| solve_tls(&y, &a, &cfg, None)).map(|r| r.x_hat)
    };
    let (one, four) = (run(1)?, run(4)?);
    let same = one == four;
    Ok(outcome(
        "thread independence",
        same,
        format!("1 vs 4 workers: distance {:.1e}", dist(&one, &four)?),
    ))
}

fn phase_invariance(seed: u64) -> Result<CheckOutcome> {
    let mut rng = Rng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = complex_gaussian_vector(&mut rng, 8, 1.0)?;
        let v = complex_gaussian_vector(&mut rng, 8, 1.0)?;
        let d = dist(&u, &v)?;
        let spun = dist(&u, &v.scale(Complex64::from_polar(1.0, rng.uniform() * 6.3)))?;
        worst = worst.max((d - spun).abs() / d).max(dist(&u, &u.scale(Complex64::new(0.0, 1.0)))?);
    }
    Ok(outcome("phase invariance", worst <= 1e-12, format!("largest deviation {worst:.2e}")))
}

/// Runs every check. Errors inside a check count as a failure of that check.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    type Check = (&'static str, fn(u64) -> Result<CheckOutcome>);
    let checks: [Check; 6] = [
        ("cubic residuals", cubic_residuals),
        ("correction optimality", correction_vs_grid),
        ("gradients", gradients_vs_differences),
        ("clean recovery", clean_recovery),
        ("thread independence", thread_independence),
        ("phase invariance", phase_invariance),
    ];
    checks
        .iter()
        .map(|(name, f)| f(seed).unwrap_or_else(|e| outcome(name, false, format!("error: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_all(1) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
