//! LS (Wirtinger flow) and TLS phase retrieval solvers.
//!
//! Both solvers take gradient steps `x ← x − (μ/‖x⁰‖²)·g` where `g` is the
//! LS-form Wirtinger gradient, built from the original vectors for LS and
//! from the corrected vectors for TLS. `‖x⁰‖` is frozen at initialisation.
//! Iteration stops once the objective changes by less than the threshold
//! between consecutive iterates, or at the iteration cap.
//!
//! TLS weights default to `λ_a = λ_a†/N` and `λ_y = λ_y†/‖x⁰‖⁴`.

mod kernels;
mod objective;
mod spectral;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correction::{shift_coefficient, solve_scalar, CorrectionParams};
use crate::error::{Error, Result};
use crate::rng::{Rng, Stream};
use crate::types::{norm_sqr, CVector, MeasurementSet, NoiseTag, SensingEnsemble};

pub use objective::{ls_gradient, objective_ls, objective_tls, tls_envelope, tls_gradient};
pub use spectral::spectral_init;

use kernels::{ordered_sum, project, weighted_sum};
use objective::{ls_gradient_from_projection, ls_loss};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ls,
    Tls,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    #[default]
    None,
    RealBinary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub mode: Mode,
    pub lambda_a_dag: f64,
    pub lambda_y_dag: f64,
    /// `μ`; `None` selects the default for the mode and projection.
    pub step_size: Option<f64>,
    pub threshold: f64,
    pub max_iters: usize,
    pub power_iters: usize,
    pub projection: Projection,
    /// Seed of the random start used when spectral initialisation fails.
    pub seed: u64,
    /// Explicit `(λ_a, λ_y)`, bypassing the `λ†` scaling.
    pub weights: Option<CorrectionParams>,
}

impl SolverConfig {
    pub fn ls() -> Self {
        SolverConfig {
            mode: Mode::Ls,
            lambda_a_dag: 1.0,
            lambda_y_dag: 1.0,
            step_size: None,
            threshold: 1e-6,
            max_iters: 2500,
            power_iters: 50,
            projection: Projection::None,
            seed: 0,
            weights: None,
        }
    }

    pub fn tls() -> Self {
        SolverConfig {
            mode: Mode::Tls,
            ..Self::ls()
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_step(mut self, mu: f64) -> Self {
        self.step_size = Some(mu);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_a_dag", self.lambda_a_dag),
            ("lambda_y_dag", self.lambda_y_dag),
            ("threshold", self.threshold),
            ("step_size", self.step_size.unwrap_or(1.0)),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `(λ_a, λ_y)` for dimension `n` and initial squared norm `s0`.
    pub fn weights_for(&self, n: usize, s0: f64) -> Result<CorrectionParams> {
        match self.weights {
            Some(w) => Ok(w),
            None => CorrectionParams::new(self.lambda_a_dag / n as f64, self.lambda_y_dag / (s0 * s0)),
        }
    }

    /// `μ` in effect for the given TLS weights.
    pub fn step_for(&self, weights: Option<&CorrectionParams>) -> f64 {
        if let Some(mu) = self.step_size {
            return mu;
        }
        let binary = self.projection == Projection::RealBinary;
        match (self.mode, weights) {
            (Mode::Tls, Some(w)) => (if binary { 0.4 } else { 0.5 }) / w.lambda_a(),
            _ => {
                if binary {
                    0.005
                } else {
                    0.02
                }
            }
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::tls()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub x_hat: CVector,
    /// Corrected sensing vectors at `x_hat` (TLS only).
    pub corrected_ensemble: Option<SensingEnsemble>,
    /// Objective after each iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub x0: CVector,
    /// Weights used (TLS only).
    pub weights: Option<CorrectionParams>,
    pub step_size: f64,
}

/// Elementwise `min(|x_i|, 1)` with zero imaginary part.
pub fn project_real_binary(x: &CVector) -> CVector {
    CVector::from_raw(x.iter().map(|z| Complex64::new(z.norm().min(1.0), 0.0)).collect())
}

fn apply_projection(x: &mut CVector, projection: Projection) {
    if projection == Projection::RealBinary {
        for z in x.as_mut_slice() {
            *z = Complex64::new(z.norm().min(1.0), 0.0);
        }
    }
}

/// Unit-norm random start for degenerate data; real when the ensemble is.
fn fallback_start(seed: u64, n: usize, real: bool) -> CVector {
    let mut rng = Rng::with_stream(seed, Stream::Fallback);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| {
            if real {
                Complex64::new(rng.normal(), 0.0)
            } else {
                rng.complex_normal(1.0)
            }
        })
        .collect();
    let s = norm_sqr(&v).sqrt();
    for z in &mut v {
        *z /= s;
    }
    CVector::from_raw(v)
}

/// The starting point a solver would use: `x0` if given, else spectral
/// initialisation (or the seeded fallback), then the projection.
pub fn initial_point(
    y: &MeasurementSet,
    a: &SensingEnsemble,
    cfg: &SolverConfig,
    x0: Option<&CVector>,
) -> Result<CVector> {
    y.check_against(a)?;
    let mut x = match x0 {
        Some(v) => {
            a.check_signal(v)?;
            v.clone()
        }
        None => match spectral_init(y, a, cfg.power_iters) {
            Ok(v) => v,
            Err(Error::ZeroMeasurements) | Err(Error::NotConverged(_)) => {
                fallback_start(cfg.seed, a.dim(), a.is_real())
            }
            Err(e) => return Err(e),
        },
    };
    apply_projection(&mut x, cfg.projection);
    Ok(x)
}

/// Dispatches on `cfg.mode`.
pub fn solve(y: &MeasurementSet, a: &SensingEnsemble, cfg: &SolverConfig, x0: Option<&CVector>) -> Result<SolveResult> {
    match cfg.mode {
        Mode::Ls => solve_ls(y, a, cfg, x0),
        Mode::Tls => solve_tls(y, a, cfg, x0),
    }
}

/// Tracks `|J_τ − J_{τ−1}|` starting from `(−∞, ∞)`.
struct Progress {
    previous: f64,
    current: f64,
    trace: Vec<f64>,
}

impl Progress {
    fn new() -> Self {
        Progress {
            previous: f64::NEG_INFINITY,
            current: f64::INFINITY,
            trace: Vec::new(),
        }
    }

    fn settled(&self, threshold: f64) -> bool {
        (self.current - self.previous).abs() < threshold
    }

    fn push(&mut self, value: f64, iteration: usize) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Diverged {
                iteration,
                reason: format!("objective is {value}"),
            });
        }
        self.trace.push(value);
        self.previous = self.current;
        self.current = value;
        Ok(())
    }
}

fn check_finite(x: &CVector, iteration: usize) -> Result<()> {
    if x.all_finite() {
        Ok(())
    } else {
        Err(Error::Diverged {
            iteration,
            reason: "iterate has non-finite entries".into(),
        })
    }
}

fn start(y: &MeasurementSet, a: &SensingEnsemble, cfg: &SolverConfig, x0: Option<&CVector>, mode: Mode) -> Result<CVector> {
    if cfg.mode != mode {
        return Err(Error::InvalidArgument(format!("solver called with mode {:?}", cfg.mode)));
    }
    cfg.validate()?;
    let x = initial_point(y, a, cfg, x0)?;
    if x.norm_sqr() == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(x)
}

/// Wirtinger flow on `(1/2M) Σ (y_m − |⟨a_m, x⟩|²)²`.
pub fn solve_ls(y: &MeasurementSet, a: &SensingEnsemble, cfg: &SolverConfig, x0: Option<&CVector>) -> Result<SolveResult> {
    let mut x = start(y, a, cfg, x0, Mode::Ls)?;
    let init = x.clone();
    let mu = cfg.step_for(None);
    let eta = mu / init.norm_sqr();

    let mut p = project(a, x.as_slice());
    let mut progress = Progress::new();
    let mut iterations = 0;
    while !progress.settled(cfg.threshold) && iterations < cfg.max_iters {
        let g = ls_gradient_from_projection(a, &p, y.values());
        for (xi, gi) in x.as_mut_slice().iter_mut().zip(&g) {
            *xi -= gi * eta;
        }
        apply_projection(&mut x, cfg.projection);
        check_finite(&x, iterations)?;
        p = project(a, x.as_slice());
        progress.push(ls_loss(&p, y.values()), iterations)?;
        iterations += 1;
    }

    Ok(SolveResult {
        converged: progress.settled(cfg.threshold),
        x_hat: x,
        corrected_ensemble: None,
        objective_trace: progress.trace,
        iterations,
        x0: init,
        weights: None,
        step_size: mu,
    })
}

/// Per-row outcome of a correction sweep: `â_m = a_m + c_m x`.
struct Sweep {
    nu: Vec<Complex64>,
    coef: Vec<Complex64>,
}

fn sweep(p: &[Complex64], y: &[f64], s: f64, params: &CorrectionParams) -> Sweep {
    let (nu, coef) = p
        .par_iter()
        .zip(y)
        .with_min_len(64)
        .map(|(&pm, &ym)| {
            let nu = solve_scalar(pm, ym, s, params).nu;
            (nu, shift_coefficient(nu, pm, s))
        })
        .unzip();
    Sweep { nu, coef }
}

fn corrected_ensemble(a: &SensingEnsemble, x: &CVector, coef: &[Complex64]) -> Result<SensingEnsemble> {
    let n = a.dim();
    let mut data = a.as_flat().to_vec();
    for (row, c) in data.chunks_mut(n).zip(coef) {
        for (r, xi) in row.iter_mut().zip(x.iter()) {
            *r += c * xi;
        }
    }
    SensingEnsemble::from_flat(n, a.len(), data, a.model_tag(), NoiseTag::Corrected)
}

/// Every sensing vector optimally corrected for the fixed signal `x`.
pub fn correct_all(a: &SensingEnsemble, y: &MeasurementSet, x: &CVector, params: &CorrectionParams) -> Result<SensingEnsemble> {
    a.check_signal(x)?;
    y.check_against(a)?;
    let s = x.norm_sqr();
    if s == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let p = project(a, x.as_slice());
    let sw = sweep(&p, y.values(), s, params);
    corrected_ensemble(a, x, &sw.coef)
}

/// Alternates a closed-form correction of every sensing vector with one
/// gradient step on `x`.
///
/// The returned corrected ensemble is the optimal correction at `x_hat`.
pub fn solve_tls(y: &MeasurementSet, a: &SensingEnsemble, cfg: &SolverConfig, x0: Option<&CVector>) -> Result<SolveResult> {
    let mut x = start(y, a, cfg, x0, Mode::Tls)?;
    let init = x.clone();
    let s0 = init.norm_sqr();
    let params = cfg.weights_for(a.dim(), s0)?;
    let mu = cfg.step_for(Some(&params));
    let eta = mu / s0;
    let inv_m = 1.0 / a.len() as f64;
    let (lambda_a, lambda_y) = (params.lambda_a(), params.lambda_y());

    let mut p = project(a, x.as_slice());
    let mut progress = Progress::new();
    let mut iterations = 0;
    while !progress.settled(cfg.threshold) && iterations < cfg.max_iters {
        let s = x.norm_sqr();
        if s == 0.0 {
            return Err(Error::ZeroSignal);
        }
        let sw = sweep(&p, y.values(), s, &params);

        // Σ w_m â_m = Σ w_m a_m + (Σ w_m c_m) x with w_m = (|ν_m|² − y_m) ν_m / M.
        let w: Vec<Complex64> = sw
            .nu
            .iter()
            .zip(y.values())
            .map(|(nu, ym)| nu * ((nu.norm_sqr() - ym) * inv_m))
            .collect();
        let along: Complex64 = ordered_sum(w.len(), |m| w[m] * sw.coef[m]);
        let mut g = weighted_sum(a, &w);
        for (gi, xi) in g.iter_mut().zip(x.iter()) {
            *gi += along * xi;
        }

        let previous = x.clone();
        for (xi, gi) in x.as_mut_slice().iter_mut().zip(&g) {
            *xi -= gi * eta;
        }
        apply_projection(&mut x, cfg.projection);
        check_finite(&x, iterations)?;
        p = project(a, x.as_slice());

        // J(x, â) with â_m = a_m + c_m·previous, so
        // ⟨â_m, x⟩ = p_m + conj(c_m)⟨previous, x⟩ and ‖â_m − a_m‖² = |c_m|² s.
        let cross = crate::types::dot_conj(previous.as_slice(), x.as_slice());
        let total: f64 = ordered_sum(p.len(), |m| {
            let c = sw.coef[m];
            let r = y.values()[m] - (p[m] + c.conj() * cross).norm_sqr();
            lambda_a * c.norm_sqr() * s + lambda_y * r * r
        });
        progress.push(total * 0.5 * inv_m, iterations)?;
        iterations += 1;
    }

    let corrected = correct_all(a, y, &x, &params)?;
    Ok(SolveResult {
        converged: progress.settled(cfg.threshold),
        x_hat: x,
        corrected_ensemble: Some(corrected),
        objective_trace: progress.trace,
        iterations,
        x0: init,
        weights: Some(params),
        step_size: mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::rel_dist;
    use crate::models::{gaussian_ensemble, synthesize_measurements};
    use crate::noise::{inject_gaussian, NoiseSpec};
    use crate::rng::complex_gaussian_vector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn clean(seed: u64, n: usize, m: usize) -> (CVector, SensingEnsemble, MeasurementSet) {
        let mut rng = Rng::new(seed);
        let x = complex_gaussian_vector(&mut rng, n, 1.0).unwrap();
        let a = gaussian_ensemble(&mut rng, n, m, false).unwrap();
        let y = synthesize_measurements(&a, &x).unwrap();
        (x, a, y)
    }

    /// Threshold tight enough that clean runs stop at roundoff rather than at
    /// the objective's absolute resolution.
    fn exact(cfg: SolverConfig) -> SolverConfig {
        SolverConfig { threshold: 1e-15, ..cfg }
    }

    fn noisy(seed: u64, n: usize, m: usize, meas: f64, sens: f64) -> (CVector, SensingEnsemble, MeasurementSet) {
        let (x, a, y) = clean(seed, n, m);
        let spec = NoiseSpec::gaussian(meas, sens, false).unwrap();
        let (y, a) = inject_gaussian(&mut Rng::new(seed + 1000), &y, &a, &spec).unwrap();
        (x, a, y)
    }

    #[test]
    fn projection_examples() {
        let v = CVector::new(vec![c(0.5, 0.0), c(-0.3, 0.4)]).unwrap();
        let p = project_real_binary(&v);
        assert!((p[0] - c(0.5, 0.0)).norm() < 1e-15 && (p[1] - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(project_real_binary(&CVector::from_real(&[2.0, -3.0]).unwrap()), CVector::from_real(&[1.0, 1.0]).unwrap());
        let b = CVector::from_real(&[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(project_real_binary(&b), b);
    }

    #[test]
    fn zero_iterations_return_start() {
        let (_, a, y) = clean(1, 8, 64);
        let mut cfg = SolverConfig::ls();
        cfg.max_iters = 0;
        let r = solve_ls(&y, &a, &cfg, None).unwrap();
        assert_eq!(r.x_hat, r.x0);
        assert!(!r.converged);
        assert_eq!(r.iterations, 0);
        let mut cfg = SolverConfig::tls();
        cfg.max_iters = 0;
        let r = solve_tls(&y, &a, &cfg, None).unwrap();
        assert_eq!(r.x_hat, r.x0);
        assert!(r.corrected_ensemble.is_some());
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let (_, a, y) = clean(2, 4, 16);
        assert!(solve_ls(&y, &a, &SolverConfig::tls(), None).is_err());
        assert!(solve_tls(&y, &a, &SolverConfig::ls(), None).is_err());
        let mut cfg = SolverConfig::ls();
        cfg.threshold = 0.0;
        assert!(solve_ls(&y, &a, &cfg, None).is_err());
    }

    #[test]
    fn both_solvers_recover_clean_signal() {
        for seed in 0..3 {
            let (x, a, y) = clean(seed, 32, 256);
            let ls = solve_ls(&y, &a, &exact(SolverConfig::ls()), None).unwrap();
            let tls = solve_tls(&y, &a, &exact(SolverConfig::tls()), None).unwrap();
            assert!(rel_dist(&x, &ls.x_hat).unwrap() < 1e-5, "ls {}", rel_dist(&x, &ls.x_hat).unwrap());
            assert!(rel_dist(&x, &tls.x_hat).unwrap() < 1e-5, "tls {}", rel_dist(&x, &tls.x_hat).unwrap());
            assert!(ls.objective_trace.iter().chain(&tls.objective_trace).all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn tls_is_stationary_at_truth_on_clean_data() {
        let (x, a, y) = clean(4, 16, 128);
        let params = CorrectionParams::new(1.0 / 16.0, 1.0 / x.norm_sqr().powi(2)).unwrap();
        let corrected = correct_all(&a, &y, &x, &params).unwrap();
        assert_eq!(corrected.as_flat(), a.as_flat());
        let g = tls_gradient(&x, &corrected, &y).unwrap();
        assert!(g.norm() <= 1e-10 * x.norm().powi(3));
    }

    #[test]
    fn sweep_never_increases_objective() {
        let (_, a, y) = noisy(5, 12, 96, 20.0, 15.0);
        let params = CorrectionParams::new(1.0 / 12.0, 1e-3).unwrap();
        let mut rng = Rng::new(99);
        let mut prev = a.clone();
        for _ in 0..5 {
            let x = complex_gaussian_vector(&mut rng, 12, 1.0).unwrap();
            let before = objective_tls(&x, &prev, &a, &y, params.lambda_a(), params.lambda_y()).unwrap();
            let next = correct_all(&a, &y, &x, &params).unwrap();
            let after = objective_tls(&x, &next, &a, &y, params.lambda_a(), params.lambda_y()).unwrap();
            assert!(after <= before + 1e-12 * before.max(1.0));
            prev = next;
        }
    }

    #[test]
    fn ls_is_phase_equivariant() {
        let (_, a, y) = noisy(6, 16, 128, 30.0, 30.0);
        let cfg = SolverConfig::ls();
        let x0 = initial_point(&y, &a, &cfg, None).unwrap();
        let base = solve_ls(&y, &a, &cfg, Some(&x0)).unwrap();
        let rotated = solve_ls(&y, &a, &cfg, Some(&x0.scale(Complex64::from_polar(1.0, 0.9)))).unwrap();
        assert!(rel_dist(&base.x_hat, &rotated.x_hat).unwrap() <= 1e-8);
    }

    #[test]
    fn doubling_measurements_scales_solution() {
        let (x, a, y) = clean(7, 16, 128);
        let r = solve_ls(&y.scaled(2.0).unwrap(), &a, &exact(SolverConfig::ls()), None).unwrap();
        let target = x.scale(c(2f64.sqrt(), 0.0));
        assert!(rel_dist(&target, &r.x_hat).unwrap() < 1e-4);
    }

    #[test]
    fn heavy_fidelity_weight_reduces_tls_to_ls() {
        let (_, a, y) = noisy(8, 16, 128, 25.0, 20.0);
        let mut tls_cfg = exact(SolverConfig::tls().with_step(0.02));
        tls_cfg.lambda_a_dag = 1e8;
        let x0 = initial_point(&y, &a, &tls_cfg, None).unwrap();
        let tls = solve_tls(&y, &a, &tls_cfg, Some(&x0)).unwrap();
        let ls = solve_ls(&y, &a, &exact(SolverConfig::ls().with_step(0.02)), Some(&x0)).unwrap();
        assert!(rel_dist(&ls.x_hat, &tls.x_hat).unwrap() <= 1e-3);
        let corrected = tls.corrected_ensemble.unwrap();
        for m in 0..a.len() {
            let d: f64 = corrected.row(m).iter().zip(a.row(m)).map(|(u, v)| (u - v).norm_sqr()).sum();
            let an: f64 = norm_sqr(a.row(m));
            assert!(d.sqrt() <= 1e-3 * an.sqrt());
        }
    }

    #[test]
    fn fallback_start_is_used_for_zero_data() {
        let (_, a, _) = clean(9, 4, 16);
        let y = MeasurementSet::new(vec![0.0; 16], 0).unwrap();
        let cfg = SolverConfig::ls();
        let x = initial_point(&y, &a, &cfg, None).unwrap();
        assert!((x.norm() - 1.0).abs() < 1e-12);
        assert_eq!(x, initial_point(&y, &a, &cfg, None).unwrap());
    }
}
