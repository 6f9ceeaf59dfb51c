//! First-order reconstruction errors for real-valued phase retrieval.
//!
//! With clean sensing matrix `Ã` (rows `ã_m`), clean intensities `ỹ`, truth
//! `x#` and errors `(E_A, E_Y)`, both estimators move to first order by
//! `R w`, where
//!
//! * `w_m = η_m/(2ỹ_m)·ã_mᵀx# − δ_mᵀx#`,
//! * `R = (ÃᵀỸDÃ)⁻¹ÃᵀỸD` for TLS and the same with `D = I` for LS,
//! * `D_m = 1/(1 + 4ρ‖x#‖²ỹ_m)` with `ρ = λ_y/λ_a`.
//!
//! Under iid Gaussian errors `E‖Rw‖² = σ²_δ‖x#‖²‖R‖²_F + σ²_η/4·Σ_m ‖r_m‖²/ỹ_m`.
//!
//! Everything here is real-valued; complex inputs are rejected.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::correction::CorrectionParams;
use crate::error::{Error, Result};
use crate::solvers::{correct_all, ls_gradient, solve, tls_gradient, Mode, SolverConfig};
use crate::types::{CVector, MeasurementSet, ModelTag, NoiseTag, SensingEnsemble};

/// Largest condition number accepted for the normal matrices.
pub const MAX_CONDITION: f64 = 1e12;

fn real_matrix(a: &SensingEnsemble, what: &'static str) -> Result<DMatrix<f64>> {
    if !a.is_real() {
        return Err(Error::ComplexInput(what));
    }
    Ok(DMatrix::from_fn(a.len(), a.dim(), |i, j| a.row(i)[j].re))
}

fn real_vector(x: &CVector, what: &'static str) -> Result<DVector<f64>> {
    if !x.is_real() {
        return Err(Error::ComplexInput(what));
    }
    Ok(DVector::from_vec(x.real_parts()))
}

fn positive_measurements(y: &MeasurementSet) -> Result<DVector<f64>> {
    if let Some((index, &value)) = y.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveMeasurement { index, value });
    }
    Ok(DVector::from_column_slice(y.values()))
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio >= 0.0 && ratio.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda ratio must be finite and ≥ 0, got {ratio}")))
    }
}

/// `D_m = 1/(1 + 4ρ‖x‖²ỹ_m)`.
pub fn d_diagonal(y_clean: &[f64], x_norm_sq: f64, lambda_ratio: f64) -> Vec<f64> {
    y_clean
        .iter()
        .map(|&y| 1.0 / (1.0 + 4.0 * lambda_ratio * x_norm_sq * y))
        .collect()
}

/// Clean data and errors for one first-order prediction.
#[derive(Clone, Debug)]
pub struct ErrorAnalysisInputs {
    a_clean: DMatrix<f64>,
    y_clean: DVector<f64>,
    x_sharp: DVector<f64>,
    e_a: DMatrix<f64>,
    e_y: DVector<f64>,
    lambda_ratio: f64,
}

impl ErrorAnalysisInputs {
    /// `e_a` is `M × N`, `e_y` has length `M`.
    pub fn new(
        a_clean: &SensingEnsemble,
        y_clean: &MeasurementSet,
        x_sharp: &CVector,
        e_a: DMatrix<f64>,
        e_y: DVector<f64>,
        lambda_ratio: f64,
    ) -> Result<Self> {
        let a = real_matrix(a_clean, "clean sensing vectors")?;
        let x = real_vector(x_sharp, "ground truth")?;
        y_clean.check_against(a_clean)?;
        a_clean.check_signal(x_sharp)?;
        let y = positive_measurements(y_clean)?;
        if e_a.shape() != a.shape() {
            return Err(Error::InvalidArgument(format!(
                "sensing error is {}x{}, expected {}x{}",
                e_a.nrows(),
                e_a.ncols(),
                a.nrows(),
                a.ncols()
            )));
        }
        if e_y.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                found: e_y.len(),
            });
        }
        if !(e_a.iter().all(|v| v.is_finite()) && e_y.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("error matrices"));
        }
        check_ratio(lambda_ratio)?;
        Ok(ErrorAnalysisInputs {
            a_clean: a,
            y_clean: y,
            x_sharp: x,
            e_a,
            e_y,
            lambda_ratio,
        })
    }

    /// Errors taken as the difference between perturbed and clean data.
    pub fn from_perturbed(
        a_clean: &SensingEnsemble,
        a_noisy: &SensingEnsemble,
        y_clean: &MeasurementSet,
        y_noisy: &MeasurementSet,
        x_sharp: &CVector,
        lambda_ratio: f64,
    ) -> Result<Self> {
        let a = real_matrix(a_clean, "clean sensing vectors")?;
        let noisy = real_matrix(a_noisy, "perturbed sensing vectors")?;
        if noisy.shape() != a.shape() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: noisy.len(),
            });
        }
        if y_noisy.len() != y_clean.len() {
            return Err(Error::DimensionMismatch {
                expected: y_clean.len(),
                found: y_noisy.len(),
            });
        }
        let e_y = DVector::from_iterator(
            y_clean.len(),
            y_noisy.values().iter().zip(y_clean.values()).map(|(n, c)| n - c),
        );
        Self::new(a_clean, y_clean, x_sharp, noisy - a, e_y, lambda_ratio)
    }

    pub fn lambda_ratio(&self) -> f64 {
        self.lambda_ratio
    }

    pub fn x_norm(&self) -> f64 {
        self.x_sharp.norm()
    }

    /// Same clean data with the errors scaled by `k`.
    pub fn scaled_errors(&self, k: f64) -> Self {
        ErrorAnalysisInputs {
            e_a: &self.e_a * k,
            e_y: &self.e_y * k,
            ..self.clone()
        }
    }

    fn linearization(&self) -> Result<Linearization> {
        Linearization::from_parts(
            self.a_clean.clone(),
            self.y_clean.clone(),
            self.x_sharp.clone(),
            self.lambda_ratio,
        )
    }
}

/// First-order errors `‖R w‖` and their values relative to `‖x#‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPrediction {
    pub e_tls: f64,
    pub e_ls: f64,
    pub rel_e_tls: f64,
    pub rel_e_ls: f64,
}

/// Predicted displacements `x† − x#` of both estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct Displacements {
    pub tls: DVector<f64>,
    pub ls: DVector<f64>,
}

/// Normal-matrix factorisations at one clean point and weight ratio,
/// reusable across many error draws.
pub struct Linearization {
    a: DMatrix<f64>,
    y: DVector<f64>,
    x: DVector<f64>,
    d: DVector<f64>,
    tls: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    ls: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

fn factor(g: DMatrix<f64>) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let svd = SVD::new(g, true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    Ok(svd)
}

fn solve_with(svd: &SVD<f64, nalgebra::Dyn, nalgebra::Dyn>, b: &DMatrix<f64>) -> DMatrix<f64> {
    svd.solve(b, 0.0).expect("factorisation keeps both U and Vᵀ")
}

/// `Ãᵀ diag(c) Ã`.
fn weighted_gram(a: &DMatrix<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = a.clone();
    for (mut row, ci) in scaled.row_iter_mut().zip(c.iter()) {
        row *= *ci;
    }
    a.transpose() * scaled
}

impl Linearization {
    pub fn new(a_clean: &SensingEnsemble, y_clean: &MeasurementSet, x_sharp: &CVector, lambda_ratio: f64) -> Result<Self> {
        y_clean.check_against(a_clean)?;
        a_clean.check_signal(x_sharp)?;
        Self::from_parts(
            real_matrix(a_clean, "clean sensing vectors")?,
            positive_measurements(y_clean)?,
            real_vector(x_sharp, "ground truth")?,
            lambda_ratio,
        )
    }

    fn from_parts(a: DMatrix<f64>, y: DVector<f64>, x: DVector<f64>, lambda_ratio: f64) -> Result<Self> {
        check_ratio(lambda_ratio)?;
        let d = DVector::from_vec(d_diagonal(y.as_slice(), x.norm_squared(), lambda_ratio));
        let yd = y.component_mul(&d);
        let tls = factor(weighted_gram(&a, &yd))?;
        let ls = factor(weighted_gram(&a, &y))?;
        Ok(Linearization { a, y, x, d, tls, ls })
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    /// `w = ((2Ỹ)⁻¹E_YÃ − E_A)x#`.
    pub fn w(&self, e_a: &DMatrix<f64>, e_y: &DVector<f64>) -> DVector<f64> {
        let ax = &self.a * &self.x;
        let ex = e_a * &self.x;
        DVector::from_fn(self.y.len(), |m, _| e_y[m] / (2.0 * self.y[m]) * ax[m] - ex[m])
    }

    pub fn displacements(&self, e_a: &DMatrix<f64>, e_y: &DVector<f64>) -> Displacements {
        let w = self.w(e_a, e_y);
        let rhs_ls = self.a.transpose() * self.y.component_mul(&w);
        let rhs_tls = self.a.transpose() * self.y.component_mul(&self.d).component_mul(&w);
        Displacements {
            tls: solve_with(&self.tls, &DMatrix::from_column_slice(rhs_tls.len(), 1, rhs_tls.as_slice())).column(0).into(),
            ls: solve_with(&self.ls, &DMatrix::from_column_slice(rhs_ls.len(), 1, rhs_ls.as_slice())).column(0).into(),
        }
    }

    pub fn errors(&self, e_a: &DMatrix<f64>, e_y: &DVector<f64>) -> ErrorPrediction {
        let disp = self.displacements(e_a, e_y);
        let nx = self.x.norm();
        let (e_tls, e_ls) = (disp.tls.norm(), disp.ls.norm());
        ErrorPrediction {
            e_tls,
            e_ls,
            rel_e_tls: e_tls / nx,
            rel_e_ls: e_ls / nx,
        }
    }

    /// `(‖R‖²_F, Σ_m ‖r_m‖²/ỹ_m)` for `R = G⁻¹Ãᵀ diag(c)`.
    fn frobenius_terms(&self, svd: &SVD<f64, nalgebra::Dyn, nalgebra::Dyn>, c: &DVector<f64>) -> (f64, f64) {
        let mut at = self.a.transpose();
        for (mut col, ci) in at.column_iter_mut().zip(c.iter()) {
            col *= *ci;
        }
        let r = solve_with(svd, &at);
        let mut total = 0.0;
        let mut weighted = 0.0;
        for (col, ym) in r.column_iter().zip(self.y.iter()) {
            let sq = col.norm_squared();
            total += sq;
            weighted += sq / ym;
        }
        (total, weighted)
    }

    /// `(E[e²_TLS], E[e²_LS])` under iid Gaussian errors.
    pub fn expected_squared_errors(&self, sigma_delta_sq: f64, sigma_eta_sq: f64) -> Result<(f64, f64)> {
        for (name, v) in [("sigma_delta_sq", sigma_delta_sq), ("sigma_eta_sq", sigma_eta_sq)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        let s = self.x.norm_squared();
        let combine = |(total, weighted): (f64, f64)| sigma_delta_sq * s * total + sigma_eta_sq / 4.0 * weighted;
        let yd = self.y.component_mul(&self.d);
        Ok((
            combine(self.frobenius_terms(&self.tls, &yd)),
            combine(self.frobenius_terms(&self.ls, &self.y)),
        ))
    }
}

pub fn first_order_errors(inputs: &ErrorAnalysisInputs) -> Result<ErrorPrediction> {
    Ok(inputs.linearization()?.errors(&inputs.e_a, &inputs.e_y))
}

pub fn first_order_displacements(inputs: &ErrorAnalysisInputs) -> Result<Displacements> {
    Ok(inputs.linearization()?.displacements(&inputs.e_a, &inputs.e_y))
}

pub fn expected_squared_errors(
    a_clean: &SensingEnsemble,
    y_clean: &MeasurementSet,
    x_sharp: &CVector,
    lambda_ratio: f64,
    sigma_delta_sq: f64,
    sigma_eta_sq: f64,
) -> Result<(f64, f64)> {
    Linearization::new(a_clean, y_clean, x_sharp, lambda_ratio)?.expected_squared_errors(sigma_delta_sq, sigma_eta_sq)
}

/// Weights that make the TLS objective the maximum-likelihood criterion:
/// `λ_a = 1/σ²_δ`, `λ_y = 1/σ²_η`.
pub fn ml_parameters(sigma_delta_sq: f64, sigma_eta_sq: f64) -> Result<CorrectionParams> {
    if !(sigma_delta_sq > 0.0 && sigma_eta_sq > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "variances must be positive, got σ²_δ={sigma_delta_sq}, σ²_η={sigma_eta_sq}"
        )));
    }
    CorrectionParams::new(1.0 / sigma_delta_sq, 1.0 / sigma_eta_sq)
}

/// Per-entry error variances `(σ²_δ, σ²_η)` that realise the given SNRs on
/// average. An infinite SNR gives zero variance.
pub fn variances_from_snr(
    a_clean: &SensingEnsemble,
    y_clean: &MeasurementSet,
    sensing_snr_db: f64,
    meas_snr_db: f64,
) -> Result<(f64, f64)> {
    y_clean.check_against(a_clean)?;
    let power = |snr: f64| if snr == f64::INFINITY { 0.0 } else { 10f64.powf(-snr / 10.0) };
    if sensing_snr_db.is_nan() || meas_snr_db.is_nan() {
        return Err(Error::InvalidArgument("SNR is NaN".into()));
    }
    let a_energy = a_clean.frobenius_norm().powi(2);
    let entries = (a_clean.len() * a_clean.dim()) as f64;
    let y_energy = y_clean.norm().powi(2);
    Ok((
        a_energy * power(sensing_snr_db) / entries,
        y_energy * power(meas_snr_db) / y_clean.len() as f64,
    ))
}

/// Points per decade of the weight-ratio grid.
pub const GRID_PER_DECADE: usize = 10;
pub const GRID_POINTS: usize = 41;

/// `GRID_POINTS` log-spaced ratios at `1/GRID_PER_DECADE` decade spacing,
/// starting two decades below the decade containing `center`.
pub fn ratio_grid(center: f64) -> Result<Vec<f64>> {
    if !(center > 0.0 && center.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid center must be positive, got {center}")));
    }
    let lo = center.log10().floor() - 2.0;
    Ok((0..GRID_POINTS)
        .map(|k| 10f64.powf(lo + k as f64 / GRID_PER_DECADE as f64))
        .collect())
}

/// Expected TLS error over a ratio grid around the ML ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSweep {
    /// `σ²_δ/σ²_η`.
    pub optimal_ratio: f64,
    pub ratios: Vec<f64>,
    pub expected_tls: Vec<f64>,
    pub argmin_ratio: f64,
}

impl RatioSweep {
    /// Distance of the located minimum from the ML ratio, in grid steps.
    pub fn offset_in_steps(&self) -> f64 {
        (self.argmin_ratio / self.optimal_ratio).log10().abs() * GRID_PER_DECADE as f64
    }
}

pub fn ml_ratio_sweep(
    a_clean: &SensingEnsemble,
    y_clean: &MeasurementSet,
    x_sharp: &CVector,
    sigma_delta_sq: f64,
    sigma_eta_sq: f64,
) -> Result<RatioSweep> {
    let params = ml_parameters(sigma_delta_sq, sigma_eta_sq)?;
    let optimal_ratio = params.lambda_y() / params.lambda_a();
    let ratios = ratio_grid(optimal_ratio)?;
    let a = real_matrix(a_clean, "clean sensing vectors")?;
    let y = positive_measurements(y_clean)?;
    y_clean.check_against(a_clean)?;
    a_clean.check_signal(x_sharp)?;
    let x = real_vector(x_sharp, "ground truth")?;
    let expected_tls = ratios
        .iter()
        .map(|&r| {
            Linearization::from_parts(a.clone(), y.clone(), x.clone(), r)?
                .expected_squared_errors(sigma_delta_sq, sigma_eta_sq)
                .map(|(tls, _)| tls)
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = expected_tls
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(q.1))
        .map(|(i, _)| i)
        .ok_or(Error::Empty("ratio grid"))?;
    Ok(RatioSweep {
        optimal_ratio,
        argmin_ratio: ratios[best],
        ratios,
        expected_tls,
    })
}

/// Central-difference derivatives of the solver output at the clean point.
#[derive(Clone, Debug)]
pub struct FdJacobians {
    /// `N × MN`, column `m·N + k` for entry `k` of `a_m`.
    pub wrt_a: DMatrix<f64>,
    /// `N × M`.
    pub wrt_y: DMatrix<f64>,
}

impl FdJacobians {
    /// `J_a vec(E_A) + J_y e_y` with `E_A` flattened row by row.
    pub fn apply(&self, e_a: &DMatrix<f64>, e_y: &DVector<f64>) -> DVector<f64> {
        let flat = DVector::from_iterator(e_a.len(), e_a.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()));
        &self.wrt_a * flat + &self.wrt_y * e_y
    }
}

/// Largest problem the finite-difference oracle accepts.
pub const FD_MAX_N: usize = 4;
pub const FD_MAX_M: usize = 12;

const FD_MAX_ITERS: usize = 5_000;

/// A perturbed solve counts as converged once its gradient has shrunk by
/// this factor from the gradient at `x#`.
const FD_STATIONARITY: f64 = 1e-6;

/// Gradient of the `mode` objective in `x`; for TLS, the corrected vectors
/// are re-optimised at `x` first.
fn gradient_norm(mode: Mode, x: &CVector, a: &SensingEnsemble, y: &MeasurementSet, w: &CorrectionParams) -> Result<f64> {
    Ok(match mode {
        Mode::Ls => ls_gradient(x, a, y)?.norm(),
        Mode::Tls => tls_gradient(x, &correct_all(a, y, x, w)?, y)?.norm(),
    })
}

/// Step for a solver started at `x#`: `2‖x#‖²/(λ_max + λ_min)` of the
/// linearised gradient map `(2/M)ÃᵀỸDÃ`.
fn fd_step(lin: &Linearization, tls: bool) -> f64 {
    let c = if tls { lin.y.component_mul(&lin.d) } else { lin.y.clone() };
    let h = weighted_gram(&lin.a, &c) * (2.0 / lin.a.nrows() as f64);
    let eig = h.symmetric_eigenvalues();
    2.0 * lin.x.norm_squared() / (eig.max() + eig.min())
}

fn fd_config(mode: Mode, step: f64, weights: CorrectionParams) -> SolverConfig {
    SolverConfig {
        step_size: Some(step),
        threshold: f64::MIN_POSITIVE,
        max_iters: FD_MAX_ITERS,
        weights: Some(weights),
        ..SolverConfig::ls().with_mode(mode)
    }
}

/// Derivatives of the `mode` solver's output with respect to every sensing
/// entry and every measurement, by central differences of step `h` around
/// the clean data. Each perturbed solve starts at `x#` and must end at a
/// stationary point.
pub fn finite_difference_jacobians(
    a_clean: &SensingEnsemble,
    y_clean: &MeasurementSet,
    x_sharp: &CVector,
    mode: Mode,
    weights: CorrectionParams,
    h: f64,
) -> Result<FdJacobians> {
    let (n, m) = (a_clean.dim(), a_clean.len());
    if n > FD_MAX_N || m > FD_MAX_M {
        return Err(Error::InvalidArgument(format!(
            "finite-difference oracle is limited to N ≤ {FD_MAX_N}, M ≤ {FD_MAX_M}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let lin = Linearization::new(a_clean, y_clean, x_sharp, weights.lambda_y() / weights.lambda_a())?;
    let cfg = fd_config(mode, fd_step(&lin, mode == Mode::Tls), weights);

    let run = |a: &SensingEnsemble, y: &MeasurementSet| -> Result<DVector<f64>> {
        let out = solve(y, a, &cfg, Some(x_sharp))?;
        let start = gradient_norm(mode, x_sharp, a, y, &weights)?;
        let end = gradient_norm(mode, &out.x_hat, a, y, &weights)?;
        if end > FD_STATIONARITY * start {
            return Err(Error::NotConverged(format!(
                "finite-difference solve left gradient {end:e} (from {start:e}) after {} iterations",
                out.iterations
            )));
        }
        Ok(DVector::from_vec(out.x_hat.real_parts()))
    };
    let central = |plus: DVector<f64>, minus: DVector<f64>| (plus - minus) / (2.0 * h);

    let mut wrt_a = DMatrix::zeros(n, m * n);
    for idx in 0..m * n {
        let shifted = |sign: f64| -> Result<SensingEnsemble> {
            let mut data = a_clean.as_flat().to_vec();
            data[idx].re += sign * h;
            SensingEnsemble::from_flat(n, m, data, ModelTag::External, NoiseTag::Noisy)
        };
        let col = central(run(&shifted(1.0)?, y_clean)?, run(&shifted(-1.0)?, y_clean)?);
        wrt_a.set_column(idx, &col);
    }
    let mut wrt_y = DMatrix::zeros(n, m);
    for k in 0..m {
        let shifted = |sign: f64| -> Result<MeasurementSet> {
            let mut v = y_clean.values().to_vec();
            v[k] += sign * h;
            MeasurementSet::new(v, y_clean.ensemble_ref())
        };
        let col = central(run(a_clean, &shifted(1.0)?)?, run(a_clean, &shifted(-1.0)?)?);
        wrt_y.set_column(k, &col);
    }
    Ok(FdJacobians { wrt_a, wrt_y })
}
