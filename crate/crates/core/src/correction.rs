//! Closed-form correction of a single sensing vector.
//!
//! With the signal `x` fixed, each sensing vector is replaced by the
//! minimiser of
//!
//! ```text
//! f(â) = λ_a‖a − â‖² + λ_y(y − |⟨â, x⟩|²)²
//! ```
//!
//! The optimal correction only moves `a` along `x`, so the problem collapses
//! to a scalar `ν = ⟨â, x⟩`. Writing `p = ⟨a, x⟩` and `s = ‖x‖²`, stationary
//! points satisfy `(αr² + β) r e^{jφ} = λ_a p` with
//!
//! ```text
//! α = 2λ_y s,   β = λ_a − 2λ_y y s,   γ = −λ_a p,   r = |ν|
//! ```
//!
//! so `r` is a positive root of `αr³ + βr + |γ| = 0` (phase of `γ`) or of
//! `αr³ + βr − |γ| = 0` (phase of `−γ`). Every candidate is scored and the
//! best is mapped back to a vector.

use num_complex::Complex64;

use crate::cubic::positive_real_roots;
use crate::error::{Error, Result};
use crate::types::{dot_conj, CVector};

/// Relative tolerance under which two candidate objective values tie.
const TIE_TOL: f64 = 1e-12;

/// Weights `λ_a` (sensing-vector fidelity) and `λ_y` (data fit).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionParams {
    lambda_a: f64,
    lambda_y: f64,
}

impl CorrectionParams {
    pub fn new(lambda_a: f64, lambda_y: f64) -> Result<Self> {
        for (name, v) in [("lambda_a", lambda_a), ("lambda_y", lambda_y)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(CorrectionParams { lambda_a, lambda_y })
    }

    pub fn lambda_a(&self) -> f64 {
        self.lambda_a
    }

    pub fn lambda_y(&self) -> f64 {
        self.lambda_y
    }

    /// `λ_y / λ_a`.
    pub fn ratio(&self) -> f64 {
        self.lambda_y / self.lambda_a
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionResult {
    pub corrected: CVector,
    /// `⟨corrected, x⟩`.
    pub nu: Complex64,
    /// `f` at the optimum.
    pub objective_value: f64,
    pub candidates_evaluated: usize,
}

/// Optimal `ν` for one measurement, without building the vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct ScalarCorrection {
    pub nu: Complex64,
    pub objective: f64,
    pub candidates: usize,
}

/// `f` expressed through `ν`: `λ_a|ν − p|²/s + λ_y(y − |ν|²)²`.
#[inline]
pub(crate) fn scalar_objective(nu: Complex64, p: Complex64, y: f64, s: f64, params: &CorrectionParams) -> f64 {
    let r = y - nu.norm_sqr();
    params.lambda_a * (nu - p).norm_sqr() / s + params.lambda_y * r * r
}

/// Candidate magnitudes and their unit phases.
pub(crate) fn candidates(p: Complex64, y: f64, s: f64, params: &CorrectionParams) -> Vec<Complex64> {
    let alpha = 2.0 * params.lambda_y * s;
    let beta = params.lambda_a - 2.0 * params.lambda_y * y * s;
    let g = params.lambda_a * p.norm();

    // Rescale r = σt so the cubic has O(1) coefficients and the root
    // classification thresholds are meaningful at any data scale.
    let sigma = (g / alpha).cbrt().max((beta.abs() / alpha).sqrt());

    let mut out = Vec::with_capacity(4);
    if g == 0.0 || !(sigma > 0.0 && sigma.is_finite()) {
        out.push(Complex64::new(0.0, 0.0));
        if beta < 0.0 {
            out.push(Complex64::new((-beta / alpha).sqrt(), 0.0));
        }
        return out;
    }

    let unit = p / p.norm();
    let b = beta / (alpha * sigma * sigma);
    let c = g / (alpha * sigma * sigma * sigma);
    // αr³ + βr + |γ| = 0: (αr² + β) < 0, so ν points opposite to p.
    if let Ok(roots) = positive_real_roots(1.0, b, c) {
        out.extend(roots.into_iter().map(|t| -unit * (sigma * t)));
    }
    // αr³ + βr − |γ| = 0: ν points along p.
    if let Ok(roots) = positive_real_roots(1.0, b, -c) {
        out.extend(roots.into_iter().map(|t| unit * (sigma * t)));
    }
    out
}

/// Minimises `f` over `ν` given `p = ⟨a, x⟩`, `y` and `s = ‖x‖² > 0`.
pub(crate) fn solve_scalar(p: Complex64, y: f64, s: f64, params: &CorrectionParams) -> ScalarCorrection {
    let cands = candidates(p, y, s, params);
    // The uncorrected vector is scored too, which makes the exact-data case
    // return `a` bit for bit instead of a root that is off by roundoff.
    let mut best = ScalarCorrection {
        nu: p,
        objective: scalar_objective(p, p, y, s, params),
        candidates: cands.len() + 1,
    };
    for nu in cands {
        let f = scalar_objective(nu, p, y, s, params);
        let tie = (f - best.objective).abs() <= TIE_TOL * f.abs().max(best.objective.abs());
        let better = if tie {
            (nu - p).norm() < (best.nu - p).norm()
        } else {
            f < best.objective
        };
        if better {
            best.nu = nu;
            best.objective = f;
        }
    }
    best
}

/// Coefficient `c` with `â = a + c·x` for the correction that moves
/// `⟨a, x⟩ = p` to `ν`.
#[inline]
pub(crate) fn shift_coefficient(nu: Complex64, p: Complex64, s: f64) -> Complex64 {
    (nu - p).conj() / s
}

/// The vector `v` with `⟨v, x⟩ = nu` whose difference from `a` is parallel to
/// `x`: the component of `a` orthogonal to `x` is kept and the component
/// along `x` is replaced.
pub fn reconstruct_from_nu(a: &CVector, x: &CVector, nu: Complex64) -> Result<CVector> {
    check_pair(a, x)?;
    if !nu.is_finite() {
        return Err(Error::NonFinite("nu"));
    }
    let s = x.norm_sqr();
    if s == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let p = dot_conj(a.as_slice(), x.as_slice());
    Ok(shifted(a, x, shift_coefficient(nu, p, s)))
}

fn shifted(a: &CVector, x: &CVector, c: Complex64) -> CVector {
    CVector::from_raw(a.iter().zip(x.iter()).map(|(ai, xi)| ai + c * xi).collect())
}

fn check_pair(a: &CVector, x: &CVector) -> Result<()> {
    if a.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: a.len(),
        });
    }
    Ok(())
}

/// Globally optimal correction of `a` for measurement `y` at signal `x`.
pub fn correct_sensing_vector(
    a: &CVector,
    y: f64,
    x: &CVector,
    params: &CorrectionParams,
) -> Result<CorrectionResult> {
    check_pair(a, x)?;
    if !y.is_finite() {
        return Err(Error::NonFinite("measurement"));
    }
    let s = x.norm_sqr();
    if s == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let p = dot_conj(a.as_slice(), x.as_slice());
    let sc = solve_scalar(p, y, s, params);
    Ok(CorrectionResult {
        corrected: shifted(a, x, shift_coefficient(sc.nu, p, s)),
        nu: sc.nu,
        objective_value: sc.objective,
        candidates_evaluated: sc.candidates,
    })
}
