use num_complex::Complex64;

use super::kernels::{ordered_sum, project, weighted_sum};
use crate::correction::{solve_scalar, CorrectionParams};
use crate::error::{Error, Result};
use crate::types::{CVector, MeasurementSet, SensingEnsemble};

fn check(x: &CVector, a: &SensingEnsemble, y: &MeasurementSet) -> Result<()> {
    a.check_signal(x)?;
    y.check_against(a)
}

/// `(1/2M) Σ (y_m − |⟨a_m, x⟩|²)²`.
pub fn objective_ls(x: &CVector, a: &SensingEnsemble, y: &MeasurementSet) -> Result<f64> {
    check(x, a, y)?;
    let p = project(a, x.as_slice());
    Ok(ls_loss(&p, y.values()))
}

pub(crate) fn ls_loss(p: &[Complex64], y: &[f64]) -> f64 {
    let total: f64 = ordered_sum(p.len(), |m| {
        let r = y[m] - p[m].norm_sqr();
        r * r
    });
    total / (2.0 * p.len() as f64)
}

/// `(1/2M) Σ λ_a‖a_m − â_m‖² + λ_y(y_m − |⟨â_m, x⟩|²)²`.
pub fn objective_tls(
    x: &CVector,
    corrected: &SensingEnsemble,
    original: &SensingEnsemble,
    y: &MeasurementSet,
    lambda_a: f64,
    lambda_y: f64,
) -> Result<f64> {
    check(x, corrected, y)?;
    check(x, original, y)?;
    let p = project(corrected, x.as_slice());
    let total: f64 = ordered_sum(p.len(), |m| {
        let d: f64 = corrected
            .row(m)
            .iter()
            .zip(original.row(m))
            .map(|(u, v)| (u - v).norm_sqr())
            .sum();
        let r = y.values()[m] - p[m].norm_sqr();
        lambda_a * d + lambda_y * r * r
    });
    Ok(total / (2.0 * p.len() as f64))
}

/// Wirtinger gradient of the LS objective:
/// `(1/2M) Σ 2(|⟨a_m, x⟩|² − y_m) a_m ⟨a_m, x⟩`.
///
/// Along real coordinates the ordinary gradient is twice the real part.
pub fn ls_gradient(x: &CVector, a: &SensingEnsemble, y: &MeasurementSet) -> Result<CVector> {
    check(x, a, y)?;
    let p = project(a, x.as_slice());
    Ok(CVector::from_raw(ls_gradient_from_projection(a, &p, y.values())))
}

pub(crate) fn ls_gradient_from_projection(a: &SensingEnsemble, p: &[Complex64], y: &[f64]) -> Vec<Complex64> {
    let inv_m = 1.0 / p.len() as f64;
    let w: Vec<Complex64> = p
        .iter()
        .zip(y)
        .map(|(pm, ym)| pm * ((pm.norm_sqr() - ym) * inv_m))
        .collect();
    weighted_sum(a, &w)
}

/// The TLS x-gradient for fixed corrected vectors. It has the LS form with
/// `â_m` in place of `a_m`; multiply by `λ_y` for the gradient of the TLS
/// objective itself.
pub fn tls_gradient(x: &CVector, corrected: &SensingEnsemble, y: &MeasurementSet) -> Result<CVector> {
    ls_gradient(x, corrected, y)
}

/// `F(x) = min_â J(x, â)`, the TLS objective with every sensing vector
/// optimally corrected at `x`. Its Wirtinger gradient is
/// `λ_y · tls_gradient(x, â*(x), y)`.
pub fn tls_envelope(x: &CVector, a: &SensingEnsemble, y: &MeasurementSet, params: &CorrectionParams) -> Result<f64> {
    check(x, a, y)?;
    let s = x.norm_sqr();
    if s == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let p = project(a, x.as_slice());
    let total: f64 = ordered_sum(p.len(), |m| solve_scalar(p[m], y.values()[m], s, params).objective);
    Ok(total / (2.0 * p.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gaussian_ensemble, synthesize_measurements};
    use crate::rng::{complex_gaussian_vector, real_gaussian_vector, Rng};
    use crate::types::{inner, ModelTag, NoiseTag};

    #[test]
    fn tls_objective_cases() {
        let mut rng = Rng::new(1);
        let x = complex_gaussian_vector(&mut rng, 5, 1.0).unwrap();
        let a = gaussian_ensemble(&mut rng, 5, 30, false).unwrap();
        let y = synthesize_measurements(&a, &x).unwrap();
        assert_eq!(objective_tls(&x, &a, &a, &y, 2.0, 3.0).unwrap(), 0.0);

        // Shift every row by e1: the fidelity term contributes λ_a/2.
        let shifted: Vec<Complex64> = a
            .as_flat()
            .chunks(5)
            .flat_map(|r| {
                let mut r = r.to_vec();
                r[0] += 1.0;
                r
            })
            .collect();
        let b = SensingEnsemble::from_flat(5, 30, shifted, ModelTag::Gaussian, NoiseTag::Corrected).unwrap();
        let lambda_a = 0.7;
        let got = objective_tls(&x, &b, &a, &y, lambda_a, 1.3).unwrap();
        let data: f64 = (0..30)
            .map(|m| {
                let r = y.values()[m] - inner(&b.row_vector(m), &x).unwrap().norm_sqr();
                1.3 * r * r
            })
            .sum::<f64>()
            / 60.0;
        assert!((got - (lambda_a / 2.0 + data)).abs() <= 1e-12 * got);
    }

    #[test]
    fn ls_objective_matches_loop() {
        let mut rng = Rng::new(2);
        let x = complex_gaussian_vector(&mut rng, 6, 1.0).unwrap();
        let a = gaussian_ensemble(&mut rng, 6, 40, false).unwrap();
        let y = MeasurementSet::new((0..40).map(|_| rng.normal().abs() * 10.0).collect(), 0).unwrap();
        let mut naive = 0.0;
        for m in 0..40 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..6 {
                s += a.row(m)[k].conj() * x[k];
            }
            naive += (y.values()[m] - s.norm_sqr()).powi(2);
        }
        naive /= 80.0;
        let got = objective_ls(&x, &a, &y).unwrap();
        assert!((got - naive).abs() <= 1e-12 * naive);
    }

    #[test]
    fn gradient_vanishes_at_truth_and_origin() {
        let mut rng = Rng::new(3);
        let x = complex_gaussian_vector(&mut rng, 8, 1.0).unwrap();
        let a = gaussian_ensemble(&mut rng, 8, 64, false).unwrap();
        let y = synthesize_measurements(&a, &x).unwrap();
        assert!(ls_gradient(&x, &a, &y).unwrap().norm() <= 1e-10 * x.norm().powi(3));
        assert_eq!(ls_gradient(&CVector::zeros(8).unwrap(), &a, &y).unwrap().norm(), 0.0);
        assert!(ls_gradient(&CVector::zeros(7).unwrap(), &a, &y).is_err());
    }

    /// Central differences along each real coordinate.
    fn fd_gradient(f: impl Fn(&CVector) -> f64, x: &CVector, h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|k| {
                let mut up = x.clone();
                let mut dn = x.clone();
                up[k].re += h;
                dn[k].re -= h;
                (f(&up) - f(&dn)) / (2.0 * h)
            })
            .collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        num / den
    }

    #[test]
    fn real_gradients_match_finite_differences() {
        for seed in 0..10 {
            let mut rng = Rng::new(seed);
            let truth = real_gradient_instance(&mut rng);
            let (x, a, y) = truth;
            let g: Vec<f64> = ls_gradient(&x, &a, &y).unwrap().iter().map(|z| 2.0 * z.re).collect();
            let fd = fd_gradient(|v| objective_ls(v, &a, &y).unwrap(), &x, 1e-6);
            assert!(rel_err(&g, &fd) <= 1e-4, "ls seed {seed}");

            let params = CorrectionParams::new(1.0 / 6.0, 1.0 / x.norm_sqr().powi(2)).unwrap();
            let corrected = crate::solvers::correct_all(&a, &y, &x, &params).unwrap();
            let g: Vec<f64> = tls_gradient(&x, &corrected, &y)
                .unwrap()
                .iter()
                .map(|z| 2.0 * params.lambda_y() * z.re)
                .collect();
            let fd = fd_gradient(|v| tls_envelope(v, &a, &y, &params).unwrap(), &x, 1e-6);
            assert!(rel_err(&g, &fd) <= 1e-4, "tls seed {seed}");
        }
    }

    fn real_gradient_instance(rng: &mut Rng) -> (CVector, SensingEnsemble, MeasurementSet) {
        let truth = real_gaussian_vector(rng, 6, 1.0).unwrap();
        let a = gaussian_ensemble(rng, 6, 24, true).unwrap();
        let y = synthesize_measurements(&a, &truth).unwrap();
        let y = MeasurementSet::new(y.values().iter().map(|v| v + 0.3 * rng.normal()).collect(), 0).unwrap();
        let x = CVector::new(truth.iter().map(|z| z + 0.2 * rng.normal()).collect()).unwrap();
        (x, a, y)
    }
}
