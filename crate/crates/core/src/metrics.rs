//! Phase-invariant reconstruction metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{inner, CVector, SensingEnsemble};

/// Phase `φ` minimising `‖u − e^{jφ}v‖`, i.e. `arg⟨v, u⟩` (0 when orthogonal).
pub fn optimal_phase(u: &CVector, v: &CVector) -> Result<f64> {
    let ip = inner(v, u)?;
    Ok(if ip == Complex64::new(0.0, 0.0) { 0.0 } else { ip.arg() })
}

/// `min_φ ‖u − e^{jφ}v‖ = √(‖u‖² + ‖v‖² − 2|⟨u, v⟩|)`.
///
/// Evaluated as the norm of the aligned difference, which is the same
/// quantity without the cancellation of the closed form near zero.
pub fn dist(u: &CVector, v: &CVector) -> Result<f64> {
    let ip = inner(v, u)?;
    let rot = if ip == Complex64::new(0.0, 0.0) {
        Complex64::new(1.0, 0.0)
    } else {
        ip / ip.norm()
    };
    Ok(u.iter()
        .zip(v.iter())
        .map(|(a, b)| (a - rot * b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `dist(x#, x̂) / ‖x#‖`.
pub fn rel_dist(x_sharp: &CVector, x_hat: &CVector) -> Result<f64> {
    let n = x_sharp.norm();
    if n == 0.0 {
        return Err(Error::InvalidArgument("ground truth has zero norm".into()));
    }
    Ok(dist(x_sharp, x_hat)? / n)
}

/// Reconstruction SNR in dB, `−20 log₁₀(rel_dist)`.
pub fn recon_snr_db(x_sharp: &CVector, x_hat: &CVector) -> Result<f64> {
    Ok(-20.0 * rel_dist(x_sharp, x_hat)?.log10())
}

/// Relative sensing-vector correction error
/// `‖𝗒(a#, x#) − 𝗒(a†, e^{jφ}x†)‖ / ‖𝗒(a#, x#)‖` with
/// `𝗒(a, x) = (⟨a_1, x⟩, …, ⟨a_M, x⟩)` and `φ = arg⟨x†, x#⟩`.
pub fn rel_corr(a_sharp: &SensingEnsemble, x_sharp: &CVector, a_dag: &SensingEnsemble, x_dag: &CVector) -> Result<f64> {
    if a_sharp.len() != a_dag.len() {
        return Err(Error::DimensionMismatch {
            expected: a_sharp.len(),
            found: a_dag.len(),
        });
    }
    let rot = Complex64::from_polar(1.0, optimal_phase(x_sharp, x_dag)?);
    let aligned = x_dag.scale(rot);
    let truth = a_sharp.project(x_sharp)?;
    let est = a_dag.project(&aligned)?;
    let den = truth.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::InvalidArgument("reference projections are all zero".into()));
    }
    let num = truth.iter().zip(&est).map(|(t, e)| (t - e).norm_sqr()).sum::<f64>().sqrt();
    Ok(num / den)
}

/// Per-trial summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub rel_dist_tls: f64,
    pub rel_dist_ls: f64,
    pub rel_corr: Option<f64>,
    /// Reconstruction SNR of the TLS estimate.
    pub recon_snr_db: f64,
}

impl TrialMetrics {
    pub fn new(rel_dist_tls: f64, rel_dist_ls: f64, rel_corr: Option<f64>) -> Self {
        TrialMetrics {
            rel_dist_tls,
            rel_dist_ls,
            rel_corr,
            recon_snr_db: -20.0 * rel_dist_tls.log10(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gaussian_ensemble;
    use crate::rng::{complex_gaussian_vector, Rng};
    use std::f64::consts::PI;

    fn closed_form_dist(u: &CVector, v: &CVector) -> f64 {
        (u.norm_sqr() + v.norm_sqr() - 2.0 * inner(u, v).unwrap().norm())
            .max(0.0)
            .sqrt()
    }

    fn grid_dist(u: &CVector, v: &CVector) -> f64 {
        (0..10_000)
            .map(|k| {
                let r = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 10_000.0);
                u.iter().zip(v.iter()).map(|(a, b)| (a - r * b).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn dist_at(u: &CVector, v: &CVector, phi: f64) -> f64 {
        let r = Complex64::from_polar(1.0, phi);
        u.iter().zip(v.iter()).map(|(a, b)| (a - r * b).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn phase_rotations_have_zero_distance() {
        let x = complex_gaussian_vector(&mut Rng::new(1), 10, 1.0).unwrap();
        assert_eq!(dist(&x, &x).unwrap(), 0.0);
        assert!(dist(&x, &x.scale(Complex64::from_polar(1.0, 1.3))).unwrap() <= 1e-12);
        assert!(dist(&x, &x.scale(Complex64::new(-1.0, 0.0))).unwrap() <= 1e-12);
    }

    #[test]
    fn rel_dist_and_snr() {
        let x = complex_gaussian_vector(&mut Rng::new(2), 6, 1.0).unwrap();
        let zero = CVector::zeros(6).unwrap();
        assert!((rel_dist(&x, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(recon_snr_db(&x, &zero).unwrap().abs() < 1e-12);
        let e1 = CVector::basis(2, 0).unwrap();
        let near = CVector::from_real(&[1.0, 0.1]).unwrap();
        assert!((recon_snr_db(&e1, &near).unwrap() - 20.0).abs() < 1e-9);
        assert!(rel_dist(&zero, &x).is_err());
        assert!(dist(&x, &e1).is_err());
    }

    #[test]
    fn closed_form_matches_phase_grid() {
        let mut rng = Rng::new(3);
        for _ in 0..20 {
            let u = complex_gaussian_vector(&mut rng, 5, 1.0).unwrap();
            let v = complex_gaussian_vector(&mut rng, 5, 1.0).unwrap();
            let d = dist(&u, &v).unwrap();
            assert!((d - grid_dist(&u, &v)).abs() <= 1e-6);
            assert!(d <= grid_dist(&u, &v) + 1e-12);
        }
    }

    #[test]
    fn distance_identities() {
        let mut rng = Rng::new(4);
        for _ in 0..100 {
            let u = complex_gaussian_vector(&mut rng, 7, 1.0).unwrap();
            let v = complex_gaussian_vector(&mut rng, 7, 2.0).unwrap();
            let d = dist(&u, &v).unwrap();
            assert!((d - dist(&v, &u).unwrap()).abs() <= 1e-12 * d);
            let r = v.scale(Complex64::from_polar(1.0, rng.uniform() * 7.0));
            assert!((d - dist(&u, &r).unwrap()).abs() <= 1e-12 * d);
            let lhs = d * d + 2.0 * inner(&u, &v).unwrap().norm();
            let rhs = u.norm_sqr() + v.norm_sqr();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            assert!((d - closed_form_dist(&u, &v)).abs() <= 1e-9 * rhs.sqrt());
        }
    }

    #[test]
    fn rel_corr_cases() {
        let mut rng = Rng::new(5);
        let a = gaussian_ensemble(&mut rng, 6, 30, false).unwrap();
        let x = complex_gaussian_vector(&mut rng, 6, 1.0).unwrap();
        assert_eq!(rel_corr(&a, &x, &a, &x).unwrap(), 0.0);
        let r = x.scale(Complex64::from_polar(1.0, 2.2));
        assert!(rel_corr(&a, &x, &a, &r).unwrap() <= 1e-12);

        let b = gaussian_ensemble(&mut rng, 6, 30, false).unwrap();
        let xd = complex_gaussian_vector(&mut rng, 6, 1.0).unwrap();
        let closed = rel_corr(&a, &x, &b, &xd).unwrap();
        // Same value for any phase on x†.
        let spun = rel_corr(&a, &x, &b, &xd.scale(Complex64::from_polar(1.0, 0.4))).unwrap();
        assert!((closed - spun).abs() <= 1e-12);
        // φ located by a 10⁴-angle grid over ‖x# − e^{jφ}x†‖ instead of in closed form.
        let phi = (0..10_000)
            .map(|k| 2.0 * PI * k as f64 / 10_000.0)
            .min_by(|p, q| {
                let d = |t: f64| dist_at(&x, &xd, t);
                d(*p).total_cmp(&d(*q))
            })
            .unwrap();
        let truth = a.project(&x).unwrap();
        let den = truth.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let est = b.project(&xd.scale(Complex64::from_polar(1.0, phi))).unwrap();
        let grid = truth.iter().zip(&est).map(|(t, e)| (t - e).norm_sqr()).sum::<f64>().sqrt() / den;
        assert!((closed - grid).abs() <= 1e-3);
    }
}
