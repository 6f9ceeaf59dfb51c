//! Error injection at a prescribed SNR.
//!
//! SNRs are Frobenius ratios in dB: `−20 log₁₀(‖E‖/‖clean‖)`. Errors are
//! drawn iid and then rescaled so each block hits its target exactly.
//! Measurement errors are drawn before sensing errors, and both are always
//! drawn, so runs that differ only in SNR share the same error directions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::{norm_sqr, CVector, MeasurementSet, NoiseTag, SensingEnsemble};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    #[default]
    Gaussian,
    Handcrafted,
}

/// Target SNRs in dB. `None` or `+inf` leaves that block untouched.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    measurement_snr_db: Option<f64>,
    sensing_snr_db: Option<f64>,
    model: NoiseModel,
    real_mode: bool,
}

impl NoiseSpec {
    pub fn new(
        measurement_snr_db: Option<f64>,
        sensing_snr_db: Option<f64>,
        model: NoiseModel,
        real_mode: bool,
    ) -> Result<Self> {
        if measurement_snr_db.is_none() && sensing_snr_db.is_none() {
            return Err(Error::InvalidArgument("noise spec needs at least one SNR".into()));
        }
        for v in [measurement_snr_db, sensing_snr_db].into_iter().flatten() {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::InvalidArgument(format!("invalid SNR {v} dB")));
            }
        }
        Ok(NoiseSpec {
            measurement_snr_db,
            sensing_snr_db,
            model,
            real_mode,
        })
    }

    pub fn gaussian(measurement_snr_db: f64, sensing_snr_db: f64, real_mode: bool) -> Result<Self> {
        Self::new(Some(measurement_snr_db), Some(sensing_snr_db), NoiseModel::Gaussian, real_mode)
    }

    pub fn handcrafted(measurement_snr_db: f64, sensing_snr_db: f64, real_mode: bool) -> Result<Self> {
        Self::new(Some(measurement_snr_db), Some(sensing_snr_db), NoiseModel::Handcrafted, real_mode)
    }

    pub fn measurement_snr_db(&self) -> Option<f64> {
        self.measurement_snr_db
    }

    pub fn sensing_snr_db(&self) -> Option<f64> {
        self.sensing_snr_db
    }

    pub fn model(&self) -> NoiseModel {
        self.model
    }

    pub fn real_mode(&self) -> bool {
        self.real_mode
    }

    /// True when neither block receives any error.
    pub fn is_clean(&self) -> bool {
        active(self.measurement_snr_db).is_none() && active(self.sensing_snr_db).is_none()
    }
}

fn active(snr: Option<f64>) -> Option<f64> {
    snr.filter(|v| v.is_finite())
}

/// `−20 log₁₀(‖noisy − clean‖ / ‖clean‖)`.
pub fn snr_db(clean_norm: f64, error_norm: f64) -> f64 {
    -20.0 * (error_norm / clean_norm).log10()
}

pub fn measurement_snr(clean: &MeasurementSet, noisy: &MeasurementSet) -> f64 {
    let err = clean
        .values()
        .iter()
        .zip(noisy.values())
        .map(|(c, n)| (n - c) * (n - c))
        .sum::<f64>()
        .sqrt();
    snr_db(clean.norm(), err)
}

pub fn sensing_snr(clean: &SensingEnsemble, noisy: &SensingEnsemble) -> f64 {
    let err = clean
        .as_flat()
        .iter()
        .zip(noisy.as_flat())
        .map(|(c, n)| (n - c).norm_sqr())
        .sum::<f64>()
        .sqrt();
    snr_db(clean.frobenius_norm(), err)
}

/// iid Gaussian errors on measurements (real) and sensing vectors (complex,
/// or real in `real_mode`).
pub fn inject_gaussian(
    rng: &mut Rng,
    clean_y: &MeasurementSet,
    clean_a: &SensingEnsemble,
    spec: &NoiseSpec,
) -> Result<(MeasurementSet, SensingEnsemble)> {
    if spec.model != NoiseModel::Gaussian {
        return Err(Error::InvalidArgument("inject_gaussian needs the gaussian model".into()));
    }
    inject(rng, clean_y, clean_a, None, spec)
}

/// Errors whose row `m` is amplified by `1 + 4‖x#‖²ỹ_m` before rescaling,
/// so that large measurements carry proportionally larger errors.
pub fn inject_handcrafted(
    rng: &mut Rng,
    clean_y: &MeasurementSet,
    clean_a: &SensingEnsemble,
    x_sharp: &CVector,
    spec: &NoiseSpec,
) -> Result<(MeasurementSet, SensingEnsemble)> {
    if spec.model != NoiseModel::Handcrafted {
        return Err(Error::InvalidArgument("inject_handcrafted needs the handcrafted model".into()));
    }
    clean_a.check_signal(x_sharp)?;
    let scales = handcrafted_row_scales(clean_y, x_sharp);
    inject(rng, clean_y, clean_a, Some(&scales), spec)
}

/// Row amplification `1 + 4‖x#‖²ỹ_m`.
pub fn handcrafted_row_scales(clean_y: &MeasurementSet, x_sharp: &CVector) -> Vec<f64> {
    let s = x_sharp.norm_sqr();
    clean_y.values().iter().map(|&y| 1.0 + 4.0 * s * y).collect()
}

/// Dispatches on `spec.model`; the handcrafted model needs `x_sharp`.
pub fn inject_errors(
    rng: &mut Rng,
    clean_y: &MeasurementSet,
    clean_a: &SensingEnsemble,
    x_sharp: Option<&CVector>,
    spec: &NoiseSpec,
) -> Result<(MeasurementSet, SensingEnsemble)> {
    match spec.model {
        NoiseModel::Gaussian => inject_gaussian(rng, clean_y, clean_a, spec),
        NoiseModel::Handcrafted => {
            let x = x_sharp.ok_or_else(|| {
                Error::InvalidArgument("handcrafted errors need the ground-truth signal".into())
            })?;
            inject_handcrafted(rng, clean_y, clean_a, x, spec)
        }
    }
}

fn inject(
    rng: &mut Rng,
    clean_y: &MeasurementSet,
    clean_a: &SensingEnsemble,
    row_scales: Option<&[f64]>,
    spec: &NoiseSpec,
) -> Result<(MeasurementSet, SensingEnsemble)> {
    clean_y.check_against(clean_a)?;
    let (n, m) = (clean_a.dim(), clean_a.len());

    let mut e_y: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
    let mut e_a: Vec<Complex64> = if spec.real_mode {
        (0..m * n).map(|_| Complex64::new(rng.normal(), 0.0)).collect()
    } else {
        (0..m * n).map(|_| rng.complex_normal(1.0)).collect()
    };

    if let Some(scales) = row_scales {
        for (v, d) in e_y.iter_mut().zip(scales) {
            *v *= d;
        }
        for (row, d) in e_a.chunks_mut(n).zip(scales) {
            for z in row {
                *z *= d;
            }
        }
    }

    let y = match active(spec.measurement_snr_db) {
        Some(snr) => {
            let k = rescale_factor(clean_y.norm(), e_y.iter().map(|v| v * v).sum::<f64>().sqrt(), snr, "measurements")?;
            let values = clean_y.values().iter().zip(&e_y).map(|(c, e)| c + k * e).collect();
            MeasurementSet::new(values, clean_y.ensemble_ref())?
        }
        None => clean_y.clone(),
    };

    let a = match active(spec.sensing_snr_db) {
        Some(snr) => {
            let k = rescale_factor(clean_a.frobenius_norm(), norm_sqr(&e_a).sqrt(), snr, "sensing vectors")?;
            let data = clean_a.as_flat().iter().zip(&e_a).map(|(c, e)| c + e * k).collect();
            SensingEnsemble::from_flat(n, m, data, clean_a.model_tag(), NoiseTag::Noisy)?
        }
        None => clean_a.clone(),
    };
    Ok((y, a))
}

fn rescale_factor(clean_norm: f64, error_norm: f64, snr_db: f64, what: &'static str) -> Result<f64> {
    if clean_norm == 0.0 {
        return Err(Error::ZeroCleanData(what));
    }
    if error_norm == 0.0 {
        return Err(Error::InvalidArgument(format!("drawn {what} error has zero norm")));
    }
    Ok(clean_norm * 10f64.powf(-snr_db / 20.0) / error_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gaussian_ensemble, synthesize_measurements};
    use crate::rng::complex_gaussian_vector;

    fn instance(seed: u64) -> (CVector, SensingEnsemble, MeasurementSet) {
        let mut rng = Rng::new(seed);
        let x = complex_gaussian_vector(&mut rng, 8, 1.0).unwrap();
        let a = gaussian_ensemble(&mut rng, 8, 64, false).unwrap();
        let y = synthesize_measurements(&a, &x).unwrap();
        (x, a, y)
    }

    #[test]
    fn exact_snr_for_both_models() {
        let (x, a, y) = instance(1);
        for spec in [
            NoiseSpec::gaussian(25.0, 40.0, false).unwrap(),
            NoiseSpec::handcrafted(25.0, 40.0, false).unwrap(),
        ] {
            let (ny, na) = inject_errors(&mut Rng::new(2), &y, &a, Some(&x), &spec).unwrap();
            assert!((sensing_snr(&a, &na) - 40.0).abs() <= 1e-9);
            assert!((measurement_snr(&y, &ny) - 25.0).abs() <= 1e-9);
            assert_eq!(na.noise_tag(), NoiseTag::Noisy);
        }
    }

    #[test]
    fn infinite_snr_is_identity() {
        let (_, a, y) = instance(3);
        let spec = NoiseSpec::gaussian(f64::INFINITY, f64::INFINITY, false).unwrap();
        assert!(spec.is_clean());
        let (ny, na) = inject_gaussian(&mut Rng::new(1), &y, &a, &spec).unwrap();
        assert_eq!(ny, y);
        assert_eq!(na, a);
        let spec = NoiseSpec::new(Some(30.0), None, NoiseModel::Gaussian, false).unwrap();
        let (_, na) = inject_gaussian(&mut Rng::new(1), &y, &a, &spec).unwrap();
        assert_eq!(na, a);
    }

    #[test]
    fn seeds_change_realisation_not_snr() {
        let (_, a, y) = instance(4);
        let spec = NoiseSpec::gaussian(30.0, 30.0, false).unwrap();
        let (_, a1) = inject_gaussian(&mut Rng::new(1), &y, &a, &spec).unwrap();
        let (_, a2) = inject_gaussian(&mut Rng::new(2), &y, &a, &spec).unwrap();
        assert_ne!(a1, a2);
        assert!((sensing_snr(&a, &a1) - sensing_snr(&a, &a2)).abs() <= 1e-9);
    }

    #[test]
    fn real_mode_errors_are_real() {
        let mut rng = Rng::new(5);
        let x = CVector::from_real(&[1.0, -2.0, 0.5]).unwrap();
        let a = gaussian_ensemble(&mut rng, 3, 20, true).unwrap();
        let y = synthesize_measurements(&a, &x).unwrap();
        let spec = NoiseSpec::gaussian(20.0, 20.0, true).unwrap();
        let (_, na) = inject_gaussian(&mut rng, &y, &a, &spec).unwrap();
        assert!(na.is_real());
    }

    #[test]
    fn model_mismatch_and_zero_data_are_errors() {
        let (x, a, y) = instance(6);
        let g = NoiseSpec::gaussian(20.0, 20.0, false).unwrap();
        let h = NoiseSpec::handcrafted(20.0, 20.0, false).unwrap();
        assert!(inject_gaussian(&mut Rng::new(0), &y, &a, &h).is_err());
        assert!(inject_handcrafted(&mut Rng::new(0), &y, &a, &x, &g).is_err());
        assert!(inject_errors(&mut Rng::new(0), &y, &a, None, &h).is_err());

        let zero_y = synthesize_measurements(&a, &CVector::zeros(8).unwrap()).unwrap();
        assert!(matches!(
            inject_gaussian(&mut Rng::new(0), &zero_y, &a, &g),
            Err(Error::ZeroCleanData(_))
        ));
        assert!(NoiseSpec::new(None, None, NoiseModel::Gaussian, false).is_err());
        assert!(NoiseSpec::gaussian(f64::NAN, 1.0, false).is_err());
    }

    #[test]
    fn handcrafted_row_scale_values() {
        let x = CVector::basis(1, 0).unwrap();
        let y = MeasurementSet::new(vec![1.0, 0.0], 0).unwrap();
        assert_eq!(handcrafted_row_scales(&y, &x), vec![5.0, 1.0]);
    }

    #[test]
    fn handcrafted_and_gaussian_have_equal_error_norms() {
        let (x, a, y) = instance(7);
        let (_, ga) = inject_gaussian(&mut Rng::new(9), &y, &a, &NoiseSpec::gaussian(30.0, 15.0, false).unwrap()).unwrap();
        let (_, ha) =
            inject_handcrafted(&mut Rng::new(9), &y, &a, &x, &NoiseSpec::handcrafted(30.0, 15.0, false).unwrap()).unwrap();
        let err = |n: &SensingEnsemble| {
            a.as_flat().iter().zip(n.as_flat()).map(|(c, v)| (v - c).norm_sqr()).sum::<f64>().sqrt()
        };
        assert!((err(&ga) - err(&ha)).abs() <= 1e-12 * err(&ga));
    }

    #[test]
    fn handcrafted_errors_grow_with_measurement() {
        // Pearson correlation between ỹ_m and the row error norm, pooled over draws.
        let (x, a, y) = instance(8);
        let spec = NoiseSpec::handcrafted(30.0, 20.0, false).unwrap();
        let mut pairs = Vec::new();
        for seed in 0..1000 {
            let (_, na) = inject_handcrafted(&mut Rng::new(seed), &y, &a, &x, &spec).unwrap();
            for m in 0..a.len() {
                let e: f64 = a.row(m).iter().zip(na.row(m)).map(|(c, v)| (v - c).norm_sqr()).sum();
                pairs.push((y.values()[m], e.sqrt()));
            }
        }
        let k = pairs.len() as f64;
        let (mx, my) = pairs.iter().fold((0.0, 0.0), |(sx, sy), (u, v)| (sx + u / k, sy + v / k));
        let cov: f64 = pairs.iter().map(|(u, v)| (u - mx) * (v - my)).sum();
        assert!(cov > 0.0);
    }
}
