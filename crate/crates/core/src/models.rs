//! Measurement models: iid Gaussian and coded diffraction patterns.
//!
//! The DFT is unnormalised, `F[n, k] = e^{−2πj nk/N}`. A coded diffraction
//! row for pattern `p_l` and frequency `n` has entries `p_{l,k}·e^{+2πj nk/N}`,
//! so that `⟨a, x⟩ = Σ_k conj(p_{l,k}) x_k e^{−2πj nk/N}` is bin `n` of the
//! DFT of the modulated signal. Rows are ordered pattern-major: row
//! `l·N + n`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::{CVector, MeasurementSet, ModelTag, NoiseTag, SensingEnsemble};

/// iid Gaussian ensemble of `m` vectors in dimension `n`. Complex entries
/// are `N(0,1) + jN(0,1)`; `real_mode` draws real `N(0,1)` entries instead.
pub fn gaussian_ensemble(rng: &mut Rng, n: usize, m: usize, real_mode: bool) -> Result<SensingEnsemble> {
    if n == 0 || m == 0 {
        return Err(Error::Empty("ensemble"));
    }
    let data = if real_mode {
        (0..n * m).map(|_| Complex64::new(rng.normal(), 0.0)).collect()
    } else {
        (0..n * m).map(|_| rng.complex_normal(1.0)).collect()
    };
    SensingEnsemble::from_flat(n, m, data, ModelTag::Gaussian, NoiseTag::Clean)
}

/// Signal dimension and number of octanary patterns; `M = L·N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CdpConfig {
    n: usize,
    l: usize,
}

impl CdpConfig {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 || l == 0 {
            return Err(Error::InvalidArgument(format!(
                "coded diffraction needs n ≥ 1 and l ≥ 1, got n={n}, l={l}"
            )));
        }
        Ok(CdpConfig { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.n * self.l
    }
}

/// One octanary pattern entry `q1·q2`: `q1` uniform on `{1, −1, j, −j}`,
/// `q2 = √2/2` with probability 0.8 and `√3` otherwise.
pub fn octanary_entry(rng: &mut Rng) -> Complex64 {
    let q1 = match rng.below(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(-1.0, 0.0),
        2 => Complex64::new(0.0, 1.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let q2 = if rng.uniform() < 0.8 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        3f64.sqrt()
    };
    q1 * q2
}

pub fn octanary_pattern(rng: &mut Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| octanary_entry(rng)).collect()
}

/// Random coded diffraction ensemble with `cfg.l()` octanary patterns.
pub fn cdp_ensemble(rng: &mut Rng, cfg: &CdpConfig) -> Result<SensingEnsemble> {
    let patterns: Vec<Vec<Complex64>> = (0..cfg.l).map(|_| octanary_pattern(rng, cfg.n)).collect();
    cdp_ensemble_from_patterns(&patterns)
}

/// Coded diffraction ensemble for explicit patterns of common length `N`.
pub fn cdp_ensemble_from_patterns(patterns: &[Vec<Complex64>]) -> Result<SensingEnsemble> {
    let n = patterns.first().ok_or(Error::Empty("patterns"))?.len();
    if n == 0 {
        return Err(Error::Empty("pattern"));
    }
    // e^{+2πj t/N} for t = 0..N; index nk mod N stays exact for any N.
    let twiddle: Vec<Complex64> = (0..n)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64))
        .collect();
    let mut data = Vec::with_capacity(patterns.len() * n * n);
    for p in patterns {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        for freq in 0..n {
            data.extend((0..n).map(|k| p[k] * twiddle[(freq * k) % n]));
        }
    }
    SensingEnsemble::from_flat(n, patterns.len() * n, data, ModelTag::Cdp, NoiseTag::Clean)
}

/// Clean measurements `y_m = |⟨a_m, x⟩|²`.
pub fn synthesize_measurements(ensemble: &SensingEnsemble, x: &CVector) -> Result<MeasurementSet> {
    let values = ensemble.project(x)?.iter().map(|z| z.norm_sqr()).collect();
    MeasurementSet::new(values, ensemble.fingerprint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::complex_gaussian_vector;

    fn mean_sq(e: &SensingEnsemble) -> f64 {
        e.as_flat().iter().map(|z| z.norm_sqr()).sum::<f64>() / e.as_flat().len() as f64
    }

    #[test]
    fn gaussian_moments() {
        let complex = gaussian_ensemble(&mut Rng::new(1), 100, 800, false).unwrap();
        assert!((1.9..=2.1).contains(&mean_sq(&complex)));
        let real = gaussian_ensemble(&mut Rng::new(1), 100, 800, true).unwrap();
        assert!(real.is_real());
        assert!((0.93..=1.07).contains(&mean_sq(&real)));
    }

    #[test]
    fn gaussian_is_reproducible() {
        let a = gaussian_ensemble(&mut Rng::new(5), 4, 9, false).unwrap();
        let b = gaussian_ensemble(&mut Rng::new(5), 4, 9, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn octanary_statistics() {
        let mut rng = Rng::new(17);
        let draws: Vec<Complex64> = (0..100_000).map(|_| octanary_entry(&mut rng)).collect();
        let second = draws.iter().map(|z| z.norm_sqr()).sum::<f64>() / draws.len() as f64;
        assert!((0.97..=1.03).contains(&second), "E|p|² = {second}");
        for target in [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ] {
            let freq = draws
                .iter()
                .filter(|z| (**z / z.norm() - target).norm() < 1e-12)
                .count() as f64
                / draws.len() as f64;
            assert!((0.23..=0.27).contains(&freq), "q1 = {target}: {freq}");
        }
    }

    #[test]
    fn cdp_rows_match_naive_dft() {
        let mut rng = Rng::new(2);
        let cfg = CdpConfig::new(7, 3).unwrap();
        let e = cdp_ensemble(&mut rng, &cfg).unwrap();
        assert_eq!(e.len(), 21);
        assert_eq!(e.model_tag(), ModelTag::Cdp);
        let x = complex_gaussian_vector(&mut rng, 7, 1.0).unwrap();
        let proj = e.project(&x).unwrap();
        for l in 0..3 {
            // Pattern entries are recovered from the zero-frequency row.
            let p = e.row(l * 7);
            for n in 0..7 {
                let mut oracle = Complex64::new(0.0, 0.0);
                for k in 0..7 {
                    let w = Complex64::from_polar(1.0, -2.0 * PI * (n * k) as f64 / 7.0);
                    oracle += p[k].conj() * x[k] * w;
                }
                assert!((proj[l * 7 + n] - oracle).norm() <= 1e-10 * oracle.norm().max(1.0));
            }
        }
    }

    #[test]
    fn all_ones_pattern_gives_power_spectrum() {
        let n = 16;
        let e = cdp_ensemble_from_patterns(&[vec![Complex64::new(1.0, 0.0); n]]).unwrap();
        let x = complex_gaussian_vector(&mut Rng::new(9), n, 1.0).unwrap();
        let y = synthesize_measurements(&e, &x).unwrap();
        // Parseval for the unnormalised DFT: Σ|X_n|² = N‖x‖².
        let total: f64 = y.values().iter().sum();
        assert!((total - n as f64 * x.norm_sqr()).abs() <= 1e-10 * total);
        let first: f64 = x.iter().sum::<Complex64>().norm_sqr();
        assert!((y.values()[0] - first).abs() <= 1e-10 * first);
    }

    #[test]
    fn cdp_config_validation() {
        assert!(CdpConfig::new(0, 1).is_err());
        assert!(CdpConfig::new(3, 0).is_err());
        assert_eq!(CdpConfig::new(3, 4).unwrap().m(), 12);
    }

    #[test]
    fn measurements_basic_cases() {
        let mut rng = Rng::new(4);
        let e = gaussian_ensemble(&mut rng, 5, 20, false).unwrap();
        let zero = synthesize_measurements(&e, &CVector::zeros(5).unwrap()).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let e1 = synthesize_measurements(&e, &CVector::basis(5, 0).unwrap()).unwrap();
        for m in 0..20 {
            assert!((e1.values()[m] - e.row(m)[0].norm_sqr()).abs() <= 1e-15);
        }
        assert!(synthesize_measurements(&e, &CVector::zeros(4).unwrap()).is_err());
        assert_eq!(e1.ensemble_ref(), e.fingerprint());
    }

    #[test]
    fn measurements_match_loop_and_ignore_global_phase() {
        let mut rng = Rng::new(6);
        let e = gaussian_ensemble(&mut rng, 9, 40, false).unwrap();
        let x = complex_gaussian_vector(&mut rng, 9, 1.0).unwrap();
        let y = synthesize_measurements(&e, &x).unwrap();
        let rotated = synthesize_measurements(&e, &x.scale(Complex64::from_polar(1.0, 2.1))).unwrap();
        for m in 0..40 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..9 {
                s += e.row(m)[k].conj() * x[k];
            }
            let oracle = s.norm_sqr();
            assert!((y.values()[m] - oracle).abs() <= 1e-12 * oracle);
            assert!((rotated.values()[m] - oracle).abs() <= 1e-12 * oracle);
            assert!(y.values()[m] >= 0.0);
        }
    }
}
