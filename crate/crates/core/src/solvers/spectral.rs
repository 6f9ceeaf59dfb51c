use num_complex::Complex64;

use super::kernels::{project, weighted_sum};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::{norm_sqr, CVector, MeasurementSet, SensingEnsemble};

/// Seed of the power iteration's start vector.
const START_SEED: u64 = 0x005e_ed0f_5eed;

/// Leading eigenvector of `Σ_m y_m a_m a_m*`, scaled to `(Σ y_m / 2M)^{1/2}`.
///
/// The matrix is applied as `Σ_m y_m a_m ⟨a_m, u⟩` and never formed. The
/// power iteration starts from a fixed real Gaussian vector, so real data
/// yields a real estimate.
pub fn spectral_init(y: &MeasurementSet, a: &SensingEnsemble, power_iters: usize) -> Result<CVector> {
    y.check_against(a)?;
    if y.values().iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroMeasurements);
    }
    let energy = y.values().iter().sum::<f64>() / (2.0 * y.len() as f64);
    if !(energy > 0.0) {
        return Err(Error::ZeroMeasurements);
    }

    let mut rng = Rng::new(START_SEED);
    let mut u: Vec<Complex64> = (0..a.dim()).map(|_| Complex64::new(rng.normal(), 0.0)).collect();
    normalize(&mut u)?;
    for _ in 0..power_iters {
        let p = project(a, &u);
        let w: Vec<Complex64> = p.iter().zip(y.values()).map(|(pm, ym)| pm * *ym).collect();
        u = weighted_sum(a, &w);
        normalize(&mut u)?;
    }
    let s = energy.sqrt();
    Ok(CVector::from_raw(u.into_iter().map(|z| z * s).collect()))
}

fn normalize(u: &mut [Complex64]) -> Result<()> {
    let n = norm_sqr(u).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::NotConverged("power iteration collapsed to zero".into()));
    }
    for z in u.iter_mut() {
        *z /= n;
    }
    Ok(())
}
