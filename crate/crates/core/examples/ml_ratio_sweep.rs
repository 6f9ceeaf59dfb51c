//! Expected TLS error over a grid of weight ratios, with its minimum next to
//! the ratio of error variances.

use tlspr::analysis::{ml_ratio_sweep, variances_from_snr};
use tlspr::{gaussian_ensemble, real_gaussian_vector, synthesize_measurements, Result, Rng};

fn main() -> Result<()> {
    let mut rng = Rng::new(7);
    let x = real_gaussian_vector(&mut rng, 20, 1.0)?;
    let a = gaussian_ensemble(&mut rng, 20, 160, true)?;
    let y = synthesize_measurements(&a, &x)?;
    for (sens, meas) in [(40.0, 20.0), (20.0, 40.0)] {
        let (sd, se) = variances_from_snr(&a, &y, sens, meas)?;
        let sweep = ml_ratio_sweep(&a, &y, &x, sd, se)?;
        println!(
            "sensing {sens} dB, measurement {meas} dB: σ²_δ/σ²_η = {:.3e}, grid argmin {:.3e} ({:.2} steps away)",
            sweep.optimal_ratio,
            sweep.argmin_ratio,
            sweep.offset_in_steps()
        );
    }
    Ok(())
}
