//! Adding errors at a prescribed SNR and measuring the SNR that results.

use tlspr::noise::{measurement_snr, sensing_snr};
use tlspr::{
    complex_gaussian_vector, gaussian_ensemble, inject_errors, synthesize_measurements, NoiseModel, NoiseSpec, Result,
    Rng,
};

fn main() -> Result<()> {
    let mut rng = Rng::new(5);
    let x = complex_gaussian_vector(&mut rng, 16, 1.0)?;
    let a = gaussian_ensemble(&mut rng, 16, 128, false)?;
    let y = synthesize_measurements(&a, &x)?;

    for model in [NoiseModel::Gaussian, NoiseModel::Handcrafted] {
        let spec = NoiseSpec::new(Some(20.0), Some(10.0), model, false)?;
        let (ny, na) = inject_errors(&mut rng, &y, &a, Some(&x), &spec)?;
        println!(
            "{model:?}: measurement SNR {:.2} dB, sensing SNR {:.2} dB",
            measurement_snr(&y, &ny),
            sensing_snr(&a, &na)
        );
    }
    Ok(())
}
