//! Saving and loading signals, ensembles and measurements in the binary and
//! JSON formats.

use tlspr::{
    complex_gaussian_vector, gaussian_ensemble, synthesize_measurements, CVector, MeasurementSet, Persist, Result, Rng,
    SensingEnsemble,
};

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("tlspr-file-io-example");
    std::fs::create_dir_all(&dir)?;
    let mut rng = Rng::new(13);
    let x = complex_gaussian_vector(&mut rng, 8, 1.0)?;
    let a = gaussian_ensemble(&mut rng, 8, 48, false)?;
    let y = synthesize_measurements(&a, &x)?;

    for ext in ["tpr", "json"] {
        let path = |stem: &str| dir.join(format!("{stem}.{ext}"));
        x.save(path("signal"))?;
        a.save(path("ensemble"))?;
        y.save(path("measurements"))?;
        let same = CVector::load(path("signal"))? == x
            && SensingEnsemble::load(path("ensemble"))? == a
            && MeasurementSet::load(path("measurements"))? == y;
        let bytes = std::fs::metadata(path("ensemble"))?.len();
        println!("{ext}: round trip exact {same}, ensemble file {bytes} bytes");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
