//! Recovering a real signal with entries in [0, 1] using the projection that
//! takes magnitudes and clips them at one after every step.

use tlspr::{
    gaussian_ensemble, inject_errors, rel_dist, solve_tls, synthesize_measurements, CVector, NoiseSpec, Projection,
    Result, Rng, SolverConfig,
};

fn main() -> Result<()> {
    let mut rng = Rng::new(9);
    let n = 64;
    let bits: Vec<f64> = (0..n).map(|_| if rng.uniform() < 0.5 { 0.0 } else { 1.0 }).collect();
    let x = CVector::from_real(&bits)?;
    let a = gaussian_ensemble(&mut rng, n, 8 * n, false)?;
    let y = synthesize_measurements(&a, &x)?;
    let (ny, na) = inject_errors(&mut rng, &y, &a, None, &NoiseSpec::gaussian(25.0, 20.0, false)?)?;

    for projection in [Projection::None, Projection::RealBinary] {
        let r = solve_tls(&ny, &na, &SolverConfig { projection, ..SolverConfig::tls() }, None)?;
        let rounded: usize = r.x_hat.iter().zip(&bits).filter(|(z, b)| (z.norm() > 0.5) != (**b > 0.5)).count();
        println!(
            "{projection:?}: rel.dist {:.4}, {rounded} of {n} entries wrong after thresholding |x| at 0.5",
            rel_dist(&x, &r.x_hat)?
        );
    }
    Ok(())
}
