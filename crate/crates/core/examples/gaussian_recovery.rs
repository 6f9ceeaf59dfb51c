//! Recovering a complex signal from clean Gaussian measurements with both
//! solvers.

use tlspr::{
    complex_gaussian_vector, gaussian_ensemble, rel_dist, solve_ls, solve_tls, synthesize_measurements, Result, Rng,
    SolverConfig,
};

fn main() -> Result<()> {
    let mut rng = Rng::new(1);
    let (n, m) = (32, 256);
    let x = complex_gaussian_vector(&mut rng, n, 1.0)?;
    let a = gaussian_ensemble(&mut rng, n, m, false)?;
    let y = synthesize_measurements(&a, &x)?;

    let tight = |cfg: SolverConfig| SolverConfig { threshold: 1e-15, ..cfg };
    let tls = solve_tls(&y, &a, &tight(SolverConfig::tls()), None)?;
    let ls = solve_ls(&y, &a, &tight(SolverConfig::ls()), None)?;
    println!("initial rel.dist {:.3e}", rel_dist(&x, &tls.x0)?);
    println!("TLS: {} iterations, rel.dist {:.3e}", tls.iterations, rel_dist(&x, &tls.x_hat)?);
    println!("LS:  {} iterations, rel.dist {:.3e}", ls.iterations, rel_dist(&x, &ls.x_hat)?);
    Ok(())
}
