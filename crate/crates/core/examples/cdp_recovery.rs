//! Coded diffraction patterns: octanary masks followed by a DFT.

use tlspr::{
    cdp_ensemble, complex_gaussian_vector, rel_dist, solve_tls, synthesize_measurements, CdpConfig, Result, Rng,
    SolverConfig,
};

fn main() -> Result<()> {
    let mut rng = Rng::new(3);
    let cfg = CdpConfig::new(64, 8)?;
    let x = complex_gaussian_vector(&mut rng, cfg.n(), 1.0)?;
    let a = cdp_ensemble(&mut rng, &cfg)?;
    let y = synthesize_measurements(&a, &x)?;
    println!("{} patterns, {} measurements", cfg.l(), cfg.m());

    let r = solve_tls(&y, &a, &SolverConfig { threshold: 1e-15, ..SolverConfig::tls() }, None)?;
    println!("TLS: {} iterations, rel.dist {:.3e}", r.iterations, rel_dist(&x, &r.x_hat)?);
    Ok(())
}
