//! A small sweep comparing TLS and LS as the sensing-vector error grows.

use tlspr::experiment::{run_sweep, ExperimentConfig, NoiseConfig};
use tlspr::{NoiseModel, Result};

fn main() -> Result<()> {
    let cfg = ExperimentConfig {
        seed: 11,
        n: 32,
        ratios: vec![8.0],
        trials: 10,
        noise: NoiseConfig {
            model: NoiseModel::Gaussian,
            measurement_snr_db: vec![20.0],
            sensing_snr_db: vec![10.0, 20.0, 30.0],
            paired: false,
        },
        ..Default::default()
    };
    let out = run_sweep(&cfg)?;
    println!("sensing SNR   TLS      LS       LS − TLS");
    for s in &out.summary {
        println!(
            "{:>8} dB   {:.4}   {:.4}   {:+.4}",
            s.sensing_snr_db, s.mean_rel_dist_tls, s.mean_rel_dist_ls, s.mean_diff
        );
    }
    Ok(())
}
