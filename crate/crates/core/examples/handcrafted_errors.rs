//! Errors concentrated on rows with large measurements change which solver
//! wins when only the measurements are perturbed.

use tlspr::experiment::{run_sweep, ExperimentConfig, NoiseConfig};
use tlspr::{NoiseModel, Result};

fn main() -> Result<()> {
    for model in [NoiseModel::Gaussian, NoiseModel::Handcrafted] {
        let mut cfg = ExperimentConfig {
            seed: 31,
            n: 50,
            ratios: vec![8.0],
            trials: 8,
            noise: NoiseConfig {
                model,
                measurement_snr_db: vec![25.0],
                sensing_snr_db: vec![100.0],
                paired: false,
            },
            ..Default::default()
        };
        cfg.solver.tls_step_over_lambda_a = Some(0.2);
        cfg.solver.ls_step = Some(0.02);
        cfg.solver.threshold = 1e-15;
        let s = &run_sweep(&cfg)?.summary[0];
        println!(
            "{model:?}: TLS {:.4}, LS {:.4}, LS − TLS {:+.4}",
            s.mean_rel_dist_tls, s.mean_rel_dist_ls, s.mean_diff
        );
    }
    Ok(())
}
