//! First-order reconstruction errors against the errors of actual solves,
//! in real mode.

use tlspr::analysis::{first_order_errors, ErrorAnalysisInputs};
use tlspr::experiment::{compare_solvers, trial_data, ExperimentConfig, NoiseConfig};
use tlspr::{rel_dist, NoiseModel, Result};

fn main() -> Result<()> {
    let mut cfg = ExperimentConfig {
        seed: 21,
        n: 50,
        ratios: vec![8.0],
        real_mode: true,
        noise: NoiseConfig {
            model: NoiseModel::Gaussian,
            measurement_snr_db: vec![70.0],
            sensing_snr_db: vec![35.0],
            paired: false,
        },
        ..Default::default()
    };
    cfg.solver.threshold = 1e-15;
    for trial in 0..3 {
        let data = trial_data(&cfg, trial)?;
        let solved = compare_solvers(&cfg, &data)?;
        let ratio = solved.tls.weights.map(|w| w.ratio()).unwrap_or(1.0);
        let inputs =
            ErrorAnalysisInputs::from_perturbed(&data.a_clean, &data.a, &data.y_clean, &data.y, &data.x_sharp, ratio)?;
        let p = first_order_errors(&inputs)?;
        println!(
            "trial {trial}: TLS predicted {:.4e} actual {:.4e} | LS predicted {:.4e} actual {:.4e}",
            p.rel_e_tls,
            rel_dist(&data.x_sharp, &solved.tls.x_hat)?,
            p.rel_e_ls,
            rel_dist(&data.x_sharp, &solved.ls.x_hat)?
        );
    }
    Ok(())
}
