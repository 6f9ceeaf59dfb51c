//! Total least squares phase retrieval.
//!
//! Recovers a signal `x` from intensities `y_m ≈ |⟨a_m, x⟩|²` when both the
//! intensities and the sensing vectors `a_m` carry errors. The TLS solver
//! alternates a closed-form correction of every sensing vector with a
//! Wirtinger gradient step on `x`; a plain least-squares (Wirtinger flow)
//! solver is provided as the baseline. First-order error predictors, the
//! Gaussian and coded-diffraction measurement models, and a seeded
//! experiment harness round out the crate.
//!
//! ```
//! use tlspr::{gaussian_ensemble, solve_tls, synthesize_measurements, rel_dist};
//! use tlspr::{complex_gaussian_vector, Rng, SolverConfig};
//!
//! let mut rng = Rng::new(7);
//! let x = complex_gaussian_vector(&mut rng, 16, 1.0).unwrap();
//! let a = gaussian_ensemble(&mut rng, 16, 128, false).unwrap();
//! let y = synthesize_measurements(&a, &x).unwrap();
//! let cfg = SolverConfig { threshold: 1e-15, ..SolverConfig::tls() };
//! let out = solve_tls(&y, &a, &cfg, None).unwrap();
//! assert!(rel_dist(&x, &out.x_hat).unwrap() < 1e-4);
//! ```

// `!(v > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod correction;
pub mod cubic;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod models;
pub mod noise;
pub mod rng;
pub mod selftest;
pub mod solvers;
pub mod types;

pub use correction::{correct_sensing_vector, reconstruct_from_nu, CorrectionParams, CorrectionResult};
pub use cubic::{all_roots, positive_real_roots, CubicCoefficients};
pub use error::{Error, Result};
pub use io::Persist;
pub use metrics::{dist, recon_snr_db, rel_corr, rel_dist, TrialMetrics};
pub use models::{cdp_ensemble, gaussian_ensemble, synthesize_measurements, CdpConfig};
pub use noise::{inject_errors, inject_gaussian, inject_handcrafted, NoiseModel, NoiseSpec};
pub use rng::{complex_gaussian_vector, real_gaussian_vector, Rng, Stream};
pub use solvers::{
    correct_all, ls_gradient, objective_ls, objective_tls, project_real_binary, solve, solve_ls, solve_tls,
    spectral_init, Mode, Projection, SolveResult, SolverConfig,
};
pub use types::{inner, CVector, MeasurementSet, ModelTag, NoiseTag, SensingEnsemble};
