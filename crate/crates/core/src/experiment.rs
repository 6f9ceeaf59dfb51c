//! Seeded experiment harness: sweeps over oversampling ratios and SNR
//! combinations, first-order error studies, and single solves on files.
//!
//! # Configuration
//!
//! Experiments are described by a TOML file. Every key is optional.
//!
//! ```toml
//! seed = 7                 # base seed; trial t of combination c uses seed + c·trials + t
//! n = 64                   # signal dimension
//! ratios = [4, 8, 16]      # M/N for gaussian, pattern count L for cdp
//! model = "gaussian"       # or "cdp"
//! real_mode = false        # real signals, sensing vectors and errors
//! trials = 50
//! analysis_mode = "none"   # none | first_order | expected | ml_sweep
//! output_path = "out.csv"  # .json selects the JSON writer
//! workers = 4              # worker threads; default is all cores
//!
//! [noise]
//! model = "gaussian"             # or "handcrafted"
//! measurement_snr_db = [20.0]    # inf leaves the measurements clean
//! sensing_snr_db = [10.0, 30.0]
//! paired = false                 # true zips the two lists instead of crossing them
//!
//! [solver]
//! lambda_a_dag = 1.0             # λ_a = λ_a†/N
//! lambda_y_dag = 1.0             # λ_y = λ_y†/‖x⁰‖⁴
//! tls_step_over_lambda_a = 0.5   # TLS step μ = value/λ_a
//! ls_step = 0.02
//! threshold = 1e-6
//! max_iters = 2500
//! power_iters = 50
//! projection = "none"            # or "real_binary"
//!
//! [analysis]
//! lambda_ratio = 1.0             # λ_y/λ_a used by first_order and expected
//! ```
//!
//! # Sweep output
//!
//! CSV files start with the line `# tlspr-sweep schema 1`, then a header:
//!
//! `trial_index,ratio,meas_snr_db,sensing_snr_db,rel_dist_tls,rel_dist_ls,rel_corr,iterations_tls,iterations_ls,converged_tls,converged_ls,wall_time_ms`
//!
//! Rows are ordered by combination (ratio outermost, then SNR pair) and
//! trial index. Per-combination means and standard deviations go to a
//! sibling file with `.summary.csv` replacing the extension. `wall_time_ms`
//! is the only column that varies between identical runs.
//!
//! # Analysis output
//!
//! `# tlspr-analysis schema 1`, then
//! `trial_index,ratio,meas_snr_db,sensing_snr_db,rel_e_tls,rel_e_ls,expected_sq_tls,expected_sq_ls,optimal_ratio,argmin_ratio`,
//! with the columns a mode does not produce left empty.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{expected_squared_errors, first_order_errors, ml_ratio_sweep, variances_from_snr, ErrorAnalysisInputs};
use crate::error::{Error, Result};
use crate::io::Persist;
use crate::metrics::{rel_corr, rel_dist};
use crate::models::{cdp_ensemble, gaussian_ensemble, synthesize_measurements, CdpConfig};
use crate::noise::{inject_errors, NoiseModel, NoiseSpec};
use crate::rng::{complex_gaussian_vector, real_gaussian_vector, Rng, Stream, GENERATOR};
use crate::solvers::{initial_point, solve_ls, solve_tls, Projection, SolveResult, SolverConfig};
use crate::types::{CVector, MeasurementSet, SensingEnsemble};

pub const SWEEP_SCHEMA: &str = "# tlspr-sweep schema 1";
pub const ANALYSIS_SCHEMA: &str = "# tlspr-analysis schema 1";
pub const SUMMARY_SCHEMA: &str = "# tlspr-summary schema 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Gaussian,
    Cdp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMode {
    #[default]
    None,
    FirstOrder,
    Expected,
    MlSweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub model: NoiseModel,
    pub measurement_snr_db: Vec<f64>,
    pub sensing_snr_db: Vec<f64>,
    pub paired: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            model: NoiseModel::Gaussian,
            measurement_snr_db: vec![f64::INFINITY],
            sensing_snr_db: vec![f64::INFINITY],
            paired: false,
        }
    }
}

impl NoiseConfig {
    /// `(measurement, sensing)` SNR pairs in output order.
    pub fn combinations(&self) -> Result<Vec<(f64, f64)>> {
        if self.measurement_snr_db.is_empty() || self.sensing_snr_db.is_empty() {
            return Err(Error::Config("SNR lists must not be empty".into()));
        }
        if self.paired {
            if self.measurement_snr_db.len() != self.sensing_snr_db.len() {
                return Err(Error::Config("paired SNR lists must have equal length".into()));
            }
            return Ok(self
                .measurement_snr_db
                .iter()
                .copied()
                .zip(self.sensing_snr_db.iter().copied())
                .collect());
        }
        Ok(self
            .measurement_snr_db
            .iter()
            .flat_map(|&m| self.sensing_snr_db.iter().map(move |&s| (m, s)))
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    pub lambda_a_dag: f64,
    pub lambda_y_dag: f64,
    /// TLS step as a multiple of `1/λ_a`; `None` keeps the solver default.
    pub tls_step_over_lambda_a: Option<f64>,
    pub ls_step: Option<f64>,
    pub threshold: f64,
    pub max_iters: usize,
    pub power_iters: usize,
    pub projection: Projection,
}

impl Default for SolverOverrides {
    fn default() -> Self {
        let base = SolverConfig::tls();
        SolverOverrides {
            lambda_a_dag: base.lambda_a_dag,
            lambda_y_dag: base.lambda_y_dag,
            tls_step_over_lambda_a: None,
            ls_step: None,
            threshold: base.threshold,
            max_iters: base.max_iters,
            power_iters: base.power_iters,
            projection: base.projection,
        }
    }
}

impl SolverOverrides {
    /// `(TLS, LS)` solver configurations for dimension `n`.
    pub fn configs(&self, n: usize, seed: u64) -> (SolverConfig, SolverConfig) {
        let ls = SolverConfig {
            lambda_a_dag: self.lambda_a_dag,
            lambda_y_dag: self.lambda_y_dag,
            step_size: self.ls_step,
            threshold: self.threshold,
            max_iters: self.max_iters,
            power_iters: self.power_iters,
            projection: self.projection,
            seed,
            ..SolverConfig::ls()
        };
        let tls = SolverConfig {
            step_size: self.tls_step_over_lambda_a.map(|c| c * n as f64 / self.lambda_a_dag),
            ..ls.clone().with_mode(crate::solvers::Mode::Tls)
        };
        (tls, ls)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    pub lambda_ratio: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { lambda_ratio: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n: usize,
    pub ratios: Vec<f64>,
    pub model: ModelKind,
    pub real_mode: bool,
    pub noise: NoiseConfig,
    pub trials: usize,
    pub solver: SolverOverrides,
    pub analysis_mode: AnalysisMode,
    pub analysis: AnalysisOptions,
    pub output_path: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            n: 64,
            ratios: vec![8.0],
            model: ModelKind::Gaussian,
            real_mode: false,
            noise: NoiseConfig::default(),
            trials: 50,
            solver: SolverOverrides::default(),
            analysis_mode: AnalysisMode::None,
            analysis: AnalysisOptions::default(),
            output_path: None,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.ratios.is_empty() {
            return Err(Error::Config("ratios must not be empty".into()));
        }
        for &r in &self.ratios {
            self.measurement_count(r)?;
        }
        if self.model == ModelKind::Cdp && self.real_mode {
            return Err(Error::Config("coded diffraction patterns are complex; real_mode is unsupported".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.noise.combinations()?;
        for &v in self.noise.measurement_snr_db.iter().chain(&self.noise.sensing_snr_db) {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::Config(format!("invalid SNR {v}")));
            }
        }
        let (tls, ls) = self.solver.configs(self.n, self.seed);
        tls.validate().and(ls.validate()).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// `M` for an entry of `ratios`.
    pub fn measurement_count(&self, ratio: f64) -> Result<usize> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::Config(format!("ratio must be positive, got {ratio}")));
        }
        if self.model == ModelKind::Cdp && ratio.fract() != 0.0 {
            return Err(Error::Config(format!("cdp pattern count must be an integer, got {ratio}")));
        }
        let m = ratio * self.n as f64;
        if (m - m.round()).abs() > 1e-9 {
            return Err(Error::Config(format!("ratio {ratio} gives a fractional measurement count for n={}", self.n)));
        }
        Ok(m.round() as usize)
    }

    fn combinations(&self) -> Result<Vec<Combination>> {
        let snrs = self.noise.combinations()?;
        Ok(self
            .ratios
            .iter()
            .flat_map(|&ratio| snrs.iter().map(move |&(meas, sens)| (ratio, meas, sens)))
            .enumerate()
            .map(|(index, (ratio, meas_snr_db, sensing_snr_db))| Combination {
                index,
                ratio,
                meas_snr_db,
                sensing_snr_db,
            })
            .collect())
    }

    fn noise_spec(&self, combo: &Combination) -> Result<NoiseSpec> {
        NoiseSpec::new(
            Some(combo.meas_snr_db),
            Some(combo.sensing_snr_db),
            self.noise.model,
            self.real_mode,
        )
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            b = b.num_threads(w);
        }
        b.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
    }
}

#[derive(Clone, Copy, Debug)]
struct Combination {
    index: usize,
    ratio: f64,
    meas_snr_db: f64,
    sensing_snr_db: f64,
}

/// Clean and perturbed data of one trial.
#[derive(Clone, Debug)]
pub struct TrialData {
    pub x_sharp: CVector,
    pub a_clean: SensingEnsemble,
    pub y_clean: MeasurementSet,
    pub a: SensingEnsemble,
    pub y: MeasurementSet,
    pub seed: u64,
}

fn trial_seed(cfg: &ExperimentConfig, combo: usize, trial: usize) -> u64 {
    cfg.seed.wrapping_add((combo * cfg.trials + trial) as u64)
}

fn generate(cfg: &ExperimentConfig, ratio: f64, spec: &NoiseSpec, seed: u64) -> Result<TrialData> {
    let n = cfg.n;
    let mut signal = Rng::with_stream(seed, Stream::Signal);
    let x_sharp = if cfg.real_mode {
        real_gaussian_vector(&mut signal, n, 1.0)?
    } else {
        complex_gaussian_vector(&mut signal, n, 1.0)?
    };
    let mut ens = Rng::with_stream(seed, Stream::Ensemble);
    let a_clean = match cfg.model {
        ModelKind::Gaussian => gaussian_ensemble(&mut ens, n, cfg.measurement_count(ratio)?, cfg.real_mode)?,
        ModelKind::Cdp => cdp_ensemble(&mut ens, &CdpConfig::new(n, ratio as usize)?)?,
    };
    let y_clean = synthesize_measurements(&a_clean, &x_sharp)?;
    let mut noise = Rng::with_stream(seed, Stream::Noise);
    let (y, a) = inject_errors(&mut noise, &y_clean, &a_clean, Some(&x_sharp), spec)?;
    Ok(TrialData {
        x_sharp,
        a_clean,
        y_clean,
        a,
        y,
        seed,
    })
}

/// Data of trial `trial` in the first combination of `cfg`.
pub fn trial_data(cfg: &ExperimentConfig, trial: usize) -> Result<TrialData> {
    cfg.validate()?;
    let combo = cfg.combinations()?[0];
    generate(cfg, combo.ratio, &cfg.noise_spec(&combo)?, trial_seed(cfg, 0, trial))
}

/// One row of sweep output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub ratio: f64,
    pub meas_snr_db: f64,
    pub sensing_snr_db: f64,
    pub rel_dist_tls: f64,
    pub rel_dist_ls: f64,
    pub rel_corr: Option<f64>,
    pub iterations_tls: usize,
    pub iterations_ls: usize,
    pub converged_tls: bool,
    pub converged_ls: bool,
    pub wall_time_ms: f64,
}

/// Mean and sample standard deviation over the trials of a combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationSummary {
    pub ratio: f64,
    pub meas_snr_db: f64,
    pub sensing_snr_db: f64,
    pub trials: usize,
    pub mean_rel_dist_tls: f64,
    pub std_rel_dist_tls: f64,
    pub mean_rel_dist_ls: f64,
    pub std_rel_dist_ls: f64,
    /// Mean and spread of `rel_dist_ls − rel_dist_tls`.
    pub mean_diff: f64,
    pub std_diff: f64,
    pub mean_rel_corr: Option<f64>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

impl CombinationSummary {
    fn from_records(rows: &[TrialRecord]) -> Self {
        let col = |f: fn(&TrialRecord) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        let (mean_rel_dist_tls, std_rel_dist_tls) = mean_std(&col(|r| r.rel_dist_tls));
        let (mean_rel_dist_ls, std_rel_dist_ls) = mean_std(&col(|r| r.rel_dist_ls));
        let (mean_diff, std_diff) = mean_std(&col(|r| r.rel_dist_ls - r.rel_dist_tls));
        let corr: Option<Vec<f64>> = rows.iter().map(|r| r.rel_corr).collect();
        CombinationSummary {
            ratio: rows[0].ratio,
            meas_snr_db: rows[0].meas_snr_db,
            sensing_snr_db: rows[0].sensing_snr_db,
            trials: rows.len(),
            mean_rel_dist_tls,
            std_rel_dist_tls,
            mean_rel_dist_ls,
            std_rel_dist_ls,
            mean_diff,
            std_diff,
            mean_rel_corr: corr.map(|c| mean_std(&c).0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub generator: String,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<CombinationSummary>,
}

/// Both solvers from the shared initialisation on one trial's data.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub tls: SolveResult,
    pub ls: SolveResult,
}

pub fn compare_solvers(cfg: &ExperimentConfig, data: &TrialData) -> Result<Comparison> {
    let (tls_cfg, ls_cfg) = cfg.solver.configs(cfg.n, data.seed);
    let x0 = initial_point(&data.y, &data.a, &tls_cfg, None)?;
    Ok(Comparison {
        tls: solve_tls(&data.y, &data.a, &tls_cfg, Some(&x0))?,
        ls: solve_ls(&data.y, &data.a, &ls_cfg, Some(&x0))?,
    })
}

fn run_trial(cfg: &ExperimentConfig, combo: &Combination, trial: usize) -> Result<TrialRecord> {
    let started = Instant::now();
    let data = generate(cfg, combo.ratio, &cfg.noise_spec(combo)?, trial_seed(cfg, combo.index, trial))?;
    let cmp = compare_solvers(cfg, &data)?;
    let corr = match &cmp.tls.corrected_ensemble {
        Some(c) => Some(rel_corr(&data.a_clean, &data.x_sharp, c, &cmp.tls.x_hat)?),
        None => None,
    };
    Ok(TrialRecord {
        trial_index: trial,
        ratio: combo.ratio,
        meas_snr_db: combo.meas_snr_db,
        sensing_snr_db: combo.sensing_snr_db,
        rel_dist_tls: rel_dist(&data.x_sharp, &cmp.tls.x_hat)?,
        rel_dist_ls: rel_dist(&data.x_sharp, &cmp.ls.x_hat)?,
        rel_corr: corr,
        iterations_tls: cmp.tls.iterations,
        iterations_ls: cmp.ls.iterations,
        converged_tls: cmp.tls.converged,
        converged_ls: cmp.ls.converged,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Every (ratio, SNR pair, trial) with fresh data, both solvers from the
/// same starting point.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let combos = cfg.combinations()?;
    let jobs: Vec<(Combination, usize)> = combos
        .iter()
        .flat_map(|c| (0..cfg.trials).map(move |t| (*c, t)))
        .collect();
    let records = cfg.pool()?.install(|| {
        jobs.par_iter()
            .map(|(c, t)| run_trial(cfg, c, *t))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = records.chunks(cfg.trials).map(CombinationSummary::from_records).collect();
    Ok(SweepOutput {
        generator: GENERATOR.into(),
        config: cfg.clone(),
        records,
        summary,
    })
}

/// One row of error-analysis output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub trial_index: usize,
    pub ratio: f64,
    pub meas_snr_db: f64,
    pub sensing_snr_db: f64,
    pub rel_e_tls: Option<f64>,
    pub rel_e_ls: Option<f64>,
    pub expected_sq_tls: Option<f64>,
    pub expected_sq_ls: Option<f64>,
    pub optimal_ratio: Option<f64>,
    pub argmin_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOutput {
    pub generator: String,
    pub config: ExperimentConfig,
    pub records: Vec<AnalysisRecord>,
}

fn analysis_trial(cfg: &ExperimentConfig, combo: &Combination, trial: usize) -> Result<AnalysisRecord> {
    let data = generate(cfg, combo.ratio, &cfg.noise_spec(combo)?, trial_seed(cfg, combo.index, trial))?;
    let mut rec = AnalysisRecord {
        trial_index: trial,
        ratio: combo.ratio,
        meas_snr_db: combo.meas_snr_db,
        sensing_snr_db: combo.sensing_snr_db,
        rel_e_tls: None,
        rel_e_ls: None,
        expected_sq_tls: None,
        expected_sq_ls: None,
        optimal_ratio: None,
        argmin_ratio: None,
    };
    let ratio = cfg.analysis.lambda_ratio;
    match cfg.analysis_mode {
        AnalysisMode::None => unreachable!("checked by run_error_analysis"),
        AnalysisMode::FirstOrder => {
            let inputs =
                ErrorAnalysisInputs::from_perturbed(&data.a_clean, &data.a, &data.y_clean, &data.y, &data.x_sharp, ratio)?;
            let p = first_order_errors(&inputs)?;
            rec.rel_e_tls = Some(p.rel_e_tls);
            rec.rel_e_ls = Some(p.rel_e_ls);
        }
        AnalysisMode::Expected => {
            let (sd, se) = variances_from_snr(&data.a_clean, &data.y_clean, combo.sensing_snr_db, combo.meas_snr_db)?;
            let (t, l) = expected_squared_errors(&data.a_clean, &data.y_clean, &data.x_sharp, ratio, sd, se)?;
            rec.expected_sq_tls = Some(t);
            rec.expected_sq_ls = Some(l);
        }
        AnalysisMode::MlSweep => {
            let (sd, se) = variances_from_snr(&data.a_clean, &data.y_clean, combo.sensing_snr_db, combo.meas_snr_db)?;
            let sweep = ml_ratio_sweep(&data.a_clean, &data.y_clean, &data.x_sharp, sd, se)?;
            rec.optimal_ratio = Some(sweep.optimal_ratio);
            rec.argmin_ratio = Some(sweep.argmin_ratio);
        }
    }
    Ok(rec)
}

/// First-order error study over the configured grid. Needs `real_mode`.
pub fn run_error_analysis(cfg: &ExperimentConfig) -> Result<AnalysisOutput> {
    cfg.validate()?;
    if !cfg.real_mode {
        return Err(Error::ComplexInput("experiment config (set real_mode = true)"));
    }
    if cfg.analysis_mode == AnalysisMode::None {
        return Err(Error::Config("analysis_mode is none".into()));
    }
    let combos = cfg.combinations()?;
    let jobs: Vec<(Combination, usize)> = combos
        .iter()
        .flat_map(|c| (0..cfg.trials).map(move |t| (*c, t)))
        .collect();
    let records = cfg.pool()?.install(|| {
        jobs.par_iter()
            .map(|(c, t)| analysis_trial(cfg, c, *t))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(AnalysisOutput {
        generator: GENERATOR.into(),
        config: cfg.clone(),
        records,
    })
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// `out.csv` → `out.summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    path.with_extension("summary.csv")
}

fn write_csv<T: Serialize>(path: &Path, schema: &str, rows: &[T]) -> Result<()> {
    let mut buf = format!("{schema}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    if rows.is_empty() {
        return Err(Error::Empty("output rows"));
    }
    fs::write(path, buf)?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path, schema: &str) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    if first.trim_end() != schema {
        return Err(Error::Malformed(format!("expected schema line {schema:?}, found {first:?}")));
    }
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

impl SweepOutput {
    /// CSV (plus summary file) or, for `.json` paths, one JSON document.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if is_json(path) {
            fs::write(path, serde_json::to_string_pretty(self)?)?;
            return Ok(());
        }
        write_csv(path, SWEEP_SCHEMA, &self.records)?;
        write_csv(&summary_path(path), SUMMARY_SCHEMA, &self.summary)
    }

    pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
        read_csv(path.as_ref(), SWEEP_SCHEMA)
    }
}

impl AnalysisOutput {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if is_json(path) {
            fs::write(path, serde_json::to_string_pretty(self)?)?;
            return Ok(());
        }
        write_csv(path, ANALYSIS_SCHEMA, &self.records)
    }

    pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<AnalysisRecord>> {
        read_csv(path.as_ref(), ANALYSIS_SCHEMA)
    }
}

/// Files written by [`synthesize`].
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedFiles {
    pub signal: PathBuf,
    pub ensemble: PathBuf,
    pub measurements: PathBuf,
    /// Error-free copies, written only when noise was injected.
    pub clean: Option<(PathBuf, PathBuf)>,
}

/// Writes trial 0 of the first combination to `dir`: `signal`, `ensemble`
/// and `measurements` with extension `ext` (`tpr` or `json`).
pub fn synthesize(cfg: &ExperimentConfig, dir: impl AsRef<Path>, ext: &str) -> Result<SynthesizedFiles> {
    if ext != "tpr" && ext != "json" {
        return Err(Error::Config(format!("unknown file format {ext:?}, expected tpr or json")));
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let data = trial_data(cfg, 0)?;
    let file = |stem: &str| dir.join(format!("{stem}.{ext}"));
    let out = SynthesizedFiles {
        signal: file("signal"),
        ensemble: file("ensemble"),
        measurements: file("measurements"),
        clean: (data.a != data.a_clean || data.y != data.y_clean)
            .then(|| (file("ensemble_clean"), file("measurements_clean"))),
    };
    data.x_sharp.save(&out.signal)?;
    data.a.save(&out.ensemble)?;
    data.y.save(&out.measurements)?;
    if let Some((a, y)) = &out.clean {
        data.a_clean.save(a)?;
        data.y_clean.save(y)?;
    }
    Ok(out)
}

/// Settings for [`solve_single`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub mode: crate::solvers::Mode,
    pub seed: u64,
    pub solver: SolverOverrides,
    /// Errors added to the loaded data before solving. Handcrafted errors
    /// need the unknown signal and are refused.
    pub noise: Option<NoiseConfig>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: crate::solvers::Mode::Tls,
            seed: 0,
            solver: SolverOverrides::default(),
            noise: None,
        }
    }
}

impl SolveConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }
}

/// Summary written next to the solution files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: crate::solvers::Mode,
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: Option<f64>,
    pub step_size: f64,
    pub lambda_a: Option<f64>,
    pub lambda_y: Option<f64>,
    /// Present when a ground-truth file was supplied.
    pub rel_dist: Option<f64>,
    pub solution: PathBuf,
    pub corrected_ensemble: Option<PathBuf>,
    pub trace: PathBuf,
}

/// Inputs of [`solve_single`].
#[derive(Clone, Debug)]
pub struct SolveInputs<'a> {
    pub ensemble: &'a Path,
    pub measurements: &'a Path,
    pub truth: Option<&'a Path>,
    pub out_dir: &'a Path,
}

/// Runs one solver on data read from files and writes `solution.tpr`,
/// `corrected_ensemble.tpr` (TLS), `trace.csv` and `report.json` to
/// `out_dir`.
pub fn solve_single(inputs: &SolveInputs<'_>, cfg: &SolveConfig) -> Result<SolveReport> {
    let a = SensingEnsemble::load(inputs.ensemble)?;
    let y = MeasurementSet::load(inputs.measurements)?;
    y.check_against(&a)?;
    let truth = inputs.truth.map(CVector::load).transpose()?;

    let (a, y) = match &cfg.noise {
        None => (a, y),
        Some(noise) => {
            if noise.model == NoiseModel::Handcrafted {
                return Err(Error::Config(
                    "handcrafted errors need the ground-truth signal and cannot be applied to external data".into(),
                ));
            }
            let pairs = noise.combinations()?;
            if pairs.len() != 1 {
                return Err(Error::Config("solve accepts exactly one SNR pair".into()));
            }
            let spec = NoiseSpec::new(Some(pairs[0].0), Some(pairs[0].1), noise.model, a.is_real())?;
            let (y2, a2) = inject_errors(&mut Rng::with_stream(cfg.seed, Stream::Noise), &y, &a, None, &spec)?;
            (a2, y2)
        }
    };

    let (tls_cfg, ls_cfg) = cfg.solver.configs(a.dim(), cfg.seed);
    let result = match cfg.mode {
        crate::solvers::Mode::Tls => solve_tls(&y, &a, &tls_cfg, None)?,
        crate::solvers::Mode::Ls => solve_ls(&y, &a, &ls_cfg, None)?,
    };

    fs::create_dir_all(inputs.out_dir)?;
    let solution = inputs.out_dir.join("solution.tpr");
    result.x_hat.save(&solution)?;
    let corrected_ensemble = match &result.corrected_ensemble {
        Some(c) => {
            let p = inputs.out_dir.join("corrected_ensemble.tpr");
            c.save(&p)?;
            Some(p)
        }
        None => None,
    };
    let trace = inputs.out_dir.join("trace.csv");
    let mut text = String::from("iteration,objective\n");
    for (i, v) in result.objective_trace.iter().enumerate() {
        text.push_str(&format!("{i},{v:e}\n"));
    }
    fs::write(&trace, text)?;

    let report = SolveReport {
        mode: cfg.mode,
        iterations: result.iterations,
        converged: result.converged,
        final_objective: result.objective_trace.last().copied(),
        step_size: result.step_size,
        lambda_a: result.weights.map(|w| w.lambda_a()),
        lambda_y: result.weights.map(|w| w.lambda_y()),
        rel_dist: truth.map(|t| rel_dist(&t, &result.x_hat)).transpose()?,
        solution,
        corrected_ensemble,
        trace,
    };
    fs::write(inputs.out_dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}
