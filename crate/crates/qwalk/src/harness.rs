//! Scheduled-walk experiments: single runs, head-to-head comparisons,
//! and seeded batches over random initial coin states.
//!
//! Batches parallelize over samples. Each sample draws from its own
//! counter-indexed ChaCha stream of the batch seed, so results do not
//! depend on thread count or completion order, and aggregation happens
//! in sample order after the parallel section.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::io;
use crate::metrics::{participation_ratio, schmidt_norm, EntanglementCost};
use crate::optimize::{basin_hop, OptResult, OptimizerConfig};
use crate::walk::{BlochAngles, CoinParams, CoinSchedule, WalkState};

/// A schedule that applies the balanced coin at every step.
pub fn hadamard_schedule(n_steps: usize) -> Result<CoinSchedule> {
    CoinSchedule::new(vec![CoinParams::hadamard(); n_steps.max(usize::from(n_steps == 0))])
        .and_then(|s| {
            if n_steps == 0 {
                Err(Error::InvalidArgument("walk needs at least one step".into()))
            } else {
                Ok(s)
            }
        })
}

/// A schedule of independent uniform draws: ξ, ζ ~ U[0, 2π), θ ~ U[0, π/2).
pub fn random_schedule(n_steps: usize, seed: u64) -> Result<CoinSchedule> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("walk needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CoinSchedule::new(
        (0..n_steps)
            .map(|_| {
                CoinParams::new(
                    rng.random_range(0.0..TAU),
                    rng.random_range(0.0..TAU),
                    rng.random_range(0.0..FRAC_PI_2),
                )
            })
            .collect(),
    )
}

/// Initial coin state with θ ~ U[0, π], φ ~ U[0, 2π]: uniform over the
/// angle rectangle, which concentrates weight near the Bloch poles.
pub fn sample_initial_state<R: Rng + ?Sized>(rng: &mut R) -> BlochAngles {
    let theta = rng.random_range(0.0..=PI);
    let phi = rng.random_range(0.0..=TAU);
    BlochAngles::new(theta, phi).expect("sampled angles are in range")
}

/// Initial coin state uniform over the Bloch sphere (cos θ ~ U[−1, 1]).
pub fn sample_initial_state_haar<R: Rng + ?Sized>(rng: &mut R) -> BlochAngles {
    let theta = (1.0 - 2.0 * rng.random::<f64>()).acos();
    let phi = rng.random_range(0.0..=TAU);
    BlochAngles::new(theta, phi).expect("sampled angles are in range")
}

/// Random flat coin parameters, one canonical-domain triple per step.
pub fn random_flat_params<R: Rng + ?Sized>(n_steps: usize, rng: &mut R) -> Vec<f64> {
    let mut params = Vec::with_capacity(3 * n_steps);
    for _ in 0..n_steps {
        params.push(rng.random_range(0.0..TAU));
        params.push(rng.random_range(0.0..TAU));
        params.push(rng.random_range(0.0..FRAC_PI_2));
    }
    params
}

/// Step-resolved view of one scheduled walk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkReport {
    pub schedule: CoinSchedule,
    /// Schmidt norm after 0, 1, …, N steps.
    pub schmidt_per_step: Vec<f64>,
    /// Basis-state densities in λ order, one row per step (N+1 rows).
    pub density_per_step: Vec<Vec<f64>>,
}

/// Runs `schedule` from the walker-at-origin state and records densities
/// and entanglement after every step.
pub fn walk_report(initial: BlochAngles, schedule: &CoinSchedule) -> Result<WalkReport> {
    let start = WalkState::initial(initial, schedule.len());
    let trajectory = start.evolve_trajectory(schedule)?;
    let mut schmidt_per_step = Vec::with_capacity(trajectory.len());
    let mut density_per_step = Vec::with_capacity(trajectory.len());
    for state in &trajectory {
        schmidt_per_step.push(schmidt_norm(state)?);
        density_per_step.push(state.densities());
    }
    Ok(WalkReport { schedule: schedule.clone(), schmidt_per_step, density_per_step })
}

/// The three walks of a comparison experiment, same initial state and
/// step count: the balanced coin, one random schedule, and a schedule
/// synthesized by basin hopping.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonResult {
    pub n_steps: usize,
    pub hadamard: WalkReport,
    pub random: WalkReport,
    pub optimized: WalkReport,
    pub optimizer: OptResult,
}

/// Runs the three-way comparison. The random schedule, the optimizer
/// start point, and the hopping itself are all derived from
/// `opt_config.rng_seed`, so equal inputs give equal outputs.
pub fn run_comparison(
    n_steps: usize,
    initial: BlochAngles,
    opt_config: &OptimizerConfig,
) -> Result<ComparisonResult> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("walk needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opt_config.rng_seed);
    let hadamard = walk_report(initial, &hadamard_schedule(n_steps)?)?;
    let random = walk_report(initial, &random_schedule(n_steps, rng.next_u64())?)?;

    let cost = EntanglementCost::new(initial, n_steps, 0.0)?;
    let start = random_flat_params(n_steps, &mut rng);
    let optimizer = basin_hop(|w| cost.cost(w), &start, opt_config)?;
    let optimized = walk_report(initial, &CoinSchedule::from_flat(&optimizer.best_params)?)?;

    Ok(ComparisonResult { n_steps, hadamard, random, optimized, optimizer })
}

/// Batch experiment settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_steps: usize,
    /// Number of random initial coin states to optimize.
    pub n_samples: usize,
    /// Weight of the participation-ratio term in the objective.
    pub beta: f64,
    /// A run is selected when its final density on the outermost sites
    /// ±N exceeds this value.
    pub selection_threshold: f64,
    /// Sample initial states uniformly on the Bloch sphere instead of
    /// uniformly in the (θ, φ) rectangle.
    pub haar_uniform: bool,
    pub rng_seed: u64,
    /// When set, per-run records and batch statistics are written here.
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_steps: 10,
            n_samples: 200,
            beta: 0.0,
            selection_threshold: 1e-4,
            haar_uniform: false,
            rng_seed: 0,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::InvalidArgument("walk needs at least one step".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("batch needs at least one sample".into()));
        }
        if self.beta.is_nan() || self.beta < 0.0 || self.beta.is_infinite() {
            return Err(Error::InvalidArgument(format!(
                "spread weight must be finite and non-negative, got {}",
                self.beta
            )));
        }
        if self.selection_threshold.is_nan() || self.selection_threshold < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "selection threshold must be non-negative, got {}",
                self.selection_threshold
            )));
        }
        Ok(())
    }
}

/// Everything recorded about one optimized sample of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    /// Initial coin state drawn for this sample.
    pub theta: f64,
    pub phi: f64,
    pub best_cost: f64,
    pub best_params: Vec<f64>,
    pub n_cost_evals: usize,
    pub final_schmidt_norm: f64,
    /// Schmidt norm after 0..=N steps of the optimized schedule.
    pub schmidt_per_step: Vec<f64>,
    /// Final amplitudes as (re, im) pairs in λ order.
    pub final_state: Vec<[f64; 2]>,
    /// Final density summed over the outermost sites ±N.
    pub edge_density: f64,
    pub selected: bool,
}

/// A sample whose optimization failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub index: usize,
    pub message: String,
}

/// Aggregates of a batch. Means run over selected samples only and are
/// absent when nothing was selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub n_total: usize,
    pub n_selected: usize,
    pub mean_schmidt_per_step: Option<Vec<f64>>,
    /// Mean final density in λ order.
    pub mean_final_density: Option<Vec<f64>>,
    /// Final Schmidt norm of every successful run, in sample order.
    pub final_schmidt_norms: Vec<f64>,
    pub failures: Vec<FailedRun>,
}

fn run_one_sample(
    index: usize,
    config: &ExperimentConfig,
    opt_config: &OptimizerConfig,
) -> Result<RunRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    // Stream 0 is ChaCha's default; give every sample its own stream above it.
    rng.set_stream(index as u64 + 1);
    let angles = if config.haar_uniform {
        sample_initial_state_haar(&mut rng)
    } else {
        sample_initial_state(&mut rng)
    };
    let start = random_flat_params(config.n_steps, &mut rng);
    let sample_opt = OptimizerConfig { rng_seed: rng.next_u64(), ..opt_config.clone() };

    let cost = EntanglementCost::new(angles, config.n_steps, config.beta)?;
    let result = basin_hop(|w| cost.cost(w), &start, &sample_opt)?;

    let schedule = CoinSchedule::from_flat(&result.best_params)?;
    let trajectory = WalkState::initial(angles, config.n_steps).evolve_trajectory(&schedule)?;
    let schmidt_per_step = trajectory
        .iter()
        .map(schmidt_norm)
        .collect::<Result<Vec<f64>>>()?;
    let final_state = trajectory.last().expect("trajectory is never empty");

    let edge = config.n_steps as i32;
    let edge_density = final_state.site_density(-edge) + final_state.site_density(edge);
    Ok(RunRecord {
        index,
        theta: angles.theta(),
        phi: angles.phi(),
        best_cost: result.best_cost,
        best_params: result.best_params,
        n_cost_evals: result.n_cost_evals,
        final_schmidt_norm: *schmidt_per_step.last().expect("one entry per step"),
        schmidt_per_step,
        final_state: final_state
            .amplitudes()
            .iter()
            .map(|a| [a.re, a.im])
            .collect(),
        edge_density,
        selected: edge_density > config.selection_threshold,
    })
}

/// Optimizes a schedule for each of `n_samples` random initial states and
/// aggregates the selected runs. Individual failures are tolerated up to
/// 1% of the batch; beyond that the batch errors out.
///
/// With `output_dir` set, writes `runs.jsonl` (one [`RunRecord`] per
/// line) and `batch-stats.json` there.
pub fn run_batch(config: &ExperimentConfig, opt_config: &OptimizerConfig) -> Result<BatchStats> {
    config.validate()?;
    opt_config.validate()?;

    let outcomes: Vec<std::result::Result<RunRecord, FailedRun>> = (0..config.n_samples)
        .into_par_iter()
        .map(|i| {
            run_one_sample(i, config, opt_config).map_err(|e| FailedRun {
                index: i,
                message: e.to_string(),
            })
        })
        .collect();

    let mut records = Vec::with_capacity(config.n_samples);
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(record) => records.push(record),
            Err(failure) => failures.push(failure),
        }
    }
    if failures.len() * 100 > config.n_samples {
        return Err(Error::BatchFailed(format!(
            "{} of {} samples failed; first: {}",
            failures.len(),
            config.n_samples,
            failures[0].message
        )));
    }

    let selected: Vec<&RunRecord> = records.iter().filter(|r| r.selected).collect();
    let (mean_schmidt_per_step, mean_final_density) = if selected.is_empty() {
        (None, None)
    } else {
        let n = selected.len() as f64;
        let mut mean_s = vec![0.0; config.n_steps + 1];
        let mut mean_d = vec![0.0; 2 * (2 * config.n_steps + 1)];
        for record in &selected {
            for (acc, s) in mean_s.iter_mut().zip(&record.schmidt_per_step) {
                *acc += s;
            }
            for (acc, amp) in mean_d.iter_mut().zip(&record.final_state) {
                *acc += amp[0] * amp[0] + amp[1] * amp[1];
            }
        }
        mean_s.iter_mut().for_each(|x| *x /= n);
        mean_d.iter_mut().for_each(|x| *x /= n);
        (Some(mean_s), Some(mean_d))
    };

    let stats = BatchStats {
        n_total: config.n_samples,
        n_selected: selected.len(),
        mean_schmidt_per_step,
        mean_final_density,
        final_schmidt_norms: records.iter().map(|r| r.final_schmidt_norm).collect(),
        failures,
    };

    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        io::write_json(
            dir.join("manifest.json"),
            &serde_json::json!({
                "version": env!("CARGO_PKG_VERSION"),
                "experiment": config,
                "optimizer": opt_config,
            }),
        )?;
        io::write_jsonl(dir.join("runs.jsonl"), &records)?;
        io::write_json(dir.join("batch-stats.json"), &stats)?;
        if let Some(mean_s) = &stats.mean_schmidt_per_step {
            io::write_schmidt_csv(dir.join("mean-schmidt.csv"), mean_s)?;
        }
        if let Some(mean_d) = &stats.mean_final_density {
            io::write_lambda_density_csv(dir.join("mean-density.csv"), config.n_steps, mean_d)?;
        }
    }
    Ok(stats)
}

/// Result of a spread-weighted synthesis run: entanglement and spatial
/// delocalization optimized together.
#[derive(Debug, Clone, Serialize)]
pub struct SpreadResult {
    pub optimizer: OptResult,
    pub schedule: CoinSchedule,
    pub schmidt_per_step: Vec<f64>,
    /// Densities in λ order, one row per step.
    pub density_per_step: Vec<Vec<f64>>,
    /// Final-step densities in λ order.
    pub final_density: Vec<f64>,
    pub final_schmidt_norm: f64,
    pub final_participation_ratio: f64,
}

/// Optimizes `−(S + β·PR)` for β > 0 and reports the synthesized walk.
/// The optimizer start point derives from `opt_config.rng_seed`.
pub fn run_spread(
    n_steps: usize,
    beta: f64,
    initial: BlochAngles,
    opt_config: &OptimizerConfig,
) -> Result<SpreadResult> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spread synthesis needs a positive spread weight, got {beta}"
        )));
    }
    let cost = EntanglementCost::new(initial, n_steps, beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opt_config.rng_seed);
    let start = random_flat_params(n_steps, &mut rng);
    let optimizer = basin_hop(|w| cost.cost(w), &start, opt_config)?;

    let schedule = CoinSchedule::from_flat(&optimizer.best_params)?;
    let report = walk_report(initial, &schedule)?;
    let final_state = cost.final_state(&optimizer.best_params)?;
    Ok(SpreadResult {
        optimizer,
        schedule,
        final_schmidt_norm: *report
            .schmidt_per_step
            .last()
            .expect("trajectory is never empty"),
        final_participation_ratio: participation_ratio(&final_state),
        final_density: final_state.densities(),
        schmidt_per_step: report.schmidt_per_step,
        density_per_step: report.density_per_step,
    })
}
