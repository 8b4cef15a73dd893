//! Command-line runner for coined-walk experiments: single walks,
//! schedule synthesis by basin hopping, batch campaigns over random
//! initial states, spread-weighted synthesis, and intensity-measurement
//! simulation with reconstruction.
//!
//! Every invocation is deterministic under a fixed `--seed`, writes a
//! `manifest.json` capturing the fully resolved configuration, and exits
//! 0 on success, 1 on a runtime failure, and 2 on a usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qwalk::io;
use qwalk::{
    basin_hop, hadamard_schedule, n_vector, participation_ratio, random_flat_params,
    random_schedule, reconstruct, run_batch, run_spread, schmidt_norm, simulate_measurements,
    walk_report, BlochAngles, CoinSchedule, EntanglementCost, ExperimentConfig, OptimizerConfig,
    Shots,
};

#[derive(Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Coined quantum walks: simulate, synthesize entangling schedules, measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every stochastic component of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "qwalk-out")]
    out: PathBuf,

    /// csv writes plottable tables next to the JSON results; json keeps
    /// the same data inside the JSON documents only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one walk and record densities and entanglement after each step.
    Walk(WalkArgs),
    /// Synthesize a coin schedule that maximizes final entanglement.
    Optimize(OptimizeArgs),
    /// Optimize schedules for many random initial states and aggregate.
    Batch(BatchArgs),
    /// Synthesize with the composite entanglement + spread objective.
    Spread(SpreadArgs),
    /// Simulate intensity measurements of a stored state and rebuild its
    /// entanglement from them.
    Tomo(TomoArgs),
}

#[derive(Args)]
struct WalkArgs {
    /// Number of walk steps.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Coin schedule: "hadamard", "random", or "file <path>".
    #[arg(long, num_args = 1..=2, default_value = "hadamard")]
    coin: Vec<String>,
    #[command(flatten)]
    initial: InitialArgs,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Number of walk steps.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Weight of the participation-ratio reward in the objective.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[command(flatten)]
    initial: InitialArgs,
    #[command(flatten)]
    knobs: OptKnobs,
}

#[derive(Args)]
struct BatchArgs {
    /// Number of random initial states to optimize.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Number of walk steps.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Weight of the participation-ratio reward in the objective.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// A run is selected when its final density on the outermost sites
    /// exceeds this value.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    /// Sample initial states uniformly on the Bloch sphere instead of
    /// uniformly in the angle rectangle.
    #[arg(long)]
    haar: bool,
    #[command(flatten)]
    knobs: OptKnobs,
}

#[derive(Args)]
struct SpreadArgs {
    /// Number of walk steps.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Weight of the participation-ratio reward; must be positive.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[command(flatten)]
    initial: InitialArgs,
    #[command(flatten)]
    knobs: OptKnobs,
}

#[derive(Args)]
struct TomoArgs {
    /// State file to measure (CSV with columns site, spin, re, im, density).
    #[arg(long)]
    input: PathBuf,
    /// Shots per analyzer setting; 0 records exact intensities.
    #[arg(long, default_value_t = 0)]
    shots: u64,
}

/// Initial spin state on the Bloch sphere.
#[derive(Args)]
struct InitialArgs {
    /// Polar angle in [0, π]; 0 starts in the L state.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Relative phase in [0, 2π].
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
}

/// Basin-hopping knobs shared by the synthesizing subcommands.
#[derive(Args)]
struct OptKnobs {
    /// Number of hops after the initial descent.
    #[arg(long, default_value_t = 100)]
    hops: usize,
    /// Half-width of the uniform perturbation applied at each hop.
    #[arg(long, default_value_t = 0.5)]
    step_size: f64,
    /// Metropolis temperature; 0 accepts improvements only.
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    /// Iteration cap for each local descent.
    #[arg(long, default_value_t = 200)]
    local_iters: usize,
    /// A descent stops when its improvement falls below this.
    #[arg(long, default_value_t = 1e-8)]
    local_tol: f64,
}

impl InitialArgs {
    fn bloch(&self) -> Result<BlochAngles, Failure> {
        BlochAngles::new(self.theta, self.phi)
            .map_err(|err| Failure::Usage(format!("--theta/--phi: {err}")))
    }
}

impl OptKnobs {
    fn config(&self, rng_seed: u64) -> Result<OptimizerConfig, Failure> {
        let config = OptimizerConfig {
            n_hops: self.hops,
            step_size: self.step_size,
            temperature: self.temperature,
            local_max_iters: self.local_iters,
            local_tolerance: self.local_tol,
            rng_seed,
            ..OptimizerConfig::default()
        };
        config
            .validate()
            .map_err(|err| Failure::Usage(format!("optimizer flags: {err}")))?;
        Ok(config)
    }
}

enum Failure {
    Usage(String),
    Runtime(qwalk::Error),
}

impl From<qwalk::Error> for Failure {
    fn from(err: qwalk::Error) -> Self {
        Failure::Runtime(err)
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

struct Ctx {
    seed: u64,
    out: PathBuf,
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { seed: cli.seed, out: cli.out, format: cli.format };
    let outcome = std::fs::create_dir_all(&ctx.out)
        .map_err(|err| Failure::Runtime(qwalk::Error::from(err)))
        .and_then(|()| match cli.command {
            Command::Walk(args) => cmd_walk(args, &ctx),
            Command::Optimize(args) => cmd_optimize(args, &ctx),
            Command::Batch(args) => cmd_batch(args, &ctx),
            Command::Spread(args) => cmd_spread(args, &ctx),
            Command::Tomo(args) => cmd_tomo(args, &ctx),
        });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn require_steps(steps: usize) -> Result<(), Failure> {
    if steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    Ok(())
}

fn write_manifest(
    ctx: &Ctx,
    command: &str,
    config: serde_json::Value,
) -> Result<(), qwalk::Error> {
    io::write_json(
        ctx.out.join("manifest.json"),
        &serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": ctx.seed,
            "out": ctx.out.display().to_string(),
            "format": ctx.format.as_str(),
            "config": config,
        }),
    )
}

fn resolve_coin(choice: &[String], steps: usize, seed: u64) -> Result<CoinSchedule, Failure> {
    match choice {
        [kind] if kind == "hadamard" => Ok(hadamard_schedule(steps)?),
        [kind] if kind == "random" => Ok(random_schedule(steps, seed)?),
        [kind, path] if kind == "file" => {
            let schedule = io::read_schedule_json(path)?;
            if schedule.len() != steps {
                return Err(usage(format!(
                    "schedule file holds {} coins but --steps is {steps}",
                    schedule.len()
                )));
            }
            Ok(schedule)
        }
        [kind] if kind == "file" => Err(usage("--coin file needs a path argument")),
        other => Err(usage(format!(
            "--coin expects hadamard, random, or file <path>; got {other:?}"
        ))),
    }
}

fn cmd_walk(args: WalkArgs, ctx: &Ctx) -> Result<(), Failure> {
    require_steps(args.steps)?;
    let initial = args.initial.bloch()?;
    let schedule = resolve_coin(&args.coin, args.steps, ctx.seed)?;

    let report = walk_report(initial, &schedule)?;
    let final_state = qwalk::WalkState::initial(initial, args.steps).evolve(&schedule)?;

    io::write_state_csv(ctx.out.join("state.csv"), &final_state)?;
    io::write_schedule_json(ctx.out.join("schedule.json"), &schedule)?;
    match ctx.format {
        Format::Csv => {
            io::write_density_table_csv(
                ctx.out.join("step-density.csv"),
                args.steps,
                &report.density_per_step,
            )?;
            io::write_schmidt_csv(ctx.out.join("schmidt.csv"), &report.schmidt_per_step)?;
        }
        Format::Json => io::write_json(ctx.out.join("walk-report.json"), &report)?,
    }
    write_manifest(
        ctx,
        "walk",
        serde_json::json!({
            "steps": args.steps,
            "coin": args.coin,
            "theta": args.initial.theta,
            "phi": args.initial.phi,
        }),
    )?;

    let final_s = report.schmidt_per_step.last().expect("at least the initial step");
    println!(
        "final S = {final_s:.9} after {} steps; wrote {}",
        args.steps,
        ctx.out.display()
    );
    Ok(())
}

fn cmd_optimize(args: OptimizeArgs, ctx: &Ctx) -> Result<(), Failure> {
    require_steps(args.steps)?;
    let initial = args.initial.bloch()?;
    let cost = EntanglementCost::new(initial, args.steps, args.beta)
        .map_err(|err| usage(format!("--beta: {err}")))?;

    // One master stream seeds both the start point and the hopping, so a
    // single --seed pins the entire run.
    let mut master = ChaCha8Rng::seed_from_u64(ctx.seed);
    let start = random_flat_params(args.steps, &mut master);
    let config = args.knobs.config(master.random())?;

    let result = basin_hop(|w| cost.cost(w), &start, &config)?;
    let schedule = CoinSchedule::from_flat(&result.best_params)?;
    let final_state = cost.final_state(&result.best_params)?;
    let final_schmidt_norm = schmidt_norm(&final_state)?;
    let final_participation_ratio = participation_ratio(&final_state);
    let final_n = n_vector(&final_state);

    io::write_schedule_json(ctx.out.join("schedule.json"), &schedule)?;
    if ctx.format == Format::Csv {
        io::write_hop_trace_csv(ctx.out.join("hop-trace.csv"), &result.hop_trace)?;
    }
    io::write_json(
        ctx.out.join("opt-result.json"),
        &serde_json::json!({
            "result": result,
            "final_schmidt_norm": final_schmidt_norm,
            "final_participation_ratio": final_participation_ratio,
            "final_n": final_n,
        }),
    )?;
    write_manifest(
        ctx,
        "optimize",
        serde_json::json!({
            "steps": args.steps,
            "beta": args.beta,
            "theta": args.initial.theta,
            "phi": args.initial.phi,
            "optimizer": config,
        }),
    )?;

    println!(
        "best S = {final_schmidt_norm:.9} (PR = {final_participation_ratio:.3}) after {} \
         cost evaluations; wrote {}",
        result.n_cost_evals,
        ctx.out.display()
    );
    Ok(())
}

fn cmd_batch(args: BatchArgs, ctx: &Ctx) -> Result<(), Failure> {
    let experiment = ExperimentConfig {
        n_steps: args.steps,
        n_samples: args.samples,
        beta: args.beta,
        selection_threshold: args.threshold,
        haar_uniform: args.haar,
        rng_seed: ctx.seed,
        output_dir: Some(ctx.out.clone()),
    };
    experiment
        .validate()
        .map_err(|err| usage(format!("batch flags: {err}")))?;
    let optimizer = args.knobs.config(ctx.seed)?;

    let stats = run_batch(&experiment, &optimizer)?;

    // Replace the harness manifest with the full invocation record.
    write_manifest(
        ctx,
        "batch",
        serde_json::json!({
            "experiment": experiment,
            "optimizer": optimizer,
        }),
    )?;

    let mean_final = stats
        .mean_schmidt_per_step
        .as_ref()
        .and_then(|curve| curve.last().copied());
    match mean_final {
        Some(s) => println!(
            "{} of {} runs selected; mean final S over selected = {s:.9}; wrote {}",
            stats.n_selected,
            stats.n_total,
            ctx.out.display()
        ),
        None => println!(
            "0 of {} runs selected; wrote {}",
            stats.n_total,
            ctx.out.display()
        ),
    }
    Ok(())
}

fn cmd_spread(args: SpreadArgs, ctx: &Ctx) -> Result<(), Failure> {
    require_steps(args.steps)?;
    if !(args.beta.is_finite() && args.beta > 0.0) {
        return Err(usage("--beta must be positive for a spread run"));
    }
    let initial = args.initial.bloch()?;
    let config = args.knobs.config(ctx.seed)?;

    let result = run_spread(args.steps, args.beta, initial, &config)?;

    io::write_schedule_json(ctx.out.join("schedule.json"), &result.schedule)?;
    io::write_json(ctx.out.join("spread-result.json"), &result)?;
    if ctx.format == Format::Csv {
        io::write_density_table_csv(
            ctx.out.join("step-density.csv"),
            args.steps,
            &result.density_per_step,
        )?;
        io::write_lambda_density_csv(
            ctx.out.join("final-density.csv"),
            args.steps,
            &result.final_density,
        )?;
        io::write_hop_trace_csv(ctx.out.join("hop-trace.csv"), &result.optimizer.hop_trace)?;
    }
    write_manifest(
        ctx,
        "spread",
        serde_json::json!({
            "steps": args.steps,
            "beta": args.beta,
            "theta": args.initial.theta,
            "phi": args.initial.phi,
            "optimizer": config,
        }),
    )?;

    println!(
        "final S = {:.9}, PR = {:.3}; wrote {}",
        result.final_schmidt_norm,
        result.final_participation_ratio,
        ctx.out.display()
    );
    Ok(())
}

fn cmd_tomo(args: TomoArgs, ctx: &Ctx) -> Result<(), Failure> {
    let state = io::read_state_csv(&args.input)?;
    let shots = if args.shots == 0 {
        Shots::Infinite
    } else {
        Shots::Finite(args.shots)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);

    let record = simulate_measurements(&state, shots, &mut rng)?;
    let rebuilt = reconstruct(&record)?;
    let direct_s = schmidt_norm(&state)?;
    let direct_n = n_vector(&state);

    io::write_json(ctx.out.join("measurements.json"), &record)?;
    if ctx.format == Format::Csv {
        io::write_measurements_csv(ctx.out.join("measurements.csv"), &record)?;
    }
    io::write_json(
        ctx.out.join("reconstruction.json"),
        &serde_json::json!({
            "reconstructed": rebuilt,
            "direct": { "n": direct_n, "schmidt_norm": direct_s },
        }),
    )?;
    write_manifest(
        ctx,
        "tomo",
        serde_json::json!({
            "input": args.input.display().to_string(),
            "shots": args.shots,
        }),
    )?;

    println!(
        "reconstructed S = {:.9} (direct {direct_s:.9}); wrote {}",
        rebuilt.schmidt_norm,
        ctx.out.display()
    );
    Ok(())
}
