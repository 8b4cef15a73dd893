//! Coined quantum walks on a line that entangle position with spin.
//!
//! A discrete-time walk alternates an SU(2) coin on the walker's spin
//! with a spin-conditioned shift of its position. Letting the coin vary
//! from step to step turns the walk into a programmable state-synthesis
//! machine: this crate simulates such walks ([`walk`]), measures the
//! hybrid position–spin entanglement they build ([`metrics`]), searches
//! coin sequences that maximize it — optionally together with spatial
//! spread — by basin hopping ([`optimize`]), runs seeded single and batch
//! experiments ([`harness`]), and checks that the result could be read
//! out in the lab with three interference measurements ([`tomography`]).
//! Tables and results persist through [`io`].
//!
//! ```
//! use qwalk::{hadamard_schedule, schmidt_norm, BlochAngles, WalkState};
//!
//! let schedule = hadamard_schedule(10)?;
//! let state = WalkState::initial(BlochAngles::default(), 10).evolve(&schedule)?;
//! let s = schmidt_norm(&state)?;
//! assert!(s > 1.0 && s < std::f64::consts::SQRT_2);
//! # Ok::<(), qwalk::Error>(())
//! ```

pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod optimize;
pub mod tomography;
pub mod walk;

pub use error::{Error, Result};
pub use harness::{
    hadamard_schedule, random_flat_params, random_schedule, run_batch, run_comparison, run_spread,
    sample_initial_state, sample_initial_state_haar, walk_report, BatchStats, ComparisonResult,
    ExperimentConfig, FailedRun, RunRecord, SpreadResult, WalkReport,
};
pub use metrics::{
    n_vector, participation_ratio, schmidt_norm, schmidt_norm_from_n_norm, schmidt_norm_svd,
    schmidt_report, EntanglementCost, NVector, SchmidtReport, DEFAULT_FD_STEP,
};
pub use optimize::{
    basin_hop, fd_gradient, local_minimize, BoundsMode, HopRecord, OptResult, OptimizerConfig,
};
pub use tomography::{reconstruct, simulate_measurements, MeasurementRecord, Reconstruction, Shots};
pub use walk::{BlochAngles, CoinParams, CoinSchedule, Spin, WalkState};
