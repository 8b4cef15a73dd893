//! Hybrid position–spin entanglement measures of a walker state.
//!
//! Tracing out the position of a pure walker state leaves a 2×2 reduced
//! spin density matrix ρ_c = 1/2 + n·σ whose Bloch vector n has
//! components
//!
//! ```text
//! n_x = Re Σ_m α*_{m,R} α_{m,L}
//! n_y = Im Σ_m α*_{m,R} α_{m,L}
//! n_z = ½ Σ_m (|α_{m,L}|² − |α_{m,R}|²)
//! ```
//!
//! Its eigenvalues E± = 1/2 ± |n| are the squared Schmidt coefficients of
//! the position–spin bipartition, so the Schmidt norm S = √E− + √E+
//! ranges from 1 (product state) to √2 (maximally entangled), reached
//! exactly when |n| = 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize;
use crate::walk::{BlochAngles, CoinSchedule, WalkState, NORM_TOL};

/// Central-difference step used by default for cost gradients.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Bloch vector of the reduced spin state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct NVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl NVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

impl From<[f64; 3]> for NVector {
    fn from(a: [f64; 3]) -> Self {
        NVector { x: a[0], y: a[1], z: a[2] }
    }
}

impl From<NVector> for [f64; 3] {
    fn from(n: NVector) -> Self {
        [n.x, n.y, n.z]
    }
}

/// Entanglement summary of one walker state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    /// S = λ₊ + λ₋ ∈ [1, √2].
    pub schmidt_norm: f64,
    /// Schmidt coefficients λ± = √E±.
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Reduced spin eigenvalues E± = 1/2 ± |n|.
    pub e_plus: f64,
    pub e_minus: f64,
    /// Bloch vector of the reduced spin state.
    pub n: NVector,
}

/// Bloch vector of the reduced spin state of `state`.
pub fn n_vector(state: &WalkState) -> NVector {
    let mut cross = Complex64::new(0.0, 0.0);
    let mut weight_l = 0.0;
    let mut weight_r = 0.0;
    let (ls, rs) = (state.left_amplitudes(), state.right_amplitudes());
    for (l, r) in ls.iter().zip(rs) {
        cross += r.conj() * l;
        weight_l += l.norm_sqr();
        weight_r += r.norm_sqr();
    }
    NVector {
        x: cross.re,
        y: cross.im,
        z: 0.5 * (weight_l - weight_r),
    }
}

/// Schmidt norm as a function of the Bloch vector length |n| ∈ [0, 1/2].
///
/// Rounding can push |n| computed from a normalized state a few ulps past
/// 1/2; the input is clamped so the square roots stay real.
pub fn schmidt_norm_from_n_norm(n_norm: f64) -> f64 {
    let x = n_norm.clamp(0.0, 0.5);
    (0.5 - x).sqrt() + (0.5 + x).sqrt()
}

/// Full entanglement summary of a normalized walker state.
pub fn schmidt_report(state: &WalkState) -> Result<SchmidtReport> {
    state.check_normalized(NORM_TOL)?;
    let n = n_vector(state);
    let x = n.norm().clamp(0.0, 0.5);
    let (e_plus, e_minus) = (0.5 + x, 0.5 - x);
    let (lambda_plus, lambda_minus) = (e_plus.sqrt(), e_minus.sqrt());
    Ok(SchmidtReport {
        schmidt_norm: lambda_plus + lambda_minus,
        lambda_plus,
        lambda_minus,
        e_plus,
        e_minus,
        n,
    })
}

/// Schmidt norm of a normalized walker state.
pub fn schmidt_norm(state: &WalkState) -> Result<f64> {
    Ok(schmidt_report(state)?.schmidt_norm)
}

/// Schmidt norm from an explicit singular-value decomposition of the
/// site × spin amplitude matrix.
///
/// The matrix has two columns (spin L and spin R), so a single exact
/// two-column Jacobi rotation — phase-align the columns, then rotate by
/// the angle that zeroes their inner product — diagonalizes it; the
/// singular values are the rotated column norms. This shares no code with
/// the Bloch-vector shortcut and serves as its cross-check.
pub fn schmidt_norm_svd(state: &WalkState) -> f64 {
    let ls = state.left_amplitudes();
    let rs = state.right_amplitudes();
    let mut dot = Complex64::new(0.0, 0.0); // ⟨L column, R column⟩
    let mut norm_l_sqr = 0.0;
    let mut norm_r_sqr = 0.0;
    for (l, r) in ls.iter().zip(rs) {
        dot += l.conj() * r;
        norm_l_sqr += l.norm_sqr();
        norm_r_sqr += r.norm_sqr();
    }
    if dot.norm() == 0.0 {
        // Columns already orthogonal; singular values are their norms.
        return norm_l_sqr.sqrt() + norm_r_sqr.sqrt();
    }
    // Rotate the R column by a phase so the inner product becomes real
    // and positive, then apply the real Jacobi rotation.
    let phase = dot / dot.norm();
    let tau = (norm_r_sqr - norm_l_sqr) / (2.0 * dot.norm());
    let t = tau.signum() / (tau.abs() + tau.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = c * t;
    let mut sigma_1_sqr = 0.0;
    let mut sigma_2_sqr = 0.0;
    for (l, r) in ls.iter().zip(rs) {
        let r_aligned = r * phase.conj();
        sigma_1_sqr += (c * l - s * r_aligned).norm_sqr();
        sigma_2_sqr += (s * l + c * r_aligned).norm_sqr();
    }
    sigma_1_sqr.sqrt() + sigma_2_sqr.sqrt()
}

/// Inverse participation ratio of the full (site, spin) density:
/// PR = 1 / Σ_λ p_λ², the effective number of occupied basis states.
/// Ranges from 1 (a single basis state) to the state dimension.
pub fn participation_ratio(state: &WalkState) -> f64 {
    let sum_p_sqr: f64 = state
        .left_amplitudes()
        .iter()
        .chain(state.right_amplitudes())
        .map(|a| {
            let p = a.norm_sqr();
            p * p
        })
        .sum();
    1.0 / sum_p_sqr
}

/// Objective for coin-sequence synthesis over an N-step walk.
///
/// `cost(w) = −(S + β·PR)` of the state reached by evolving the given
/// initial coin state under the schedule encoded by the flat parameter
/// vector w = [ξ₁, ζ₁, θ₁, …]. Minimizing it maximizes entanglement and,
/// for β > 0, also spatial spread. The lattice half-width equals the step
/// count, the smallest size the walk cannot leave.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntanglementCost {
    initial: BlochAngles,
    n_steps: usize,
    beta: f64,
}

impl EntanglementCost {
    pub fn new(initial: BlochAngles, n_steps: usize, beta: f64) -> Result<EntanglementCost> {
        if n_steps == 0 {
            return Err(Error::InvalidArgument("walk needs at least one step".into()));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "spread weight must be finite and non-negative, got {beta}"
            )));
        }
        Ok(EntanglementCost { initial, n_steps, beta })
    }

    pub fn initial(&self) -> BlochAngles {
        self.initial
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Length of the flat parameter vector, 3 per step.
    pub fn dim(&self) -> usize {
        3 * self.n_steps
    }

    fn schedule(&self, params: &[f64]) -> Result<CoinSchedule> {
        if params.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coin parameters ({} steps), got {}",
                self.dim(),
                self.n_steps,
                params.len()
            )));
        }
        CoinSchedule::from_flat(params)
    }

    /// The state after the full walk under the schedule encoded by `params`.
    pub fn final_state(&self, params: &[f64]) -> Result<WalkState> {
        let schedule = self.schedule(params)?;
        WalkState::initial(self.initial, self.n_steps).evolve(&schedule)
    }

    pub fn cost(&self, params: &[f64]) -> Result<f64> {
        let state = self.final_state(params)?;
        let s = schmidt_norm(&state)?;
        let spread = if self.beta > 0.0 {
            self.beta * participation_ratio(&state)
        } else {
            0.0
        };
        Ok(-(s + spread))
    }

    /// Central-difference gradient of the cost; `step` is the half-window
    /// per coordinate ([`DEFAULT_FD_STEP`] when in doubt).
    pub fn gradient_fd(&self, params: &[f64], step: f64) -> Result<Vec<f64>> {
        self.schedule(params)?; // validate the length up front
        optimize::fd_gradient(|w| self.cost(w), params, step)
    }
}
