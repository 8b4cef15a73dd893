//! Site-resolved spin interferometry and Bloch-vector reconstruction.
//!
//! Three analyzer settings, each a separate experiment on fresh copies of
//! the state, determine the reduced spin Bloch vector without full state
//! tomography:
//!
//! 1. direct: resolve (site, spin) populations I_L(m), I_R(m);
//! 2. diagonal: interfere the spin components and record the + port,
//!    I_D(m) = |α_L + α_R|²/2;
//! 3. circular: same with a quarter-wave phase, I_C(m) = |α_L + iα_R|²/2.
//!
//! Per site, I_D − (I_L + I_R)/2 = Re(α*_R α_L) and
//! I_C − (I_L + I_R)/2 = Im(α*_R α_L); summing over sites and adding
//! n_z = ½ Σ (I_L − I_R) rebuilds the Bloch vector and with it the
//! Schmidt norm. Finite-shot records replace each setting's exact
//! intensities with multinomial frequencies.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{schmidt_norm_from_n_norm, NVector};
use crate::walk::WalkState;

/// Shot budget per analyzer setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Option<u64>", into = "Option<u64>")]
pub enum Shots {
    /// Exact intensities, as if infinitely many repetitions were averaged.
    Infinite,
    /// Each setting's outcome distribution is sampled this many times.
    Finite(u64),
}

impl From<Option<u64>> for Shots {
    fn from(value: Option<u64>) -> Self {
        match value {
            None => Shots::Infinite,
            Some(n) => Shots::Finite(n),
        }
    }
}

impl From<Shots> for Option<u64> {
    fn from(value: Shots) -> Self {
        match value {
            Shots::Infinite => None,
            Shots::Finite(n) => Some(n),
        }
    }
}

/// Intensities recorded by the three analyzer settings, per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub half_width: usize,
    pub shots: Shots,
    /// Direct setting, spin-L port.
    pub i_l: Vec<f64>,
    /// Direct setting, spin-R port.
    pub i_r: Vec<f64>,
    /// Diagonal setting, + port.
    pub i_d: Vec<f64>,
    /// Circular setting, + port.
    pub i_c: Vec<f64>,
}

/// Bloch vector and Schmidt norm inferred from measured intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub n: NVector,
    pub schmidt_norm: f64,
}

/// Draws one multinomial sample by chaining conditional binomials.
fn multinomial<R: Rng + ?Sized>(rng: &mut R, n_shots: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = Vec::with_capacity(probs.len());
    let mut remaining_shots = n_shots;
    let mut remaining_mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            counts.push(remaining_shots);
            break;
        }
        let q = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(remaining_shots, q)
            .expect("probability is clamped to [0, 1]")
            .sample(rng);
        counts.push(draw);
        remaining_shots -= draw;
        remaining_mass = (remaining_mass - p).max(0.0);
    }
    counts
}

/// Per-site outcome probabilities of one interference setting, + port
/// then − port, where the + port mixes the spins as (α_L + phase·α_R)/√2.
fn port_probs(state: &WalkState, phase: Complex64) -> Vec<f64> {
    let mut probs = Vec::with_capacity(2 * state.n_sites());
    for (l, r) in state
        .left_amplitudes()
        .iter()
        .zip(state.right_amplitudes())
    {
        let mixed = phase * r;
        probs.push(0.5 * (l + mixed).norm_sqr());
        probs.push(0.5 * (l - mixed).norm_sqr());
    }
    probs
}

/// Runs the three analyzer settings on `state`.
///
/// With [`Shots::Finite`], each setting independently samples its own
/// multinomial outcome distribution (including the unrecorded − ports),
/// and the record holds observed frequencies; the RNG is untouched in
/// the [`Shots::Infinite`] case.
pub fn simulate_measurements<R: Rng + ?Sized>(
    state: &WalkState,
    shots: Shots,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    if shots == Shots::Finite(0) {
        return Err(Error::InvalidArgument(
            "finite-shot measurement needs at least one shot".into(),
        ));
    }
    let n_sites = state.n_sites();
    let direct: Vec<f64> = state
        .left_amplitudes()
        .iter()
        .zip(state.right_amplitudes())
        .flat_map(|(l, r)| [l.norm_sqr(), r.norm_sqr()])
        .collect();
    let diagonal = port_probs(state, Complex64::new(1.0, 0.0));
    let circular = port_probs(state, Complex64::new(0.0, 1.0));

    // Even entries are the recorded ports (L for direct, + otherwise).
    let record_even = |freqs: &[f64]| -> Vec<f64> { freqs.iter().step_by(2).copied().collect() };
    let record_odd = |freqs: &[f64]| -> Vec<f64> {
        freqs.iter().skip(1).step_by(2).copied().collect()
    };

    let (i_l, i_r, i_d, i_c) = match shots {
        Shots::Infinite => (
            record_even(&direct),
            record_odd(&direct),
            record_even(&diagonal),
            record_even(&circular),
        ),
        Shots::Finite(n) => {
            let to_freqs = |probs: &[f64], rng: &mut R| -> Vec<f64> {
                multinomial(rng, n, probs)
                    .into_iter()
                    .map(|c| c as f64 / n as f64)
                    .collect()
            };
            let direct_f = to_freqs(&direct, rng);
            let diagonal_f = to_freqs(&diagonal, rng);
            let circular_f = to_freqs(&circular, rng);
            (
                record_even(&direct_f),
                record_odd(&direct_f),
                record_even(&diagonal_f),
                record_even(&circular_f),
            )
        }
    };
    debug_assert_eq!(i_l.len(), n_sites);
    Ok(MeasurementRecord {
        half_width: state.half_width(),
        shots,
        i_l,
        i_r,
        i_d,
        i_c,
    })
}

/// Tolerance scale for consistency checks on measured intensities.
fn noise_tolerance(shots: Shots) -> f64 {
    match shots {
        Shots::Infinite => 1e-9,
        // Frequencies fluctuate at O(1/√n); 30 standard deviations keeps
        // false alarms out of even large batches of reconstructions.
        Shots::Finite(n) => 30.0 / (n as f64).sqrt(),
    }
}

/// Rebuilds the Bloch vector and Schmidt norm from measured intensities.
///
/// Before combining them, the intensities are checked for consistency
/// with *some* quantum state: each must lie in [0, 1] and each site's
/// inferred cross term must respect |α*_R α_L|² = I_L·I_R, all within a
/// tolerance matched to the shot noise.
pub fn reconstruct(record: &MeasurementRecord) -> Result<Reconstruction> {
    let n_sites = 2 * record.half_width + 1;
    for (name, data) in [
        ("i_l", &record.i_l),
        ("i_r", &record.i_r),
        ("i_d", &record.i_d),
        ("i_c", &record.i_c),
    ] {
        if data.len() != n_sites {
            return Err(Error::InconsistentData(format!(
                "{name} has {} entries for {n_sites} sites",
                data.len()
            )));
        }
    }
    let tol = noise_tolerance(record.shots);
    let mut n = NVector { x: 0.0, y: 0.0, z: 0.0 };
    let mut total = 0.0;
    for m in 0..n_sites {
        let (il, ir, id, ic) = (record.i_l[m], record.i_r[m], record.i_d[m], record.i_c[m]);
        for (name, v) in [("i_l", il), ("i_r", ir), ("i_d", id), ("i_c", ic)] {
            if !v.is_finite() || !(-tol..=1.0 + tol).contains(&v) {
                return Err(Error::InconsistentData(format!(
                    "{name} = {v} at site index {m} is not an intensity"
                )));
            }
        }
        let re = id - 0.5 * (il + ir);
        let im = ic - 0.5 * (il + ir);
        if re * re + im * im > il * ir + tol {
            return Err(Error::InconsistentData(format!(
                "site index {m}: cross term {:.3e} exceeds I_L*I_R = {:.3e}",
                re * re + im * im,
                il * ir
            )));
        }
        n.x += re;
        n.y += im;
        n.z += 0.5 * (il - ir);
        total += il + ir;
    }
    if (total - 1.0).abs() > tol + 1e-9 {
        return Err(Error::InconsistentData(format!(
            "direct intensities sum to {total}, expected 1"
        )));
    }
    Ok(Reconstruction {
        n,
        schmidt_norm: schmidt_norm_from_n_norm(n.norm()),
    })
}
