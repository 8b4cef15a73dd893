//! Basin hopping over flat coin-parameter vectors.
//!
//! The cost landscape of a scheduled walk is smooth but multimodal, so a
//! single gradient descent only finds the nearest basin. Basin hopping
//! layers a Metropolis random walk on top: perturb the current minimum,
//! descend again, and accept or reject the new basin by its depth. The
//! best basin ever visited is tracked separately from the Metropolis
//! state, so a rejected-later excursion can still win.
//!
//! All randomness flows from one seeded ChaCha stream; runs with equal
//! seeds and configs are bit-for-bit reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

/// Armijo sufficient-decrease constant for the backtracking line search.
const ARMIJO_C: f64 = 1e-4;

/// Max step halvings per line search; 2⁻⁴⁵ is far below gradient noise.
const MAX_BACKTRACKS: usize = 45;

/// How hop proposals are mapped back into the parameter domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMode {
    /// Treat each coin triple (ξ, ζ, θ) as living on its natural domain:
    /// phases wrap into [0, 2π), the mixing angle reflects into [0, π/2].
    PeriodicWrap,
    /// Leave proposals wherever the perturbation puts them.
    Unconstrained,
}

impl BoundsMode {
    /// Projects a flat coin-parameter vector in place.
    pub fn project(&self, params: &mut [f64]) {
        match self {
            BoundsMode::Unconstrained => {}
            BoundsMode::PeriodicWrap => {
                for (i, x) in params.iter_mut().enumerate() {
                    if i % 3 < 2 {
                        *x = x.rem_euclid(TAU);
                    } else {
                        // Reflect θ into [0, π/2] via the period-π triangle wave.
                        let p = x.rem_euclid(PI);
                        *x = if p <= FRAC_PI_2 { p } else { PI - p };
                    }
                }
            }
        }
    }
}

/// Knobs for [`basin_hop`] and [`local_minimize`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Number of perturb–descend–accept cycles after the initial descent.
    pub n_hops: usize,
    /// Half-width of the uniform perturbation applied per coordinate.
    pub step_size: f64,
    /// Metropolis temperature; 0 accepts only non-worsening hops.
    pub temperature: f64,
    /// Iteration cap for each gradient descent.
    pub local_max_iters: usize,
    /// Descent stops once a step improves the cost by less than this.
    pub local_tolerance: f64,
    /// Seed for the hop perturbations and acceptance draws.
    pub rng_seed: u64,
    pub bounds: BoundsMode,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            n_hops: 100,
            step_size: 0.5,
            temperature: 1.0,
            local_max_iters: 200,
            local_tolerance: 1e-8,
            rng_seed: 0,
            bounds: BoundsMode::PeriodicWrap,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_hops == 0 {
            return Err(Error::InvalidArgument("n_hops must be at least 1".into()));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step_size must be positive and finite, got {}",
                self.step_size
            )));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be non-negative and finite, got {}",
                self.temperature
            )));
        }
        if self.local_max_iters == 0 {
            return Err(Error::InvalidArgument("local_max_iters must be at least 1".into()));
        }
        if !(self.local_tolerance.is_finite() && self.local_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "local_tolerance must be positive and finite, got {}",
                self.local_tolerance
            )));
        }
        Ok(())
    }
}

/// One perturb–descend–accept cycle in a basin-hopping run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopRecord {
    /// 1-based hop number.
    pub hop: usize,
    /// Cost of the basin the descent landed in.
    pub proposed_cost: f64,
    /// Whether the Metropolis rule moved the walker there.
    pub accepted: bool,
    /// Best cost seen anywhere up to and including this hop.
    pub best_so_far: f64,
}

/// Outcome of a basin-hopping run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    /// Parameters of the deepest basin found.
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    /// Total cost evaluations, gradient probes included.
    pub n_cost_evals: usize,
    pub hop_trace: Vec<HopRecord>,
}

fn eval_checked<F>(cost: &F, params: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let value = cost(params)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteCost {
            what: value.to_string(),
            params: params.to_vec(),
        })
    }
}

/// Central-difference gradient: g_i = (f(w + h·e_i) − f(w − h·e_i)) / 2h.
pub fn fd_gradient<F>(cost: F, params: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive and finite, got {step}"
        )));
    }
    let mut probe = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let original = probe[i];
        probe[i] = original + step;
        let plus = eval_checked(&cost, &probe)?;
        probe[i] = original - step;
        let minus = eval_checked(&cost, &probe)?;
        probe[i] = original;
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

/// Gradient descent with a backtracking (Armijo) line search.
///
/// Gradients come from central differences with step
/// [`crate::metrics::DEFAULT_FD_STEP`]. Descent stops when the iteration
/// cap is reached, a full line search fails to find decrease, or one step
/// improves the cost by less than `local_tolerance`. Returns the final
/// point and its cost.
pub fn local_minimize<F>(cost: F, start: &[f64], config: &OptimizerConfig) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    config.validate()?;
    check_start(start)?;
    minimize_inner(&cost, start, config)
}

fn check_start(start: &[f64]) -> Result<()> {
    if start.is_empty() {
        return Err(Error::InvalidArgument("empty start vector".into()));
    }
    if start.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "start vector has non-finite entries: {start:?}"
        )));
    }
    Ok(())
}

fn minimize_inner<F>(cost: &F, start: &[f64], config: &OptimizerConfig) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut w = start.to_vec();
    let mut f = eval_checked(cost, &w)?;
    for _ in 0..config.local_max_iters {
        let grad = fd_gradient(cost, &w, crate::metrics::DEFAULT_FD_STEP)?;
        let grad_sqr: f64 = grad.iter().map(|g| g * g).sum();
        let mut step_len = 1.0;
        let mut improvement = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> = w
                .iter()
                .zip(&grad)
                .map(|(x, g)| x - step_len * g)
                .collect();
            let f_candidate = eval_checked(cost, &candidate)?;
            if f_candidate <= f - ARMIJO_C * step_len * grad_sqr {
                improvement = Some((candidate, f_candidate));
                break;
            }
            step_len *= 0.5;
        }
        match improvement {
            // No decrease at any resolution: we are at the method's floor.
            None => break,
            Some((candidate, f_candidate)) => {
                let gained = f - f_candidate;
                w = candidate;
                f = f_candidate;
                if gained < config.local_tolerance {
                    break;
                }
            }
        }
    }
    Ok((w, f))
}

/// Basin hopping: an initial descent from `start`, then `n_hops` cycles of
/// perturb → project into bounds → descend → Metropolis accept.
///
/// The returned [`OptResult`] holds the deepest basin encountered across
/// the whole run, which the Metropolis walker may have since left.
pub fn basin_hop<F>(cost: F, start: &[f64], config: &OptimizerConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    config.validate()?;
    check_start(start)?;
    let evals = Cell::new(0usize);
    let counted = |w: &[f64]| {
        evals.set(evals.get() + 1);
        cost(w)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let (mut current_params, mut current_cost) = minimize_inner(&counted, start, config)?;
    let mut best_params = current_params.clone();
    let mut best_cost = current_cost;
    let mut hop_trace = Vec::with_capacity(config.n_hops);

    for hop in 1..=config.n_hops {
        let mut proposal: Vec<f64> = current_params
            .iter()
            .map(|x| x + rng.random_range(-config.step_size..=config.step_size))
            .collect();
        config.bounds.project(&mut proposal);
        let (hop_params, hop_cost) = minimize_inner(&counted, &proposal, config)?;

        if hop_cost < best_cost {
            best_cost = hop_cost;
            best_params = hop_params.clone();
        }

        let delta = hop_cost - current_cost;
        let accepted = if delta <= 0.0 {
            true
        } else if config.temperature > 0.0 {
            rng.random::<f64>() < (-delta / config.temperature).exp()
        } else {
            false
        };
        if accepted {
            current_params = hop_params;
            current_cost = hop_cost;
        }
        hop_trace.push(HopRecord {
            hop,
            proposed_cost: hop_cost,
            accepted,
            best_so_far: best_cost,
        });
    }

    Ok(OptResult {
        best_params,
        best_cost,
        n_cost_evals: evals.get(),
        hop_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{EntanglementCost, DEFAULT_FD_STEP};
    use crate::walk::BlochAngles;
    use approx::assert_abs_diff_eq;

    fn quadratic(w: &[f64]) -> Result<f64> {
        let target = [1.0, -2.0, 0.5];
        Ok(w.iter().zip(target).map(|(x, c)| (x - c) * (x - c)).sum())
    }

    /// Two wells near x = ±1; the tilt makes the left one global.
    fn tilted_double_well(w: &[f64]) -> Result<f64> {
        let x = w[0];
        Ok((x * x - 1.0) * (x * x - 1.0) + 0.3 * x)
    }

    #[test]
    fn fd_gradient_matches_analytic_quadratic() {
        let w = [0.3, 0.7, -1.1];
        let grad = fd_gradient(quadratic, &w, DEFAULT_FD_STEP).unwrap();
        let target = [1.0, -2.0, 0.5];
        for i in 0..3 {
            assert_abs_diff_eq!(grad[i], 2.0 * (w[i] - target[i]), epsilon = 1e-6);
        }
    }

    #[test]
    fn fd_gradient_error_shrinks_quadratically_with_step() {
        let cost = EntanglementCost::new(BlochAngles::default(), 3, 0.0).unwrap();
        let w = [0.4, 1.3, 0.9, 2.2, 0.1, 0.6, 5.0, 3.3, 1.2];
        let inf_norm = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max)
        };
        let g1 = cost.gradient_fd(&w, 1e-2).unwrap();
        let g2 = cost.gradient_fd(&w, 5e-3).unwrap();
        let g3 = cost.gradient_fd(&w, 2.5e-3).unwrap();
        let e1 = inf_norm(&g1, &g2);
        let e2 = inf_norm(&g2, &g3);
        // Central differences converge at O(h²): halving h must roughly
        // quarter the change between successive gradients.
        assert!(e2 <= 0.35 * e1 + 1e-9, "e1 = {e1:.3e}, e2 = {e2:.3e}");
    }

    #[test]
    fn fd_gradient_rejects_bad_step() {
        assert!(fd_gradient(quadratic, &[0.0; 3], 0.0).is_err());
        assert!(fd_gradient(quadratic, &[0.0; 3], -1e-6).is_err());
        assert!(fd_gradient(quadratic, &[0.0; 3], f64::NAN).is_err());
    }

    #[test]
    fn local_minimize_reaches_quadratic_minimum() {
        let config = OptimizerConfig { local_tolerance: 1e-14, ..OptimizerConfig::default() };
        let (w, f) = local_minimize(quadratic, &[0.0, 0.0, 0.0], &config).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(w[1], -2.0, epsilon = 1e-5);
        assert_abs_diff_eq!(w[2], 0.5, epsilon = 1e-5);
        assert!(f <= 1e-10);
    }

    #[test]
    fn local_minimize_stays_put_at_a_minimum() {
        let config = OptimizerConfig::default();
        let (w, f) = local_minimize(quadratic, &[1.0, -2.0, 0.5], &config).unwrap();
        assert_eq!(w, vec![1.0, -2.0, 0.5]);
        assert_abs_diff_eq!(f, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn basin_hop_escapes_the_shallow_well() {
        // In-test oracle: locate the global minimum by brute-force scan.
        let mut scan_best = (f64::INFINITY, 0.0);
        let mut x = -2.0;
        while x <= 2.0 {
            let f = tilted_double_well(&[x]).unwrap();
            if f < scan_best.0 {
                scan_best = (f, x);
            }
            x += 1e-4;
        }
        assert!(scan_best.1 < 0.0, "tilt should favor the left well");

        let config = OptimizerConfig {
            n_hops: 50,
            step_size: 1.5,
            temperature: 0.5,
            bounds: BoundsMode::Unconstrained,
            local_tolerance: 1e-12,
            rng_seed: 7,
            ..OptimizerConfig::default()
        };
        // Start in the shallow (right) well.
        let result = basin_hop(tilted_double_well, &[0.95], &config).unwrap();
        assert!(result.best_cost <= scan_best.0 + 1e-9);
        assert_abs_diff_eq!(result.best_params[0], scan_best.1, epsilon = 1e-3);
        assert_eq!(result.hop_trace.len(), 50);
        assert!(result.n_cost_evals > 50);
    }

    #[test]
    fn same_seed_reproduces_the_run_exactly() {
        let config = OptimizerConfig {
            n_hops: 12,
            rng_seed: 42,
            bounds: BoundsMode::Unconstrained,
            ..OptimizerConfig::default()
        };
        let a = basin_hop(tilted_double_well, &[0.95], &config).unwrap();
        let b = basin_hop(tilted_double_well, &[0.95], &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_temperature_never_accepts_a_worse_basin() {
        let config = OptimizerConfig {
            n_hops: 40,
            temperature: 0.0,
            step_size: 1.5,
            bounds: BoundsMode::Unconstrained,
            rng_seed: 3,
            ..OptimizerConfig::default()
        };
        let result = basin_hop(tilted_double_well, &[0.95], &config).unwrap();
        // Replay the Metropolis walker from the trace.
        let mut current = f64::INFINITY;
        let mut best = f64::INFINITY;
        for record in &result.hop_trace {
            if record.accepted {
                assert!(
                    record.proposed_cost <= current || current.is_infinite(),
                    "greedy walker accepted a worse basin: {record:?}"
                );
                current = record.proposed_cost;
            }
            best = best.min(record.proposed_cost);
            assert!(record.best_so_far <= best + 1e-15);
        }
    }

    #[test]
    fn very_hot_walker_accepts_every_proposal() {
        let config = OptimizerConfig {
            n_hops: 40,
            temperature: 1e9,
            step_size: 1.5,
            bounds: BoundsMode::Unconstrained,
            rng_seed: 3,
            ..OptimizerConfig::default()
        };
        let result = basin_hop(tilted_double_well, &[0.95], &config).unwrap();
        assert!(result.hop_trace.iter().all(|record| record.accepted));
    }

    #[test]
    fn best_cost_is_the_cost_of_best_params() {
        let config = OptimizerConfig {
            n_hops: 25,
            rng_seed: 5,
            bounds: BoundsMode::Unconstrained,
            ..OptimizerConfig::default()
        };
        let result = basin_hop(tilted_double_well, &[0.0], &config).unwrap();
        let replayed = tilted_double_well(&result.best_params).unwrap();
        assert_abs_diff_eq!(result.best_cost, replayed, epsilon = 1e-12);
    }

    #[test]
    fn best_so_far_is_monotone_and_matches_best_cost() {
        let config = OptimizerConfig {
            n_hops: 30,
            rng_seed: 11,
            bounds: BoundsMode::Unconstrained,
            ..OptimizerConfig::default()
        };
        let result = basin_hop(tilted_double_well, &[0.0], &config).unwrap();
        let mut previous = f64::INFINITY;
        for record in &result.hop_trace {
            assert!(record.best_so_far <= previous);
            previous = record.best_so_far;
        }
        assert_eq!(result.hop_trace.last().unwrap().best_so_far, result.best_cost);
    }

    #[test]
    fn periodic_wrap_projects_each_coin_triple() {
        use std::f64::consts::{FRAC_PI_2, PI, TAU};
        let mut params = vec![-0.1, TAU + 0.2, 2.0, 7.0, -13.0, -0.3];
        BoundsMode::PeriodicWrap.project(&mut params);
        assert_abs_diff_eq!(params[0], TAU - 0.1, epsilon = 1e-12); // ξ wraps
        assert_abs_diff_eq!(params[1], 0.2, epsilon = 1e-12); // ζ wraps
        assert_abs_diff_eq!(params[2], PI - 2.0, epsilon = 1e-12); // θ reflects
        assert_abs_diff_eq!(params[3], 7.0 - TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(params[4], 3.0 * TAU - 13.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params[5], 0.3, epsilon = 1e-12); // θ reflects at 0
        for (i, x) in params.iter().enumerate() {
            if i % 3 < 2 {
                assert!((0.0..TAU).contains(x));
            } else {
                assert!((0.0..=FRAC_PI_2).contains(x));
            }
        }

        let mut copy = params.clone();
        BoundsMode::Unconstrained.project(&mut copy);
        assert_eq!(copy, params);
    }

    #[test]
    fn non_finite_cost_reports_the_offending_point() {
        let nan_cost = |_: &[f64]| Ok(f64::NAN);
        match basin_hop(nan_cost, &[1.0, 2.0], &OptimizerConfig::default()) {
            Err(Error::NonFiniteCost { params, .. }) => assert_eq!(params, vec![1.0, 2.0]),
            other => panic!("expected a non-finite cost error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation_rejects_bad_knobs() {
        let ok = OptimizerConfig::default();
        assert!(ok.validate().is_ok());
        assert!(OptimizerConfig { n_hops: 0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { step_size: 0.0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { temperature: -1.0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { local_max_iters: 0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { local_tolerance: 0.0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { step_size: f64::INFINITY, ..ok }.validate().is_err());
    }

    #[test]
    fn opt_result_round_trips_through_json() {
        let config = OptimizerConfig {
            n_hops: 5,
            rng_seed: 9,
            bounds: BoundsMode::Unconstrained,
            ..OptimizerConfig::default()
        };
        let result = basin_hop(tilted_double_well, &[0.3], &config).unwrap();
        let json = serde_json::to_string(&result).unwrap();
        let back: OptResult = serde_json::from_str(&json).unwrap();
        assert_eq!(result, back);
    }
}
