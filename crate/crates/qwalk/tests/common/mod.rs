//! Shared helpers for the integration suites: an independent dense-matrix
//! implementation of one walk step, an eigenvalue route to the Schmidt
//! norm, and random-state generators.
//!
//! The dense path deliberately avoids the library's evolution code: it
//! builds the full step operator as an explicit matrix (block-diagonal
//! coin followed by the spin-conditioned translation) and multiplies it
//! into a plain amplitude vector. Agreement with the fast simulator is
//! therefore evidence, not tautology.

#![allow(dead_code)] // each integration binary uses a different subset

use num_complex::Complex64;
use qwalk::{BlochAngles, CoinParams, CoinSchedule, Spin, WalkState};
use rand::Rng;
use rand_distr::StandardNormal;

/// Flat index of (site, spin) on a lattice of half-width `h`,
/// site-major with L before R — the same ordering the library reports.
pub fn flat_index(site: i32, spin: Spin, h: usize) -> usize {
    let s = match spin {
        Spin::L => 0,
        Spin::R => 1,
    };
    2 * (site + h as i32) as usize + s
}

/// Dense one-step operator: coin on every site, then the translation
/// that carries L-amplitudes one site left and R-amplitudes one site
/// right. Rows that would leave the lattice are dropped, so the matrix
/// is only exact on states that never touch the edges — the tests keep
/// their light cones strictly inside.
pub fn dense_step_matrix(coin: &CoinParams, h: usize) -> Vec<Vec<Complex64>> {
    let dim = 2 * (2 * h + 1);
    let i = Complex64::i();
    let c00 = (i * coin.xi).exp() * coin.theta.cos();
    let c01 = (i * coin.zeta).exp() * coin.theta.sin();
    let c10 = (-i * coin.zeta).exp() * coin.theta.sin();
    let c11 = -(-i * coin.xi).exp() * coin.theta.cos();

    let zero = Complex64::new(0.0, 0.0);
    let mut coin_mat = vec![vec![zero; dim]; dim];
    for site in -(h as i32)..=h as i32 {
        let l = flat_index(site, Spin::L, h);
        let r = flat_index(site, Spin::R, h);
        coin_mat[l][l] = c00;
        coin_mat[l][r] = c01;
        coin_mat[r][l] = c10;
        coin_mat[r][r] = c11;
    }

    let mut shift = vec![vec![zero; dim]; dim];
    for site in -(h as i32)..=h as i32 {
        if site - 1 >= -(h as i32) {
            shift[flat_index(site - 1, Spin::R, h)][flat_index(site, Spin::L, h)] =
                Complex64::new(1.0, 0.0);
        }
        if site + 1 <= h as i32 {
            shift[flat_index(site + 1, Spin::L, h)][flat_index(site, Spin::R, h)] =
                Complex64::new(1.0, 0.0);
        }
    }

    mat_mul(&shift, &coin_mat)
}

pub fn mat_mul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (row_out, row_a) in out.iter_mut().zip(a) {
        for (k, a_ik) in row_a.iter().enumerate() {
            if a_ik.norm_sqr() == 0.0 {
                continue;
            }
            for (out_j, b_kj) in row_out.iter_mut().zip(&b[k]) {
                *out_j += a_ik * b_kj;
            }
        }
    }
    out
}

pub fn mat_vec(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
        .collect()
}

/// Amplitudes of `state` as a flat vector in the dense ordering.
pub fn state_to_vec(state: &WalkState) -> Vec<Complex64> {
    let h = state.half_width();
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * (2 * h + 1)];
    for site in state.sites() {
        v[flat_index(site, Spin::L, h)] = state.amplitude(site, Spin::L);
        v[flat_index(site, Spin::R, h)] = state.amplitude(site, Spin::R);
    }
    v
}

/// Evolves a flat amplitude vector with dense matrices, one step per coin.
pub fn dense_evolve(start: &[Complex64], schedule: &CoinSchedule, h: usize) -> Vec<Complex64> {
    let mut v = start.to_vec();
    for coin in schedule.steps() {
        v = mat_vec(&dense_step_matrix(coin, h), &v);
    }
    v
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Schmidt norm via the reduced spin density matrix: accumulate the 2×2
/// matrix ρ = Σ_site ψ ψ†, take its eigenvalues in closed form, and sum
/// their square roots. Independent of both library routes (Bloch-vector
/// formula and one-rotation SVD).
pub fn schmidt_norm_via_density_eigenvalues(v: &[Complex64]) -> f64 {
    assert_eq!(v.len() % 2, 0);
    let (mut rho_ll, mut rho_rr) = (0.0f64, 0.0f64);
    let mut rho_lr = Complex64::new(0.0, 0.0);
    for pair in v.chunks_exact(2) {
        rho_ll += pair[0].norm_sqr();
        rho_rr += pair[1].norm_sqr();
        rho_lr += pair[0] * pair[1].conj();
    }
    let trace = rho_ll + rho_rr;
    let det = rho_ll * rho_rr - rho_lr.norm_sqr();
    let gap = (0.25 * trace * trace - det).max(0.0).sqrt();
    let mu_plus = (0.5 * trace + gap).max(0.0);
    let mu_minus = (0.5 * trace - gap).max(0.0);
    mu_plus.sqrt() + mu_minus.sqrt()
}

/// A random normalized state on the full lattice, complex-Gaussian per
/// component so the direction is uniform on the unit sphere.
pub fn random_state<R: Rng + ?Sized>(h: usize, rng: &mut R) -> WalkState {
    let mut entries = Vec::with_capacity(2 * (2 * h + 1));
    let mut norm_sqr = 0.0;
    for site in -(h as i32)..=h as i32 {
        for spin in [Spin::L, Spin::R] {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let amp = Complex64::new(re, im);
            norm_sqr += amp.norm_sqr();
            entries.push((site, spin, amp));
        }
    }
    let scale = norm_sqr.sqrt().recip();
    for (_, _, amp) in &mut entries {
        *amp *= scale;
    }
    WalkState::from_site_amplitudes(h, &entries).expect("normalized by construction")
}

/// A random point on the Bloch sphere's parameter rectangle.
pub fn random_bloch<R: Rng + ?Sized>(rng: &mut R) -> BlochAngles {
    BlochAngles::new(
        rng.random_range(0.0..std::f64::consts::PI),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
    .expect("angles drawn in range")
}

/// A random flat coin-parameter vector with angles in their natural ranges.
pub fn random_params<R: Rng + ?Sized>(n_steps: usize, rng: &mut R) -> Vec<f64> {
    (0..3 * n_steps)
        .map(|i| {
            if i % 3 < 2 {
                rng.random_range(0.0..std::f64::consts::TAU)
            } else {
                rng.random_range(0.0..std::f64::consts::FRAC_PI_2)
            }
        })
        .collect()
}
