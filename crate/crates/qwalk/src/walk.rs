//! Discrete-time coined quantum walk on a finite 1D lattice.
//!
//! The walker lives on sites m ∈ {−h, …, +h} and carries a two-level coin
//! (spin) with basis states L and R. One step applies a site-independent
//! SU(2)-like coin to the spin, then a spin-flipping conditional shift:
//! the L component of site m moves to (m−1, R) and the R component moves
//! to (m+1, L). Starting the walker at the origin, N steps never reach
//! past ±N, so a lattice with `half_width ≥ N` evolves without loss.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance on |‖ψ‖² − 1| accepted by operations that require a
/// normalized state.
pub const NORM_TOL: f64 = 1e-9;

/// Coin (spin) basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    L,
    R,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::L, Spin::R];

    /// Offset of this spin within a site's pair of flattened indices.
    pub fn offset(self) -> usize {
        match self {
            Spin::L => 0,
            Spin::R => 1,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::L => "L",
            Spin::R => "R",
        })
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Spin> {
        match s {
            "L" | "l" => Ok(Spin::L),
            "R" | "r" => Ok(Spin::R),
            other => Err(Error::InvalidArgument(format!(
                "spin must be L or R, got {other:?}"
            ))),
        }
    }
}

/// Initial coin state on the Bloch sphere:
/// cos(θ/2)|L⟩ + e^{iφ} sin(θ/2)|R⟩ with θ ∈ [0, π], φ ∈ [0, 2π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochAngles {
    theta: f64,
    phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<BlochAngles> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "Bloch polar angle must lie in [0, pi], got {theta}"
            )));
        }
        if !phi.is_finite() || !(0.0..=TAU).contains(&phi) {
            return Err(Error::InvalidArgument(format!(
                "Bloch azimuthal angle must lie in [0, 2*pi], got {phi}"
            )));
        }
        Ok(BlochAngles { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Coin spinor (α_L, α_R) for this point on the Bloch sphere.
    pub fn spinor(&self) -> (Complex64, Complex64) {
        let half = 0.5 * self.theta;
        (
            Complex64::new(half.cos(), 0.0),
            Complex64::from_polar(half.sin(), self.phi),
        )
    }
}

impl Default for BlochAngles {
    /// The |L⟩ pole (θ = 0, φ = 0).
    fn default() -> Self {
        BlochAngles { theta: 0.0, phi: 0.0 }
    }
}

/// Parameters (ξ, ζ, θ) of one coin operation.
///
/// The coin acts on the spinor (α_L, α_R) as the matrix
///
/// ```text
/// C(ξ, ζ, θ) = [ e^{iξ} cos θ     e^{iζ} sin θ  ]
///              [ e^{−iζ} sin θ   −e^{−iξ} cos θ ]
/// ```
///
/// which is unitary with determinant −1 for every real (ξ, ζ, θ). Distinct
/// parameter triples can produce the same matrix; [`CoinParams::canonical`]
/// maps each triple to the unique equivalent one with θ ∈ [0, π/2] and
/// ξ, ζ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinParams {
    pub xi: f64,
    pub zeta: f64,
    pub theta: f64,
}

impl CoinParams {
    pub fn new(xi: f64, zeta: f64, theta: f64) -> CoinParams {
        CoinParams { xi, zeta, theta }
    }

    /// The balanced coin C(0, 0, π/4) = (1/√2) [[1, 1], [1, −1]].
    pub fn hadamard() -> CoinParams {
        CoinParams { xi: 0.0, zeta: 0.0, theta: FRAC_PI_4 }
    }

    /// The 2×2 coin matrix in the (L, R) basis, rows = output components.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let (sin, cos) = self.theta.sin_cos();
        [
            [
                Complex64::from_polar(cos, self.xi),
                Complex64::from_polar(sin, self.zeta),
            ],
            [
                Complex64::from_polar(sin, -self.zeta),
                -Complex64::from_polar(cos, -self.xi),
            ],
        ]
    }

    /// Equivalent parameters with θ ∈ [0, π/2] and ξ, ζ ∈ [0, 2π).
    ///
    /// Uses the matrix-preserving identities
    /// C(ξ, ζ, 2π − θ) = C(ξ, ζ + π, θ) and
    /// C(ξ, ζ, π − θ) = C(ξ + π, ζ, θ).
    pub fn canonical(&self) -> CoinParams {
        let mut xi = self.xi;
        let mut zeta = self.zeta;
        let mut theta = self.theta.rem_euclid(TAU);
        if theta > PI {
            theta = TAU - theta;
            zeta += PI;
        }
        if theta > FRAC_PI_2 {
            theta = PI - theta;
            xi += PI;
        }
        CoinParams {
            xi: xi.rem_euclid(TAU),
            zeta: zeta.rem_euclid(TAU),
            theta,
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self.xi.is_finite() && self.zeta.is_finite() && self.theta.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "coin parameters must be finite, got {self:?}"
            )))
        }
    }
}

/// An ordered list of coin parameters, one per walk step.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CoinSchedule {
    steps: Vec<CoinParams>,
}

// Deserializing goes through the validating constructor so that stored
// schedules obey the same invariants as constructed ones.
impl<'de> Deserialize<'de> for CoinSchedule {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let steps = Vec::<CoinParams>::deserialize(deserializer)?;
        CoinSchedule::new(steps).map_err(serde::de::Error::custom)
    }
}

impl CoinSchedule {
    /// At least one step; all parameters finite.
    pub fn new(steps: Vec<CoinParams>) -> Result<CoinSchedule> {
        if steps.is_empty() {
            return Err(Error::InvalidArgument(
                "a coin schedule needs at least one step".into(),
            ));
        }
        for step in &steps {
            step.check_finite()?;
        }
        Ok(CoinSchedule { steps })
    }

    /// Builds a schedule from the flat layout [ξ₁, ζ₁, θ₁, ξ₂, ζ₂, θ₂, …],
    /// the parameter vector the optimizer works on.
    pub fn from_flat(params: &[f64]) -> Result<CoinSchedule> {
        if params.is_empty() || params.len() % 3 != 0 {
            return Err(Error::InvalidArgument(format!(
                "flat coin parameters must be a non-empty multiple of 3, got length {}",
                params.len()
            )));
        }
        CoinSchedule::new(
            params
                .chunks_exact(3)
                .map(|c| CoinParams::new(c[0], c[1], c[2]))
                .collect(),
        )
    }

    /// Inverse of [`CoinSchedule::from_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        self.steps
            .iter()
            .flat_map(|c| [c.xi, c.zeta, c.theta])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[CoinParams] {
        &self.steps
    }

    /// Every step replaced by its canonical representative.
    pub fn canonical(&self) -> CoinSchedule {
        CoinSchedule {
            steps: self.steps.iter().map(CoinParams::canonical).collect(),
        }
    }
}

/// Pure state of walker position and spin on sites −h..=+h.
///
/// Amplitudes are stored per spin in site order. The flattened index
/// λ = 2(m + h) + s with s = 0 for L and 1 for R enumerates the
/// (site, spin) basis in a fixed order used by density tables.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    half_width: usize,
    amp_l: Vec<Complex64>,
    amp_r: Vec<Complex64>,
}

impl WalkState {
    /// Walker at the origin with the given coin state.
    pub fn initial(coin: BlochAngles, half_width: usize) -> WalkState {
        let n = 2 * half_width + 1;
        let mut amp_l = vec![Complex64::new(0.0, 0.0); n];
        let mut amp_r = vec![Complex64::new(0.0, 0.0); n];
        let (l, r) = coin.spinor();
        amp_l[half_width] = l;
        amp_r[half_width] = r;
        WalkState { half_width, amp_l, amp_r }
    }

    /// State with the given nonzero amplitudes (unlisted entries are zero).
    ///
    /// Errors if a site lies outside ±half_width or the result is not
    /// normalized within [`NORM_TOL`].
    pub fn from_site_amplitudes(
        half_width: usize,
        entries: &[(i32, Spin, Complex64)],
    ) -> Result<WalkState> {
        let n = 2 * half_width + 1;
        let mut amp_l = vec![Complex64::new(0.0, 0.0); n];
        let mut amp_r = vec![Complex64::new(0.0, 0.0); n];
        for &(site, spin, amp) in entries {
            if site.unsigned_abs() as usize > half_width {
                return Err(Error::InvalidArgument(format!(
                    "site {site} outside lattice of half-width {half_width}"
                )));
            }
            let idx = (site + half_width as i32) as usize;
            match spin {
                Spin::L => amp_l[idx] += amp,
                Spin::R => amp_r[idx] += amp,
            }
        }
        let state = WalkState { half_width, amp_l, amp_r };
        state.check_normalized(NORM_TOL)?;
        Ok(state)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Number of lattice sites, 2·half_width + 1.
    pub fn n_sites(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Number of (site, spin) basis states, 2·n_sites.
    pub fn dim(&self) -> usize {
        2 * self.n_sites()
    }

    /// Sites in order, −half_width ..= +half_width.
    pub fn sites(&self) -> impl Iterator<Item = i32> {
        let h = self.half_width as i32;
        -h..=h
    }

    fn index(&self, site: i32) -> Option<usize> {
        if site.unsigned_abs() as usize > self.half_width {
            None
        } else {
            Some((site + self.half_width as i32) as usize)
        }
    }

    /// Amplitude ⟨site, spin|ψ⟩; zero for sites outside the lattice.
    pub fn amplitude(&self, site: i32, spin: Spin) -> Complex64 {
        match self.index(site) {
            Some(i) => match spin {
                Spin::L => self.amp_l[i],
                Spin::R => self.amp_r[i],
            },
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// |⟨site, spin|ψ⟩|².
    pub fn density(&self, site: i32, spin: Spin) -> f64 {
        self.amplitude(site, spin).norm_sqr()
    }

    /// Total density at a site, summed over spin.
    pub fn site_density(&self, site: i32) -> f64 {
        self.density(site, Spin::L) + self.density(site, Spin::R)
    }

    /// Flattened basis index λ = 2(site + half_width) + spin offset.
    ///
    /// Panics if the site lies outside the lattice.
    pub fn lambda_of(&self, site: i32, spin: Spin) -> usize {
        let i = self
            .index(site)
            .unwrap_or_else(|| panic!("site {site} outside lattice of half-width {}", self.half_width));
        2 * i + spin.offset()
    }

    /// Inverse of [`WalkState::lambda_of`]. Panics if λ ≥ dim.
    pub fn site_spin_of(&self, lambda: usize) -> (i32, Spin) {
        assert!(lambda < self.dim(), "basis index {lambda} out of range");
        let site = (lambda / 2) as i32 - self.half_width as i32;
        let spin = if lambda % 2 == 0 { Spin::L } else { Spin::R };
        (site, spin)
    }

    /// Densities in λ order.
    pub fn densities(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.n_sites() {
            out.push(self.amp_l[i].norm_sqr());
            out.push(self.amp_r[i].norm_sqr());
        }
        out
    }

    /// Amplitudes in λ order.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.n_sites() {
            out.push(self.amp_l[i]);
            out.push(self.amp_r[i]);
        }
        out
    }

    /// Spin-L amplitudes in site order.
    pub fn left_amplitudes(&self) -> &[Complex64] {
        &self.amp_l
    }

    /// Spin-R amplitudes in site order.
    pub fn right_amplitudes(&self) -> &[Complex64] {
        &self.amp_r
    }

    pub fn norm_sqr(&self) -> f64 {
        let l: f64 = self.amp_l.iter().map(|a| a.norm_sqr()).sum();
        let r: f64 = self.amp_r.iter().map(|a| a.norm_sqr()).sum();
        l + r
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() <= tol {
            Ok(())
        } else {
            Err(Error::NotNormalized(format!(
                "|psi|^2 = {norm_sqr}, expected 1 within {tol}"
            )))
        }
    }

    /// Applies one coin to the spin at every site. The input must be
    /// normalized within [`NORM_TOL`].
    pub fn apply_coin(&self, coin: &CoinParams) -> Result<WalkState> {
        self.check_normalized(NORM_TOL)?;
        coin.check_finite()?;
        let mut out = self.clone();
        coin_kernel(&self.amp_l, &self.amp_r, &coin.matrix(), &mut out.amp_l, &mut out.amp_r);
        Ok(out)
    }

    /// Applies the spin-flipping shift: (m, L) → (m−1, R), (m, R) → (m+1, L).
    ///
    /// Errors if amplitude sits on an edge facing outward (L on the left
    /// edge or R on the right edge), which would move it off the lattice.
    pub fn apply_shift(&self) -> Result<WalkState> {
        self.check_shift_boundary()?;
        let mut out = self.clone();
        shift_kernel(&self.amp_l, &self.amp_r, &mut out.amp_l, &mut out.amp_r);
        Ok(out)
    }

    fn check_shift_boundary(&self) -> Result<()> {
        let h = self.half_width as i32;
        let n = self.n_sites();
        if self.amp_l[0].norm_sqr() != 0.0 {
            return Err(Error::BoundaryOverflow { site: -h, spin: Spin::L });
        }
        if self.amp_r[n - 1].norm_sqr() != 0.0 {
            return Err(Error::BoundaryOverflow { site: h, spin: Spin::R });
        }
        Ok(())
    }

    /// Runs the walk: for each scheduled step, coin then shift.
    pub fn evolve(&self, schedule: &CoinSchedule) -> Result<WalkState> {
        let mut state = self.clone();
        let mut scratch = self.clone();
        for coin in schedule.steps() {
            state.check_normalized(NORM_TOL)?;
            coin.check_finite()?;
            coin_kernel(&state.amp_l, &state.amp_r, &coin.matrix(), &mut scratch.amp_l, &mut scratch.amp_r);
            scratch.check_shift_boundary()?;
            shift_kernel(&scratch.amp_l, &scratch.amp_r, &mut state.amp_l, &mut state.amp_r);
        }
        Ok(state)
    }

    /// Like [`WalkState::evolve`] but keeps every intermediate state.
    /// Returns N+1 states; the first is the initial state.
    pub fn evolve_trajectory(&self, schedule: &CoinSchedule) -> Result<Vec<WalkState>> {
        let mut trajectory = Vec::with_capacity(schedule.len() + 1);
        trajectory.push(self.clone());
        for coin in schedule.steps() {
            let stepped = trajectory
                .last()
                .expect("trajectory starts non-empty")
                .apply_coin(coin)?
                .apply_shift()?;
            trajectory.push(stepped);
        }
        Ok(trajectory)
    }
}

fn coin_kernel(
    src_l: &[Complex64],
    src_r: &[Complex64],
    m: &[[Complex64; 2]; 2],
    dst_l: &mut [Complex64],
    dst_r: &mut [Complex64],
) {
    for i in 0..src_l.len() {
        let l = src_l[i];
        let r = src_r[i];
        dst_l[i] = m[0][0] * l + m[0][1] * r;
        dst_r[i] = m[1][0] * l + m[1][1] * r;
    }
}

fn shift_kernel(
    src_l: &[Complex64],
    src_r: &[Complex64],
    dst_l: &mut [Complex64],
    dst_r: &mut [Complex64],
) {
    let n = src_l.len();
    let zero = Complex64::new(0.0, 0.0);
    dst_l[0] = zero;
    dst_l[1..n].copy_from_slice(&src_r[..n - 1]);
    dst_r[n - 1] = zero;
    dst_r[..n - 1].copy_from_slice(&src_l[1..n]);
}
