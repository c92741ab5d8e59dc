//! Radial ground states by bisection shooting.
//!
//! The profile `P` solves `P'' + 2P'/r = P⁵ - P³ + ωP` (cubic-quintic) or
//! `g'' + 2g'/r = g - g³` (cubic only). Trajectories are integrated in
//! `σ = r·P`. For the cubic-quintic family the centre value approaches the
//! plateau level `b0(ω)` exponentially fast as `ω → 3/16`, so the shooting
//! parameter there is the deficit `d0 = b0 - P(0)`, and the early part of
//! each shot integrates `τ = r·(b0 - P)` instead of `σ`.
//!
//! Outward shooting cannot follow the decaying tail below roughly the square
//! root of machine precision. The returned profile therefore joins the two
//! final bracketing shots (identical to ~1e-9 over the bulk) with an inward
//! integration started from the pure decaying tail `c·e^{-kr}/r`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{Dopri5, OdeError, Tolerance};
use crate::quadrature::{second_derivative_at, Parity};
use crate::OMEGA_MAX;

/// Which equation a profile solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// `-ΔP + P⁵ - P³ + ωP = 0`.
    CubicQuintic,
    /// `-Δg - g³ + g = 0`; the stored frequency is 1.
    CubicOnly,
}

/// Classification of one outward shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShotOutcome {
    /// The profile crossed zero: the centre value was too large.
    Overshoot,
    /// The profile turned upward while still positive: centre value too small.
    Undershoot,
    /// The profile fell below the tail cutoff while decreasing.
    Decayed,
}

/// Shooting failures.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum ShootingError {
    /// Frequency outside the soliton range.
    #[error("omega outside (0, 3/16): {0}")]
    InvalidOmega(f64),
    /// Centre value outside the admissible bracket.
    #[error("centre value {b} outside ({lo}, {hi}]")]
    BracketViolation {
        /// Requested centre value.
        b: f64,
        /// Lower bracket end (exclusive).
        lo: f64,
        /// Upper bracket end.
        hi: f64,
    },
    /// The integrator failed.
    #[error("integrator produced a non-finite state near r = {r}")]
    NonFinite {
        /// Radius of the failure.
        r: f64,
    },
    /// Bisection did not isolate a decaying profile.
    #[error("no convergence after {0} bisection steps")]
    NoConvergence(usize),
    /// The stored profile does not reach the tail cutoff; enlarge `r_max`.
    #[error("profile still at {0:e} at the outer radius")]
    TailNotResolved(f64),
    /// The centre value lies closer to `b0` than the smallest positive
    /// double, which happens only extremely close to `ω = 3/16`.
    #[error("plateau too wide: centre deficit below the double-precision range")]
    PlateauTooWide,
    /// Invalid option value.
    #[error("invalid shooting option: {0}")]
    InvalidOption(&'static str),
}

impl From<OdeError> for ShootingError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::NonFinite { t } | OdeError::StepUnderflow { t } => ShootingError::NonFinite { r: t },
        }
    }
}

/// Knobs for [`solve_ground_state`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Relative width at which bisection stops.
    pub tol_b: f64,
    /// Amplitude the stored profile must fall below at the outer radius.
    pub tail_cutoff: f64,
    /// Number of output grid points.
    pub grid_n: usize,
    /// Outer radius; `None` picks [`default_r_max`].
    pub r_max: Option<f64>,
    /// Integrator tolerances.
    pub step: Tolerance,
    /// Cap on bisection iterations.
    pub max_iterations: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            tol_b: 1e-15,
            tail_cutoff: 1e-12,
            grid_n: 16384,
            r_max: None,
            step: Tolerance::default(),
            max_iterations: 400,
        }
    }
}

/// A ground-state profile sampled on `r_j = j·h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonProfile {
    /// Frequency (1 for the cubic-only profile).
    pub omega: f64,
    /// Equation solved.
    pub kind: ProfileKind,
    /// Radii `r_0 = 0 < r_1 < ... < r_N`.
    pub grid: Vec<f64>,
    /// `P(r_j)`.
    pub values: Vec<f64>,
    /// `P'(r_j)`.
    pub slopes: Vec<f64>,
    /// `P(0)`.
    pub center_value: f64,
    /// `c` in `P(r) ≈ c·e^{-kr}/r` beyond the grid.
    pub tail_constant: f64,
}

/// `sqrt(1/2 + sqrt(1 - 4ω)/2)`, the upper equilibrium and bound on `P`.
pub fn b0(omega: f64) -> f64 {
    (0.5 + 0.5 * (1.0 - 4.0 * omega).max(0.0).sqrt()).sqrt()
}

/// `sqrt(1/2 - sqrt(1 - 4ω)/2)`, the middle equilibrium.
pub fn a0(omega: f64) -> f64 {
    (0.5 - 0.5 * (1.0 - 4.0 * omega).max(0.0).sqrt()).sqrt()
}

/// Smaller positive root of `u⁶/6 - u⁴/4 + ωu²/2`; ground states start above it.
pub fn u_minus(omega: f64) -> f64 {
    ((3.0 - (9.0 - 48.0 * omega).max(0.0).sqrt()) / 4.0).sqrt()
}

/// Default outer radius.
///
/// Beyond the usual `max(50, 40/√ω)` this adds room for the plateau that
/// forms as `ω → 3/16`, whose edge sits near `0.43/(3/16 - ω)`.
pub fn default_r_max(omega: f64) -> f64 {
    let base = 50.0f64.max(40.0 / omega.sqrt());
    let eps = OMEGA_MAX - omega;
    let surface = 9.0 / (64.0 * 3.0f64.sqrt());
    let wall = 2.0 * surface / (0.375 * eps);
    base + 1.5 * wall
}

impl SolitonProfile {
    /// Grid spacing.
    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Outer radius `r_N`.
    pub fn r_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Decay rate `k` of the tail `e^{-kr}`.
    pub fn tail_rate(&self) -> f64 {
        self.omega.sqrt()
    }

    /// `b0(ω)` for the cubic-quintic family.
    pub fn b0(&self) -> f64 {
        b0(self.omega)
    }

    /// `a0(ω)` for the cubic-quintic family.
    pub fn a0(&self) -> f64 {
        a0(self.omega)
    }

    fn equation(&self) -> Equation {
        match self.kind {
            ProfileKind::CubicQuintic => Equation::cubic_quintic(self.omega),
            ProfileKind::CubicOnly => Equation::cubic_only(),
        }
    }

    /// Right side `f(P)` of `P'' + 2P'/r = f(P)`.
    pub fn nonlinearity(&self, p: f64) -> f64 {
        self.equation().f(p)
    }

    /// Linearized potential `f'(P)`: `5P⁴ - 3P² + ω` or `1 - 3g²`.
    pub fn linearized_potential(&self, p: f64) -> f64 {
        let e = self.equation();
        5.0 * e.quintic * p.powi(4) - 3.0 * p * p + e.omega
    }

    /// Largest `|σ'' - r f(P)| / max|σ|` over interior nodes, with `σ''`
    /// from sixth-order centred differences.
    pub fn ode_residual(&self) -> f64 {
        let h = self.spacing();
        let sigma: Vec<f64> = self.grid.iter().zip(&self.values).map(|(r, p)| r * p).collect();
        let smax = sigma.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if smax == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for j in 1..sigma.len() - 3 {
            let d2 = second_derivative_at(h, &sigma, j, Parity::Odd);
            let res = d2 - self.grid[j] * self.nonlinearity(self.values[j]);
            worst = worst.max(res.abs());
        }
        worst / smax
    }

    /// True when values are positive and strictly decreasing, except where
    /// the exact decrease over one step is below the rounding of `P`.
    pub fn is_monotone(&self) -> bool {
        let h = self.spacing();
        self.values.iter().all(|&p| p > 0.0)
            && (0..self.values.len() - 1).all(|j| {
                let (a, b) = (self.values[j], self.values[j + 1]);
                b < a || (b == a && self.slopes[j].abs().max(self.slopes[j + 1].abs()) * h <= 2.0 * f64::EPSILON * a)
            })
    }
}

#[derive(Clone, Copy, Debug)]
struct Equation {
    omega: f64,
    quintic: f64,
    plateau: f64,
}

impl Equation {
    fn cubic_quintic(omega: f64) -> Self {
        Equation { omega, quintic: 1.0, plateau: b0(omega) }
    }

    fn cubic_only() -> Self {
        Equation { omega: 1.0, quintic: 0.0, plateau: f64::NAN }
    }

    fn f(&self, p: f64) -> f64 {
        let p2 = p * p;
        p * (self.quintic * p2 * p2 - p2 + self.omega)
    }

    /// `f(b0 - d)` without cancellation, for small deficits `d`.
    fn f_deficit(&self, d: f64) -> f64 {
        let b = self.plateau;
        let b2 = b * b;
        let q = d * (-4.0 * b2 * b + 2.0 * b) + d * d * (6.0 * b2 - 1.0) - 4.0 * b * d * d * d + d * d * d * d;
        (b - d) * q
    }

    /// Growth rate of deficits near the plateau.
    fn kappa(&self) -> f64 {
        let b2 = self.plateau * self.plateau;
        (4.0 * b2 * b2 - 2.0 * b2).sqrt()
    }

    fn rate(&self) -> f64 {
        self.omega.sqrt()
    }
}

/// Where a shot starts: a plain centre value or a deficit below the plateau.
#[derive(Clone, Copy, Debug)]
enum Start {
    Center(f64),
    Deficit(f64),
}

#[derive(Clone, Copy, Debug)]
struct Grid {
    h: f64,
    n: usize,
}

impl Grid {
    fn r(&self, j: usize) -> f64 {
        j as f64 * self.h
    }
}

/// Recorded outward trajectory.
#[derive(Clone, Debug)]
struct Trajectory {
    values: Vec<f64>,
    slopes: Vec<f64>,
    outcome: ShotOutcome,
    // side of the bracket this shot falls on; decayed shots still lean one way
    lean: ShotOutcome,
}

impl Trajectory {
    fn new(values: Vec<f64>, slopes: Vec<f64>, outcome: ShotOutcome) -> Self {
        Trajectory { values, slopes, outcome, lean: outcome }
    }
}

const R_START: f64 = 1e-4;
const LINEAR_DEFICIT: f64 = 1e-9;
/// Above `P² = NONLINEAR_FRACTION·ω` the linear tail picture does not apply.
const NONLINEAR_FRACTION: f64 = 0.1;

// ln(sinh x / x), stable for all x >= 0
fn ln_sinhc(x: f64) -> f64 {
    if x < 1e-3 {
        (x * x / 6.0).ln_1p()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - (2.0 * x).ln()
    }
}

// d/dx ln(sinh x / x)
fn dln_sinhc(x: f64) -> f64 {
    if x < 1e-3 {
        x / 3.0
    } else {
        1.0 / x.tanh() - 1.0 / x
    }
}

struct Classifier {
    cutoff: f64,
}

impl Classifier {
    fn sigma_event(&self, p: f64, dp: f64) -> Option<ShotOutcome> {
        if p < 0.0 {
            Some(ShotOutcome::Overshoot)
        } else if dp > 0.0 && p > 2.0 * self.cutoff {
            Some(ShotOutcome::Undershoot)
        } else if p < self.cutoff && dp <= 0.0 {
            Some(ShotOutcome::Decayed)
        } else {
            None
        }
    }
}

fn shoot(eq: &Equation, grid: Grid, start: Start, tol: Tolerance, cutoff: f64) -> Result<Trajectory, ShootingError> {
    let n = grid.n;
    let mut values = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    let cls = Classifier { cutoff };
    let mut stepper = Dopri5::new(tol, 0.25 * grid.h, grid.h);

    let center = match start {
        Start::Center(b) => b,
        Start::Deficit(d0) => eq.plateau - d0,
    };
    values.push(center);
    slopes.push(0.0);

    // position reached so far and the next grid index to fill
    let mut r;
    let mut j = 1usize;
    let mut state: [f64; 2];
    let mut on_plateau = false;

    match start {
        Start::Deficit(d0) if d0 <= 0.5 * eq.plateau => {
            on_plateau = true;
            if d0 < LINEAR_DEFICIT {
                // d(r) = d0·sinh(κr)/(κr) until d reaches LINEAR_DEFICIT
                let kappa = eq.kappa();
                let target = (LINEAR_DEFICIT / d0).ln();
                let (mut lo, mut hi) = (0.0f64, 800.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if ln_sinhc(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let r_a = lo / kappa;
                let ln_d0 = d0.ln();
                let deficit = |r: f64| {
                    let x = kappa * r;
                    let d = (ln_d0 + ln_sinhc(x)).exp();
                    (d, d * kappa * dln_sinhc(x))
                };
                while j < n && grid.r(j) <= r_a {
                    let (d, dd) = deficit(grid.r(j));
                    values.push(eq.plateau - d);
                    slopes.push(-dd);
                    j += 1;
                }
                if j >= n {
                    return Ok(Trajectory::new(values, slopes, ShotOutcome::Overshoot));
                }
                r = r_a;
                let (d, dd) = deficit(r_a);
                state = [r * d, d + r * dd];
            } else {
                r = R_START;
                let fb = eq.f_deficit(d0);
                let d = d0 - fb * r * r / 6.0;
                state = [r * d, d0 - fb * r * r / 2.0];
            }
        }
        _ => {
            let b = center;
            r = R_START;
            let fb = eq.f(b);
            state = [r * (b + fb * r * r / 6.0), b + fb * r * r / 2.0];
        }
    }

    if on_plateau {
        let b0v = eq.plateau;
        let rhs = |r: f64, y: &[f64; 2]| [y[1], -r * eq.f_deficit(y[0] / r)];
        while j < n {
            let rj = grid.r(j);
            stepper.advance(&rhs, r, &mut state, rj)?;
            r = rj;
            let d = state[0] / r;
            let dd = (state[1] - d) / r;
            values.push(b0v - d);
            slopes.push(-dd);
            j += 1;
            if dd < 0.0 {
                return Ok(Trajectory::new(values, slopes, ShotOutcome::Undershoot));
            }
            if d > 0.5 * b0v {
                state = [r * b0v - state[0], b0v - state[1]];
                break;
            }
        }
        if j >= n {
            return Ok(Trajectory::new(values, slopes, ShotOutcome::Overshoot));
        }
    }

    let rhs = |r: f64, y: &[f64; 2]| {
        let p = y[0] / r;
        let p2 = p * p;
        [y[1], y[0] * (eq.quintic * p2 * p2 - p2 + eq.omega)]
    };
    while j < n {
        let rj = grid.r(j);
        stepper.advance(&rhs, r, &mut state, rj)?;
        r = rj;
        let p = state[0] / r;
        let dp = (state[1] - p) / r;
        values.push(p);
        slopes.push(dp);
        j += 1;
        if let Some(outcome) = cls.sigma_event(p, dp) {
            let mut t = Trajectory::new(values, slopes, outcome);
            if outcome == ShotOutcome::Decayed {
                t.lean = growing_mode_sign(eq, &state);
            }
            return Ok(t);
        }
    }
    // still inside the wall at r_max: the plateau is longer than the true one
    let p = state[0] / r;
    let lean = if p * p > NONLINEAR_FRACTION * eq.omega { ShotOutcome::Overshoot } else { growing_mode_sign(eq, &state) };
    Ok(Trajectory::new(values, slopes, lean))
}

/// In the linear tail `σ ≈ A e^{-kr} + B e^{kr}` and `σ' + kσ = 2kB e^{kr}`;
/// a positive growing component turns the profile upward.
fn growing_mode_sign(eq: &Equation, state: &[f64; 2]) -> ShotOutcome {
    if state[1] + eq.rate() * state[0] > 0.0 {
        ShotOutcome::Undershoot
    } else {
        ShotOutcome::Overshoot
    }
}

fn make_grid(r_max: f64, n: usize) -> Result<Grid, ShootingError> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(ShootingError::InvalidOption("r_max must be positive"));
    }
    if n < 16 {
        return Err(ShootingError::InvalidOption("grid_n must be at least 16"));
    }
    Ok(Grid { h: r_max / (n - 1) as f64, n })
}

/// One outward shot from centre value `b` on a uniform grid of `grid_n`
/// points over `[0, r_max]`.
///
/// Returns the classification together with the radius where it was made.
pub fn shoot_once(
    omega: f64,
    b: f64,
    r_max: f64,
    grid_n: usize,
    step: Tolerance,
) -> Result<(ShotOutcome, f64), ShootingError> {
    if !crate::omega_in_range(omega) {
        return Err(ShootingError::InvalidOmega(omega));
    }
    let (lo, hi) = (u_minus(omega), b0(omega));
    if !(b > lo && b <= hi) {
        return Err(ShootingError::BracketViolation { b, lo, hi });
    }
    let eq = Equation::cubic_quintic(omega);
    let grid = make_grid(r_max, grid_n)?;
    let t = shoot(&eq, grid, Start::Deficit(hi - b), step, 1e-12)?;
    let radius = grid.r(t.values.len() - 1);
    Ok((t.outcome, radius))
}

/// Cubic-quintic ground state `P_ω` for `0 < ω < 3/16`.
pub fn solve_ground_state(omega: f64, opts: &ShootingOptions) -> Result<SolitonProfile, ShootingError> {
    if !crate::omega_in_range(omega) {
        return Err(ShootingError::InvalidOmega(omega));
    }
    let eq = Equation::cubic_quintic(omega);
    debug_assert!(u_minus(omega) < eq.plateau);
    let r_max = opts.r_max.unwrap_or_else(|| default_r_max(omega));
    let grid = make_grid(r_max, opts.grid_n)?;
    // deficit parameter: tiny deficits overshoot, d0 = b0 - u_minus undershoots
    let over = 1e-300;
    let under = eq.plateau - u_minus(omega);
    bisect(&eq, grid, opts, over, under, Start::Deficit)
        .and_then(|(lo, hi)| assemble(&eq, grid, opts, ProfileKind::CubicQuintic, lo, hi))
}

/// Cubic ground state `g` of `-Δg - g³ + g = 0`.
pub fn solve_cubic_ground_state(opts: &ShootingOptions) -> Result<SolitonProfile, ShootingError> {
    let eq = Equation::cubic_only();
    let r_max = opts.r_max.unwrap_or(50.0);
    let grid = make_grid(r_max, opts.grid_n)?;
    let mut over = 10.0;
    while shoot(&eq, grid, Start::Center(over), opts.step, opts.tail_cutoff)?.lean != ShotOutcome::Overshoot {
        over *= 2.0;
        if over > 1e6 {
            return Err(ShootingError::NoConvergence(0));
        }
    }
    let under = 2.0f64.sqrt();
    bisect(&eq, grid, opts, over, under, Start::Center)
        .and_then(|(lo, hi)| assemble(&eq, grid, opts, ProfileKind::CubicOnly, lo, hi))
}

fn midpoint(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 && (a / b > 2.0 || b / a > 2.0) {
        (a.ln() * 0.5 + b.ln() * 0.5).exp()
    } else {
        0.5 * (a + b)
    }
}

/// Bisection between a parameter that overshoots and one that undershoots.
/// Returns the final (undershoot, overshoot) trajectories.
fn bisect(
    eq: &Equation,
    grid: Grid,
    opts: &ShootingOptions,
    mut over: f64,
    mut under: f64,
    start: fn(f64) -> Start,
) -> Result<(Trajectory, Trajectory), ShootingError> {
    if !(opts.tol_b > 0.0) {
        return Err(ShootingError::InvalidOption("tol_b must be positive"));
    }
    let shot = |x: f64| shoot(eq, grid, start(x), opts.step, opts.tail_cutoff);
    let mut t_over = shot(over)?;
    let mut t_under = shot(under)?;
    if t_over.lean != ShotOutcome::Overshoot {
        return Err(ShootingError::PlateauTooWide);
    }
    if t_under.lean != ShotOutcome::Undershoot {
        return Err(ShootingError::NoConvergence(0));
    }
    for _ in 0..opts.max_iterations {
        let width = (over - under).abs();
        let mid = midpoint(over, under);
        if width <= opts.tol_b * over.abs().max(under.abs()) || mid == over || mid == under {
            return Ok((t_under, t_over));
        }
        let t = shot(mid)?;
        if t.lean == ShotOutcome::Overshoot {
            over = mid;
            t_over = t;
        } else {
            under = mid;
            t_under = t;
        }
    }
    Err(ShootingError::NoConvergence(opts.max_iterations))
}

/// Join the bracketing shots over the bulk and an inward tail integration.
fn assemble(
    eq: &Equation,
    grid: Grid,
    opts: &ShootingOptions,
    kind: ProfileKind,
    lo: Trajectory,
    hi: Trajectory,
) -> Result<SolitonProfile, ShootingError> {
    let n = grid.n;
    let common = lo.values.len().min(hi.values.len());
    let mut jm = 0;
    for j in 0..common {
        let (a, b) = (lo.values[j], hi.values[j]);
        if a <= 0.0 || b <= 0.0 || (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
            break;
        }
        // the profile must still be decreasing at the junction
        if j > 0 && (lo.slopes[j] > 0.0 || hi.slopes[j] > 0.0) {
            break;
        }
        jm = j;
    }
    if jm < 4 {
        return Err(ShootingError::NoConvergence(0));
    }
    let mut values = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    for j in 0..=jm {
        values.push(0.5 * (lo.values[j] + hi.values[j]));
        slopes.push(0.5 * (lo.slopes[j] + hi.slopes[j]));
    }
    let k = eq.rate();
    let r_n = grid.r(n - 1);
    let tail_constant;
    if jm < n - 1 {
        let r_m = grid.r(jm);
        let sigma_m = r_m * values[jm];
        let mut c = sigma_m * (k * r_m).exp();
        let tol = Tolerance { abs: 1e-300, rel: opts.step.rel };
        let rhs = |r: f64, y: &[f64; 2]| {
            let p = y[0] / r;
            let p2 = p * p;
            [y[1], y[0] * (eq.quintic * p2 * p2 - p2 + eq.omega)]
        };
        let mut inner: Vec<(f64, f64)> = Vec::new();
        for _ in 0..30 {
            inner.clear();
            let s_end = c * (-k * r_n).exp();
            let mut y = [s_end, -k * s_end];
            let mut stepper = Dopri5::new(tol, 0.25 * grid.h, grid.h);
            inner.push((y[0] / r_n, (y[1] - y[0] / r_n) / r_n));
            let mut r = r_n;
            for j in (jm..n - 1).rev() {
                let rj = grid.r(j);
                stepper.advance(&rhs, r, &mut y, rj)?;
                r = rj;
                let p = y[0] / r;
                inner.push((p, (y[1] - p) / r));
            }
            let ratio = sigma_m / y[0];
            c *= ratio;
            if (ratio - 1.0).abs() < 1e-14 {
                break;
            }
        }
        // inner runs from r_N down to r_m; r_m itself stays on the outward side
        for &(p, dp) in inner.iter().rev().skip(1) {
            values.push(p);
            slopes.push(dp);
        }
        tail_constant = fit_tail(&values, grid, k).unwrap_or(c);
    } else {
        tail_constant = fit_tail(&values, grid, k).unwrap_or(0.0);
    }
    let last = values[n - 1];
    if !(last < opts.tail_cutoff) {
        return Err(ShootingError::TailNotResolved(last));
    }
    let center_value = values[0];
    let omega = eq.omega;
    Ok(SolitonProfile {
        omega,
        kind,
        grid: (0..n).map(|j| grid.r(j)).collect(),
        values,
        slopes,
        center_value,
        tail_constant,
    })
}

/// `exp(mean(ln(rP) + kr))` over the last decade of decay.
fn fit_tail(values: &[f64], grid: Grid, k: f64) -> Option<f64> {
    let n = values.len();
    let r_n = grid.r(n - 1);
    let from = r_n - core::f64::consts::LN_10 / k;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (j, &p) in values.iter().enumerate().rev() {
        let r = grid.r(j);
        if r < from || p <= 0.0 {
            break;
        }
        sum += (r * p).ln() + k * r;
        count += 1;
    }
    (count > 0).then(|| (sum / count as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_constants() {
        assert!((b0(3.0 / 16.0) - 3.0f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((a0(3.0 / 16.0) - 0.5).abs() < 1e-15);
        let w = 0.1;
        let u = u_minus(w);
        let p = u.powi(6) / 6.0 - u.powi(4) / 4.0 + w * u * u / 2.0;
        assert!(p.abs() < 1e-16);
        assert!(a0(w) < u && u < b0(w));
    }

    #[test]
    fn deficit_form_matches_direct() {
        let eq = Equation::cubic_quintic(0.1);
        for d in [1e-3, 0.01, 0.2, 0.4] {
            let direct = eq.f(eq.plateau - d);
            assert!((eq.f_deficit(d) - direct).abs() < 1e-14, "{d}");
        }
        let k2 = 5.0 * eq.plateau.powi(4) - 3.0 * eq.plateau.powi(2) + 0.1;
        assert!((eq.kappa() * eq.kappa() - k2).abs() < 1e-14);
    }

    #[test]
    fn sinhc_helpers() {
        for x in [1e-5, 1e-2, 0.5, 3.0, 40.0] {
            let exact = (libm::sinh(x) / x).ln();
            assert!((ln_sinhc(x) - exact).abs() < 1e-12 * exact.abs() + 1e-14, "{x}");
        }
    }

    #[test]
    fn invalid_inputs() {
        let o = ShootingOptions::default();
        assert!(matches!(solve_ground_state(0.2, &o), Err(ShootingError::InvalidOmega(_))));
        assert!(matches!(solve_ground_state(0.0, &o), Err(ShootingError::InvalidOmega(_))));
        let t = Tolerance::default();
        assert!(matches!(shoot_once(0.1, 0.1, 50.0, 1024, t), Err(ShootingError::BracketViolation { .. })));
        assert!(matches!(shoot_once(0.1, 2.0, 50.0, 1024, t), Err(ShootingError::BracketViolation { .. })));
    }

    #[test]
    fn endpoint_shots() {
        let t = Tolerance::default();
        let (o, _) = shoot_once(0.1, u_minus(0.1) + 1e-9, 200.0, 8192, t).unwrap();
        assert_eq!(o, ShotOutcome::Undershoot);
        let (o, _) = shoot_once(0.054735, b0(0.054735), 200.0, 8192, t).unwrap();
        assert_eq!(o, ShotOutcome::Overshoot);
    }
}
