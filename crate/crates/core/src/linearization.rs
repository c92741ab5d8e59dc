//! Zero-energy radial solution of the linearized operator
//! `L = -Δ + f'(P)` and the Sturm count of its negative eigenvalues.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{Dopri5, OdeError, Tolerance};
use crate::quadrature::{derivative, hermite, second_derivative_at, Parity};
use crate::shooting::SolitonProfile;

/// How `δ` behaves at the end of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalBehavior {
    /// Grows exponentially with negative sign.
    DivergesNegative,
    /// Grows exponentially with positive sign.
    DivergesPositive,
    /// Decays: zero would be a radial eigenvalue.
    Decays,
    /// Neither growth nor decay resolved on the grid.
    Indeterminate,
}

/// Linearization failures.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum LinearizationError {
    /// Terminal behaviour could not be classified; re-solve with larger `r_max`.
    #[error("terminal behaviour indeterminate at r = {0}")]
    ProfileTooShort(f64),
    /// The integrator failed.
    #[error("integrator produced a non-finite state near r = {0}")]
    NonFinite(f64),
}

impl From<OdeError> for LinearizationError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::NonFinite { t } | OdeError::StepUnderflow { t } => LinearizationError::NonFinite(t),
        }
    }
}

/// Solution of `-Δδ + f'(P)δ = 0`, `δ(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSolution {
    /// Frequency of the underlying profile.
    pub omega: f64,
    /// Radii (the profile grid).
    pub grid: Vec<f64>,
    /// `δ(r_j)`.
    pub delta_values: Vec<f64>,
    /// Radii of the interior sign changes, linearly interpolated.
    pub sign_changes: Vec<f64>,
    /// First sign change `r₁`, if any.
    pub sign_change_radius: Option<f64>,
    /// `P(r₁)`, if there is a sign change.
    pub profile_at_sign_change: Option<f64>,
    /// Behaviour at the end of the grid.
    pub terminal_behavior: TerminalBehavior,
}

/// Integrate `σ'' = f'(P)σ` for `σ = rδ` along the profile grid, with `P`
/// Hermite-interpolated between nodes.
pub fn solve_delta(profile: &SolitonProfile) -> Result<DeltaSolution, LinearizationError> {
    let h = profile.spacing();
    let n = profile.grid.len();
    let potential = |r: f64| profile.linearized_potential(hermite(h, &profile.values, &profile.slopes, r));
    let rhs = |r: f64, y: &[f64; 2]| [y[1], potential(r) * y[0]];

    let v0 = potential(0.0);
    let r0 = 1e-4;
    let mut y = [r0 + v0 * r0 * r0 * r0 / 6.0, 1.0 + v0 * r0 * r0 / 2.0];
    let mut r = r0;
    let mut stepper = Dopri5::new(Tolerance::default(), 0.25 * h, h);
    let mut delta = Vec::with_capacity(n);
    delta.push(1.0);
    let mut sign_changes = Vec::new();
    for j in 1..n {
        let rj = profile.grid[j];
        stepper.advance(&rhs, r, &mut y, rj)?;
        r = rj;
        let d = y[0] / r;
        let prev = delta[j - 1];
        if (d < 0.0) != (prev < 0.0) && d != 0.0 {
            let t = prev / (prev - d);
            sign_changes.push(profile.grid[j - 1] + t * h);
        }
        delta.push(d);
    }

    let terminal = classify(profile, &delta);
    let r1 = sign_changes.first().copied();
    Ok(DeltaSolution {
        omega: profile.omega,
        grid: profile.grid.clone(),
        delta_values: delta,
        profile_at_sign_change: r1.map(|r| hermite(h, &profile.values, &profile.slopes, r)),
        sign_change_radius: r1,
        sign_changes,
        terminal_behavior: terminal,
    })
}

/// Sign of the slope of `ln|δ|` over the last decade of the profile tail.
fn classify(profile: &SolitonProfile, delta: &[f64]) -> TerminalBehavior {
    let n = delta.len();
    let k = profile.tail_rate();
    let r_n = profile.grid[n - 1];
    let from = r_n - core::f64::consts::LN_10 / k;
    let start = profile.grid.partition_point(|&r| r < from).min(n - 2);
    let tail = &delta[start..];
    let sign = tail[0] < 0.0;
    if tail.iter().any(|d| *d == 0.0 || (*d < 0.0) != sign || !d.is_finite()) {
        return TerminalBehavior::Indeterminate;
    }
    let xs: Vec<f64> = profile.grid[start..].to_vec();
    let ys: Vec<f64> = tail.iter().map(|d| d.abs().ln()).collect();
    match crate::roots::linear_fit(&xs, &ys) {
        Some((s, _)) if s > 0.0 => {
            if sign {
                TerminalBehavior::DivergesNegative
            } else {
                TerminalBehavior::DivergesPositive
            }
        }
        Some((s, _)) if s < 0.0 => TerminalBehavior::Decays,
        _ => TerminalBehavior::Indeterminate,
    }
}

/// Like [`solve_delta`] but rejects an indeterminate terminal behaviour.
pub fn solve_delta_checked(profile: &SolitonProfile) -> Result<DeltaSolution, LinearizationError> {
    let ds = solve_delta(profile)?;
    if ds.terminal_behavior == TerminalBehavior::Indeterminate {
        return Err(LinearizationError::ProfileTooShort(profile.r_max()));
    }
    Ok(ds)
}

/// Number of interior zeros of `δ`, which by Sturm oscillation equals the
/// number of negative radial eigenvalues of the linearized operator.
pub fn morse_index_radial(ds: &DeltaSolution) -> usize {
    ds.sign_changes.len()
}

/// `a0(ω) < P(r₁) < 1/√2`.
pub fn sign_change_in_window(ds: &DeltaSolution) -> bool {
    let a0 = crate::shooting::a0(ds.omega);
    ds.profile_at_sign_change.is_some_and(|p| p > a0 && p < core::f64::consts::FRAC_1_SQRT_2)
}

/// Check of the `ℓ = 1` zero mode `f = -P'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeReport {
    /// Largest `|-f'' - 2f'/r + 2f/r² + f'(P)f|` over the sum of the
    /// magnitudes of its terms, maximised over the grid.
    pub residual: f64,
    /// `f > 0` at every node with `r > 0`.
    pub positive: bool,
}

/// Residual of the `ℓ = 1` radial equation for `f = -P'`.
pub fn zero_mode_residual(profile: &SolitonProfile) -> ZeroModeReport {
    let h = profile.spacing();
    let f: Vec<f64> = profile.slopes.iter().map(|s| -s).collect();
    let df = derivative(h, &f, Parity::Odd);
    let n = f.len();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 1..n - 3 {
        let r = profile.grid[j];
        let d2 = second_derivative_at(h, &f, j, Parity::Odd);
        let v = profile.linearized_potential(profile.values[j]) * f[j];
        let terms = [-d2, -2.0 * df[j] / r, 2.0 * f[j] / (r * r), v];
        worst = worst.max(terms.iter().sum::<f64>().abs());
        scale = scale.max(terms.iter().map(|t| t.abs()).sum());
    }
    ZeroModeReport {
        residual: if worst == 0.0 { 0.0 } else { worst / scale },
        positive: f[1..].iter().all(|&v| v > 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::ProfileKind;

    #[test]
    fn no_well_no_zeros() {
        let n = 4000;
        let h = 0.05;
        let p = SolitonProfile {
            omega: 0.1,
            kind: ProfileKind::CubicQuintic,
            grid: (0..n).map(|j| j as f64 * h).collect(),
            values: alloc::vec![0.0; n],
            slopes: alloc::vec![0.0; n],
            center_value: 0.0,
            tail_constant: 0.0,
        };
        let ds = solve_delta(&p).unwrap();
        assert_eq!(morse_index_radial(&ds), 0);
        assert_eq!(ds.terminal_behavior, TerminalBehavior::DivergesPositive);
        // δ = sinh(kr)/(kr)
        let k = 0.1f64.sqrt();
        let r = 10.0;
        let exact = libm::sinh(k * r) / (k * r);
        assert!((ds.delta_values[200] - exact).abs() < 1e-8 * exact);
        assert_eq!(ds.delta_values[0], 1.0);
    }
}
