//! The ground-state branch `ω ↦ P_ω`: sweeps, derivative identities,
//! distinguished points and both asymptotic regimes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::functionals::{evaluate, FunctionalError, FunctionalSet, RadialFunction};
use crate::quadrature::three_point_slope;
use crate::roots::{golden_min, illinois, linear_fit, linspace, logspace, parabola_vertex};
use crate::shooting::{solve_ground_state, ShootingError, ShootingOptions};
use crate::OMEGA_MAX;

/// Branch-level failures.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum BranchError {
    /// A solve failed at this frequency.
    #[error("solve failed at omega = {omega}: {source}")]
    Shooting {
        /// Offending frequency.
        omega: f64,
        /// Underlying error.
        source: ShootingError,
    },
    /// Quadrature rejected the profile.
    #[error("functionals failed at omega = {omega}: {source}")]
    Functionals {
        /// Offending frequency.
        omega: f64,
        /// Underlying error.
        source: FunctionalError,
    },
    /// Too few rows for a finite-difference check.
    #[error("need at least {0} rows")]
    InsufficientRows(usize),
    /// No pair of adjacent rows brackets the target.
    #[error("target not bracketed by the table: {0}")]
    NotBracketed(&'static str),
}

/// One solved frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    /// Frequency.
    pub omega: f64,
    /// `P_ω(0)`.
    pub center_value: f64,
    /// Tail amplitude.
    pub tail_constant: f64,
    /// Functionals of `P_ω`.
    pub functionals: FunctionalSet,
}

/// A frequency whose solve failed, kept in the table instead of aborting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    /// Frequency.
    pub omega: f64,
    /// Error message.
    pub message: String,
}

/// The three distinguished points of the branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoints {
    /// `β(ω) = 1/3`.
    pub beta_third: BranchRow,
    /// Minimum of `M(ω)`.
    pub min_mass: BranchRow,
    /// `E(ω) = 0`, equivalently `β = 1`; its mass is `M(Q₁)`.
    pub zero_energy: BranchRow,
}

/// Small-frequency comparison against the cubic ground state `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallOmegaPoint {
    /// Frequency.
    pub omega: f64,
    /// `|M√ω - ∫g²| / ∫g²`.
    pub mass_leading: f64,
    /// Same after subtracting `(ω/2)∫g⁶`.
    pub mass_corrected: f64,
    /// `|E/√ω - ∫g²/2| / (∫g²/2)`.
    pub energy_leading: f64,
    /// Same after adding `(ω/12)∫g⁶`.
    pub energy_corrected: f64,
    /// `(β/ω) / β(g)`.
    pub beta_ratio: f64,
}

/// Log-log slopes against `3/16 - ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeOmegaFit {
    /// Slope of `ln M`.
    pub mass: f64,
    /// Slope of `ln |E|`.
    pub energy: f64,
    /// Slope of `ln β`.
    pub beta: f64,
    /// Slope of `ln G`.
    pub kinetic: f64,
    /// Rows used.
    pub points: usize,
}

/// Asymptotic reports attached to a table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFits {
    /// Small-`ω` comparisons.
    pub small: Vec<SmallOmegaPoint>,
    /// Near-`3/16` slopes.
    pub large: Option<LargeOmegaFit>,
}

/// An `ω`-ordered sweep of the branch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BranchTable {
    /// Solved rows, strictly increasing in `ω`.
    pub rows: Vec<BranchRow>,
    /// Frequencies that failed.
    pub failures: Vec<RowFailure>,
    /// Refined distinguished points, once located.
    pub special_points: Option<SpecialPoints>,
    /// Asymptotic fits, once computed.
    pub asymptotic_fits: AsymptoticFits,
}

/// Solve `P_ω` and evaluate its functionals.
pub fn solve_row(omega: f64, opts: &ShootingOptions) -> Result<BranchRow, BranchError> {
    let p = solve_ground_state(omega, opts).map_err(|source| BranchError::Shooting { omega, source })?;
    let fs = evaluate(&RadialFunction::from(&p)).map_err(|source| BranchError::Functionals { omega, source })?;
    Ok(BranchRow { omega, center_value: p.center_value, tail_constant: p.tail_constant, functionals: fs })
}

/// Default sweep: 140 log-spaced frequencies on `[1e-3, 0.12)` and 60
/// linearly spaced on `[0.12, 0.186]`.
pub fn default_omegas() -> Vec<f64> {
    let mut w = logspace(1e-3, 0.12, 141);
    w.pop();
    w.extend(linspace(0.12, 0.186, 60));
    w
}

impl BranchTable {
    /// Assemble from per-frequency results in any order.
    pub fn from_results<I>(results: I) -> Self
    where
        I: IntoIterator<Item = (f64, Result<BranchRow, BranchError>)>,
    {
        let mut t = BranchTable::default();
        for (omega, r) in results {
            match r {
                Ok(row) => t.insert(row),
                Err(e) => t.failures.push(RowFailure { omega, message: e.to_string() }),
            }
        }
        t.failures.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        t
    }

    /// Insert a row, keeping `ω` strictly increasing (a duplicate replaces).
    pub fn insert(&mut self, row: BranchRow) {
        let i = self.rows.partition_point(|r| r.omega < row.omega);
        if i < self.rows.len() && self.rows[i].omega == row.omega {
            self.rows[i] = row;
        } else {
            self.rows.insert(i, row);
        }
    }

    /// Add the refined special points as rows.
    pub fn insert_special_rows(&mut self) {
        if let Some(sp) = self.special_points {
            for r in [sp.beta_third, sp.min_mass, sp.zero_energy] {
                self.insert(r);
            }
        }
    }

    /// Frequencies.
    pub fn omegas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.omega).collect()
    }

    /// Column extracted from the functionals.
    pub fn column(&self, f: impl Fn(&FunctionalSet) -> f64) -> Vec<f64> {
        self.rows.iter().map(|r| f(&r.functionals)).collect()
    }

    /// `ω` strictly increasing and inside `(0, 3/16)`.
    pub fn is_ordered(&self) -> bool {
        self.rows.iter().all(|r| crate::omega_in_range(r.omega)) && self.rows.windows(2).all(|w| w[0].omega < w[1].omega)
    }

    /// `G(ω)` strictly increasing row to row.
    pub fn kinetic_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].functionals.kinetic < w[1].functionals.kinetic)
    }
}

/// Sequential sweep; failures are recorded per row.
pub fn sweep(omegas: &[f64], opts: &ShootingOptions) -> BranchTable {
    BranchTable::from_results(omegas.iter().map(|&w| (w, solve_row(w, opts))))
}

/// Worst mismatches of the branch derivative identities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    /// Largest `|dG/dω - (3/2)M| / ((3/2)M)`.
    pub kinetic: f64,
    /// Largest `|dE/dω + (ω/2)dM/dω| / (|dE/dω| + (ω/2)|dM/dω|)`.
    pub energy: f64,
    /// Frequencies where `dM/dω < (3β-1)M/(2ω)` failed.
    pub mass_bound_violations: Vec<f64>,
    /// Frequencies (midpoints) where `dM/dω` changes sign.
    pub mass_turns: Vec<f64>,
    /// Every sign change of `dM/dω` is matched by an opposite one of `dE/dω`.
    pub energy_turns_opposite: bool,
}

/// Finite-difference checks of `dG/dω = (3/2)M`, `dE/dω = -(ω/2)dM/dω` and
/// the strict mass-slope bound at every interior row.
pub fn derivative_checks(table: &BranchTable) -> Result<DerivativeReport, BranchError> {
    let rows = &table.rows;
    if rows.len() < 3 {
        return Err(BranchError::InsufficientRows(3));
    }
    let mut rep = DerivativeReport { energy_turns_opposite: true, ..Default::default() };
    let mut prev: Option<(f64, f64)> = None;
    for w in rows.windows(3) {
        let x = [w[0].omega, w[1].omega, w[2].omega];
        let col = |f: fn(&FunctionalSet) -> f64| [f(&w[0].functionals), f(&w[1].functionals), f(&w[2].functionals)];
        let dg = three_point_slope(x, col(|f| f.kinetic));
        let dm = three_point_slope(x, col(|f| f.mass));
        let de = three_point_slope(x, col(|f| f.energy));
        let f = &w[1].functionals;
        let om = x[1];
        rep.kinetic = rep.kinetic.max((dg - 1.5 * f.mass).abs() / (1.5 * f.mass));
        let scale = de.abs() + 0.5 * om * dm.abs();
        if scale > 0.0 {
            rep.energy = rep.energy.max((de + 0.5 * om * dm).abs() / scale);
        }
        if !(dm < (3.0 * f.beta - 1.0) * f.mass / (2.0 * om)) {
            rep.mass_bound_violations.push(om);
        }
        if let Some((pdm, pde)) = prev {
            if (pdm < 0.0) != (dm < 0.0) {
                rep.mass_turns.push(om);
                let opposite = (pde < 0.0) != (de < 0.0) && (de < 0.0) != (dm < 0.0);
                rep.energy_turns_opposite &= opposite;
            }
        }
        prev = Some((dm, de));
    }
    Ok(rep)
}

fn bracket(table: &BranchTable, f: impl Fn(&BranchRow) -> f64) -> Option<(BranchRow, BranchRow)> {
    table.rows.windows(2).find(|w| (f(&w[0]) < 0.0) != (f(&w[1]) < 0.0)).map(|w| (w[0], w[1]))
}

fn refine_root(
    table: &BranchTable,
    opts: &ShootingOptions,
    target: &'static str,
    f: impl Fn(&BranchRow) -> f64,
) -> Result<BranchRow, BranchError> {
    let (a, b) = bracket(table, &f).ok_or(BranchError::NotBracketed(target))?;
    refine_between(&a, &b, opts, f)
}

/// Refine a sign change of `f` between two rows with fresh solves.
pub(crate) fn refine_between(
    a: &BranchRow,
    b: &BranchRow,
    opts: &ShootingOptions,
    f: impl Fn(&BranchRow) -> f64,
) -> Result<BranchRow, BranchError> {
    let mut best: Option<BranchRow> = None;
    let omega = illinois(
        |w| {
            let r = solve_row(w, opts)?;
            let v = f(&r);
            if best.is_none_or(|b| v.abs() < f(&b).abs()) {
                best = Some(r);
            }
            Ok::<_, BranchError>(v)
        },
        a.omega,
        f(a),
        b.omega,
        f(b),
        1e-12,
        60,
    )?;
    match best {
        Some(r) if r.omega == omega => Ok(r),
        _ => solve_row(omega, opts),
    }
}

/// Refine `β = 1/3`, the mass minimum and `E = 0` with fresh solves.
pub fn locate_special_points(table: &BranchTable, opts: &ShootingOptions) -> Result<SpecialPoints, BranchError> {
    let beta_third = refine_root(table, opts, "beta = 1/3", |r| r.functionals.beta - 1.0 / 3.0)?;
    let zero_energy = refine_root(table, opts, "E = 0", |r| r.functionals.energy / r.functionals.kinetic)?;

    let rows = &table.rows;
    let i = (0..rows.len())
        .min_by(|&a, &b| rows[a].functionals.mass.total_cmp(&rows[b].functionals.mass))
        .ok_or(BranchError::NotBracketed("minimal mass"))?;
    if i == 0 || i + 1 >= rows.len() {
        return Err(BranchError::NotBracketed("minimal mass"));
    }
    let lo = i.saturating_sub(2);
    let hi = (i + 3).min(rows.len());
    let xs: Vec<f64> = rows[lo..hi].iter().map(|r| r.omega).collect();
    let ys: Vec<f64> = rows[lo..hi].iter().map(|r| r.functionals.mass).collect();
    let (a, b) = (rows[i - 1].omega, rows[i + 1].omega);
    let centre = parabola_vertex(&xs, &ys).filter(|v| *v > a && *v < b).unwrap_or(rows[i].omega);
    let half = 0.5 * (b - a);
    let (wa, wb) = ((centre - 0.5 * half).max(a), (centre + 0.5 * half).min(b));
    let (w_min, _) = golden_min(|w| solve_row(w, opts).map(|r| r.functionals.mass), wa, wb, 1e-8, 80)?;
    let min_mass = solve_row(w_min, opts)?;
    Ok(SpecialPoints { beta_third, min_mass, zero_energy })
}

/// Reference integrals of the cubic ground state `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicReference {
    /// `∫g²`.
    pub mass: f64,
    /// `∫g⁶`.
    pub sextic: f64,
    /// `β(g) = ∫g⁶ / ∫|∇g|²`.
    pub beta: f64,
}

impl From<&FunctionalSet> for CubicReference {
    fn from(f: &FunctionalSet) -> Self {
        CubicReference { mass: f.mass, sextic: f.sextic, beta: f.beta }
    }
}

/// Compare rows against the small-`ω` expansions
/// `M = ∫g²/√ω + (√ω/2)∫g⁶`, `E = (√ω/2)∫g² - (ω^{3/2}/12)∫g⁶`, `β ≈ ωβ(g)`.
pub fn asymptotics_small_omega(g: &CubicReference, rows: &[BranchRow]) -> Vec<SmallOmegaPoint> {
    rows.iter()
        .map(|r| {
            let w = r.omega;
            let s = w.sqrt();
            let f = &r.functionals;
            let m = f.mass * s;
            let e = f.energy / s;
            SmallOmegaPoint {
                omega: w,
                mass_leading: (m - g.mass).abs() / g.mass,
                mass_corrected: (m - 0.5 * w * g.sextic - g.mass).abs() / g.mass,
                energy_leading: (e - 0.5 * g.mass).abs() / (0.5 * g.mass),
                energy_corrected: (e + w * g.sextic / 12.0 - 0.5 * g.mass).abs() / (0.5 * g.mass),
                beta_ratio: f.beta / w / g.beta,
            }
        })
        .collect()
}

/// Log-log slopes of `M`, `|E|`, `β`, `G` against `3/16 - ω` over rows in
/// `[lo, hi]`.
pub fn asymptotics_large_omega(rows: &[BranchRow], lo: f64, hi: f64) -> Option<LargeOmegaFit> {
    let sel: Vec<&BranchRow> = rows.iter().filter(|r| r.omega >= lo && r.omega <= hi).collect();
    if sel.len() < 2 {
        return None;
    }
    let x: Vec<f64> = sel.iter().map(|r| (OMEGA_MAX - r.omega).ln()).collect();
    let slope = |f: fn(&FunctionalSet) -> f64| {
        let y: Vec<f64> = sel.iter().map(|r| f(&r.functionals).abs().ln()).collect();
        linear_fit(&x, &y).map(|(s, _)| s)
    };
    Some(LargeOmegaFit {
        mass: slope(|f| f.mass)?,
        energy: slope(|f| f.energy)?,
        beta: slope(|f| f.beta)?,
        kinetic: slope(|f| f.kinetic)?,
        points: sel.len(),
    })
}

/// Empirical monotonicity scans; anomalies are reported, never fatal.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConjectureScan {
    /// Frequencies where `β` failed to increase from the previous row.
    pub beta_not_increasing: Vec<f64>,
    /// Number of sign changes of `ΔM` between consecutive rows.
    pub mass_slope_sign_changes: usize,
}

impl ConjectureScan {
    /// Human-readable warnings; empty when both scans look as expected.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.beta_not_increasing.is_empty() {
            out.push(format!("beta not increasing at {} rows, first at omega = {}", self.beta_not_increasing.len(), self.beta_not_increasing[0]));
        }
        if self.mass_slope_sign_changes != 1 {
            out.push(format!("dM/domega changes sign {} times (expected once)", self.mass_slope_sign_changes));
        }
        out
    }
}

/// Scan `β` monotonicity and the number of turns of `M(ω)`.
pub fn conjecture_scan(table: &BranchTable) -> ConjectureScan {
    let rows = &table.rows;
    let beta_not_increasing = rows.windows(2).filter(|w| w[1].functionals.beta <= w[0].functionals.beta).map(|w| w[1].omega).collect();
    let dm: Vec<f64> = rows.windows(2).map(|w| w[1].functionals.mass - w[0].functionals.mass).collect();
    let mass_slope_sign_changes = dm.windows(2).filter(|d| (d[0] < 0.0) != (d[1] < 0.0)).count();
    ConjectureScan { beta_not_increasing, mass_slope_sign_changes }
}

/// Outcome of the equal-energy mass comparison across the energy maximum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CuspReport {
    /// Energy levels compared.
    pub levels: usize,
    /// Levels where the higher-frequency partner did not have smaller mass.
    pub violations: usize,
}

/// For energy levels just below the maximum of `E(ω)`, pair `ω₀ < ω_max < ω₁`
/// with equal energy (linear interpolation on the table) and require
/// `M(ω₁) < M(ω₀)`.
pub fn cusp_check(table: &BranchTable) -> CuspReport {
    let rows = &table.rows;
    let mut rep = CuspReport::default();
    let Some(top) = (0..rows.len()).max_by(|&a, &b| rows[a].functionals.energy.total_cmp(&rows[b].functionals.energy)) else {
        return rep;
    };
    let interp = |a: &BranchRow, b: &BranchRow, e: f64| {
        let t = (e - a.functionals.energy) / (b.functionals.energy - a.functionals.energy);
        a.functionals.mass + t * (b.functionals.mass - a.functionals.mass)
    };
    for i in (0..top).rev() {
        let e = rows[i].functionals.energy;
        let m0 = rows[i].functionals.mass;
        // energy decreases monotonically past the maximum in the table
        let Some(j) = (top..rows.len() - 1).find(|&j| rows[j].functionals.energy >= e && rows[j + 1].functionals.energy < e) else {
            break;
        };
        let m1 = interp(&rows[j], &rows[j + 1], e);
        rep.levels += 1;
        if !(m1 < m0) {
            rep.violations += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(omega: f64, m: f64, g: f64) -> BranchRow {
        BranchRow { omega, center_value: 0.0, tail_constant: 0.0, functionals: FunctionalSet::from_integrals(m, g, 1.0, 0.5) }
    }

    #[test]
    fn empty_sweep() {
        let t = sweep(&[], &ShootingOptions::default());
        assert!(t.rows.is_empty() && t.failures.is_empty());
    }

    #[test]
    fn failures_recorded_per_row() {
        let t = sweep(&[0.3], &ShootingOptions::default());
        assert!(t.rows.is_empty());
        assert_eq!(t.failures.len(), 1);
    }

    #[test]
    fn insert_keeps_order() {
        let mut t = BranchTable::default();
        for w in [0.05, 0.01, 0.1, 0.05] {
            t.insert(row(w, 1.0, w));
        }
        assert_eq!(t.omegas(), [0.01, 0.05, 0.1]);
        assert!(t.is_ordered());
    }

    #[test]
    fn default_grid_shape() {
        let w = default_omegas();
        assert_eq!(w.len(), 200);
        assert!(w.windows(2).all(|p| p[0] < p[1]));
        assert!((w[0] - 1e-3).abs() < 1e-15 && (w[199] - 0.186).abs() < 1e-15);
    }

    #[test]
    fn derivative_needs_rows() {
        let mut t = BranchTable::default();
        t.insert(row(0.1, 1.0, 1.0));
        assert_eq!(derivative_checks(&t), Err(BranchError::InsufficientRows(3)));
    }
}
