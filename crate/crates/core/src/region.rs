//! Feasible mass/energy pairs, the region `𝓡` below the zero-virial
//! envelope `E^V_min`, its thresholds and the foliation function
//!
//! ```text
//! D(m, e) = e + (m + e) / dist((m, e), 𝓡ᶜ)
//! ```

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branch::BranchTable;
use crate::functionals::FunctionalError;
use crate::rescale::RescaledPoint;
use crate::roots::{lagrange4, linspace};
use crate::sampling::{scale_functionals, trial_rng, BumpSet};

/// `M* / M(Q₁) = 4/(3√3)`.
pub fn star_ratio() -> f64 {
    4.0 / (3.0 * 3f64.sqrt())
}

const DENSE_TOP: f64 = 200.0;
const DENSE_POINTS: usize = 600;
const BISECTIONS: usize = 200;

/// Region failures.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum RegionError {
    /// No curve covers this mass.
    #[error("no curve brackets mass {0}")]
    CurveGap(f64),
    /// `e` is below the least energy at mass `m`.
    #[error("({m}, {e}) is not a feasible mass/energy pair")]
    InfeasiblePair {
        /// Mass.
        m: f64,
        /// Energy.
        e: f64,
    },
    /// The tables do not contain what the construction needs.
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
}

/// A sample of a branch in the mass/energy plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Parent frequency.
    pub omega: f64,
    /// Mass.
    pub mass: f64,
    /// Energy.
    pub energy: f64,
    /// `β`.
    pub beta: f64,
}

/// Where an envelope value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    /// A ground state `P_ω`.
    Soliton(f64),
    /// A rescaled soliton `R_ω`.
    Rescaled(f64),
    /// Linear extrapolation past the soliton table.
    Extrapolated,
}

/// One entry of the envelope table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    /// Mass.
    pub mass: f64,
    /// `E^V_min(mass)`.
    pub energy: f64,
    /// Which curve attains it.
    pub provenance: Provenance,
}

/// Headline masses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `M(Q₁)`, the mass of the zero-energy soliton.
    pub m_q1: f64,
    /// `M* = 4 M(Q₁) / (3√3)`.
    pub m_star: f64,
    /// Mass where the envelope switches from rescaled to soliton.
    pub m0: f64,
}

/// Consistency checks on the computed envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeChecks {
    /// Adjacent table entries strictly decrease.
    pub strictly_decreasing: bool,
    /// Rescaled curve below the soliton curve on `[M*, m0)`.
    pub rescaled_below_before_m0: bool,
    /// Rescaled curve above the soliton curve on `(m0, M(Q₁)]`.
    pub rescaled_above_after_m0: bool,
    /// Sign changes of `E_R(m) - E_P(m)` on the table grid.
    pub crossings: usize,
    /// Provenance switches along the table.
    pub provenance_switches: usize,
}

/// A branch split into pieces on which the mass is monotone in `ω`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct Curve {
    pieces: Vec<Vec<CurvePoint>>,
}

impl Curve {
    fn new(points: &[CurvePoint]) -> Self {
        let mut pieces: Vec<Vec<CurvePoint>> = Vec::new();
        let mut cur: Vec<CurvePoint> = Vec::new();
        for &p in points {
            if cur.len() >= 2 {
                let n = cur.len();
                let up = cur[n - 1].mass > cur[n - 2].mass;
                if (p.mass > cur[n - 1].mass) != up {
                    let last = cur[n - 1];
                    pieces.push(core::mem::take(&mut cur));
                    cur.push(last);
                }
            }
            cur.push(p);
        }
        if cur.len() >= 2 {
            pieces.push(cur);
        }
        Curve { pieces }
    }

    /// Least energy at mass `m` over all pieces, with the frequency.
    fn min_energy(&self, m: f64) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for piece in &self.pieces {
            if let Some((w, e)) = piece_at(piece, m) {
                if best.is_none_or(|(_, b)| e < b) {
                    best = Some((w, e));
                }
            }
        }
        best
    }

    fn mass_range(&self) -> (f64, f64) {
        let ms = self.pieces.iter().flatten().map(|p| p.mass);
        (ms.clone().fold(f64::INFINITY, f64::min), ms.fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Interpolated `(ω, E)` at mass `m` on a monotone piece, cubic in `ω`.
fn piece_at(piece: &[CurvePoint], m: f64) -> Option<(f64, f64)> {
    let k = piece.windows(2).position(|w| (w[0].mass - m) * (w[1].mass - m) <= 0.0)?;
    let n = piece.len();
    let s = k.saturating_sub(1).min(n.saturating_sub(4));
    let e = (s + 4).min(n);
    let ws: Vec<f64> = piece[s..e].iter().map(|p| p.omega).collect();
    let ms: Vec<f64> = piece[s..e].iter().map(|p| p.mass).collect();
    let es: Vec<f64> = piece[s..e].iter().map(|p| p.energy).collect();
    let (mut lo, mut hi) = (piece[k].omega, piece[k + 1].omega);
    let f = |w: f64| lagrange4(&ws, &ms, w) - m;
    let flo = f(lo);
    if flo == 0.0 {
        return Some((lo, piece[k].energy));
    }
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    Some((w, lagrange4(&ws, &es, w)))
}

/// The mass/energy picture assembled from the soliton and rescaled tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionModel {
    /// Soliton branch, all rows.
    pub soliton_curve: Vec<CurvePoint>,
    /// Rescaled branch, all rows.
    pub rescaled_curve: Vec<CurvePoint>,
    /// `E^V_min` on the target grid (starting at `M*`).
    pub evmin_table: Vec<EnvelopePoint>,
    /// Headline masses.
    pub thresholds: Thresholds,
    /// Envelope consistency.
    pub checks: EnvelopeChecks,
    solitons: Curve,
    negative: Curve,
    rescaled: Curve,
}

/// Build the envelope from the soliton rows (special rows included if
/// available) and the rescaled family.
pub fn build_region(table: &BranchTable, rescaled: &[RescaledPoint]) -> Result<RegionModel, RegionError> {
    let soliton_curve: Vec<CurvePoint> = table
        .rows
        .iter()
        .map(|r| CurvePoint { omega: r.omega, mass: r.functionals.mass, energy: r.functionals.energy, beta: r.functionals.beta })
        .collect();
    let rescaled_curve: Vec<CurvePoint> = rescaled
        .iter()
        .map(|r| CurvePoint { omega: r.omega, mass: r.functionals.mass, energy: r.functionals.energy, beta: r.functionals.beta })
        .collect();
    if soliton_curve.len() < 4 || rescaled_curve.len() < 4 {
        return Err(RegionError::InsufficientData("need at least four rows per curve"));
    }
    let third = 1.0 / 3.0;
    let above_third: Vec<CurvePoint> = soliton_curve.iter().copied().filter(|p| p.beta >= third * (1.0 - 1e-9)).collect();
    let nonpositive: Vec<CurvePoint> = soliton_curve.iter().copied().filter(|p| p.energy <= 0.0).collect();
    let solitons = Curve::new(&above_third);
    let negative = Curve::new(&nonpositive);
    let rescaled_c = Curve::new(&rescaled_curve);

    let m_q1 = zero_energy_mass(&soliton_curve).ok_or(RegionError::InsufficientData("energy does not change sign"))?;
    let m_star = star_ratio() * m_q1;

    let (_, m_max) = solitons.mass_range();
    let top = DENSE_TOP.min(m_max);
    let mut grid = linspace(m_star, top, DENSE_POINTS);
    grid.extend(solitons.pieces.iter().flatten().map(|p| p.mass).filter(|&m| m > top));
    grid.push(m_q1);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let diff = |m: f64| -> Option<f64> { Some(rescaled_c.min_energy(m)?.1 - solitons.min_energy(m)?.1) };
    let mut crossings = 0;
    let mut switch: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    for &m in &grid {
        if let Some(d) = diff(m) {
            if let Some((pm, pd)) = prev {
                if (pd < 0.0) != (d < 0.0) {
                    crossings += 1;
                    if pd < 0.0 && switch.is_none() {
                        switch = Some((pm, m));
                    }
                }
            }
            prev = Some((m, d));
        }
    }
    let (mut lo, mut hi) = switch.ok_or(RegionError::InsufficientData("envelope provenance never switches"))?;
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match diff(mid) {
            Some(d) if d < 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    let m0 = 0.5 * (lo + hi);
    grid.push(m0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let (mut below, mut above) = (true, true);
    for &m in &grid {
        if let Some(d) = diff(m) {
            if m < m0 {
                below &= d < 0.0;
            } else if m > m0 && m <= m_q1 {
                above &= d > 0.0;
            }
        }
    }

    let mut model = RegionModel {
        soliton_curve,
        rescaled_curve,
        evmin_table: Vec::new(),
        thresholds: Thresholds { m_q1, m_star, m0 },
        checks: EnvelopeChecks {
            strictly_decreasing: false,
            rescaled_below_before_m0: below,
            rescaled_above_after_m0: above,
            crossings,
            provenance_switches: 0,
        },
        solitons,
        negative,
        rescaled: rescaled_c,
    };
    let mut table_pts = Vec::with_capacity(grid.len());
    for &m in &grid {
        let (energy, provenance) = model.envelope(m)?;
        table_pts.push(EnvelopePoint { mass: m, energy, provenance });
    }
    model.checks.strictly_decreasing = table_pts.windows(2).all(|w| w[1].energy < w[0].energy);
    model.checks.provenance_switches = table_pts
        .windows(2)
        .filter(|w| matches!(w[0].provenance, Provenance::Rescaled(_)) != matches!(w[1].provenance, Provenance::Rescaled(_)))
        .count();
    model.evmin_table = table_pts;
    Ok(model)
}

/// Mass where the soliton energy vanishes, interpolated in `ω`.
fn zero_energy_mass(curve: &[CurvePoint]) -> Option<f64> {
    let k = curve.windows(2).position(|w| w[0].energy > 0.0 && w[1].energy <= 0.0)?;
    if curve[k + 1].energy == 0.0 {
        return Some(curve[k + 1].mass);
    }
    let s = k.saturating_sub(1).min(curve.len() - 4);
    let ws: Vec<f64> = curve[s..s + 4].iter().map(|p| p.omega).collect();
    let ms: Vec<f64> = curve[s..s + 4].iter().map(|p| p.mass).collect();
    let es: Vec<f64> = curve[s..s + 4].iter().map(|p| p.energy).collect();
    let (mut lo, mut hi) = (curve[k].omega, curve[k + 1].omega);
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lagrange4(&ws, &es, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lagrange4(&ws, &ms, 0.5 * (lo + hi)))
}

/// Whether a distance is read off the table or its linear extension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DValue {
    /// `D(m, e)`, possibly `+∞`.
    pub value: f64,
    /// The envelope was extrapolated past the soliton table.
    pub extrapolated: bool,
}

impl RegionModel {
    /// `E^V_min(m)` with provenance; `+∞` below `M*`.
    pub fn envelope(&self, m: f64) -> Result<(f64, Provenance), RegionError> {
        if m < self.thresholds.m_star {
            return Ok((f64::INFINITY, Provenance::Rescaled(f64::NAN)));
        }
        let r = self.rescaled.min_energy(m);
        let s = self.solitons.min_energy(m);
        match (r, s) {
            (Some((wr, er)), Some((ws, es))) => Ok(if er < es { (er, Provenance::Rescaled(wr)) } else { (es, Provenance::Soliton(ws)) }),
            (Some((wr, er)), None) => Ok(match self.extrapolate(m) {
                Some(e) if e < er => (e, Provenance::Extrapolated),
                _ => (er, Provenance::Rescaled(wr)),
            }),
            (None, Some((ws, es))) => Ok((es, Provenance::Soliton(ws))),
            (None, None) => self.extrapolate(m).map(|e| (e, Provenance::Extrapolated)).ok_or(RegionError::CurveGap(m)),
        }
    }

    /// `E^V_min(m)` without provenance.
    pub fn evmin(&self, m: f64) -> Result<f64, RegionError> {
        self.envelope(m).map(|(e, _)| e)
    }

    /// Linear continuation of the last two soliton points, for `m` past
    /// the table.
    fn extrapolate(&self, m: f64) -> Option<f64> {
        let pts: Vec<&CurvePoint> = self.solitons.pieces.iter().flatten().collect();
        let last = pts.iter().copied().max_by(|a, b| a.mass.total_cmp(&b.mass))?;
        if m <= last.mass {
            return None;
        }
        let prev = pts.iter().copied().filter(|p| p.omega < last.omega).max_by(|a, b| a.omega.total_cmp(&b.omega))?;
        let slope = (last.energy - prev.energy) / (last.mass - prev.mass);
        Some(last.energy + slope * (m - last.mass))
    }

    /// `(m, e) ∈ 𝓡`: `0 < m < M(Q₁)` and `0 < e < E^V_min(m)`.
    pub fn contains(&self, m: f64, e: f64) -> Result<bool, RegionError> {
        if !(m > 0.0 && m < self.thresholds.m_q1 && e > 0.0) {
            return Ok(false);
        }
        Ok(e < self.evmin(m)?)
    }

    /// `(m, e) ∈ 𝓡ᶜ`: `m ≥ M*` and `e ≥ E^V_min(m)`.
    pub fn in_complement(&self, m: f64, e: f64) -> Result<bool, RegionError> {
        Ok(m >= self.thresholds.m_star && e >= self.evmin(m)?)
    }

    fn soliton_emin(&self, m: f64, extrapolate: bool) -> Result<(f64, bool), RegionError> {
        if let Some((_, e)) = self.negative.min_energy(m) {
            return Ok((e, false));
        }
        if extrapolate {
            if let Some(e) = self.extrapolate(m) {
                return Ok((e, true));
            }
        }
        Err(RegionError::CurveGap(m))
    }

    /// Distance from `(m, e)` to the boundary of `𝓡ᶜ`: the vertical ray at
    /// `M*` and the polyline through the envelope table, continued
    /// linearly. The flag reports whether the continuation was nearest.
    pub fn distance_to_complement(&self, m: f64, e: f64) -> (f64, bool) {
        let t = &self.evmin_table;
        let first = t[0];
        let mut best = if e >= first.energy {
            (m - first.mass).abs()
        } else {
            (m - first.mass).hypot(e - first.energy)
        };
        for w in t.windows(2) {
            best = best.min(segment_distance((m, e), (w[0].mass, w[0].energy), (w[1].mass, w[1].energy)));
        }
        let mut extrapolated = false;
        let n = t.len();
        if n >= 2 {
            let (a, b) = (t[n - 2], t[n - 1]);
            let (dx, dy) = (b.mass - a.mass, b.energy - a.energy);
            let len = dx.hypot(dy);
            let s = ((m - b.mass) * dx + (e - b.energy) * dy) / len;
            if s > 0.0 {
                let d = ((m - b.mass) * dy - (e - b.energy) * dx).abs() / len;
                if d < best {
                    best = d;
                    extrapolated = true;
                }
            }
        }
        (best, extrapolated)
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Least energy `E_min(m)` among functions of mass `m`: zero up to
/// `M(Q₁)`, then the ground state energy on the `β ≥ 1` branch.
pub fn feasible_emin(m: f64, model: &RegionModel) -> Result<f64, RegionError> {
    if !(m >= 0.0) {
        return Err(RegionError::InfeasiblePair { m, e: f64::NAN });
    }
    if m <= model.thresholds.m_q1 {
        return Ok(0.0);
    }
    model.soliton_emin(m, false).map(|(e, _)| e)
}

/// `D(m, e)`; `+∞` on `𝓡ᶜ`.
pub fn d_function(m: f64, e: f64, model: &RegionModel) -> Result<DValue, RegionError> {
    if !(m >= 0.0) {
        return Err(RegionError::InfeasiblePair { m, e });
    }
    let (emin, mut extrapolated) = if m <= model.thresholds.m_q1 { (0.0, false) } else { model.soliton_emin(m, true)? };
    if e < emin - 1e-12 * emin.abs().max(1.0) {
        return Err(RegionError::InfeasiblePair { m, e });
    }
    if m > model.soliton_curve.iter().map(|p| p.mass).fold(0.0, f64::max) {
        extrapolated = true;
    }
    if m == 0.0 && e == 0.0 {
        return Ok(DValue { value: 0.0, extrapolated: false });
    }
    if model.in_complement(m, e)? {
        return Ok(DValue { value: f64::INFINITY, extrapolated });
    }
    let (dist, ex) = model.distance_to_complement(m, e);
    Ok(DValue { value: e + (m + e) / dist, extrapolated: extrapolated || ex })
}

/// One random sample for the virial positivity test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialSample {
    /// Mass.
    pub mass: f64,
    /// Energy.
    pub energy: f64,
    /// Virial.
    pub virial: f64,
    /// Relative virial `V / (G + L6 + ¾L4)`.
    pub relative_virial: f64,
    /// `(M, E) ∈ 𝓡`.
    pub in_region: bool,
}

/// Trial `index`: random bumps (boosted half the time) scaled to a mass
/// drawn uniformly from `(0, M(Q₁))`.
pub fn virial_trial(model: &RegionModel, seed: u64, index: u64) -> Result<VirialSample, FunctionalError> {
    let mut rng = trial_rng(seed, index);
    let boosted = rng.gen_bool(0.5);
    let target = (1.0 - rng.gen::<f64>()) * model.thresholds.m_q1;
    let bumps = BumpSet::random(&mut rng, boosted);
    let (_, fs) = bumps.evaluate()?;
    let fs = scale_functionals(&fs, (target / fs.mass).sqrt());
    let in_region = model.contains(fs.mass, fs.energy).unwrap_or(false);
    Ok(VirialSample {
        mass: fs.mass,
        energy: fs.energy,
        virial: fs.virial,
        relative_virial: crate::rescale::relative_virial(&fs),
        in_region,
    })
}

/// Summary of a virial positivity run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialReport {
    /// Trials attempted.
    pub trials: u64,
    /// Trials inside `𝓡`.
    pub retained: u64,
    /// Retained trials with `V ≤ 0`.
    pub violations: u64,
    /// Least virial among retained trials.
    pub min_virial: f64,
    /// Least relative virial among retained trials.
    pub min_relative_virial: f64,
    /// Trials whose quadrature failed.
    pub failed: u64,
    /// Master seed.
    pub seed: u64,
}

impl VirialReport {
    /// Combine trial results (in any order).
    pub fn from_trials(seed: u64, results: impl IntoIterator<Item = Result<VirialSample, FunctionalError>>) -> Self {
        let mut rep = VirialReport {
            trials: 0,
            retained: 0,
            violations: 0,
            min_virial: f64::INFINITY,
            min_relative_virial: f64::INFINITY,
            failed: 0,
            seed,
        };
        for r in results {
            rep.trials += 1;
            match r {
                Ok(s) if s.in_region => {
                    rep.retained += 1;
                    if !(s.virial > 0.0) {
                        rep.violations += 1;
                    }
                    rep.min_virial = rep.min_virial.min(s.virial);
                    rep.min_relative_virial = rep.min_relative_virial.min(s.relative_virial);
                }
                Ok(_) => {}
                Err(_) => rep.failed += 1,
            }
        }
        rep
    }

    /// No violations, no failed trials and at least one retained sample.
    pub fn passes(&self) -> bool {
        self.violations == 0 && self.failed == 0 && self.retained > 0
    }
}

/// Sequential virial positivity run.
pub fn virial_positivity_sample(model: &RegionModel, trials: u64, seed: u64) -> VirialReport {
    VirialReport::from_trials(seed, (0..trials).map(|i| virial_trial(model, seed, i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(omega: f64, mass: f64, energy: f64) -> CurvePoint {
        CurvePoint { omega, mass, energy, beta: 1.0 }
    }

    #[test]
    fn curve_splits_at_turning_points() {
        let pts: Vec<CurvePoint> = [3.0, 2.0, 1.0, 2.0, 4.0, 3.5].iter().enumerate().map(|(i, &m)| pt(i as f64, m, -m)).collect();
        let c = Curve::new(&pts);
        assert_eq!(c.pieces.len(), 3);
        assert_eq!(c.pieces[0].last(), c.pieces[1].first());
        assert_eq!(c.mass_range(), (1.0, 4.0));
    }

    #[test]
    fn piece_interpolation_is_exact_for_cubics() {
        let pts: Vec<CurvePoint> = (0..8)
            .map(|i| {
                let w = 0.1 * i as f64;
                pt(w, 1.0 + w + w * w, w * w * w - w)
            })
            .collect();
        let (w, e) = piece_at(&pts, 1.0 + 0.33 + 0.33 * 0.33).unwrap();
        assert!((w - 0.33).abs() < 1e-12);
        assert!((e - (0.33f64.powi(3) - 0.33)).abs() < 1e-12);
        assert!(piece_at(&pts, 100.0).is_none());
    }

    #[test]
    fn segment_distances() {
        assert!((segment_distance((0.0, 1.0), (-1.0, 0.0), (1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((segment_distance((3.0, 4.0), (0.0, 0.0), (0.0, 0.0)) - 5.0).abs() < 1e-15);
        assert!((segment_distance((2.0, 0.0), (-1.0, 0.0), (1.0, 0.0)) - 1.0).abs() < 1e-15);
    }
}
