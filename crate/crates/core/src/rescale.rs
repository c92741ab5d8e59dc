//! Rescaled solitons `R_ω = a P_ω(λx)`, the virial rescalings and the
//! Gagliardo–Nirenberg–Hölder constants
//!
//! ```text
//! ‖u‖₄⁴ ≤ C_α ‖u‖₂ ‖u‖₆^{3α/(1+α)} ‖∇u‖₂^{3/(1+α)}
//! ```

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branch::{refine_between, BranchError, BranchRow, BranchTable};
use crate::functionals::{evaluate, FunctionalError, FunctionalSet, RadialFunction};
use crate::sampling::{trial_rng, BumpSet};
use crate::shooting::{ShootingOptions, SolitonProfile};

/// Relative size of `V` treated as zero on input.
pub const VIRIAL_TOL: f64 = 1e-6;
/// Agreement required between closed forms and quadrature.
pub const AGREEMENT_TOL: f64 = 1e-6;

const ROOT_ITERATIONS: usize = 2000;

/// Rescaling failures.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum RescaleError {
    /// `β ≤ 0`: no rescaling reaches `β = 1/3`.
    #[error("beta = {0} is not positive")]
    BetaNonpositive(f64),
    /// Input outside the hypotheses of the rescaling.
    #[error("precondition violated: {0}")]
    PreconditionViolated(&'static str),
    /// Target mass below the input mass.
    #[error("target mass {target} is below the input mass {mass}")]
    TargetBelowMass {
        /// Input mass.
        mass: f64,
        /// Requested mass.
        target: f64,
    },
    /// The root finder failed to bracket (cannot happen under the
    /// preconditions).
    #[error("no root: {0}")]
    NoRoot(&'static str),
    /// A stated postcondition failed numerically.
    #[error("postcondition failed: {0}")]
    Postcondition(&'static str),
    /// Closed form and quadrature disagree.
    #[error("closed form {closed} and quadrature {quadrature} disagree")]
    QuadratureMismatch {
        /// Closed-form value.
        closed: f64,
        /// Quadrature value.
        quadrature: f64,
    },
    /// Quadrature failure.
    #[error(transparent)]
    Functionals(#[from] FunctionalError),
    /// Branch solve failure.
    #[error(transparent)]
    Branch(#[from] BranchError),
}

/// `V` relative to the size of its terms.
pub fn relative_virial(fs: &FunctionalSet) -> f64 {
    let scale = fs.kinetic + fs.sextic + 0.75 * fs.quartic;
    if scale == 0.0 {
        0.0
    } else {
        fs.virial / scale
    }
}

/// Functionals of `a·u(λx)`.
pub fn dilate_functionals(fs: &FunctionalSet, a: f64, lambda: f64) -> FunctionalSet {
    let (a2, l3) = (a * a, lambda * lambda * lambda);
    FunctionalSet::from_integrals(fs.mass * a2 / l3, fs.kinetic * a2 / lambda, fs.quartic * a2 * a2 / l3, fs.sextic * a2 * a2 * a2 / l3)
}

/// `(a, λ)` taking a soliton with ratio `β` to `β = 1/3`, `V = 0`.
pub fn rescaling_factors(beta: f64) -> Result<(f64, f64), RescaleError> {
    if !(beta > 0.0) {
        return Err(RescaleError::BetaNonpositive(beta));
    }
    let a = ((1.0 + beta) / (4.0 * beta)).sqrt();
    let lambda = 3.0 * (1.0 + beta) / (4.0 * (3.0 * beta).sqrt());
    Ok((a, lambda))
}

/// `M(R_ω) = 16√(3β) M / (9(1+β)²)`.
pub fn rescaled_mass(fs: &FunctionalSet) -> f64 {
    let b = fs.beta;
    16.0 * (3.0 * b).sqrt() * fs.mass / (9.0 * (1.0 + b) * (1.0 + b))
}

/// `E(R_ω) = G / (9√(3β))`.
pub fn rescaled_energy(fs: &FunctionalSet) -> f64 {
    fs.kinetic / (9.0 * (3.0 * fs.beta).sqrt())
}

/// The rescaled soliton `R_ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledPoint {
    /// Frequency of the parent soliton.
    pub omega: f64,
    /// Amplitude factor.
    pub a: f64,
    /// Spatial dilation.
    pub lambda: f64,
    /// Functionals of `R_ω`.
    pub functionals: FunctionalSet,
}

impl RescaledPoint {
    /// From a branch row, by exact scaling of its integrals.
    pub fn from_row(row: &BranchRow) -> Result<Self, RescaleError> {
        let (a, lambda) = rescaling_factors(row.functionals.beta)?;
        Ok(RescaledPoint { omega: row.omega, a, lambda, functionals: dilate_functionals(&row.functionals, a, lambda) })
    }
}

/// `R_ω` by quadrature of the dilated profile, checked against the closed
/// forms for its mass and energy.
pub fn rescaled_point(profile: &SolitonProfile, fs: &FunctionalSet) -> Result<RescaledPoint, RescaleError> {
    let (a, lambda) = rescaling_factors(fs.beta)?;
    let r = evaluate(&RadialFunction::from(profile).dilate(a, lambda))?;
    for (closed, quadrature) in [(rescaled_mass(fs), r.mass), (rescaled_energy(fs), r.energy)] {
        if !((closed - quadrature).abs() <= AGREEMENT_TOL * closed.abs()) {
            return Err(RescaleError::QuadratureMismatch { closed, quadrature });
        }
    }
    Ok(RescaledPoint { omega: profile.omega, a, lambda, functionals: r })
}

/// `R_ω` for every row.
pub fn rescaled_family(table: &BranchTable) -> Result<Vec<RescaledPoint>, RescaleError> {
    table.rows.iter().map(RescaledPoint::from_row).collect()
}

/// Functionals of the mass-preserving dilation `λ^{3/2} u(λx)`.
pub fn mass_preserving_dilation(fs: &FunctionalSet, lambda: f64) -> FunctionalSet {
    let l2 = lambda * lambda;
    FunctionalSet::from_integrals(fs.mass, l2 * fs.kinetic, l2 * lambda * fs.quartic, l2 * l2 * l2 * fs.sextic)
}

/// Smallest `λ > 1` with `V(λ^{3/2}u(λx)) = 0`, i.e. the root of
/// `G - (3/4)L4 λ + L6 λ⁴`, and the functionals at that dilation.
///
/// Requires `V < 0`, or `V = 0` with `β < 1/3`. At `V = 0`, `β = 1/3` the
/// identity is returned.
pub fn rescale_to_zero_virial(fs: &FunctionalSet) -> Result<(f64, FunctionalSet), RescaleError> {
    let v = relative_virial(fs);
    let third = 1.0 / 3.0;
    if v > VIRIAL_TOL {
        return Err(RescaleError::PreconditionViolated("virial is positive"));
    }
    let zero = v.abs() <= VIRIAL_TOL;
    if zero && (fs.beta - third).abs() <= VIRIAL_TOL {
        return Ok((1.0, *fs));
    }
    if zero && fs.beta > third {
        return Err(RescaleError::PreconditionViolated("zero virial with beta > 1/3"));
    }
    let (g, l4, l6) = (fs.kinetic, fs.quartic, fs.sextic);
    let q = |l: f64| g - 0.75 * l4 * l + l6 * l * l * l * l;
    let mut lo = 1.0;
    if !(q(lo) < 0.0) {
        // the minimum of the convex quartic
        lo = (0.1875 * l4 / l6).cbrt().max(1.0);
        if !(q(lo) < 0.0) {
            return Ok((1.0, *fs));
        }
    }
    let mut hi = 2.0 * lo;
    while q(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(RescaleError::NoRoot("dilation bracket"));
        }
    }
    let lambda = bisect_sign(q, lo, hi);
    let out = mass_preserving_dilation(fs, lambda);
    if relative_virial(&out).abs() > 1e-10 {
        return Err(RescaleError::Postcondition("virial after dilation"));
    }
    if out.beta < third * (1.0 - 1e-12) {
        return Err(RescaleError::Postcondition("beta after dilation"));
    }
    if !(out.energy < fs.energy) || !(out.kinetic > fs.kinetic) {
        return Err(RescaleError::Postcondition("energy decrease"));
    }
    Ok((lambda, out))
}

/// Last point where `f < 0` on a bracket with `f(lo) < 0 ≤ f(hi)`.
fn bisect_sign(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..ROOT_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(hi).abs() < f(lo).abs() {
        hi
    } else {
        lo
    }
}

/// Result of [`mass_pump`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassPump {
    /// Root `ρ ≥ 1` of the mass equation.
    pub rho: f64,
    /// Dilation `λ = ρ(1+β)/(1+ρ²β)`.
    pub lambda: f64,
    /// Functionals of the input after the zero-virial rescaling (equal to
    /// the input when `β ≥ 1/3`).
    pub base: FunctionalSet,
    /// Functionals of `v = √(ρλ) u(λx)`.
    pub functionals: FunctionalSet,
}

/// Raise the mass of a zero-virial function to `m_target` keeping `V = 0`
/// and lowering the energy by at least `(m - M)G/(6M)`.
pub fn mass_pump(fs: &FunctionalSet, m_target: f64) -> Result<MassPump, RescaleError> {
    if relative_virial(fs).abs() > VIRIAL_TOL {
        return Err(RescaleError::PreconditionViolated("virial is not zero"));
    }
    if !(fs.mass > 0.0) {
        return Err(RescaleError::PreconditionViolated("mass is not positive"));
    }
    if m_target < fs.mass {
        return Err(RescaleError::TargetBelowMass { mass: fs.mass, target: m_target });
    }
    let base = if fs.beta < 1.0 / 3.0 { rescale_to_zero_virial(fs)?.1 } else { *fs };
    let (m, b) = (base.mass, base.beta);
    let mass_at = |rho: f64| m * (1.0 + rho * rho * b).powi(2) / (rho * (1.0 + b).powi(2));
    let rho = if m_target == m {
        1.0
    } else {
        let f = |rho: f64| mass_at(rho) / m_target - 1.0;
        let mut hi = 2.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(RescaleError::NoRoot("mass bracket"));
            }
        }
        bisect_sign(f, 1.0, hi)
    };
    if (mass_at(rho) / m_target - 1.0).abs() > 1e-12 {
        return Err(RescaleError::Postcondition("mass equation residual"));
    }
    let lambda = rho * (1.0 + b) / (1.0 + rho * rho * b);
    let out = dilate_functionals(&base, (rho * lambda).sqrt(), lambda);
    if (out.mass / m_target - 1.0).abs() > 1e-12 {
        return Err(RescaleError::Postcondition("target mass"));
    }
    if relative_virial(&out).abs() > VIRIAL_TOL {
        return Err(RescaleError::Postcondition("virial after pump"));
    }
    let bound = base.energy - (m_target - m) * base.kinetic / (6.0 * m);
    if out.energy > bound + 1e-12 * base.kinetic {
        return Err(RescaleError::Postcondition("energy drop"));
    }
    Ok(MassPump { rho, lambda, base, functionals: out })
}

/// `C_α` from the optimizer's mass and kinetic energy.
pub fn gnh_constant_of(alpha: f64, fs: &FunctionalSet) -> f64 {
    let e = alpha / (2.0 * (1.0 + alpha));
    4.0 * (1.0 + alpha) / (3.0 * alpha.powf(e)) / (fs.mass.sqrt() * fs.kinetic.powf((1.0 - alpha) / (2.0 * (1.0 + alpha))))
}

/// `‖u‖₄⁴ / (C ‖u‖₂ ‖u‖₆^{3α/(1+α)} ‖∇u‖₂^{3/(1+α)})`; 0 for `u = 0`.
pub fn gnh_ratio(fs: &FunctionalSet, alpha: f64, c_alpha: f64) -> f64 {
    if fs.quartic == 0.0 {
        return 0.0;
    }
    let den = c_alpha
        * fs.mass.sqrt()
        * fs.sextic.powf(alpha / (2.0 * (1.0 + alpha)))
        * fs.kinetic.powf(3.0 / (2.0 * (1.0 + alpha)));
    fs.quartic / den
}

/// Optimal constant and its optimizer `Q_α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnhConstant {
    /// `α`.
    pub alpha: f64,
    /// Frequency of the optimizer.
    pub omega_opt: f64,
    /// `C_α`.
    pub c_alpha: f64,
    /// The optimizer's row.
    pub optimizer: BranchRow,
    /// Relative residuals of `L4 = 4(1+α)G/3` and `L6 = αG` at the optimizer.
    pub identity_residuals: [f64; 2],
    /// Every root of `β(ω) = α` found, with its constant.
    pub candidates: Vec<(f64, f64)>,
}

/// Root-find `β(ω) = α` on every bracket of the table and keep the largest
/// constant.
pub fn gnh_constant(alpha: f64, table: &BranchTable, opts: &ShootingOptions) -> Result<GnhConstant, RescaleError> {
    if !(alpha > 0.0) {
        return Err(RescaleError::PreconditionViolated("alpha must be positive"));
    }
    let f = |r: &BranchRow| r.functionals.beta - alpha;
    let mut best: Option<(f64, BranchRow)> = None;
    let mut candidates = Vec::new();
    for w in table.rows.windows(2) {
        let (fa, fb) = (f(&w[0]), f(&w[1]));
        let row = if fa == 0.0 {
            w[0]
        } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            refine_between(&w[0], &w[1], opts, f)?
        } else {
            continue;
        };
        let c = gnh_constant_of(alpha, &row.functionals);
        candidates.push((row.omega, c));
        if best.as_ref().is_none_or(|(bc, _)| c > *bc) {
            best = Some((c, row));
        }
    }
    let (c_alpha, optimizer) = best.ok_or(RescaleError::Branch(BranchError::NotBracketed("beta = alpha")))?;
    let q = &optimizer.functionals;
    let identity_residuals = [
        (q.quartic - 4.0 * (1.0 + alpha) * q.kinetic / 3.0).abs() / q.quartic,
        (q.sextic - alpha * q.kinetic).abs() / q.sextic,
    ];
    Ok(GnhConstant { alpha, omega_opt: optimizer.omega, c_alpha, optimizer, identity_residuals, candidates })
}

/// Ratio for random trial `index` of a run seeded by `seed`.
pub fn gnh_trial(alpha: f64, c_alpha: f64, seed: u64, index: u64) -> Result<f64, FunctionalError> {
    let bumps = BumpSet::random(&mut trial_rng(seed, index), false);
    let (_, fs) = bumps.evaluate()?;
    Ok(gnh_ratio(&fs, alpha, c_alpha))
}

/// Summary of a GNH property run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnhReport {
    /// `α`.
    pub alpha: f64,
    /// Constant tested.
    pub c_alpha: f64,
    /// Largest ratio seen.
    pub worst_ratio: f64,
    /// Trials attempted.
    pub trials: u64,
    /// Master seed.
    pub seed: u64,
    /// Trials whose quadrature failed.
    pub failed: u64,
}

impl GnhReport {
    /// Combine trial results (in any order).
    pub fn from_trials(alpha: f64, c_alpha: f64, seed: u64, results: impl IntoIterator<Item = Result<f64, FunctionalError>>) -> Self {
        let mut rep = GnhReport { alpha, c_alpha, worst_ratio: 0.0, trials: 0, seed, failed: 0 };
        for r in results {
            rep.trials += 1;
            match r {
                Ok(x) => rep.worst_ratio = rep.worst_ratio.max(x),
                Err(_) => rep.failed += 1,
            }
        }
        rep
    }

    /// Worst ratio within `1 + 10⁻⁶` and no failed trials.
    pub fn passes(&self) -> bool {
        self.failed == 0 && self.worst_ratio <= 1.0 + 1e-6
    }
}

/// Sequential property run over `trials` seeded random radial bumps.
pub fn gnh_property_test(alpha: f64, c_alpha: f64, trials: u64, seed: u64) -> GnhReport {
    GnhReport::from_trials(alpha, c_alpha, seed, (0..trials).map(|i| gnh_trial(alpha, c_alpha, seed, i)))
}

/// Which optimizer comparison is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComparisonKind {
    /// `‖∇Q_α‖/‖∇Q_γ‖ > (α/γ)^{1/4}`.
    Kinetic,
    /// `M(Q_γ)/M(Q_α) > (1+γ)²√α / ((1+α)²√γ)` for `γ < α ≤ 1`.
    MassBelowOne,
    /// The reverse inequality for `1 ≤ γ < α`.
    MassAboveOne,
    /// `E(Q_α)/E(Q_γ) > (α-1)√α / ((γ-1)√γ)` for `γ < α < 1` or `1 < γ < α`.
    Energy,
}

/// One comparison between optimizers `Q_γ` and `Q_α`, `γ < α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Smaller exponent.
    pub gamma: f64,
    /// Larger exponent.
    pub alpha: f64,
    /// Inequality checked.
    pub kind: ComparisonKind,
    /// Measured ratio.
    pub measured: f64,
    /// Bound.
    pub bound: f64,
    /// Whether the strict inequality holds.
    pub holds: bool,
}

/// All applicable comparisons between pairs of optimizers.
pub fn branch_comparisons(optimizers: &[GnhConstant]) -> Vec<Comparison> {
    let mut out = Vec::new();
    for q in optimizers {
        for p in optimizers {
            let (g, a) = (q.alpha, p.alpha);
            if !(g < a) {
                continue;
            }
            let (fg, fa) = (&q.optimizer.functionals, &p.optimizer.functionals);
            let mut push = |kind, measured: f64, bound: f64, greater: bool| {
                let holds = if greater { measured > bound } else { measured < bound };
                out.push(Comparison { gamma: g, alpha: a, kind, measured, bound, holds });
            };
            push(ComparisonKind::Kinetic, (fa.kinetic / fg.kinetic).sqrt(), (a / g).powf(0.25), true);
            let mass_bound = (1.0 + g).powi(2) * a.sqrt() / ((1.0 + a).powi(2) * g.sqrt());
            if a <= 1.0 {
                push(ComparisonKind::MassBelowOne, fg.mass / fa.mass, mass_bound, true);
            }
            if g >= 1.0 {
                push(ComparisonKind::MassAboveOne, fg.mass / fa.mass, mass_bound, false);
            }
            if a < 1.0 || g > 1.0 {
                let bound = (a - 1.0) * a.sqrt() / ((g - 1.0) * g.sqrt());
                push(ComparisonKind::Energy, fa.energy / fg.energy, bound, true);
            }
        }
    }
    out
}

/// Range of `β` covered by the table.
pub fn beta_range(table: &BranchTable) -> Option<(f64, f64)> {
    let b = table.column(|f| f.beta);
    let lo = b.iter().copied().reduce(f64::min)?;
    let hi = b.iter().copied().reduce(f64::max)?;
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(m: f64, g: f64, l4: f64, l6: f64) -> FunctionalSet {
        FunctionalSet::from_integrals(m, g, l4, l6)
    }

    #[test]
    fn factors_reach_third_and_zero_virial() {
        for beta in [0.01, 0.2, 1.0 / 3.0, 1.0, 7.0] {
            // soliton-like: V = 0 with the given beta
            let g = 3.0;
            let fs = set(10.0, g, (g + beta * g) / 0.75, beta * g);
            let (a, l) = rescaling_factors(beta).unwrap();
            let r = dilate_functionals(&fs, a, l);
            assert!((r.beta - 1.0 / 3.0).abs() < 1e-14);
            assert!(relative_virial(&r).abs() < 1e-14);
            assert!((r.mass - rescaled_mass(&fs)).abs() < 1e-13 * r.mass);
            assert!((r.energy - rescaled_energy(&fs)).abs() < 1e-13 * r.energy.abs());
        }
        assert_eq!(rescaling_factors(1.0 / 3.0).unwrap(), (1.0, 1.0));
        assert!(matches!(rescaling_factors(0.0), Err(RescaleError::BetaNonpositive(_))));
    }

    #[test]
    fn zero_virial_root_matches_scan() {
        let fs = set(5.0, 1.0, 3.0, 0.2);
        assert!(fs.virial < 0.0);
        let (l, out) = rescale_to_zero_virial(&fs).unwrap();
        // brute-force scan for the first sign change of V(u^λ)
        let mut prev = 1.0;
        let mut scan = f64::NAN;
        for k in 1..200_000 {
            let x = 1.0 + k as f64 * 1e-4;
            if mass_preserving_dilation(&fs, x).virial >= 0.0 {
                scan = 0.5 * (prev + x);
                break;
            }
            prev = x;
        }
        assert!((l - scan).abs() < 1e-4);
        assert_eq!(out.mass, fs.mass);
        assert!(out.energy < fs.energy && out.beta >= 1.0 / 3.0);
    }

    #[test]
    fn zero_virial_cases() {
        let third = set(5.0, 3.0, (3.0 + 1.0) / 0.75, 1.0);
        assert_eq!(rescale_to_zero_virial(&third).unwrap().0, 1.0);
        let soliton = set(5.0, 3.0, (3.0 + 3.0) / 0.75, 3.0);
        assert!(matches!(rescale_to_zero_virial(&soliton), Err(RescaleError::PreconditionViolated(_))));
        let positive = set(5.0, 3.0, 0.1, 1.0);
        assert!(matches!(rescale_to_zero_virial(&positive), Err(RescaleError::PreconditionViolated(_))));
        let low = set(5.0, 3.0, (3.0 + 0.3) / 0.75, 0.3);
        let (l, out) = rescale_to_zero_virial(&low).unwrap();
        assert!(l > 1.0 && out.beta > 1.0 / 3.0);
    }

    #[test]
    fn mass_pump_contract() {
        let fs = set(185.0, 20.0, (20.0 + 20.0 / 3.0) / 0.75, 20.0 / 3.0);
        let id = mass_pump(&fs, 185.0).unwrap();
        assert_eq!(id.rho, 1.0);
        assert_eq!(id.functionals, fs);
        let p = mass_pump(&fs, 240.0).unwrap();
        assert!(p.rho > 1.0);
        assert!((p.functionals.mass - 240.0).abs() < 1e-10);
        assert!(p.functionals.energy <= fs.energy - 55.0 * 20.0 / (6.0 * 185.0));
        assert!(matches!(mass_pump(&fs, 100.0), Err(RescaleError::TargetBelowMass { .. })));
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let fs = set(3.0, 2.0, 1.5, 0.7);
        for alpha in [0.3, 1.0, 2.5] {
            let r0 = gnh_ratio(&fs, alpha, 1.0);
            for (a, l) in [(2.0, 0.5), (0.3, 3.0)] {
                let r = gnh_ratio(&dilate_functionals(&fs, a, l), alpha, 1.0);
                assert!((r - r0).abs() < 1e-13 * r0);
            }
        }
    }

    #[test]
    fn optimizer_ratio_is_one() {
        // any functionals obeying the optimizer identities give ratio 1
        for alpha in [1.0 / 3.0, 0.5, 1.0, 2.0] {
            let g = 7.0;
            let fs = set(100.0, g, 4.0 * (1.0 + alpha) * g / 3.0, alpha * g);
            let c = gnh_constant_of(alpha, &fs);
            assert!((gnh_ratio(&fs, alpha, c) - 1.0).abs() < 1e-14);
        }
        let fs = set(240.0, 1.0, 1.0, 1.0);
        assert!((gnh_constant_of(1.0, &fs) - 8.0 / (3.0 * 240f64.sqrt())).abs() < 1e-15);
    }
}
