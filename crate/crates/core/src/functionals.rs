//! Mass, kinetic, quartic and sextic integrals of radial functions, and the
//! identities that relate them on the soliton branch.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{derivative, simpson, Parity};
use crate::shooting::SolitonProfile;

/// Exponential tail `u(r) ≈ c·e^{-kr}·e^{iξr}/r` beyond the last sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    /// Amplitude `c`.
    pub constant: f64,
    /// Decay rate `k > 0`.
    pub rate: f64,
    /// Radial wavenumber `ξ` of an attached phase.
    pub wavenumber: f64,
}

/// A complex radial function on `r_j = j·h`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialFunction {
    /// Grid spacing `h`.
    pub spacing: f64,
    /// Samples `u(r_j)`.
    pub values: Vec<Complex64>,
    /// Optional analytic tail.
    pub tail: Option<Tail>,
}

/// Errors from functional evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum FunctionalError {
    /// Halving the resolution moved an integral by more than the threshold.
    #[error("grid too coarse: integral {index} moved by {change:e} (relative) under halving")]
    GridTooCoarse {
        /// 0 = M, 1 = G, 2 = L4, 3 = L6.
        index: usize,
        /// Relative change observed.
        change: f64,
    },
    /// Grid does not start at 0 or is not uniform.
    #[error("grid must be uniform and start at r = 0")]
    NonUniformGrid,
    /// Too few samples for the difference stencils.
    #[error("at least 12 samples are required")]
    TooFewSamples,
    /// A sample is NaN or infinite.
    #[error("non-finite sample")]
    NonFinite,
}

/// Relative change under halving above which [`evaluate`] rejects a grid.
pub const HALVING_THRESHOLD: f64 = 1e-6;

impl RadialFunction {
    /// Real samples on spacing `h`.
    pub fn from_real(spacing: f64, values: &[f64], tail: Option<Tail>) -> Self {
        RadialFunction { spacing, values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), tail }
    }

    /// Samples on an explicit grid, which must be uniform and start at 0.
    pub fn from_samples(grid: &[f64], values: Vec<Complex64>, tail: Option<Tail>) -> Result<Self, FunctionalError> {
        if grid.len() != values.len() || grid.len() < 12 {
            return Err(FunctionalError::TooFewSamples);
        }
        let h = grid[1] - grid[0];
        let uniform = grid[0] == 0.0
            && h > 0.0
            && grid.iter().enumerate().all(|(j, r)| (r - j as f64 * h).abs() <= 1e-9 * h.max(r.abs()));
        if !uniform {
            return Err(FunctionalError::NonUniformGrid);
        }
        Ok(RadialFunction { spacing: h, values, tail })
    }

    /// Sample the function `f` on `n` points of spacing `h`.
    pub fn sample<F: Fn(f64) -> Complex64>(spacing: f64, n: usize, f: F) -> Self {
        RadialFunction { spacing, values: (0..n).map(|j| f(j as f64 * spacing)).collect(), tail: None }
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when there are no samples.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Radius of sample `j`.
    pub fn radius(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    /// Explicit grid.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.radius(j)).collect()
    }

    /// `a·u(λr)`, represented on the grid `r_j/λ`.
    pub fn dilate(&self, amplitude: f64, lambda: f64) -> Self {
        RadialFunction {
            spacing: self.spacing / lambda,
            values: self.values.iter().map(|v| v * amplitude).collect(),
            tail: self.tail.map(|t| Tail {
                constant: amplitude * t.constant / lambda,
                rate: t.rate * lambda,
                wavenumber: t.wavenumber * lambda,
            }),
        }
    }

    /// Every other sample.
    fn coarsened(&self) -> Self {
        RadialFunction {
            spacing: 2.0 * self.spacing,
            values: self.values.iter().step_by(2).copied().collect(),
            tail: self.tail,
        }
    }

    fn check(&self) -> Result<(), FunctionalError> {
        if self.values.len() < 12 {
            return Err(FunctionalError::TooFewSamples);
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(FunctionalError::NonFinite);
        }
        Ok(())
    }
}

impl From<&SolitonProfile> for RadialFunction {
    fn from(p: &SolitonProfile) -> Self {
        RadialFunction::from_real(
            p.spacing(),
            &p.values,
            Some(Tail { constant: p.tail_constant, rate: p.tail_rate(), wavenumber: 0.0 }),
        )
    }
}

/// `e^{iξr}·u(r)`.
pub fn radial_boost(u: &RadialFunction, xi: f64) -> RadialFunction {
    let h = u.spacing;
    RadialFunction {
        spacing: h,
        values: u.values.iter().enumerate().map(|(j, v)| v * Complex64::from_polar(1.0, xi * j as f64 * h)).collect(),
        tail: u.tail.map(|t| Tail { wavenumber: t.wavenumber + xi, ..t }),
    }
}

/// Scalar functionals of one radial function.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSet {
    /// `M = ∫|u|²`.
    pub mass: f64,
    /// `G = ∫|∇u|²`.
    pub kinetic: f64,
    /// `L4 = ∫|u|⁴`.
    pub quartic: f64,
    /// `L6 = ∫|u|⁶`.
    pub sextic: f64,
    /// `E = G/2 - L4/4 + L6/6`.
    pub energy: f64,
    /// `V = G + L6 - (3/4)L4`.
    pub virial: f64,
    /// `β = L6/G`, 0 when `G = 0`.
    pub beta: f64,
}

impl FunctionalSet {
    /// Build from the four base integrals.
    pub fn from_integrals(mass: f64, kinetic: f64, quartic: f64, sextic: f64) -> Self {
        FunctionalSet {
            mass,
            kinetic,
            quartic,
            sextic,
            energy: kinetic / 2.0 - quartic / 4.0 + sextic / 6.0,
            virial: kinetic + sextic - 0.75 * quartic,
            beta: if kinetic > 0.0 { sextic / kinetic } else { 0.0 },
        }
    }

    /// Momentum of radial data, identically zero.
    pub fn momentum(&self) -> [f64; 3] {
        [0.0; 3]
    }

    /// The four base integrals `[M, G, L4, L6]`.
    pub fn integrals(&self) -> [f64; 4] {
        [self.mass, self.kinetic, self.quartic, self.sextic]
    }

    /// Derived fields agree with a fresh recomputation.
    pub fn is_consistent(&self) -> bool {
        let f = Self::from_integrals(self.mass, self.kinetic, self.quartic, self.sextic);
        f == *self
    }
}

/// Integrals without the halving check.
pub fn evaluate_unchecked(u: &RadialFunction) -> FunctionalSet {
    let h = u.spacing;
    let n = u.len();
    let w = |j: usize| {
        let r = j as f64 * h;
        4.0 * PI * r * r
    };
    let dens: Vec<f64> = u.values.iter().map(|v| v.norm_sqr()).collect();
    let du = derivative(h, &u.values, Parity::Even);
    let mut m = simpson(h, n, |j| w(j) * dens[j]);
    let mut g = simpson(h, n, |j| w(j) * du[j].norm_sqr());
    let l4 = simpson(h, n, |j| w(j) * dens[j] * dens[j]);
    let l6 = simpson(h, n, |j| w(j) * dens[j] * dens[j] * dens[j]);
    if let Some(t) = u.tail {
        let (mt, gt) = tail_integrals(t, u.radius(n - 1));
        m += mt;
        g += gt;
    }
    FunctionalSet::from_integrals(m, g, l4, l6)
}

/// Closed-form tail contributions to `M` and `G` beyond `r_n`.
fn tail_integrals(t: Tail, r_n: f64) -> (f64, f64) {
    if t.constant == 0.0 || !(t.rate > 0.0) {
        return (0.0, 0.0);
    }
    let k = t.rate;
    let e = t.constant * t.constant * (-2.0 * k * r_n).exp();
    let m = 4.0 * PI * e / (2.0 * k);
    let g = 4.0 * PI * e * (k / 2.0 + 1.0 / r_n) + t.wavenumber * t.wavenumber * m;
    (m, g)
}

/// All functionals of `u`, rejecting grids that are not converged to
/// [`HALVING_THRESHOLD`].
pub fn evaluate(u: &RadialFunction) -> Result<FunctionalSet, FunctionalError> {
    u.check()?;
    let fine = evaluate_unchecked(u);
    let coarse_fn = u.coarsened();
    if coarse_fn.len() >= 12 {
        let coarse = evaluate_unchecked(&coarse_fn);
        let (a, b) = (fine.integrals(), coarse.integrals());
        for i in 0..4 {
            let scale = a[i].abs().max(b[i].abs());
            if scale > 0.0 {
                let change = (a[i] - b[i]).abs() / scale;
                if change > HALVING_THRESHOLD {
                    return Err(FunctionalError::GridTooCoarse { index: i, change });
                }
            }
        }
    }
    Ok(fine)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num.abs() / den.abs()
    }
}

/// Relative residuals of the two Pohozaev identities and of `L4 = 4ωM`.
pub fn pohozaev_residuals(fs: &FunctionalSet, omega: f64) -> [f64; 3] {
    let (m, g, l4, l6) = (fs.mass, fs.kinetic, fs.quartic, fs.sextic);
    let r1 = ratio(g + l6 - l4 + omega * m, g + l6 + l4 + omega * m);
    let r2 = ratio(
        g / 6.0 + l6 / 6.0 - l4 / 4.0 + omega * m / 2.0,
        g / 6.0 + l6 / 6.0 + l4 / 4.0 + omega * m / 2.0,
    );
    let r3 = ratio(l4 - 4.0 * omega * m, l4 + 4.0 * omega * m);
    [r1, r2, r3]
}

/// Relative residuals of `M = (β+1)G/(3ω)`, `L4 = 4(β+1)G/3` and
/// `E = (1-β)G/6`, normalised by `M`, `L4` and `G`.
pub fn compact_identities(fs: &FunctionalSet, omega: f64) -> [f64; 3] {
    let b = fs.beta;
    let g = fs.kinetic;
    [
        ratio(fs.mass - (b + 1.0) * g / (3.0 * omega), fs.mass),
        ratio(fs.quartic - 4.0 * (b + 1.0) * g / 3.0, fs.quartic),
        ratio(fs.energy - (1.0 - b) * g / 6.0, g),
    ]
}

/// Relative residual of `E + (3/32)M = G/2 + (1/6)∫|u|²(|u|² - 3/4)²`,
/// with the right side from its own quadrature pass.
pub fn coercivity_identity(u: &RadialFunction, fs: &FunctionalSet) -> f64 {
    let h = u.spacing;
    let n = u.len();
    let well = simpson(h, n, |j| {
        let r = j as f64 * h;
        let d = u.values[j].norm_sqr();
        4.0 * PI * r * r * d * (d - 0.75) * (d - 0.75)
    });
    let tail_mass = u.tail.map_or(0.0, |t| tail_integrals(t, u.radius(n - 1)).0);
    let lhs = fs.energy + 3.0 / 32.0 * fs.mass;
    let rhs = fs.kinetic / 2.0 + well / 6.0 + 3.0 / 32.0 * tail_mass;
    ratio(lhs - rhs, lhs.abs().max(rhs.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(a: f64, s: f64, h: f64, n: usize) -> RadialFunction {
        RadialFunction::sample(h, n, |r| Complex64::new(a * (-r * r / (s * s)).exp(), 0.0))
    }

    #[test]
    fn gaussian_closed_forms() {
        // u = A e^{-r²/s²}: G = 3A²s(π/2)^{3/2}, L_{2p} = A^{2p}(π/(2p))^{3/2}s³
        let (a, s) = (0.7, 2.0);
        let fs = evaluate(&gaussian(a, s, 0.01, 2000)).unwrap();
        let m = a * a * (PI / 2.0).powf(1.5) * s * s * s;
        let g = 3.0 * a * a * s * (PI / 2.0).powf(1.5);
        let l4 = a.powi(4) * (PI / 4.0).powf(1.5) * s.powi(3);
        let l6 = a.powi(6) * (PI / 6.0).powf(1.5) * s.powi(3);
        for (x, y) in fs.integrals().iter().zip([m, g, l4, l6]) {
            assert!((x - y).abs() < 1e-8 * y, "{x} {y}");
        }
        assert!(fs.is_consistent());
    }

    #[test]
    fn zero_function() {
        let z = RadialFunction::sample(0.1, 100, |_| Complex64::new(0.0, 0.0));
        let fs = evaluate(&z).unwrap();
        assert_eq!(fs, FunctionalSet::default());
        assert_eq!(pohozaev_residuals(&fs, 0.1), [0.0; 3]);
        assert_eq!(compact_identities(&fs, 0.1), [0.0; 3]);
        assert_eq!(coercivity_identity(&z, &fs), 0.0);
    }

    #[test]
    fn coarse_grid_rejected() {
        let u = gaussian(1.0, 0.3, 0.2, 40);
        assert!(matches!(evaluate(&u), Err(FunctionalError::GridTooCoarse { .. })));
    }

    #[test]
    fn non_uniform_rejected() {
        let grid: Vec<f64> = (0..20).map(|j| (j * j) as f64).collect();
        let v = alloc::vec![Complex64::new(1.0, 0.0); 20];
        assert_eq!(RadialFunction::from_samples(&grid, v, None), Err(FunctionalError::NonUniformGrid));
    }

    #[test]
    fn boost_adds_kinetic_energy() {
        let u = gaussian(0.8, 3.0, 0.005, 6000);
        let f0 = evaluate(&u).unwrap();
        let f1 = evaluate(&radial_boost(&u, 1.5)).unwrap();
        assert!((f1.mass - f0.mass).abs() < 1e-12 * f0.mass);
        let expect = f0.energy + 0.5 * 1.5 * 1.5 * f0.mass;
        assert!((f1.energy - expect).abs() < 1e-6 * expect, "{} {}", f1.energy, expect);
    }

    #[test]
    fn tail_terms_match_direct_quadrature() {
        // u = c e^{-kr}/r sampled far out, compared with its own tail formula
        let (c, k, r0) = (2.0, 0.5, 10.0);
        let h = 0.001;
        let n = 40001;
        let t = Tail { constant: c, rate: k, wavenumber: 0.0 };
        let (mt, gt) = tail_integrals(t, r0);
        let f = |r: f64| c * (-k * r).exp() / r;
        let df = |r: f64| -c * (-k * r).exp() * (k / r + 1.0 / (r * r));
        let m = simpson(h, n, |j| {
            let r = r0 + j as f64 * h;
            4.0 * PI * r * r * f(r) * f(r)
        });
        let g = simpson(h, n, |j| {
            let r = r0 + j as f64 * h;
            4.0 * PI * r * r * df(r) * df(r)
        });
        assert!((m - mt).abs() < 1e-8 * mt);
        assert!((g - gt).abs() < 1e-8 * gt);
    }
}
