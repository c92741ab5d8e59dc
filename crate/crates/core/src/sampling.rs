//! Seeded random radial test functions: sums of Gaussian shells with
//! complex phases, optionally boosted by `e^{iξr}`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::functionals::{evaluate, radial_boost, FunctionalError, FunctionalSet, RadialFunction};

/// Smallest bump width.
pub const MIN_WIDTH: f64 = 0.5;
/// Largest bump width.
pub const MAX_WIDTH: f64 = 20.0;
/// Largest boost wavenumber.
pub const MAX_BOOST: f64 = 3.0;
/// Largest shell radius.
pub const MAX_CENTER: f64 = 10.0;

const POINTS_PER_WIDTH: f64 = 40.0;
const POINTS_PER_WAVELENGTH: f64 = 60.0;
const EXTENT_WIDTHS: f64 = 9.0;
const MAX_REFINEMENTS: usize = 3;

/// One shell `A e^{iθ} exp(-((r - c)/w)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    /// Amplitude `A`.
    pub amplitude: f64,
    /// Shell radius `c`.
    pub center: f64,
    /// Width `w`.
    pub width: f64,
    /// Phase `θ`.
    pub phase: f64,
}

impl Bump {
    fn at(&self, r: f64) -> Complex64 {
        let s = (r - self.center) / self.width;
        Complex64::from_polar(self.amplitude * (-s * s).exp(), self.phase)
    }
}

/// A sum of bumps times `e^{iξr}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSet {
    /// The shells.
    pub bumps: Vec<Bump>,
    /// Boost wavenumber `ξ` (0 for none).
    pub boost: f64,
}

impl BumpSet {
    /// Draw 1–4 bumps with log-uniform widths in `[MIN_WIDTH, MAX_WIDTH]`,
    /// uniform amplitudes in (0, 1], uniform phases and shell radii, and a
    /// boost uniform in `[0, MAX_BOOST]` when `boosted`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, boosted: bool) -> Self {
        let count = rng.gen_range(1..=4);
        let (lw0, lw1) = (MIN_WIDTH.ln(), MAX_WIDTH.ln());
        let bumps = (0..count)
            .map(|_| Bump {
                amplitude: 1.0 - rng.gen::<f64>(),
                center: rng.gen::<f64>() * MAX_CENTER,
                width: rng.gen_range(lw0..=lw1).exp(),
                phase: rng.gen::<f64>() * 2.0 * PI,
            })
            .collect();
        let boost = if boosted { rng.gen::<f64>() * MAX_BOOST } else { 0.0 };
        BumpSet { bumps, boost }
    }

    /// Default spacing and number of samples.
    pub fn grid(&self) -> (f64, usize) {
        let w_min = self.bumps.iter().map(|b| b.width).fold(f64::INFINITY, f64::min);
        let mut h = w_min / POINTS_PER_WIDTH;
        if self.boost > 0.0 {
            h = h.min(2.0 * PI / self.boost / POINTS_PER_WAVELENGTH);
        }
        let extent = self.bumps.iter().map(|b| b.center + EXTENT_WIDTHS * b.width).fold(0.0, f64::max);
        (h, (extent / h).ceil() as usize + 1)
    }

    /// Samples on spacing `h`.
    pub fn sample(&self, spacing: f64, n: usize) -> RadialFunction {
        let u = RadialFunction::sample(spacing, n, |r| self.bumps.iter().map(|b| b.at(r)).sum());
        if self.boost == 0.0 {
            u
        } else {
            radial_boost(&u, self.boost)
        }
    }

    /// Samples and functionals, refining the grid until the halving check
    /// passes.
    pub fn evaluate(&self) -> Result<(RadialFunction, FunctionalSet), FunctionalError> {
        let (mut h, mut n) = self.grid();
        let mut last = FunctionalError::TooFewSamples;
        for _ in 0..=MAX_REFINEMENTS {
            let u = self.sample(h, n);
            match evaluate(&u) {
                Ok(fs) => return Ok((u, fs)),
                Err(e @ FunctionalError::GridTooCoarse { .. }) => last = e,
                Err(e) => return Err(e),
            }
            h /= 2.0;
            n = 2 * n - 1;
        }
        Err(last)
    }
}

/// Generator for trial `index` of a run seeded by `seed`. Each trial has
/// its own stream, so results do not depend on how trials are split across
/// workers.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Functionals of `c·u`.
pub fn scale_functionals(fs: &FunctionalSet, c: f64) -> FunctionalSet {
    let c2 = c * c;
    FunctionalSet::from_integrals(fs.mass * c2, fs.kinetic * c2, fs.quartic * c2 * c2, fs.sextic * c2 * c2 * c2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_respect_ranges() {
        for i in 0..200 {
            let s = BumpSet::random(&mut trial_rng(7, i), true);
            assert!((1..=4).contains(&s.bumps.len()));
            assert!((0.0..=MAX_BOOST).contains(&s.boost));
            for b in &s.bumps {
                assert!(b.width >= MIN_WIDTH * (1.0 - 1e-12) && b.width <= MAX_WIDTH * (1.0 + 1e-12));
                assert!(b.amplitude > 0.0 && b.amplitude <= 1.0);
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = BumpSet::random(&mut trial_rng(1, 3), false);
        let b = BumpSet::random(&mut trial_rng(1, 3), false);
        let c = BumpSet::random(&mut trial_rng(1, 4), false);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn centred_gaussian_mass() {
        let s = BumpSet { bumps: alloc::vec![Bump { amplitude: 1.0, center: 0.0, width: 2.0, phase: 1.0 }], boost: 0.0 };
        let (_, fs) = s.evaluate().unwrap();
        let exact = (PI / 2.0).powf(1.5) * 8.0;
        assert!((fs.mass - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn scaling_matches_quadrature() {
        let s = BumpSet::random(&mut trial_rng(11, 0), true);
        let (u, fs) = s.evaluate().unwrap();
        let scaled = RadialFunction { values: u.values.iter().map(|v| v * 1.7).collect(), ..u };
        let direct = crate::functionals::evaluate_unchecked(&scaled);
        let closed = scale_functionals(&fs, 1.7);
        for (a, b) in direct.integrals().iter().zip(closed.integrals()) {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }
}
