//! Radial split-step solver for `i u_t = -Δu - |u|²u + |u|⁴u`.
//!
//! The field is stored as `w = r·u` on `r_j = j·Δr`, `j = 0..N`, with
//! `w_0 = w_N = 0`. In this variable the radial Laplacian is `∂_rr` with
//! Dirichlet ends, diagonalized by the type-I discrete sine transform with
//! eigenvalues `(πk/R)²`. One step is Strang splitting: half a nonlinear
//! phase rotation, the exact linear flow, half a rotation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::functionals::{evaluate_unchecked, FunctionalSet, RadialFunction};
use crate::quadrature::{derivative, hermite, simpson, Parity};
use crate::shooting::SolitonProfile;

/// Default number of intervals.
pub const DEFAULT_N: usize = 4096;
/// Default outer radius.
pub const DEFAULT_R_DOM: f64 = 100.0;
/// Largest admissible time step.
pub const DT_MAX: f64 = 1e-3;
/// `|w_{N-1}| / max|w|` above which the wall is considered reached.
pub const REFLECTION_THRESHOLD: f64 = 1e-4;

/// Evolution failures.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum DynamicsError {
    /// The field became non-finite.
    #[error("non-finite field at t = {0}")]
    NonFinite(f64),
    /// Time step outside `(0, DT_MAX]`.
    #[error("time step {0} outside (0, 1e-3]")]
    InvalidStep(f64),
    /// Transform length does not match the field.
    #[error("sine transform of length {transform} used on {interior} interior points")]
    SizeMismatch {
        /// Transform length.
        transform: usize,
        /// Interior points of the field.
        interior: usize,
    },
    /// Too few log rows for a centred difference.
    #[error("need at least 3 log rows, got {0}")]
    InsufficientRows(usize),
    /// Log rows are not uniformly spaced in time.
    #[error("log times are not uniformly spaced")]
    NonUniformLog,
}

/// Unnormalized type-I sine transform of length `M`:
/// `X_k = Σ_{j=1}^{M} x_j sin(πjk/(M+1))`. Applying it twice multiplies by
/// `(M+1)/2`.
pub trait SineTransform {
    /// Length `M`.
    fn len(&self) -> usize;
    /// True for the empty transform.
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Transform in place.
    fn dst1(&self, data: &mut [Complex64]);
}

/// `O(M²)` transform with a tabulated sine; reference and small grids.
#[derive(Clone, Debug)]
pub struct NaiveSineTransform {
    m: usize,
    table: Vec<f64>,
}

impl NaiveSineTransform {
    /// Transform of length `m`.
    pub fn new(m: usize) -> Self {
        let period = 2 * (m + 1);
        let table = (0..period).map(|i| (PI * i as f64 / (m + 1) as f64).sin()).collect();
        NaiveSineTransform { m, table }
    }
}

impl SineTransform for NaiveSineTransform {
    fn len(&self) -> usize {
        self.m
    }

    fn dst1(&self, data: &mut [Complex64]) {
        let period = self.table.len();
        let input = data.to_vec();
        for (k, out) in data.iter_mut().enumerate() {
            let k = k + 1;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, x) in input.iter().enumerate() {
                acc += x * self.table[((j + 1) * k) % period];
            }
            *out = acc;
        }
    }
}

/// Observables at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    /// Time.
    pub t: f64,
    /// Mass.
    pub mass: f64,
    /// Energy.
    pub energy: f64,
    /// Virial `V`.
    pub virial: f64,
    /// Dilation pairing `A = 2 Im ∫ ū x·∇u`.
    pub dilation: f64,
    /// Truncated pairing `A_R`.
    pub truncated: f64,
    /// `sup |u|`.
    pub sup: f64,
    /// Kinetic energy `G`.
    pub kinetic: f64,
}

/// Radial field in the `w = r·u` representation.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialField {
    /// Current time.
    pub t: f64,
    /// Outer radius.
    pub r_dom: f64,
    /// `w_j`, `j = 0..N`.
    pub w: Vec<Complex64>,
    /// Observables recorded so far, strictly increasing in `t`.
    pub observable_log: Vec<ObservableRow>,
    /// Set once `|w_{N-1}| / max|w|` exceeded [`REFLECTION_THRESHOLD`].
    pub boundary_reflection: bool,
    /// Truncation radius for `A_R` in the log.
    pub r_trunc: f64,
}

impl RadialField {
    /// Field with `u(r) = f(r)` on `n` intervals of `[0, r_dom]`.
    pub fn from_fn<F: Fn(f64) -> Complex64>(r_dom: f64, n: usize, f: F) -> Self {
        let h = r_dom / n as f64;
        let mut w: Vec<Complex64> = (0..=n).map(|j| f(j as f64 * h) * (j as f64 * h)).collect();
        w[0] = Complex64::new(0.0, 0.0);
        w[n] = Complex64::new(0.0, 0.0);
        RadialField { t: 0.0, r_dom, w, observable_log: Vec::new(), boundary_reflection: false, r_trunc: 0.25 * r_dom }
    }

    /// Field initialized with a ground state (Hermite interpolation inside
    /// the profile grid, the fitted tail beyond it).
    pub fn from_profile(p: &SolitonProfile, r_dom: f64, n: usize) -> Self {
        let (h, r_n, k, c) = (p.spacing(), p.r_max(), p.tail_rate(), p.tail_constant);
        RadialField::from_fn(r_dom, n, |r| {
            let v = if r <= r_n { hermite(h, &p.values, &p.slopes, r) } else { c * (-k * r).exp() / r };
            Complex64::new(v, 0.0)
        })
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.w.len() - 1
    }

    /// Grid spacing.
    pub fn spacing(&self) -> f64 {
        self.r_dom / self.intervals() as f64
    }

    /// `u_j`, with `u_0` from the odd expansion `w = ar + br³`.
    pub fn values(&self) -> Vec<Complex64> {
        let h = self.spacing();
        let mut u: Vec<Complex64> = self.w.iter().enumerate().map(|(j, w)| if j == 0 { *w } else { w / (j as f64 * h) }).collect();
        u[0] = (self.w[1] * 8.0 - self.w[2]) / (6.0 * h);
        u
    }

    /// `u` as a radial function for the functionals module.
    pub fn to_radial(&self) -> RadialFunction {
        RadialFunction { spacing: self.spacing(), values: self.values(), tail: None }
    }

    /// Complex conjugate (time reversal).
    pub fn conjugate(&mut self) {
        for w in &mut self.w {
            *w = w.conj();
        }
    }

    /// Observables at the current time.
    pub fn observables(&self) -> ObservableRow {
        let u = self.to_radial();
        let fs: FunctionalSet = evaluate_unchecked(&u);
        let sup = u.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        ObservableRow {
            t: self.t,
            mass: fs.mass,
            energy: fs.energy,
            virial: fs.virial,
            dilation: weighted_dilation(&u, |_| 1.0),
            truncated: truncated_virial(self, self.r_trunc),
            sup,
            kinetic: fs.kinetic,
        }
    }

    fn record(&mut self) {
        let row = self.observables();
        self.observable_log.push(row);
    }
}

/// `2 Im ∫ φ(r) ū r u_r 4πr² dr`.
fn weighted_dilation(u: &RadialFunction, phi: impl Fn(f64) -> f64) -> f64 {
    let h = u.spacing;
    let du = derivative(h, &u.values, Parity::Even);
    let integrand = |j: usize| {
        let r = j as f64 * h;
        let f = phi(r);
        if f == 0.0 {
            0.0
        } else {
            f * (u.values[j].conj() * du[j]).im * r * 4.0 * PI * r * r
        }
    };
    2.0 * simpson(h, u.len(), integrand)
}

/// Cutoff equal to 1 on `[0, 1]` and 0 on `[2, ∞)`, with the quintic
/// bridge matching value and two derivatives at both ends.
pub fn cutoff(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let t = s - 1.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// `A_R = 2 Im ∫ φ(r/R) ū r∂_r u dx`.
pub fn truncated_virial(field: &RadialField, r_trunc: f64) -> f64 {
    weighted_dilation(&field.to_radial(), |r| cutoff(r / r_trunc))
}

fn nonlinear_phase(field: &mut RadialField, tau: f64) {
    let h = field.spacing();
    for (j, w) in field.w.iter_mut().enumerate().skip(1) {
        let r = j as f64 * h;
        let m = w.norm_sqr() / (r * r);
        *w *= Complex64::from_polar(1.0, tau * (m - m * m));
    }
}

fn linear_flow<T: SineTransform + ?Sized>(field: &mut RadialField, dt: f64, tr: &T) {
    let n = field.intervals();
    let interior = &mut field.w[1..n];
    tr.dst1(interior);
    let scale = 2.0 / n as f64;
    for (k, x) in interior.iter_mut().enumerate() {
        let lam = PI * (k + 1) as f64 / field.r_dom;
        *x *= Complex64::from_polar(scale, -lam * lam * dt);
    }
    tr.dst1(interior);
}

/// Advance by one Strang step.
pub fn step<T: SineTransform + ?Sized>(field: &mut RadialField, dt: f64, tr: &T) -> Result<(), DynamicsError> {
    if !(dt > 0.0 && dt <= DT_MAX) {
        return Err(DynamicsError::InvalidStep(dt));
    }
    let n = field.intervals();
    if tr.len() != n - 1 {
        return Err(DynamicsError::SizeMismatch { transform: tr.len(), interior: n - 1 });
    }
    nonlinear_phase(field, 0.5 * dt);
    linear_flow(field, dt, tr);
    nonlinear_phase(field, 0.5 * dt);
    field.t += dt;
    if field.w.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        return Err(DynamicsError::NonFinite(field.t));
    }
    let peak = field.w.iter().fold(0.0f64, |m, w| m.max(w.norm()));
    if peak > 0.0 && field.w[n - 1].norm() / peak > REFLECTION_THRESHOLD {
        field.boundary_reflection = true;
    }
    Ok(())
}

/// Step to `t + t_end` with steps of at most `dt` (equal steps), logging
/// observables at the start and every `observe_every` steps.
pub fn evolve<T: SineTransform + ?Sized>(
    field: &mut RadialField,
    t_end: f64,
    dt: f64,
    observe_every: usize,
    tr: &T,
) -> Result<(), DynamicsError> {
    if !(dt > 0.0 && dt <= DT_MAX) {
        return Err(DynamicsError::InvalidStep(dt));
    }
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let every = observe_every.max(1);
    let t0 = field.t;
    if field.observable_log.last().is_none_or(|r| r.t < field.t) {
        field.record();
    }
    for s in 1..=steps {
        step(field, h, tr)?;
        // avoid drift in the clock
        field.t = t0 + s as f64 * h;
        if s % every == 0 || s == steps {
            field.record();
        }
    }
    Ok(())
}

/// Largest `|dA/dt - 4V| / (|4V| + ε)` at interior log rows, with `dA/dt`
/// from centred differences and `ε = 10⁻⁸·G(0)`.
pub fn virial_identity_check(log: &[ObservableRow]) -> Result<f64, DynamicsError> {
    if log.len() < 3 {
        return Err(DynamicsError::InsufficientRows(log.len()));
    }
    let dt = log[1].t - log[0].t;
    if log.windows(2).any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt) {
        return Err(DynamicsError::NonUniformLog);
    }
    let floor = 1e-8 * log[0].kinetic;
    let mut worst = 0.0f64;
    for i in 1..log.len() - 1 {
        let da = (log[i + 1].dilation - log[i - 1].dilation) / (2.0 * dt);
        let v4 = 4.0 * log[i].virial;
        worst = worst.max((da - v4).abs() / (v4.abs() + floor));
    }
    Ok(worst)
}

/// Largest `|A_R| / (4R√(M G))` over a log whose `A_R` used radius `r_trunc`.
pub fn truncated_bound_ratio(log: &[ObservableRow], r_trunc: f64) -> f64 {
    log.iter()
        .map(|row| row.truncated.abs() / (4.0 * r_trunc * (row.mass * row.kinetic).sqrt()))
        .fold(0.0, f64::max)
}

/// Zero field on `n` intervals.
pub fn zero_field(r_dom: f64, n: usize) -> RadialField {
    RadialField {
        t: 0.0,
        r_dom,
        w: vec![Complex64::new(0.0, 0.0); n + 1],
        observable_log: Vec::new(),
        boundary_reflection: false,
        r_trunc: 0.25 * r_dom,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(amp: f64, width: f64) -> impl Fn(f64) -> Complex64 {
        move |r: f64| Complex64::new(amp * (-(r / width) * (r / width)).exp(), 0.0)
    }

    #[test]
    fn naive_transform_is_its_own_inverse() {
        let m = 31;
        let tr = NaiveSineTransform::new(m);
        let x: Vec<Complex64> = (0..m).map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let mut y = x.clone();
        tr.dst1(&mut y);
        tr.dst1(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a * ((m + 1) as f64 / 2.0) - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_field_stays_zero() {
        let mut f = zero_field(20.0, 64);
        let tr = NaiveSineTransform::new(63);
        for _ in 0..10 {
            step(&mut f, 1e-3, &tr).unwrap();
        }
        assert!(f.w.iter().all(|w| *w == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn rejects_bad_steps() {
        let mut f = zero_field(20.0, 64);
        let tr = NaiveSineTransform::new(63);
        assert!(matches!(step(&mut f, 2e-3, &tr), Err(DynamicsError::InvalidStep(_))));
        assert!(matches!(step(&mut f, 1e-3, &NaiveSineTransform::new(10)), Err(DynamicsError::SizeMismatch { .. })));
    }

    #[test]
    fn nonlinear_substep_preserves_modulus() {
        let mut f = RadialField::from_fn(20.0, 128, gaussian(1.2, 2.0));
        let before: Vec<f64> = f.w.iter().map(|w| w.norm()).collect();
        nonlinear_phase(&mut f, 0.37);
        for (a, w) in before.iter().zip(&f.w) {
            assert!((a - w.norm()).abs() <= 4.0 * f64::EPSILON * a);
        }
    }

    #[test]
    fn linear_regime_conserves_mass() {
        let mut f = RadialField::from_fn(40.0, 256, gaussian(1e-6, 3.0));
        let tr = NaiveSineTransform::new(255);
        let m0 = f.observables().mass;
        evolve(&mut f, 1.0, 1e-3, 1000, &tr).unwrap();
        let m1 = f.observable_log.last().unwrap().mass;
        assert!((m1 - m0).abs() < 1e-12 * m0);
    }

    #[test]
    fn free_virial_growth_is_four_g() {
        let mut f = RadialField::from_fn(40.0, 512, gaussian(1e-6, 3.0));
        let tr = NaiveSineTransform::new(511);
        evolve(&mut f, 0.2, 1e-3, 10, &tr).unwrap();
        let log = &f.observable_log;
        let da = (log[2].dilation - log[0].dilation) / (log[2].t - log[0].t);
        let g = log[0].kinetic;
        assert!((da - 4.0 * g).abs() < 1e-6 * 4.0 * g, "{da} {g}");
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(2.5), 0.0);
        assert!((cutoff(1.5) - 0.5).abs() < 1e-15);
        let d = |s: f64| (cutoff(s + 1e-6) - cutoff(s - 1e-6)) / 2e-6;
        assert!(d(1.0 + 1e-6).abs() < 1e-5 && d(2.0 - 1e-6).abs() < 1e-5);
    }

    #[test]
    fn truncated_pairing_saturates_and_vanishes_for_real_fields() {
        let f = RadialField::from_fn(40.0, 256, |r| Complex64::from_polar((-(r / 2.0) * (r / 2.0)).exp(), 0.3 * r));
        let a = f.observables().dilation;
        assert!((truncated_virial(&f, 15.0) - a).abs() < 1e-6 * a.abs());
        let g = RadialField::from_fn(40.0, 256, gaussian(1.0, 2.0));
        assert_eq!(truncated_virial(&g, 5.0), 0.0);
    }

    #[test]
    fn second_order_in_time() {
        let run = |dt: f64| {
            let mut f = RadialField::from_fn(30.0, 128, gaussian(0.8, 2.0));
            let tr = NaiveSineTransform::new(127);
            evolve(&mut f, 0.2, dt, usize::MAX, &tr).unwrap();
            f.w
        };
        let (a, b, c) = (run(1e-3), run(5e-4), run(2.5e-4));
        let diff = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let order = (diff(&a, &b) / diff(&b, &c)).log2();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn conjugate_evolution_returns() {
        let mut f = RadialField::from_fn(30.0, 128, gaussian(0.8, 2.0));
        let w0 = f.w.clone();
        let tr = NaiveSineTransform::new(127);
        evolve(&mut f, 0.1, 1e-3, usize::MAX, &tr).unwrap();
        f.conjugate();
        evolve(&mut f, 0.1, 1e-3, usize::MAX, &tr).unwrap();
        f.conjugate();
        let err = f.w.iter().zip(&w0).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}
