//! Adaptive Dormand–Prince 5(4) integrator for small autonomous-in-form
//! systems `y' = f(t, y)`.
//!
//! The stepper keeps its step-size suggestion between calls so a trajectory
//! can be advanced interval by interval along an output grid.

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

/// Absolute and relative error tolerances for one step.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    /// Absolute tolerance.
    pub abs: f64,
    /// Relative tolerance.
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-10 }
    }
}

/// Integrator failures.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum OdeError {
    /// The right-hand side or the state became NaN or infinite.
    #[error("non-finite state at t = {t}")]
    NonFinite {
        /// Time at which the failure was detected.
        t: f64,
    },
    /// The step size collapsed below the resolvable minimum.
    #[error("step size underflow at t = {t}")]
    StepUnderflow {
        /// Time at which the failure was detected.
        t: f64,
    },
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince 5(4) stepper with PI-free standard step control.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    tol: Tolerance,
    h: f64,
    h_max: f64,
    steps: u64,
}

impl Dopri5 {
    /// New stepper with initial step `h0` and step cap `h_max`.
    pub fn new(tol: Tolerance, h0: f64, h_max: f64) -> Self {
        Dopri5 { tol, h: h0.abs(), h_max: h_max.abs(), steps: 0 }
    }

    /// Number of accepted steps so far.
    pub fn accepted_steps(&self) -> u64 {
        self.steps
    }

    /// Advance `y` from `t0` to `t1` (either direction).
    pub fn advance<F, const N: usize>(
        &mut self,
        f: &F,
        t0: f64,
        y: &mut [f64; N],
        t1: f64,
    ) -> Result<(), OdeError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let span = (t1 - t0).abs();
        if span == 0.0 {
            return Ok(());
        }
        let h_min = 1e-14 * t0.abs().max(t1.abs()).max(1.0);
        let mut k1 = f(t, y);
        check(&k1, t)?;
        loop {
            let remaining = (t1 - t).abs();
            if remaining <= 1e-15 * span {
                return Ok(());
            }
            let mut h = self.h.min(self.h_max).min(remaining);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = dir * h;
            let (y_new, k7, err) = stage(f, t, y, &k1, hs);
            let norm = self.error_norm(y, &y_new, &err);
            if !norm.is_finite() {
                self.h = h * 0.2;
                if self.h < h_min {
                    return Err(OdeError::NonFinite { t });
                }
                continue;
            }
            if norm <= 1.0 {
                t = if last { t1 } else { t + hs };
                *y = y_new;
                k1 = k7;
                check(y, t)?;
                self.steps += 1;
                let fac = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                // keep the suggestion from a clipped final step
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
            } else {
                let fac = (0.9 * norm.powf(-0.2)).clamp(0.1, 0.9);
                self.h = h * fac;
                if self.h < h_min {
                    return Err(OdeError::StepUnderflow { t });
                }
            }
        }
    }

    fn error_norm<const N: usize>(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            let sc = self.tol.abs + self.tol.rel * y[i].abs().max(y_new[i].abs());
            let e = err[i] / sc;
            s += e * e;
        }
        (s / N as f64).sqrt()
    }
}

fn check<const N: usize>(y: &[f64; N], t: f64) -> Result<(), OdeError> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(OdeError::NonFinite { t })
    }
}

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

#[allow(clippy::type_complexity)]
fn stage<F, const N: usize>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &comb(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = comb(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, k7, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut y = [1.0, 0.0];
        let mut st = Dopri5::new(Tolerance { abs: 1e-13, rel: 1e-12 }, 1e-3, 1.0);
        let two_pi = 2.0 * core::f64::consts::PI;
        st.advance(&f, 0.0, &mut y, two_pi).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10, "{y:?}");
    }

    #[test]
    fn grid_clipped_and_backward() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let mut y = [1.0];
        let mut st = Dopri5::new(Tolerance::default(), 0.1, 1.0);
        for j in 0..100 {
            st.advance(&f, j as f64 * 0.05, &mut y, (j + 1) as f64 * 0.05).unwrap();
        }
        assert!((y[0] - libm::exp(5.0)).abs() < 1e-8 * libm::exp(5.0));
        let mut z = [libm::exp(-3.0)];
        let g = |_t: f64, y: &[f64; 1]| [-y[0]];
        st.advance(&g, 3.0, &mut z, 0.0).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn blowup_reports_error() {
        let f = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let mut y = [1.0];
        let mut st = Dopri5::new(Tolerance::default(), 0.01, 1.0);
        assert!(st.advance(&f, 0.0, &mut y, 2.0).is_err());
    }
}
