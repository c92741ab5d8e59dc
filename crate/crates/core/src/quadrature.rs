//! Uniform-grid quadrature, finite differences and Hermite interpolation.
//!
//! All grids here are `r_j = j·h`, `j = 0..n`, with a reflection rule at
//! `r = 0` supplied by [`Parity`].

use core::ops::{Add, Mul, Sub};

/// Behaviour of a radial function under `r -> -r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// `u(-r) = u(r)`, e.g. a smooth radial profile.
    Even,
    /// `u(-r) = -u(r)`, e.g. `r·u(r)`.
    Odd,
}

/// Composite Simpson rule for `n` samples `f(0..n)` at spacing `h`.
///
/// Odd interval counts close with the 3/8 rule on the last three intervals.
pub fn simpson<F: Fn(usize) -> f64>(h: f64, n: usize, f: F) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f(0) + f(1)),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals.is_multiple_of(2) { (intervals, false) } else { (intervals - 3, true) };
            let mut s = 0.0;
            if even_end > 0 {
                let mut odd = 0.0;
                let mut even = 0.0;
                for j in 1..even_end {
                    if j % 2 == 1 {
                        odd += f(j);
                    } else {
                        even += f(j);
                    }
                }
                s = h / 3.0 * (f(0) + 4.0 * odd + 2.0 * even + f(even_end));
            }
            if tail {
                let k = even_end;
                s += 3.0 * h / 8.0 * (f(k) + 3.0 * f(k + 1) + 3.0 * f(k + 2) + f(k + 3));
            }
            s
        }
    }
}

#[inline]
fn reflect<T>(v: &[T], j: isize, parity: Parity) -> T
where
    T: Copy + Mul<f64, Output = T>,
{
    if j >= 0 {
        v[j as usize]
    } else {
        match parity {
            Parity::Even => v[(-j) as usize],
            Parity::Odd => v[(-j) as usize] * -1.0,
        }
    }
}

/// Fourth-order first derivative on a uniform grid.
///
/// Centred stencils use the parity reflection near `r = 0`; the last two
/// points use one-sided fourth-order stencils.
pub fn derivative<T>(h: f64, v: &[T], parity: Parity) -> alloc::vec::Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = v.len();
    assert!(n >= 6, "derivative needs at least 6 samples");
    let c = 1.0 / (12.0 * h);
    let mut out = alloc::vec::Vec::with_capacity(n);
    for j in 0..n - 2 {
        let ji = j as isize;
        let d = (reflect(v, ji - 2, parity) - reflect(v, ji + 2, parity)) * 1.0
            + (v[j + 1] - reflect(v, ji - 1, parity)) * 8.0;
        out.push(d * c);
    }
    let m = n - 1;
    let a = v[m - 1] * 10.0 + v[m] * 3.0 - v[m - 2] * 18.0 + v[m - 3] * 6.0 - v[m - 4];
    out.push(a * c);
    let b = v[m] * 25.0 - v[m - 1] * 48.0 + v[m - 2] * 36.0 - v[m - 3] * 16.0 + v[m - 4] * 3.0;
    out.push(b * c);
    out
}

/// Sixth-order centred second derivative at index `j` (`j <= n - 4`),
/// using parity reflection at `r = 0`.
pub fn second_derivative_at(h: f64, v: &[f64], j: usize, parity: Parity) -> f64 {
    let ji = j as isize;
    let g = |k: isize| reflect(v, k, parity);
    (2.0 * (g(ji - 3) + g(ji + 3)) - 27.0 * (g(ji - 2) + g(ji + 2)) + 270.0 * (g(ji - 1) + g(ji + 1))
        - 490.0 * v[j])
        / (180.0 * h * h)
}

/// Cubic Hermite interpolation of samples with known slopes on `r_j = j·h`.
///
/// Outside the grid the last sample is held constant.
pub fn hermite(h: f64, values: &[f64], slopes: &[f64], r: f64) -> f64 {
    let n = values.len();
    if r <= 0.0 {
        return values[0];
    }
    let x = r / h;
    let j = x as usize;
    if j + 1 >= n {
        return values[n - 1];
    }
    let t = x - j as f64;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * values[j] + h10 * h * slopes[j] + h01 * values[j + 1] + h11 * h * slopes[j + 1]
}

/// Three-point derivative at the middle of non-uniformly spaced samples.
pub fn three_point_slope(x: [f64; 3], y: [f64; 3]) -> f64 {
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[1];
    (-h2 / (h1 * (h1 + h2))) * y[0] + ((h2 - h1) / (h1 * h2)) * y[1] + (h1 / (h2 * (h1 + h2))) * y[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn simpson_exact_for_cubics() {
        for n in [2usize, 3, 4, 5, 6, 7, 10, 11] {
            let h = 0.3;
            let s = simpson(h, n, |j| {
                let x = j as f64 * h;
                x * x * x - 2.0 * x + 1.0
            });
            let b = (n - 1) as f64 * h;
            let exact = b.powi(4) / 4.0 - b * b + b;
            if n >= 3 {
                assert!((s - exact).abs() < 1e-12, "n={n} {s} {exact}");
            }
        }
    }

    #[test]
    fn derivative_of_gaussian() {
        let h = 0.01;
        let v: Vec<f64> = (0..1000).map(|j| libm::exp(-(j as f64 * h).powi(2))).collect();
        let d = derivative(h, &v, Parity::Even);
        for (j, dj) in d.iter().enumerate() {
            let x = j as f64 * h;
            let exact = -2.0 * x * libm::exp(-x * x);
            assert!((dj - exact).abs() < 1e-7, "j={j}");
        }
    }

    #[test]
    fn odd_second_derivative() {
        let h = 0.01;
        let v: Vec<f64> = (0..200).map(|j| libm::sin(j as f64 * h)).collect();
        for j in 0..190 {
            let s = second_derivative_at(h, &v, j, Parity::Odd);
            assert!((s + v[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let h = 0.5;
        let f = |x: f64| 2.0 * x * x * x - x + 0.25;
        let df = |x: f64| 6.0 * x * x - 1.0;
        let v: Vec<f64> = (0..10).map(|j| f(j as f64 * h)).collect();
        let s: Vec<f64> = (0..10).map(|j| df(j as f64 * h)).collect();
        for k in 0..40 {
            let x = k as f64 * 0.1;
            assert!((hermite(h, &v, &s, x) - f(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn three_point_quadratic() {
        let q = |x: f64| 3.0 * x * x - x;
        let x = [0.1, 0.25, 0.7];
        let d = three_point_slope(x, [q(x[0]), q(x[1]), q(x[2])]);
        assert!((d - (6.0 * 0.25 - 1.0)).abs() < 1e-12);
    }
}
