//! Scalar root finding, minimisation and table interpolation.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Regula falsi with the Illinois modification on a sign-changing bracket.
///
/// `f` may fail; the first error aborts the search. Stops when the bracket
/// is narrower than `tol` (absolute) or after `max_iter` evaluations.
pub fn illinois<F, E>(mut f: F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, tol: f64, max_iter: usize) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok((a * fb - b * fa) / (fb - fa))
}

/// Plain bisection for a monotone predicate change on `[lo, hi]`:
/// `f(lo) < 0 <= f(hi)` or the reverse.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> f64 {
    let flo = f(lo);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimisation of `f` on `[a, b]`.
pub fn golden_min<F, E>(mut f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let g = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Vertex of the least-squares parabola through the points.
pub fn parabola_vertex(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let x0 = xs.iter().sum::<f64>() / n as f64;
    // normal equations for y = c0 + c1 t + c2 t², t = x - x0
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for (x, y) in xs.iter().zip(ys) {
        let u = x - x0;
        let mut p = 1.0;
        for k in 0..5 {
            s[k] += p;
            if k < 3 {
                t[k] += p * y;
            }
            p *= u;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let c = solve3(m, t)?;
    (c[2] > 0.0).then(|| x0 - c[1] / (2.0 * c[2]))
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = b[i];
        }
        *o = det(&mk) / d;
    }
    Some(out)
}

/// Four-point Lagrange interpolation in a table sorted by `xs`, using the
/// stencil nearest to `x` (extrapolates from the end stencils).
pub fn lagrange4(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    assert!(n >= 2 && n == ys.len());
    if n < 4 {
        let i = xs.partition_point(|&v| v < x).clamp(1, n - 1);
        let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + t * (ys[i] - ys[i - 1]);
    }
    let k = xs.partition_point(|&v| v < x);
    let start = k.saturating_sub(2).min(n - 4);
    let mut sum = 0.0;
    for i in start..start + 4 {
        let mut w = 1.0;
        for j in start..start + 4 {
            if j != i {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        sum += w * ys[i];
    }
    sum
}

/// Ordinary least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| {
        let slope = sxy / sxx;
        (slope, my - slope * mx)
    })
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect(),
    }
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illinois_cubic_root() {
        let r = illinois::<_, ()>(|x| Ok(x * x * x - 2.0), 0.0, -2.0, 2.0, 6.0, 1e-14, 200).unwrap();
        assert!((r - 2.0f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn golden_and_parabola() {
        let (x, _) = golden_min::<_, ()>(|x| Ok((x - 0.3) * (x - 0.3) + 1.0), -1.0, 2.0, 1e-10, 200).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        let xs = [0.0, 0.1, 0.2, 0.35, 0.5];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (x - 0.27) * (x - 0.27) - 1.0).collect();
        assert!((parabola_vertex(&xs, &ys).unwrap() - 0.27).abs() < 1e-12);
    }

    #[test]
    fn lagrange_exact_on_cubics() {
        let xs = [0.0, 0.5, 1.1, 1.7, 2.0, 3.5];
        let f = |x: f64| x * x * x - x + 2.0;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for x in [0.2, 1.0, 1.9, 3.0, 4.0, -0.5] {
            assert!((lagrange4(&xs, &ys, x) - f(x)).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn fit_and_spacing() {
        let xs = linspace(0.0, 1.0, 11);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let (s, c) = linear_fit(&xs, &ys).unwrap();
        assert!((s - 3.0).abs() < 1e-12 && (c + 1.0).abs() < 1e-12);
        let l = logspace(1e-3, 1e-1, 3);
        assert!((l[1] - 1e-2).abs() < 1e-15);
    }
}
