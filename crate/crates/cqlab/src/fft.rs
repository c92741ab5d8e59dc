//! Type-I sine transform through a complex FFT of the odd extension.

use std::sync::Arc;

use cqlab_core::dynamics::SineTransform;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// DST-I of length `M` computed with an FFT of length `2(M+1)`.
pub struct FftSineTransform {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl FftSineTransform {
    /// Plan a transform of length `m`.
    pub fn new(m: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        FftSineTransform { m, fft }
    }
}

impl SineTransform for FftSineTransform {
    fn len(&self) -> usize {
        self.m
    }

    fn dst1(&self, data: &mut [Complex64]) {
        let m = self.m;
        assert_eq!(data.len(), m);
        let zero = Complex64::new(0.0, 0.0);
        let mut buf = vec![zero; 2 * (m + 1)];
        for (j, x) in data.iter().enumerate() {
            buf[j + 1] = *x;
            buf[2 * (m + 1) - 1 - j] = -*x;
        }
        self.fft.process(&mut buf);
        // Y_k = -2i X_k
        let half_i = Complex64::new(0.0, 0.5);
        for (k, x) in data.iter_mut().enumerate() {
            *x = buf[k + 1] * half_i;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cqlab_core::dynamics::NaiveSineTransform;

    #[test]
    fn matches_naive_transform() {
        for m in [1, 7, 30, 63] {
            let x: Vec<Complex64> = (0..m).map(|j| Complex64::new((j as f64 * 0.7).sin(), (j as f64).cos())).collect();
            let (mut a, mut b) = (x.clone(), x);
            FftSineTransform::new(m).dst1(&mut a);
            NaiveSineTransform::new(m).dst1(&mut b);
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).norm() < 1e-11 * (1.0 + q.norm()));
            }
        }
    }
}
