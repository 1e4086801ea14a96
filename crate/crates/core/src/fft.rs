//! FFT helpers: separable n-dimensional transforms and centered 1D transforms.

use crate::scalar::{Complex, Real};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Unnormalized separable FFT over up to three axes, first axis fastest.
pub struct FftNd<T: Real> {
    dims: [usize; 3],
    fwd: Vec<Arc<dyn Fft<T>>>,
    inv: Vec<Arc<dyn Fft<T>>>,
}

impl<T: Real> FftNd<T> {
    pub fn new(dims: &[usize]) -> Self {
        assert!(!dims.is_empty() && dims.len() <= 3, "1 to 3 axes supported");
        let mut d = [1usize; 3];
        d[..dims.len()].copy_from_slice(dims);
        let mut planner = FftPlanner::new();
        let fwd = d.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inv = d.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        FftNd { dims: d, fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// In-place forward transform, exp(-i...) kernel.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.fwd);
    }

    /// In-place inverse transform without the 1/len factor.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.inv);
    }

    fn run(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        assert_eq!(data.len(), self.len());
        let [n0, n1, n2] = self.dims;
        if n0 > 1 {
            plans[0].process(data);
        }
        if n1 > 1 {
            strided_axis(data, &*plans[1], n1, n0, n2);
        }
        if n2 > 1 {
            strided_axis(data, &*plans[2], n2, n0 * n1, 1);
        }
    }
}

/// Transforms an axis of length `n` with element stride `stride`, repeated over
/// `outer` blocks of size `n * stride`.
fn strided_axis<T: Real>(
    data: &mut [Complex<T>],
    fft: &dyn Fft<T>,
    n: usize,
    stride: usize,
    outer: usize,
) {
    const BATCH: usize = 16;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); BATCH * n];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    for o in 0..outer {
        let base = o * n * stride;
        let mut i = 0;
        while i < stride {
            let b = BATCH.min(stride - i);
            for k in 0..n {
                let row = base + k * stride + i;
                for j in 0..b {
                    buf[j * n + k] = data[row + j];
                }
            }
            fft.process_with_scratch(&mut buf[..b * n], &mut scratch);
            for k in 0..n {
                let row = base + k * stride + i;
                for j in 0..b {
                    data[row + j] = buf[j * n + k];
                }
            }
            i += b;
        }
    }
}

/// Centered DFT of even length M:
/// X[m] = Σ_k x[k] exp(-2πi (m - M/2)(k - M/2) / M).
pub struct CenteredFft<T: Real> {
    m: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> CenteredFft<T> {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2 && m % 2 == 0, "centered transforms need even length");
        let mut planner = FftPlanner::new();
        CenteredFft {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Forward centered transform of every length-M row in `data`.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.modulate(data);
        self.fwd.process(data);
        self.modulate_out(data, T::one());
    }

    /// Inverse centered transform including the 1/M factor.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.modulate(data);
        self.inv.process(data);
        self.modulate_out(data, T::one() / T::idx(self.m));
    }

    fn modulate(&self, data: &mut [Complex<T>]) {
        for row in data.chunks_exact_mut(self.m) {
            for v in row.iter_mut().skip(1).step_by(2) {
                *v = -*v;
            }
        }
    }

    fn modulate_out(&self, data: &mut [Complex<T>], scale: T) {
        // the (-1)^(M/2) factor folds into the overall sign
        let s = if (self.m / 2) % 2 == 0 { scale } else { -scale };
        for row in data.chunks_exact_mut(self.m) {
            for (k, v) in row.iter_mut().enumerate() {
                *v = if k % 2 == 0 { *v * s } else { *v * (-s) };
            }
        }
    }
}

/// Signed frequency index of position `m` on a centered grid of length `len`.
#[inline]
pub fn centered_index(m: usize, len: usize) -> isize {
    m as isize - (len / 2) as isize
}
