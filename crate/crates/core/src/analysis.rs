//! Sampling-rate calculators, the angular sampling sweep and masked error
//! metrics.

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::radon_fourier::{fbp2d_nufft, image_to_radial_spectrum_2d};
use crate::scalar::{Complex, Real};
use crate::volume::Image2D;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingRates {
    pub n_rho: usize,
    pub n_theta: usize,
    pub n_phi: Option<usize>,
    pub delta_rho: f64,
    pub delta_theta: f64,
}

fn check_positive(x_max: f64, w_max: f64) -> Result<()> {
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::invalid("x_max", "must be positive"));
    }
    if !(w_max.is_finite() && w_max > 0.0) {
        return Err(Error::invalid("w_max", "must be positive"));
    }
    Ok(())
}

/// Sample spacing Δx = π/w_max and count N_x = 2·x_max·w_max/π for a signal
/// supported on [-x_max, x_max] and band-limited to w_max.
pub fn nyquist_rates(x_max: f64, w_max: f64) -> Result<(f64, f64)> {
    check_positive(x_max, w_max)?;
    let pi = std::f64::consts::PI;
    Ok((pi / w_max, 2.0 * x_max * w_max / pi))
}

/// Sinogram rates: Nρ = N_x, Nθ = ⌈π·N_x⌉, Δθ = π/(x_max·w_max + 1).
pub fn sinogram_rates(x_max: f64, w_max: f64) -> Result<SamplingRates> {
    let (dx, nx) = nyquist_rates(x_max, w_max)?;
    let pi = std::f64::consts::PI;
    let n_rho = nx.round() as usize;
    let n_theta = (pi * nx - 1e-9).ceil() as usize;
    Ok(SamplingRates {
        n_rho,
        n_theta,
        n_phi: None,
        delta_rho: dx,
        delta_theta: pi / (x_max * w_max + 1.0),
    })
}

/// The hexagonal trade-off pair Nρ = Nθ (= Nφ) = 2N for an N-sample object.
pub fn practical_rates(n: usize, with_phi: bool) -> Result<SamplingRates> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    Ok(SamplingRates {
        n_rho: 2 * n,
        n_theta: 2 * n,
        n_phi: with_phi.then_some(2 * n),
        delta_rho: 0.5,
        delta_theta: std::f64::consts::PI / (2 * n) as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// (Nθ, mean abs error per pixel on the inscribed disk)
    pub points: Vec<(usize, f64)>,
    /// smallest Nθ whose error is within 2% of the error at the largest Nθ
    pub plateau: usize,
}

impl SweepResult {
    /// Error at the largest Nθ.
    pub fn floor(&self) -> f64 {
        self.points.last().map(|p| p.1).unwrap_or(0.0)
    }

    /// Each error at most 1.02 times the smallest error seen before it.
    pub fn is_monotone(&self, jitter: f64) -> bool {
        let mut best = f64::INFINITY;
        for &(_, e) in &self.points {
            if e > best * (1.0 + jitter) {
                return false;
            }
            best = best.min(e);
        }
        true
    }
}

pub const PLATEAU_TOLERANCE: f64 = 0.02;

/// Image → radial spectrum → ramp-filtered NUFFT adjoint for every Nθ in
/// the list, scoring each reconstruction on the inscribed disk.
pub fn angular_sweep<T: Real>(img: &Image2D<T>, n_theta_list: &[usize], n_rho: usize) -> Result<SweepResult> {
    if img.data.len() != img.n * img.n || img.n == 0 {
        return Err(Error::dims("image", img.n * img.n, img.data.len()));
    }
    if n_theta_list.is_empty() {
        return Err(Error::invalid("n_theta_list", "must not be empty"));
    }
    if n_theta_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n_theta_list", "must be strictly increasing"));
    }
    let disk = Image2D::<T>::inscribed_disk(img.n);
    let points: Vec<(usize, f64)> = n_theta_list
        .par_iter()
        .map(|&nt| {
            let s = image_to_radial_spectrum_2d(img, n_rho, nt)?;
            let r = fbp2d_nufft(&s, img.n)?;
            let m = masked_error_metrics(&r.image.data, &img.data, &disk)?;
            Ok((nt, m.mean_abs))
        })
        .collect::<Result<_>>()?;
    let floor = points.last().map(|p| p.1).unwrap_or(0.0);
    let plateau = points
        .iter()
        .find(|p| p.1 <= floor * (1.0 + PLATEAU_TOLERANCE))
        .map(|p| p.0)
        .unwrap_or(0);
    Ok(SweepResult { points, plateau })
}

/// Removes the spatial frequencies outside the disk inscribed in the
/// square DFT band.
pub fn zero_corner_frequencies<T: Real>(img: &Image2D<T>) -> Image2D<T> {
    let n = img.n;
    let fft = FftNd::<T>::new(&[n, n]);
    let mut g: Vec<Complex<T>> = img.data.iter().map(|&v| Complex::new(v, T::zero())).collect();
    fft.forward(&mut g);
    let half = n as f64 / 2.0;
    let f = |i: usize| if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
    for j in 0..n {
        for i in 0..n {
            let (a, b) = (f(i), f(j));
            if a * a + b * b > half * half {
                g[i + n * j] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    fft.inverse(&mut g);
    let inv = T::one() / T::idx(n * n);
    Image2D {
        n,
        data: g.iter().map(|v| v.re * inv).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mean_abs: f64,
    pub rmse: f64,
    pub max_abs: f64,
    /// mean |b| over the mask, for relative statements
    pub mean_signal: f64,
    pub count: usize,
}

/// Metrics of a - b over the mask-true elements.
pub fn masked_error_metrics<T: Real>(a: &[T], b: &[T], mask: &[bool]) -> Result<ErrorMetrics> {
    if a.len() != b.len() {
        return Err(Error::dims("compared arrays", a.len(), b.len()));
    }
    if mask.len() != a.len() {
        return Err(Error::dims("mask", a.len(), mask.len()));
    }
    let (mut s1, mut s2, mut mx, mut sig, mut count) = (0.0, 0.0, 0.0f64, 0.0, 0usize);
    for ((x, y), &m) in a.iter().zip(b).zip(mask) {
        if m {
            let d = (x.to_f64().unwrap_or(f64::NAN) - y.to_f64().unwrap_or(f64::NAN)).abs();
            s1 += d;
            s2 += d * d;
            mx = mx.max(d);
            sig += y.to_f64().unwrap_or(f64::NAN).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::invalid("mask", "selects no elements"));
    }
    let c = count as f64;
    Ok(ErrorMetrics {
        mean_abs: s1 / c,
        rmse: (s2 / c).sqrt(),
        max_abs: mx,
        mean_signal: sig / c,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{random_image, shepp_logan_slice};

    #[test]
    fn nyquist_examples() {
        let pi = std::f64::consts::PI;
        let (dx, nx) = nyquist_rates(pi, 1.0).unwrap();
        assert!((dx - pi).abs() < 1e-15 && (nx - 2.0).abs() < 1e-15);
        let (_, n2) = nyquist_rates(2.0 * pi, 1.0).unwrap();
        assert!((n2 - 2.0 * nx).abs() < 1e-15);
        let (_, n) = nyquist_rates(64.0, pi).unwrap();
        assert!((n - 128.0).abs() < 1e-12);
        assert!(nyquist_rates(0.0, 1.0).is_err());
        assert!(nyquist_rates(1.0, -1.0).is_err());
    }

    #[test]
    fn sinogram_example() {
        let r = sinogram_rates(64.0, std::f64::consts::PI).unwrap();
        assert_eq!((r.n_rho, r.n_theta), (128, 403));
        let p = practical_rates(128, true).unwrap();
        assert_eq!((p.n_rho, p.n_theta, p.n_phi), (256, 256, Some(256)));
    }

    #[test]
    fn metrics_contract() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let mask = vec![true, true, false, true];
        let m = masked_error_metrics(&a, &a, &mask).unwrap();
        assert_eq!((m.mean_abs, m.rmse, m.max_abs), (0.0, 0.0, 0.0));
        let mut b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        assert_eq!(masked_error_metrics(&b, &a, &mask).unwrap().mean_abs, 1.0);
        let before = masked_error_metrics(&b, &a, &mask).unwrap();
        b[2] = 1e9;
        assert_eq!(masked_error_metrics(&b, &a, &mask).unwrap(), before);
        assert!(masked_error_metrics(&a, &a, &[false; 4]).is_err());
        assert!(masked_error_metrics(&a, &a[..3], &mask).is_err());
    }

    #[test]
    fn sweep_rejects_unsorted_lists() {
        let img = shepp_logan_slice::<f64>(16);
        assert!(angular_sweep(&img, &[16, 8], 32).is_err());
        assert!(angular_sweep(&img, &[], 32).is_err());
    }

    #[test]
    fn small_sweep_improves() {
        let img = shepp_logan_slice::<f64>(32);
        let r = angular_sweep(&img, &[4, 16, 64], 64).unwrap();
        assert!(r.points[0].1 > r.points[2].1);
        assert!(r.plateau >= 16);
    }

    #[test]
    fn corner_zeroing_keeps_disk_band() {
        let img = random_image::<f64>(16, 3);
        let z = zero_corner_frequencies(&img);
        let zz = zero_corner_frequencies(&z);
        for (a, b) in z.data.iter().zip(&zz.data) {
            assert!((a - b).abs() < 1e-12);
        }
        let mean = |d: &[f64]| d.iter().sum::<f64>() / d.len() as f64;
        assert!((mean(&img.data) - mean(&z.data)).abs() < 1e-12);
    }
}
