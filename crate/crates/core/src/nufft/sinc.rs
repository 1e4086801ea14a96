//! Exact band-limited periodic interpolation (the non-truncated sinc resampler).

use crate::scalar::{Complex, Real};

/// Periodic sinc kernel of period K over the centered frequency range
/// n ∈ [-⌊K/2⌋, K - ⌊K/2⌋):
/// D(x) = (1/K) Σ_n exp(2πi n x / K).
pub fn periodic_sinc<T: Real>(x: T, k: usize) -> Complex<T> {
    let kk = T::idx(k);
    // D has period K; reduce for accuracy
    let xr = x - kk * (x / kk).round();
    if xr == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    if xr.fract() == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let s = (k / 2) as f64;
    let ph = T::PI() * xr * (T::lit(k as f64 - 1.0 - 2.0 * s)) / kk;
    let amp = (T::PI() * xr).sin() / ((T::PI() * xr / kk).sin() * kk);
    Complex::new(ph.cos() * amp, ph.sin() * amp)
}

/// Real part of the periodic sinc: sin(πx)/(K tan(πx/K)) for even K and
/// sin(πx)/(K sin(πx/K)) for odd K. The symmetric interpolant of real data.
pub fn periodic_sinc_real<T: Real>(x: T, k: usize) -> T {
    periodic_sinc(x, k).re
}

/// Evaluates the band-limited periodic interpolant of `y` at positions `m`.
/// Integer positions reproduce the samples; y(m + K) = y(m).
pub fn sinc_resample<T: Real>(y: &[Complex<T>], m: &[T]) -> Vec<Complex<T>> {
    let k = y.len();
    m.iter()
        .map(|&p| {
            y.iter()
                .enumerate()
                .map(|(i, &v)| v * periodic_sinc(p - T::idx(i), k))
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
        })
        .collect()
}

/// Separable multidimensional version; `dims` first axis fastest, positions
/// flattened with `dims.len()` coordinates each.
pub fn sinc_resample_nd<T: Real>(y: &[Complex<T>], dims: &[usize], pos: &[T]) -> Vec<Complex<T>> {
    let d = dims.len();
    assert!(d >= 1 && d <= 3);
    assert_eq!(y.len(), dims.iter().product::<usize>());
    let mut full = [1usize; 3];
    full[..d].copy_from_slice(dims);
    pos.chunks_exact(d)
        .map(|p| {
            let kern: Vec<Vec<Complex<T>>> = (0..3)
                .map(|a| {
                    if a >= d {
                        vec![Complex::new(T::one(), T::zero())]
                    } else {
                        (0..full[a])
                            .map(|i| periodic_sinc(p[a] - T::idx(i), full[a]))
                            .collect()
                    }
                })
                .collect();
            let mut acc = Complex::new(T::zero(), T::zero());
            for i2 in 0..full[2] {
                for i1 in 0..full[1] {
                    let w12 = kern[1][i1] * kern[2][i2];
                    let off = full[0] * (i1 + full[1] * i2);
                    let mut inner = Complex::new(T::zero(), T::zero());
                    for i0 in 0..full[0] {
                        inner += y[off + i0] * kern[0][i0];
                    }
                    acc += inner * w12;
                }
            }
            acc
        })
        .collect()
}
