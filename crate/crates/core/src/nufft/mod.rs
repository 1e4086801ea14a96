//! Non-uniform FFT: X(ω) = Σ_n x[n] exp(-iω·(n + shift)) for arbitrary ω in [-π, π)^d,
//! computed as interpolation ∘ oversampled FFT ∘ diagonal pre-scaling.

mod sinc;

pub use sinc::{periodic_sinc, periodic_sinc_real, sinc_resample, sinc_resample_nd};

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::scalar::{bessel_i0, wrap_pi, Complex, Real};
use rayon::prelude::*;

/// Kaiser-Bessel window of width J (taps), ψ(0) = 1, zero for |u| ≥ J/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KaiserBessel<T> {
    pub j: usize,
    pub beta: T,
    i0_beta: T,
}

impl<T: Real> KaiserBessel<T> {
    /// Shape parameter from the width and the oversampling ratio
    /// (Beatty et al.): β = π·sqrt((J/σ)²(σ - 1/2)² - 0.8).
    pub fn new(j: usize, oversample: f64) -> Self {
        let jj = j as f64;
        let a = (jj / oversample).powi(2) * (oversample - 0.5).powi(2) - 0.8;
        Self::with_beta(j, T::lit(std::f64::consts::PI * a.max(0.0).sqrt()))
    }

    pub fn with_beta(j: usize, beta: T) -> Self {
        KaiserBessel {
            j,
            beta,
            i0_beta: bessel_i0(beta),
        }
    }

    #[inline]
    pub fn eval(&self, u: T) -> T {
        let r = T::lit(2.0) * u / T::idx(self.j);
        let a = T::one() - r * r;
        if a <= T::zero() {
            T::zero()
        } else {
            bessel_i0(self.beta * a.sqrt()) / self.i0_beta
        }
    }

    /// Continuous Fourier transform ∫ψ(u) exp(-2πi f u) du.
    pub fn transform(&self, f: T) -> T {
        let jj = T::idx(self.j);
        let x = T::PI() * jj * f;
        let a = self.beta * self.beta - x * x;
        let r = a.abs().sqrt();
        let v = if r < T::lit(1e-6) {
            jj
        } else if a > T::zero() {
            jj * r.sinh() / r
        } else {
            jj * r.sin() / r
        };
        v / self.i0_beta
    }

    /// Fourier series of the integer-sampled kernel, Σ_k ψ(k) cos(2π k n / K).
    pub fn sampled_transform(&self, n: T, k: usize) -> T {
        let half = self.j as isize / 2 + 1;
        (-half..=half)
            .map(|q| {
                let q = T::lit(q as f64);
                self.eval(q) * (T::TAU() * q * n / T::idx(k)).cos()
            })
            .sum()
    }
}

/// How the diagonal pre-scaling is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    /// 1 / Ψ(n/K) from the continuous kernel transform.
    Continuous,
    /// 1 / Σ_k ψ(k) e^{-2πikn/K}; exact for nodes with integer κ = ωK/2π.
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NufftOptions {
    pub oversample: f64,
    /// Kernel width per dimension.
    pub j: Vec<usize>,
    pub scaling: Scaling,
    /// Per-dimension offset of the sample positions, X(ω) uses n + shift.
    pub shift: Vec<f64>,
}

impl NufftOptions {
    /// J = 6 in every dimension, oversampling 2.
    pub fn new(ndim: usize) -> Self {
        Self::with_width(ndim, 6)
    }

    pub fn with_width(ndim: usize, j: usize) -> Self {
        NufftOptions {
            oversample: 2.0,
            j: vec![j; ndim],
            scaling: Scaling::Continuous,
            shift: vec![0.0; ndim],
        }
    }

    pub fn oversample(mut self, s: f64) -> Self {
        self.oversample = s;
        self
    }

    pub fn scaling(mut self, s: Scaling) -> Self {
        self.scaling = s;
        self
    }

    pub fn shift(mut self, shift: Vec<f64>) -> Self {
        self.shift = shift;
        self
    }

    /// Shift that puts sample n at the centre of pixel i for an N-grid with
    /// centres at i - (N-1)/2.
    pub fn centered_shift(dims: &[usize]) -> Vec<f64> {
        dims.iter()
            .map(|&n| (n / 2) as f64 - (n as f64 - 1.0) / 2.0)
            .collect()
    }
}

/// Row-sparse interpolation matrix with tensor-product rows: row m holds
/// weights w0[a]·w1[b]·w2[c]·phase[m] at oversampled grid point
/// (base0+a, base1+b, base2+c) mod K.
#[derive(Clone, Debug)]
pub struct SparseInterpolator<T> {
    k: [usize; 3],
    j: [usize; 3],
    n_rows: usize,
    base: Vec<u32>,
    weights: Vec<T>,
    phase: Option<Vec<Complex<T>>>,
}

#[inline(always)]
fn wrap(i: usize, k: usize) -> usize {
    if i >= k {
        i - k
    } else {
        i
    }
}

impl<T: Real> SparseInterpolator<T> {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.k.iter().product()
    }

    pub fn max_row_nnz(&self) -> usize {
        self.j.iter().product()
    }

    fn stride(&self) -> usize {
        self.j[0] + self.j[1] + self.j[2]
    }

    /// Nonzeros of one row as (column, weight); duplicate columns are summed.
    pub fn row(&self, m: usize) -> Vec<(usize, Complex<T>)> {
        let mut out: Vec<(usize, Complex<T>)> = Vec::with_capacity(self.max_row_nnz());
        let ph = self.phase.as_ref().map_or(Complex::new(T::one(), T::zero()), |p| p[m]);
        let w = &self.weights[m * self.stride()..(m + 1) * self.stride()];
        let (w0, rest) = w.split_at(self.j[0]);
        let (w1, w2) = rest.split_at(self.j[1]);
        let b = &self.base[3 * m..3 * m + 3];
        for (c, &wc) in w2.iter().enumerate() {
            let iz = wrap(b[2] as usize + c, self.k[2]);
            for (bb, &wb) in w1.iter().enumerate() {
                let iy = wrap(b[1] as usize + bb, self.k[1]);
                for (a, &wa) in w0.iter().enumerate() {
                    let ix = wrap(b[0] as usize + a, self.k[0]);
                    let col = ix + self.k[0] * (iy + self.k[1] * iz);
                    let v = ph * (wa * wb * wc);
                    if let Some(e) = out.iter_mut().find(|e| e.0 == col) {
                        e.1 += v;
                    } else {
                        out.push((col, v));
                    }
                }
            }
        }
        out
    }

    #[inline]
    fn gather_row(&self, grid: &[Complex<T>], m: usize) -> Complex<T> {
        let s = self.stride();
        let w = &self.weights[m * s..(m + 1) * s];
        let (w0, rest) = w.split_at(self.j[0]);
        let (w1, w2) = rest.split_at(self.j[1]);
        let b = &self.base[3 * m..3 * m + 3];
        let (k0, k1) = (self.k[0], self.k[1]);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (c, &wc) in w2.iter().enumerate() {
            let iz = wrap(b[2] as usize + c, self.k[2]);
            for (bb, &wb) in w1.iter().enumerate() {
                let iy = wrap(b[1] as usize + bb, k1);
                let row = &grid[k0 * (iy + k1 * iz)..k0 * (iy + k1 * iz) + k0];
                let mut inner = Complex::new(T::zero(), T::zero());
                for (a, &wa) in w0.iter().enumerate() {
                    inner += row[wrap(b[0] as usize + a, k0)] * wa;
                }
                acc += inner * (wb * wc);
            }
        }
        match &self.phase {
            Some(p) => acc * p[m],
            None => acc,
        }
    }

    #[inline]
    fn scatter_row(&self, grid: &mut [Complex<T>], m: usize, v: Complex<T>) {
        let v = match &self.phase {
            Some(p) => v * p[m].conj(),
            None => v,
        };
        let s = self.stride();
        let w = &self.weights[m * s..(m + 1) * s];
        let (w0, rest) = w.split_at(self.j[0]);
        let (w1, w2) = rest.split_at(self.j[1]);
        let b = &self.base[3 * m..3 * m + 3];
        let (k0, k1) = (self.k[0], self.k[1]);
        for (c, &wc) in w2.iter().enumerate() {
            let iz = wrap(b[2] as usize + c, self.k[2]);
            for (bb, &wb) in w1.iter().enumerate() {
                let iy = wrap(b[1] as usize + bb, k1);
                let vb = v * (wb * wc);
                let off = k0 * (iy + k1 * iz);
                for (a, &wa) in w0.iter().enumerate() {
                    grid[off + wrap(b[0] as usize + a, k0)] += vb * wa;
                }
            }
        }
    }

    /// y = T·grid.
    pub fn apply(&self, grid: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.n_rows];
        out.par_chunks_mut(4096).enumerate().for_each(|(ci, chunk)| {
            for (o, v) in chunk.iter_mut().enumerate() {
                *v = self.gather_row(grid, ci * 4096 + o);
            }
        });
        out
    }

    /// grid += Tᴴ·y, accumulated in row order.
    pub fn apply_adjoint(&self, y: &[Complex<T>], grid: &mut [Complex<T>]) {
        for (m, &v) in y.iter().enumerate() {
            if v.re != T::zero() || v.im != T::zero() {
                self.scatter_row(grid, m, v);
            }
        }
    }
}

/// Precomputed NUFFT for a fixed node set.
pub struct NufftPlan<T: Real> {
    dims: [usize; 3],
    k_dims: [usize; 3],
    ndim: usize,
    kernels: Vec<KaiserBessel<T>>,
    scaling: Vec<T>,
    interp: SparseInterpolator<T>,
    nodes: Vec<T>,
    fft: FftNd<T>,
}

/// Builds a plan for `nodes` (flattened, `dims.len()` coordinates per node,
/// radians per sample).
pub fn plan_nufft<T: Real>(
    dims: &[usize],
    nodes: &[T],
    opts: &NufftOptions,
) -> Result<NufftPlan<T>> {
    let d = dims.len();
    if d == 0 || d > 3 {
        return Err(Error::invalid("dims", "1 to 3 dimensions supported"));
    }
    if dims.iter().any(|&n| n == 0) {
        return Err(Error::invalid("dims", "sizes must be positive"));
    }
    if !(opts.oversample >= 1.0) || !opts.oversample.is_finite() {
        return Err(Error::invalid("oversample", "must be at least 1"));
    }
    if opts.j.len() != d || opts.shift.len() != d {
        return Err(Error::dims("kernel widths", d, opts.j.len().min(opts.shift.len())));
    }
    if opts.j.iter().any(|&j| j == 0) {
        return Err(Error::invalid("j", "kernel width must be positive"));
    }
    if nodes.len() % d != 0 {
        return Err(Error::dims("nodes", format!("multiple of {d}"), nodes.len()));
    }
    if nodes.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("NUFFT nodes".into()));
    }
    let m = nodes.len() / d;
    let mut nn = [1usize; 3];
    let mut kk = [1usize; 3];
    let mut jj = [1usize; 3];
    let mut kernels = Vec::with_capacity(d);
    for a in 0..d {
        nn[a] = dims[a];
        kk[a] = ((opts.oversample * dims[a] as f64).round() as usize)
            .max(dims[a])
            .max(opts.j[a]);
        jj[a] = opts.j[a];
        kernels.push(KaiserBessel::new(jj[a], kk[a] as f64 / dims[a] as f64));
    }

    // per-axis scaling factors, tensor product over the grid
    let axis_scale: Vec<Vec<T>> = (0..3)
        .map(|a| {
            (0..nn[a])
                .map(|i| {
                    if a >= d {
                        return T::one();
                    }
                    let n = T::lit(i as f64 - (nn[a] / 2) as f64);
                    let kb = &kernels[a];
                    let v = match opts.scaling {
                        Scaling::Continuous => kb.transform(n / T::idx(kk[a])),
                        Scaling::Sampled => kb.sampled_transform(n, kk[a]),
                    };
                    T::one() / v
                })
                .collect()
        })
        .collect();
    let mut scaling = Vec::with_capacity(nn[0] * nn[1] * nn[2]);
    for i2 in 0..nn[2] {
        for i1 in 0..nn[1] {
            for i0 in 0..nn[0] {
                scaling.push(axis_scale[0][i0] * axis_scale[1][i1] * axis_scale[2][i2]);
            }
        }
    }
    if scaling.iter().any(|s| !(s.is_finite() && *s > T::zero())) {
        return Err(Error::invalid("kernel", "pre-scaling is not strictly positive"));
    }

    let stride: usize = jj.iter().sum();
    let mut base = vec![0u32; 3 * m];
    let mut weights = vec![T::zero(); stride * m];
    let mut wrapped = vec![T::zero(); d * m];
    let any_shift = opts.shift.iter().any(|&s| s != 0.0);
    let mut phase = if any_shift {
        Some(vec![Complex::new(T::one(), T::zero()); m])
    } else {
        None
    };
    for i in 0..m {
        let mut woff = 0;
        let mut ph = T::zero();
        for a in 0..3 {
            if a >= d {
                weights[i * stride + woff] = T::one();
                woff += 1;
                continue;
            }
            let w = wrap_pi(nodes[i * d + a]);
            wrapped[i * d + a] = w;
            ph += w * T::lit(opts.shift[a]);
            let kap = w * T::idx(kk[a]) / T::TAU();
            let j = jj[a];
            let k0 = (kap - T::idx(j) / T::lit(2.0)).floor() + T::one();
            let k0i = k0.to_i64().unwrap_or(0);
            base[3 * i + a] = k0i.rem_euclid(kk[a] as i64) as u32;
            for t in 0..j {
                weights[i * stride + woff + t] = kernels[a].eval(kap - (k0 + T::idx(t)));
            }
            woff += j;
        }
        if let Some(p) = phase.as_mut() {
            p[i] = Complex::new(ph.cos(), -ph.sin());
        }
    }

    Ok(NufftPlan {
        dims: nn,
        k_dims: kk,
        ndim: d,
        kernels,
        scaling,
        interp: SparseInterpolator {
            k: kk,
            j: jj,
            n_rows: m,
            base,
            weights,
            phase,
        },
        nodes: wrapped,
        fft: FftNd::new(&kk),
    })
}

impl<T: Real> NufftPlan<T> {
    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.ndim]
    }

    pub fn oversampled_dims(&self) -> &[usize] {
        &self.k_dims[..self.ndim]
    }

    pub fn kernels(&self) -> &[KaiserBessel<T>] {
        &self.kernels
    }

    /// Diagonal pre-scaling, one entry per uniform grid point.
    pub fn scaling(&self) -> &[T] {
        &self.scaling
    }

    pub fn interpolator(&self) -> &SparseInterpolator<T> {
        &self.interp
    }

    /// Nodes after wrapping into [-π, π), flattened.
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.interp.n_rows
    }

    pub fn grid_len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn oversampled_len(&self) -> usize {
        self.k_dims.iter().product()
    }

    fn grid_map(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let [n0, n1, n2] = self.dims;
        let [k0, k1, k2] = self.k_dims;
        let w = |i: usize, n: usize, k: usize| (i as isize - (n / 2) as isize).rem_euclid(k as isize) as usize;
        (0..n2).flat_map(move |i2| {
            (0..n1).flat_map(move |i1| {
                (0..n0).map(move |i0| {
                    let src = i0 + n0 * (i1 + n1 * i2);
                    let dst = w(i0, n0, k0) + k0 * (w(i1, n1, k1) + k1 * w(i2, n2, k2));
                    (src, dst)
                })
            })
        })
    }

    /// X(ω_m) for every node.
    pub fn forward(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.grid_len() {
            return Err(Error::dims("NUFFT input", self.grid_len(), x.len()));
        }
        let mut g = vec![Complex::new(T::zero(), T::zero()); self.oversampled_len()];
        for (src, dst) in self.grid_map() {
            g[dst] = x[src] * self.scaling[src];
        }
        self.fft.forward(&mut g);
        Ok(self.interp.apply(&g))
    }

    /// Conjugate transpose of `forward`.
    pub fn adjoint(&self, y: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if y.len() != self.n_nodes() {
            return Err(Error::dims("NUFFT adjoint input", self.n_nodes(), y.len()));
        }
        let mut g = vec![Complex::new(T::zero(), T::zero()); self.oversampled_len()];
        self.interp.apply_adjoint(y, &mut g);
        self.fft.inverse(&mut g);
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.grid_len()];
        for (src, dst) in self.grid_map() {
            out[src] = g[dst] * self.scaling[src];
        }
        Ok(out)
    }
}
