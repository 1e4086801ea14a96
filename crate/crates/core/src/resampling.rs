//! Radial → umbrella resampling of derivative-Radon data on the (ρ, θ, φ)
//! lattice, with exact transposes.
//!
//! The lattice is extended to θ ∈ [0, 2π) through (ρ, θ + π, φ) ≡ (-ρ, θ, φ),
//! which makes it periodic in θ (period 2Nθ) and φ (period Nφ). ρ is
//! zero padded by `pad` samples on each side and treated as periodic.

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::geometry::{PolarCoord, RadialGridSpec};
use crate::nufft::{periodic_sinc_real, plan_nufft, KaiserBessel, NufftOptions, NufftPlan, Scaling};
use crate::radon_fourier::RadialRadon3D;
use crate::scalar::{Complex, Real};
use rayon::prelude::*;

/// Fractional lattice position of a Radon-space point. `flipped` records that
/// the canonical form reversed the plane orientation, which negates
/// ρ-derivative values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarIndexCoord<T> {
    pub i_rho: T,
    pub i_theta: T,
    pub i_phi: T,
    pub flipped: bool,
}

/// Maps coordinates to fractional lattice indices after canonical wrapping.
pub fn polar_index_map<T: Real>(
    coords: &[PolarCoord<T>],
    spec: &RadialGridSpec<T>,
) -> Result<Vec<PolarIndexCoord<T>>> {
    spec.validate()?;
    let (dr, dt, dp) = (spec.d_rho(), spec.d_theta(), spec.d_phi());
    coords
        .iter()
        .map(|c| {
            if !(c.rho.is_finite() && c.theta.is_finite() && c.phi.is_finite()) {
                return Err(Error::NonFinite("polar coordinate".into()));
            }
            if c.rho.abs() > spec.rho_max {
                return Err(Error::OutOfSupport(format!(
                    "|rho| = {} exceeds rho_max = {}",
                    c.rho.abs(),
                    spec.rho_max
                )));
            }
            let (w, flipped) = c.canonical();
            let mut i_phi = w.phi / dp;
            if i_phi >= T::idx(spec.n_phi) {
                i_phi = i_phi - T::idx(spec.n_phi);
            }
            Ok(PolarIndexCoord {
                i_rho: (w.rho + spec.rho_max) / dr,
                i_theta: w.theta / dt,
                i_phi,
                flipped,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResampleMethod {
    /// Inverse FFT of the lattice followed by a pre-scaled NUFFT.
    A,
    /// Direct truncated periodic-sinc interpolation.
    B,
    /// Eight-neighbour trilinear interpolation (comparison baseline).
    Trilinear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResampleOptions {
    pub method: ResampleMethod,
    /// Zero samples added on each side of ρ.
    pub pad: usize,
    /// Method A kernel width per axis.
    pub a_width: usize,
    pub a_oversample: f64,
    /// Method B taps per axis; 2 + 2·(side lobes per side).
    pub b_taps: usize,
    /// Values are odd under (ρ, n) → (-ρ, -n), as ρ-derivatives are.
    pub odd: bool,
}

impl ResampleOptions {
    pub fn new(method: ResampleMethod, spec: &RadialGridSpec<impl Real>) -> Self {
        ResampleOptions {
            method,
            pad: spec.n_rho / 2,
            a_width: 3,
            a_oversample: 2.0,
            b_taps: 6,
            odd: true,
        }
    }

    pub fn pad(mut self, pad: usize) -> Self {
        self.pad = pad;
        self
    }

    /// Keeps the main lobe plus `s` side lobes on each side.
    pub fn side_lobes(mut self, s: usize) -> Self {
        self.b_taps = 2 + 2 * s;
        self
    }

    pub fn b_taps(mut self, j: usize) -> Self {
        self.b_taps = j;
        self
    }

    pub fn a_oversample(mut self, s: f64) -> Self {
        self.a_oversample = s;
        self
    }

    pub fn a_width(mut self, j: usize) -> Self {
        self.a_width = j;
        self
    }

    pub fn even(mut self) -> Self {
        self.odd = false;
        self
    }
}

enum Engine<T: Real> {
    A { plan: NufftPlan<T>, fft: FftNd<T> },
    B { taps: usize, taper: KaiserBessel<T> },
    Trilinear,
}

/// Resampling operator from a radial lattice to a fixed target list.
pub struct ResamplePlan<T: Real> {
    opts: ResampleOptions,
    spec: RadialGridSpec<T>,
    /// extended lattice dims (ρ padded, θ doubled, φ)
    ext: [usize; 3],
    targets: Vec<PolarIndexCoord<T>>,
    engine: Engine<T>,
}

impl<T: Real> ResamplePlan<T> {
    pub fn new(
        spec: RadialGridSpec<T>,
        targets: Vec<PolarIndexCoord<T>>,
        opts: ResampleOptions,
    ) -> Result<Self> {
        spec.validate()?;
        let ext = [spec.n_rho + 2 * opts.pad, 2 * spec.n_theta, spec.n_phi];
        for t in &targets {
            let ok = t.i_rho >= T::zero()
                && t.i_rho <= T::idx(spec.n_rho)
                && t.i_theta >= T::zero()
                && t.i_theta < T::idx(spec.n_theta)
                && t.i_phi >= T::zero()
                && t.i_phi < T::idx(spec.n_phi);
            if !ok {
                return Err(Error::invalid("targets", "target indices are not canonically wrapped"));
            }
        }
        let engine = match opts.method {
            ResampleMethod::A => {
                let mut nodes = Vec::with_capacity(3 * targets.len());
                for t in &targets {
                    let p = [t.i_rho + T::idx(opts.pad), t.i_theta, t.i_phi];
                    for a in 0..3 {
                        nodes.push(-T::TAU() * p[a] / T::idx(ext[a]));
                    }
                }
                let nopts = NufftOptions::with_width(3, opts.a_width)
                    .oversample(opts.a_oversample)
                    .scaling(Scaling::Sampled);
                Engine::A {
                    plan: plan_nufft(&ext, &nodes, &nopts)?,
                    fft: FftNd::new(&ext),
                }
            }
            ResampleMethod::B => {
                let taps = opts.b_taps;
                if taps < 2 {
                    return Err(Error::invalid("b_taps", "need at least 2 taps"));
                }
                Engine::B {
                    taps,
                    taper: KaiserBessel::with_beta(taps, T::idx(taps)),
                }
            }
            ResampleMethod::Trilinear => Engine::Trilinear,
        };
        Ok(ResamplePlan {
            opts,
            spec,
            ext,
            targets,
            engine,
        })
    }

    pub fn method(&self) -> ResampleMethod {
        self.opts.method
    }

    pub fn spec(&self) -> &RadialGridSpec<T> {
        &self.spec
    }

    pub fn targets(&self) -> &[PolarIndexCoord<T>] {
        &self.targets
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn extended_dims(&self) -> [usize; 3] {
        self.ext
    }

    pub fn nufft_plan(&self) -> Option<&NufftPlan<T>> {
        match &self.engine {
            Engine::A { plan, .. } => Some(plan),
            _ => None,
        }
    }

    /// Taps per axis for the direct methods.
    pub fn taps(&self) -> usize {
        match &self.engine {
            Engine::A { .. } => self.opts.a_width,
            Engine::B { taps, .. } => *taps,
            Engine::Trilinear => 2,
        }
    }

    fn parity(&self, flipped: bool, odd: bool) -> T {
        if flipped && odd {
            -T::one()
        } else {
            T::one()
        }
    }

    /// Source index and sign of extended-lattice point (k, j, l), with k in
    /// unpadded ρ units. None for padding and the unmatched ρ = -ρmax mirror.
    #[inline]
    fn source(&self, k: isize, j: isize, l: isize, odd: bool) -> Option<(usize, T)> {
        let s = &self.spec;
        let (nr, nt, np) = (s.n_rho as isize, s.n_theta as isize, s.n_phi as isize);
        let lr = self.ext[0] as isize;
        // periodic ρ over the padded length
        let mut k = (k + self.opts.pad as isize).rem_euclid(lr) - self.opts.pad as isize;
        let mut j = j.rem_euclid(2 * nt);
        let l = l.rem_euclid(np);
        let mut sign = T::one();
        if j >= nt {
            j -= nt;
            k = nr - k;
            if odd {
                sign = -T::one();
            }
        }
        if k < 0 || k >= nr {
            return None;
        }
        Some((s.index(k as usize, j as usize, l as usize), sign))
    }

    fn check_input(&self, r: &RadialRadon3D<T>) -> Result<()> {
        if r.spec != self.spec {
            return Err(Error::invalid("spec", "radial data grid differs from the resampling plan"));
        }
        if r.data.len() != self.spec.len() {
            return Err(Error::dims("radial data", self.spec.len(), r.data.len()));
        }
        Ok(())
    }

    /// Per-axis (first tap, weights) for the direct methods.
    fn axis_taps(&self, p: T, period: usize, out: &mut [T]) -> isize {
        match &self.engine {
            Engine::B { taps, taper } => {
                let k0 = if taps % 2 == 0 {
                    p.floor().to_isize().unwrap_or(0) - (*taps as isize / 2 - 1)
                } else {
                    p.round().to_isize().unwrap_or(0) - (*taps as isize - 1) / 2
                };
                for (t, w) in out.iter_mut().enumerate() {
                    let x = p - T::lit((k0 + t as isize) as f64);
                    *w = periodic_sinc_real(x, period) * taper.eval(x);
                }
                k0
            }
            _ => {
                let f = p.floor();
                let fr = p - f;
                out[0] = T::one() - fr;
                out[1] = fr;
                f.to_isize().unwrap_or(0)
            }
        }
    }

    fn direct_row(&self, t: &PolarIndexCoord<T>, w: &mut [Vec<T>; 3]) -> [isize; 3] {
        [
            self.axis_taps(t.i_rho, self.ext[0], &mut w[0]),
            self.axis_taps(t.i_theta, self.ext[1], &mut w[1]),
            self.axis_taps(t.i_phi, self.ext[2], &mut w[2]),
        ]
    }

    /// Values at every target.
    pub fn apply(&self, r: &RadialRadon3D<T>) -> Result<Vec<T>> {
        self.check_input(r)?;
        let odd = self.opts.odd;
        match &self.engine {
            Engine::A { plan, fft } => {
                let mut g = self.extend(&r.data, odd);
                fft.forward(&mut g);
                let x = self.to_centered(&g);
                let y = plan.forward(&x)?;
                let inv = T::one() / T::idx(g.len());
                Ok(y.iter()
                    .zip(&self.targets)
                    .map(|(v, t)| v.re * inv * self.parity(t.flipped, odd))
                    .collect())
            }
            _ => {
                let j = self.taps();
                let mut out = vec![T::zero(); self.targets.len()];
                out.par_chunks_mut(1024)
                    .zip(self.targets.par_chunks(1024))
                    .for_each(|(o, ts)| {
                        let mut w = [vec![T::zero(); j], vec![T::zero(); j], vec![T::zero(); j]];
                        for (o, t) in o.iter_mut().zip(ts) {
                            let k0 = self.direct_row(t, &mut w);
                            let mut acc = T::zero();
                            for c in 0..j {
                                for b in 0..j {
                                    let wbc = w[1][b] * w[2][c];
                                    for a in 0..j {
                                        let src = self.source(
                                            k0[0] + a as isize,
                                            k0[1] + b as isize,
                                            k0[2] + c as isize,
                                            odd,
                                        );
                                        if let Some((i, s)) = src {
                                            acc += r.data[i] * s * w[0][a] * wbc;
                                        }
                                    }
                                }
                            }
                            *o = acc * self.parity(t.flipped, odd);
                        }
                    });
                Ok(out)
            }
        }
    }

    /// Transpose applied to a vector of ones with even parity: how much
    /// target weight lands on each lattice node.
    pub fn coverage(&self) -> Result<RadialRadon3D<T>> {
        self.transpose_with(&vec![T::one(); self.targets.len()], false)
    }

    /// Exact transpose of `apply`.
    pub fn transpose(&self, y: &[T]) -> Result<RadialRadon3D<T>> {
        self.transpose_with(y, self.opts.odd)
    }

    fn transpose_with(&self, y: &[T], odd: bool) -> Result<RadialRadon3D<T>> {
        if y.len() != self.targets.len() {
            return Err(Error::dims("target values", self.targets.len(), y.len()));
        }
        let mut out = RadialRadon3D::zeros(self.spec);
        match &self.engine {
            Engine::A { plan, fft } => {
                let inv = T::one() / T::idx(self.ext.iter().product());
                let yc: Vec<Complex<T>> = y
                    .iter()
                    .zip(&self.targets)
                    .map(|(v, t)| Complex::new(*v * inv * self.parity(t.flipped, odd), T::zero()))
                    .collect();
                let x = plan.adjoint(&yc)?;
                let mut g = self.from_centered(&x);
                fft.inverse(&mut g);
                self.extend_transpose(&g, &mut out.data, odd);
            }
            _ => {
                let j = self.taps();
                let mut w = [vec![T::zero(); j], vec![T::zero(); j], vec![T::zero(); j]];
                for (v, t) in y.iter().zip(&self.targets) {
                    let k0 = self.direct_row(t, &mut w);
                    let v = *v * self.parity(t.flipped, odd);
                    for c in 0..j {
                        for b in 0..j {
                            let wbc = w[1][b] * w[2][c] * v;
                            for a in 0..j {
                                let src = self.source(
                                    k0[0] + a as isize,
                                    k0[1] + b as isize,
                                    k0[2] + c as isize,
                                    odd,
                                );
                                if let Some((i, s)) = src {
                                    out.data[i] += s * w[0][a] * wbc;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Extended lattice as a complex grid, ρ (padded) fastest.
    fn extend(&self, data: &[T], odd: bool) -> Vec<Complex<T>> {
        let [l0, l1, l2] = self.ext;
        let pad = self.opts.pad as isize;
        let mut g = vec![Complex::new(T::zero(), T::zero()); l0 * l1 * l2];
        for c in 0..l2 {
            for b in 0..l1 {
                for a in 0..l0 {
                    if let Some((i, s)) = self.source(a as isize - pad, b as isize, c as isize, odd) {
                        g[a + l0 * (b + l1 * c)] = Complex::new(data[i] * s, T::zero());
                    }
                }
            }
        }
        g
    }

    fn extend_transpose(&self, g: &[Complex<T>], out: &mut [T], odd: bool) {
        let [l0, l1, l2] = self.ext;
        let pad = self.opts.pad as isize;
        for c in 0..l2 {
            for b in 0..l1 {
                for a in 0..l0 {
                    if let Some((i, s)) = self.source(a as isize - pad, b as isize, c as isize, odd) {
                        out[i] += g[a + l0 * (b + l1 * c)].re * s;
                    }
                }
            }
        }
    }

    /// DFT bins in natural order → NUFFT input (frequency k at i = k + ⌊L/2⌋).
    fn to_centered(&self, g: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut x = vec![Complex::new(T::zero(), T::zero()); g.len()];
        self.for_each_shift(|src, dst| x[dst] = g[src]);
        x
    }

    fn from_centered(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut g = vec![Complex::new(T::zero(), T::zero()); x.len()];
        self.for_each_shift(|src, dst| g[src] = x[dst]);
        g
    }

    fn for_each_shift(&self, mut f: impl FnMut(usize, usize)) {
        let [l0, l1, l2] = self.ext;
        let sh = |i: usize, l: usize| (i + l / 2) % l;
        for c in 0..l2 {
            for b in 0..l1 {
                for a in 0..l0 {
                    f(a + l0 * (b + l1 * c), sh(a, l0) + l0 * (sh(b, l1) + l1 * sh(c, l2)));
                }
            }
        }
    }
}

/// Method A with default settings (J = 3 per axis, oversampling 2).
pub fn resample_method_a<T: Real>(r: &RadialRadon3D<T>, targets: &[PolarIndexCoord<T>]) -> Result<Vec<T>> {
    let opts = ResampleOptions::new(ResampleMethod::A, &r.spec);
    ResamplePlan::new(r.spec, targets.to_vec(), opts)?.apply(r)
}

/// Method B with default settings (main lobe plus two side lobes per axis).
pub fn resample_method_b<T: Real>(r: &RadialRadon3D<T>, targets: &[PolarIndexCoord<T>]) -> Result<Vec<T>> {
    let opts = ResampleOptions::new(ResampleMethod::B, &r.spec);
    ResamplePlan::new(r.spec, targets.to_vec(), opts)?.apply(r)
}

/// Transpose of the plan's forward resampling.
pub fn resample_transpose<T: Real>(plan: &ResamplePlan<T>, values: &[T]) -> Result<RadialRadon3D<T>> {
    plan.transpose(values)
}
