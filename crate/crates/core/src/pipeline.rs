//! End-to-end NUFFT projector and backprojector, the closed-form cost model
//! and instrumented multiplication counts.

use crate::baseline::{check_volume_geometry, ct_project_linear_counted};
use crate::error::{Error, Result};
use crate::geometry::{umbrella_coordinates, ConeGeometry, PolarCoord, RadialGridSpec, UmbrellaGrid};
use crate::grangeat::GrangeatPlan;
use crate::nufft::{NufftOptions, NufftPlan};
use crate::phantom::Phantom;
use crate::radon_fourier::{
    radial_fft, radial_ifft, ramp_weights, spectral_rho_derivative, spectrum_options, RadialTransform3D,
};
use crate::resampling::{polar_index_map, ResampleMethod, ResampleOptions, ResamplePlan};
use crate::scalar::{Complex, Real};
use crate::volume::{ProjectionSet, Volume3D};
use rayon::prelude::*;
use std::sync::OnceLock;

/// Continuous object the forward projector assigns to the voxel samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VoxelBasis {
    /// band-limited interpolant of the samples
    #[default]
    Sinc,
    /// trilinear interpolant, the object the ray projector integrates
    Trilinear,
}

#[derive(Clone, Debug)]
pub struct ProjectorConfig<T> {
    pub spec: RadialGridSpec<T>,
    /// Kernel of the volume ↔ radial-spectrum NUFFT.
    pub spectrum: NufftOptions,
    pub resample: ResampleOptions,
    pub n_mu: usize,
    pub n_t: usize,
    /// Kernel width of the per-view 2D NUFFT.
    pub grangeat_width: usize,
    pub normalization: T,
    pub basis: VoxelBasis,
    /// Lattice nodes whose umbrella coverage falls below this fraction of
    /// the median coverage are left at zero by the backprojector.
    pub vacancy_threshold: T,
}

impl<T: Real> ProjectorConfig<T> {
    /// Nρ = Nθ = Nφ = 2N, umbrella n_mu = n_t = 2·nu, no ρ padding.
    pub fn practical(n: usize, geom: &ConeGeometry<T>, method: ResampleMethod) -> Self {
        let h = geom.object_extent_mm / T::idx(n.max(1));
        let spec = RadialGridSpec::practical(n, h);
        ProjectorConfig {
            spec,
            spectrum: spectrum_options(),
            resample: ResampleOptions::new(method, &spec).pad(0),
            n_mu: 2 * geom.nu,
            n_t: 2 * geom.nu,
            grangeat_width: 5,
            normalization: T::one(),
            basis: VoxelBasis::Sinc,
            vacancy_threshold: T::lit(0.1),
        }
    }

    /// Nρ = N, Nθ = Nφ = ⌈πN⌉, umbrella n_mu = ⌈πN⌉ and n_t = N, with the
    /// kernel sizes the cost model assumes: 3³ neighbours in 3D, 5² in 2D,
    /// no oversampling in method A, 3 taps per axis in method B.
    pub fn theoretical(n: usize, geom: &ConeGeometry<T>, method: ResampleMethod) -> Self {
        let h = geom.object_extent_mm / T::idx(n.max(1));
        let spec = RadialGridSpec::theoretical(n, h);
        ProjectorConfig {
            spec,
            spectrum: NufftOptions::with_width(3, 3).scaling(crate::nufft::Scaling::Sampled),
            resample: ResampleOptions::new(method, &spec).pad(0).a_oversample(1.0).b_taps(3),
            n_mu: spec.n_theta,
            n_t: spec.n_rho,
            grangeat_width: 5,
            normalization: T::one(),
            basis: VoxelBasis::Sinc,
            vacancy_threshold: T::lit(0.1),
        }
    }

    pub fn method(&self) -> ResampleMethod {
        self.resample.method
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if !(self.normalization.is_finite() && self.normalization != T::zero()) {
            return Err(Error::invalid("normalization", "must be finite and nonzero"));
        }
        if self.resample.method == ResampleMethod::Trilinear {
            return Err(Error::invalid("method", "the projector resamples with method A or B"));
        }
        Ok(())
    }
}

/// Forward projector and backprojector sharing one set of plans.
pub struct NufftProjector<T: Real> {
    geom: ConeGeometry<T>,
    cfg: ProjectorConfig<T>,
    n: usize,
    voxel_mm: T,
    transform: RadialTransform3D<T>,
    grangeat: GrangeatPlan<T>,
    resample: ResamplePlan<T>,
    /// flat umbrella index (view-major) of every resampling target
    active: Vec<usize>,
    coverage: OnceLock<Vec<T>>,
}

impl<T: Real> NufftProjector<T> {
    pub fn new(geom: &ConeGeometry<T>, n: usize, cfg: ProjectorConfig<T>) -> Result<Self> {
        geom.validate()?;
        cfg.validate()?;
        if n == 0 {
            return Err(Error::invalid("n", "volume size must be positive"));
        }
        let voxel_mm = geom.object_extent_mm / T::idx(n);
        let transform = RadialTransform3D::new(n, voxel_mm, cfg.spec, &cfg.spectrum)?;
        let grid = UmbrellaGrid::for_geometry(geom, cfg.n_mu, cfg.n_t)?;
        let grangeat = GrangeatPlan::with_width(geom, grid, cfg.grangeat_width)?;
        let coords: Vec<Vec<PolarCoord<T>>> = (0..geom.n_views)
            .into_par_iter()
            .map(|v| umbrella_coordinates(geom, v, &grid))
            .collect::<Result<_>>()?;
        let mut active = Vec::new();
        let mut inside = Vec::new();
        for (v, cs) in coords.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                // planes beyond ρmax miss the object cube
                if c.rho.abs() <= cfg.spec.rho_max {
                    active.push(v * grid.len() + i);
                    inside.push(*c);
                }
            }
        }
        drop(coords);
        let targets = polar_index_map(&inside, &cfg.spec)?;
        drop(inside);
        let resample = ResamplePlan::new(cfg.spec, targets, cfg.resample.clone())?;
        Ok(NufftProjector {
            geom: geom.clone(),
            cfg,
            n,
            voxel_mm,
            transform,
            grangeat,
            resample,
            active,
            coverage: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &ProjectorConfig<T> {
        &self.cfg
    }

    pub fn geometry(&self) -> &ConeGeometry<T> {
        &self.geom
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn voxel_mm(&self) -> T {
        self.voxel_mm
    }

    pub fn normalization(&self) -> T {
        self.cfg.normalization
    }

    pub fn set_normalization(&mut self, s: T) {
        self.cfg.normalization = s;
    }

    pub fn resample_plan(&self) -> &ResamplePlan<T> {
        &self.resample
    }

    pub fn grangeat_plan(&self) -> &GrangeatPlan<T> {
        &self.grangeat
    }

    fn umbrella_len(&self) -> usize {
        self.grangeat.grid().len()
    }

    pub fn forward_project(&self, vol: &Volume3D<T>) -> Result<ProjectionSet<T>> {
        self.forward_inner(vol, None)
    }

    /// Forward projection that also tallies multiplications per step.
    pub fn forward_project_counted(&self, vol: &Volume3D<T>) -> Result<(ProjectionSet<T>, CostModel)> {
        let variant = match self.cfg.method() {
            ResampleMethod::B => CostVariant::MethodB,
            _ => CostVariant::MethodA,
        };
        let mut c = CostModel::empty(self.n, variant);
        let p = self.forward_inner(vol, Some(&mut c))?;
        Ok((p, c))
    }

    fn forward_inner(&self, vol: &Volume3D<T>, tally: Option<&mut CostModel>) -> Result<ProjectionSet<T>> {
        if vol.n != self.n {
            return Err(Error::dims("volume size", self.n, vol.n));
        }
        check_volume_geometry(vol, &self.geom)?;
        vol.check_finite("volume")?;
        let mut s = self.transform.forward(vol)?;
        s.zero_nyquist();
        if self.cfg.basis == VoxelBasis::Trilinear {
            self.apply_trilinear_response(&mut s.data);
        }
        let d = spectral_rho_derivative(&s);
        drop(s);
        let r = radial_ifft(&d);
        drop(d);
        let vals = self.resample.apply(&r)?;
        drop(r);
        let glen = self.umbrella_len();
        let mut all = vec![T::zero(); glen * self.geom.n_views];
        for (&i, &v) in self.active.iter().zip(&vals) {
            all[i] = v;
        }
        drop(vals);
        let frame = self.geom.nu * self.geom.nv;
        let mut out = ProjectionSet::zeros(
            self.geom.nu,
            self.geom.nv,
            self.geom.n_views,
            self.geom.pitch_u(),
            self.geom.pitch_v(),
        );
        let norm = self.cfg.normalization;
        out.data
            .par_chunks_mut(frame)
            .zip(all.par_chunks(glen))
            .enumerate()
            .try_for_each(|(view, (f, u))| -> Result<()> {
                let g = self.grangeat.reverse(u)?;
                for (o, v) in f.iter_mut().zip(g) {
                    *o = v * norm;
                }
                if f.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite(format!("projection view {view}")));
                }
                Ok(())
            })?;
        if let Some(c) = tally {
            self.tally_forward(c);
        }
        Ok(out)
    }

    /// Multiplies by Π sinc²(ω_a h/2), the transform of the trilinear hat.
    fn apply_trilinear_response(&self, data: &mut [Complex<T>]) {
        let s = self.cfg.spec;
        let hh = self.voxel_mm / T::lit(2.0);
        let sinc2 = |x: T| {
            if x.abs() < T::lit(1e-12) {
                T::one()
            } else {
                let v = x.sin() / x;
                v * v
            }
        };
        data.par_chunks_mut(s.n_rho).enumerate().for_each(|(line, v)| {
            let d = PolarCoord::new(T::one(), s.theta(line % s.n_theta), s.phi(line / s.n_theta)).normal();
            for (m, z) in v.iter_mut().enumerate() {
                let w = s.omega(m) * hh;
                *z = *z * (sinc2(w * d[0]) * sinc2(w * d[1]) * sinc2(w * d[2]));
            }
        });
    }

    fn tally_forward(&self, c: &mut CostModel) {
        let spec = &self.cfg.spec;
        let nodes = spec.len() as f64;
        c.c1a = nufft_mults(self.transform.plan());
        c.c1b = nodes;
        c.c1c = spec.n_lines() as f64 * fft_mults(spec.n_rho);
        let targets = self.resample.n_targets() as f64;
        match self.resample.nufft_plan() {
            Some(plan) => {
                let lattice: usize = self.resample.extended_dims().iter().product();
                c.c21 = fft_mults(lattice) + nufft_mults(plan);
            }
            None => {
                c.c22 = targets * (self.resample.taps() as f64).powi(3);
            }
        }
        let grid = self.grangeat.grid();
        let views = self.geom.n_views as f64;
        c.c3a = views * grid.len() as f64;
        c.c3b = views * grid.n_mu as f64 * fft_mults(grid.n_t);
        c.c3c = views * nufft_mults(self.grangeat.nufft_plan());
        c.c3d = views * (self.geom.nu * self.geom.nv) as f64;
    }

    fn coverage(&self) -> Result<&[T]> {
        if self.coverage.get().is_none() {
            let mut cov = self.resample.coverage()?.data;
            let mut pos: Vec<T> = cov.iter().copied().filter(|&v| v > T::zero()).collect();
            let thr = if pos.is_empty() {
                T::zero()
            } else {
                let mid = pos.len() / 2;
                let (_, m, _) = pos.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
                *m * self.cfg.vacancy_threshold
            };
            for v in cov.iter_mut() {
                *v = if *v > thr && thr > T::zero() {
                    T::one() / *v
                } else {
                    T::zero()
                };
            }
            let _ = self.coverage.set(cov);
        }
        Ok(self.coverage.get().map(|v| v.as_slice()).unwrap_or(&[]))
    }

    /// Fraction of lattice nodes left empty by the scan geometry.
    pub fn vacancy_fraction(&self) -> Result<f64> {
        let c = self.coverage()?;
        Ok(c.iter().filter(|&&v| v == T::zero()).count() as f64 / c.len().max(1) as f64)
    }

    pub fn backproject(&self, projs: &ProjectionSet<T>) -> Result<Volume3D<T>> {
        Ok(self.backproject_detailed(projs)?.0)
    }

    /// Backprojection plus the ratio of the discarded imaginary part to the
    /// real output (both L2).
    pub fn backproject_detailed(&self, projs: &ProjectionSet<T>) -> Result<(Volume3D<T>, T)> {
        let g = &self.geom;
        if projs.nu != g.nu || projs.nv != g.nv || projs.n_views != g.n_views {
            return Err(Error::dims(
                "projections",
                format!("{}x{}x{}", g.nu, g.nv, g.n_views),
                format!("{}x{}x{}", projs.nu, projs.nv, projs.n_views),
            ));
        }
        if projs.data.len() != g.nu * g.nv * g.n_views {
            return Err(Error::dims("projection data", g.nu * g.nv * g.n_views, projs.data.len()));
        }
        if let Some(v) = projs.first_non_finite_view() {
            return Err(Error::NonFinite(format!("projection view {v}")));
        }
        let glen = self.umbrella_len();
        let umb: Vec<Vec<T>> = (0..g.n_views)
            .into_par_iter()
            .map(|v| self.grangeat.forward(projs.frame_data(v)))
            .collect::<Result<_>>()?;
        let y: Vec<T> = self.active.iter().map(|&i| umb[i / glen][i % glen]).collect();
        drop(umb);
        let mut lat = self.resample.transpose(&y)?;
        drop(y);
        for (v, &w) in lat.data.iter_mut().zip(self.coverage()?) {
            *v *= w;
        }
        let mut spec = radial_fft(&lat);
        drop(lat);
        let s = &self.cfg.spec;
        let nr = s.n_rho;
        let half = nr / 2;
        let dw = s.d_omega();
        let ramp = ramp_weights(nr, dw, 3)?;
        let c = dw / (T::lit(2.0) * T::TAU().powi(3));
        let (dth, dph) = (s.d_theta(), s.d_phi());
        let two = T::lit(2.0);
        spec.data
            .par_chunks_mut(nr)
            .enumerate()
            .for_each(|(line, v)| {
                let j = line % s.n_theta;
                let th = s.theta(j);
                // solid angle of the line's cell; the polar cap absorbs its antipode
                let area = if j == 0 {
                    two * (T::one() - (dth / two).cos()) * dph
                } else {
                    ((th - dth / two).cos() - (th + dth / two).cos()) * dph
                };
                // P(ω) = G(ω)/(iω), DC extrapolated in ω² from the first bins
                let p_at = |k: usize| {
                    let w = dw * T::idx(k);
                    let a = v[half + k];
                    let b = v[half - k];
                    (a.im / w - b.im / w) / two
                };
                let dc = if half >= 4 {
                    T::lit(1.5) * p_at(1) - T::lit(0.6) * p_at(2) + T::lit(0.1) * p_at(3)
                } else if half >= 2 {
                    p_at(1)
                } else {
                    T::zero()
                };
                let k = area * c;
                for (m, z) in v.iter_mut().enumerate() {
                    *z = if m == 0 {
                        Complex::new(T::zero(), T::zero())
                    } else if m == half {
                        Complex::new(dc * ramp[m] * k, T::zero())
                    } else {
                        // ω² P = -iω G
                        let w = s.omega(m);
                        Complex::new(z.im * w, -z.re * w) * k
                    };
                }
            });
        let x = self.transform.plan().adjoint(&spec.data)?;
        drop(spec);
        let (mut re2, mut im2) = (T::zero(), T::zero());
        let data: Vec<T> = x
            .iter()
            .map(|z| {
                re2 += z.re * z.re;
                im2 += z.im * z.im;
                z.re
            })
            .collect();
        let resid = if re2 > T::zero() { (im2 / re2).sqrt() } else { T::zero() };
        let vol = Volume3D::from_data(self.n, self.voxel_mm, data)?;
        vol.check_finite("backprojection")?;
        Ok((vol, resid))
    }

    /// Sets the normalization so that a centred ball of radius a quarter of
    /// the object extent projects to its analytic chord at the central
    /// detector pixels. Returns the new scalar.
    pub fn calibrate(&mut self) -> Result<T> {
        self.cfg.normalization = T::one();
        let r = self.geom.object_extent_mm / T::lit(4.0);
        let ball = Phantom::ball(r, T::one());
        let vol = ball.voxelize_supersampled(self.n, self.voxel_mm, 3);
        let p = self.forward_project(&vol)?;
        let g = &self.geom;
        let (iu, jv) = (g.nu / 2, g.nv / 2);
        let pix: Vec<(usize, usize)> = [(iu, jv), (iu.wrapping_sub(1), jv), (iu, jv.wrapping_sub(1))]
            .into_iter()
            .chain(std::iter::once((iu.wrapping_sub(1), jv.wrapping_sub(1))))
            .filter(|&(i, j)| i < g.nu && j < g.nv)
            .collect();
        let (mut num, mut den) = (T::zero(), T::zero());
        for view in 0..g.n_views {
            let s = g.source(view);
            for &(i, j) in &pix {
                let q = g.pixel_position(view, i, j);
                let d = [q[0] - s[0], q[1] - s[1], q[2] - s[2]];
                let l = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                num += ball.line_integral(s, [d[0] / l, d[1] / l, d[2] / l]);
                den += p.frame_data(view)[i + g.nu * j];
            }
        }
        if !(den.is_finite() && den.abs() > T::zero()) {
            return Err(Error::NonFinite("calibration projection".into()));
        }
        self.cfg.normalization = num / den;
        Ok(self.cfg.normalization)
    }
}

pub fn nufft_forward_project<T: Real>(
    vol: &Volume3D<T>,
    geom: &ConeGeometry<T>,
    cfg: &ProjectorConfig<T>,
) -> Result<ProjectionSet<T>> {
    NufftProjector::new(geom, vol.n, cfg.clone())?.forward_project(vol)
}

/// Backprojects onto an N³ volume where N is taken from the config's
/// ρ spacing (voxel = Δρ for the practical grid).
pub fn nufft_backproject<T: Real>(
    projs: &ProjectionSet<T>,
    geom: &ConeGeometry<T>,
    cfg: &ProjectorConfig<T>,
    n: usize,
) -> Result<Volume3D<T>> {
    NufftProjector::new(geom, n, cfg.clone())?.backproject(projs)
}

/// Multiplications of one FFT of total length m: 0.5·m·log2 m.
pub fn fft_mults(m: usize) -> f64 {
    if m < 2 {
        0.0
    } else {
        0.5 * m as f64 * (m as f64).log2()
    }
}

/// Oversampled FFT + pre-scaling + one multiply per interpolation weight.
fn nufft_mults<T: Real>(plan: &NufftPlan<T>) -> f64 {
    let taps: usize = plan.kernels().iter().map(|k| k.j).product();
    fft_mults(plan.oversampled_len()) + plan.grid_len() as f64 + (plan.n_nodes() * taps) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostVariant {
    MethodA,
    MethodB,
    CtBaseline,
}

/// Multiplications per pipeline step. Steps a variant does not run are 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel {
    pub n: usize,
    pub variant: CostVariant,
    /// 3D NUFFT of the volume
    pub c1a: f64,
    /// spectral ρ-derivative
    pub c1b: f64,
    /// radial IFFTs
    pub c1c: f64,
    /// resampling, method A
    pub c21: f64,
    /// resampling, method B
    pub c22: f64,
    /// de-postweighting
    pub c3a: f64,
    /// radial FFTs along t
    pub c3b: f64,
    /// 2D NUFFT adjoint per view
    pub c3c: f64,
    /// de-preweighting
    pub c3d: f64,
    /// trilinear ray projector
    pub baseline: f64,
}

pub const STEP_NAMES: [&str; 10] = ["C1a", "C1b", "C1c", "C21", "C22", "C3a", "C3b", "C3c", "C3d", "baseline"];

impl CostModel {
    pub fn empty(n: usize, variant: CostVariant) -> Self {
        CostModel {
            n,
            variant,
            c1a: 0.0,
            c1b: 0.0,
            c1c: 0.0,
            c21: 0.0,
            c22: 0.0,
            c3a: 0.0,
            c3b: 0.0,
            c3c: 0.0,
            c3d: 0.0,
            baseline: 0.0,
        }
    }

    pub fn steps(&self) -> [(&'static str, f64); 10] {
        let v = [
            self.c1a, self.c1b, self.c1c, self.c21, self.c22, self.c3a, self.c3b, self.c3c, self.c3d, self.baseline,
        ];
        std::array::from_fn(|i| (STEP_NAMES[i], v[i]))
    }

    pub fn total(&self) -> f64 {
        self.steps().iter().map(|s| s.1).sum()
    }

    /// measured / predicted for every step the variant runs.
    pub fn ratios(&self, predicted: &CostModel) -> Vec<(&'static str, f64)> {
        self.steps()
            .iter()
            .zip(predicted.steps())
            .filter(|(_, p)| p.1 > 0.0)
            .map(|(m, p)| (m.0, m.1 / p.1))
            .collect()
    }
}

/// Closed-form multiplication counts, log base 2.
pub fn predicted_cost(n: usize, variant: CostVariant) -> Result<CostModel> {
    if n < 2 {
        return Err(Error::invalid("n", "cost model needs N ≥ 2"));
    }
    let nf = n as f64;
    let n3 = nf.powi(3);
    let pi = std::f64::consts::PI;
    let pi2 = pi * pi;
    let lg = |x: f64| x.log2();
    let mut c = CostModel::empty(n, variant);
    if variant == CostVariant::CtBaseline {
        c.baseline = baseline_coefficient() * n3 * nf;
        return Ok(c);
    }
    let big = 16.0 * n3;
    c.c1a = 0.5 * big * lg(big) + n3 + 27.0 * pi2 * n3;
    c.c1b = pi2 * n3;
    c.c1c = pi2 * nf * nf * 0.5 * nf * lg(nf);
    match variant {
        CostVariant::MethodA => c.c21 = 2.0 * 0.5 * big * lg(big) + pi2 * n3 + 27.0 * pi2 * n3,
        _ => c.c22 = 27.0 * pi2 * n3,
    }
    let m = 2.0 * nf;
    c.c3a = pi2 * n3;
    c.c3b = c.c1c;
    c.c3c = pi * nf * (m * m * lg(m) + m * m + 25.0 * m * m);
    c.c3d = pi * n3;
    Ok(c)
}

/// (a, b) with total = a·N³·log2 N + b·N³ for the NUFFT variants. The
/// baseline grows as N⁴ and has no such form.
pub fn cost_coefficients(variant: CostVariant) -> Option<(f64, f64)> {
    if variant == CostVariant::CtBaseline {
        return None;
    }
    let t = |n: usize| predicted_cost(n, variant).map(|c| c.total() / (n as f64).powi(3)).ok();
    // t(N) = a·log2 N + b exactly
    let (t2, t4) = (t(2)?, t(4)?);
    let a = t4 - t2;
    Some((a, t2 - a))
}

/// c with baseline total = c·N⁴.
pub fn baseline_coefficient() -> f64 {
    8.0 * std::f64::consts::PI
}

/// Baseline cost over the variant's total.
pub fn speedup(n: usize, variant: CostVariant) -> Result<f64> {
    Ok(predicted_cost(n, CostVariant::CtBaseline)?.total() / predicted_cost(n, variant)?.total())
}

/// Runs one projection of a Shepp-Logan phantom at the theoretical sampling
/// rates (detector N², ⌈πN⌉ views) and counts multiplications per step.
pub fn count_multiplications(n: usize, variant: CostVariant) -> Result<CostModel> {
    if n < 2 {
        return Err(Error::invalid("n", "instrumented run needs N ≥ 2"));
    }
    let views = (std::f64::consts::PI * n as f64 - 1e-9).ceil() as usize;
    let geom = ConeGeometry {
        nu: n,
        nv: n,
        n_views: views,
        ..ConeGeometry::<f64>::reference()
    };
    let h = geom.object_extent_mm / n as f64;
    let vol = crate::phantom::shepp_logan_3d(n, geom.object_extent_mm);
    if variant == CostVariant::CtBaseline {
        let (_, count) = ct_project_linear_counted(&vol, &geom)?;
        let mut c = CostModel::empty(n, variant);
        c.baseline = count as f64;
        return Ok(c);
    }
    let method = if variant == CostVariant::MethodA {
        ResampleMethod::A
    } else {
        ResampleMethod::B
    };
    let cfg = ProjectorConfig::theoretical(n, &geom, method);
    debug_assert!((cfg.spec.d_rho() - h).abs() < 1e-9 * h || n % 2 == 1);
    let p = NufftProjector::new(&geom, n, cfg)?;
    Ok(p.forward_project_counted(&vol)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_volume_projects_to_zero() {
        let geom = ConeGeometry::<f64>::reference_scaled(8);
        let cfg = ProjectorConfig::practical(8, &geom, ResampleMethod::B);
        let vol = Volume3D::zeros(8, 45.0);
        let p = nufft_forward_project(&vol, &geom, &cfg).unwrap();
        assert!(p.data.iter().all(|&v| v == 0.0));
        let b = nufft_backproject(&p, &geom, &cfg, 8).unwrap();
        assert!(b.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_sum_is_total() {
        for v in [CostVariant::MethodA, CostVariant::MethodB, CostVariant::CtBaseline] {
            let c = predicted_cost(64, v).unwrap();
            let s: f64 = c.steps().iter().map(|s| s.1).sum();
            assert_eq!(s, c.total());
            assert!(c.steps().iter().all(|s| s.1 >= 0.0));
        }
        assert!(predicted_cost(1, CostVariant::MethodA).is_err());
    }

    #[test]
    fn trilinear_is_rejected() {
        let geom = ConeGeometry::<f64>::reference_scaled(8);
        let cfg = ProjectorConfig::practical(8, &geom, ResampleMethod::Trilinear);
        assert!(NufftProjector::new(&geom, 8, cfg).is_err());
    }

    #[test]
    fn mismatched_projections_are_rejected() {
        let geom = ConeGeometry::<f64>::reference_scaled(8);
        let p = NufftProjector::new(&geom, 8, ProjectorConfig::practical(8, &geom, ResampleMethod::B)).unwrap();
        let bad = ProjectionSet::zeros(8, 8, 3, 64.0, 64.0);
        assert!(p.backproject(&bad).is_err());
    }
}
