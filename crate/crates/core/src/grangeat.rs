//! Per-view Grangeat processing on the virtual detector through the axis.
//!
//! Detector data g(u, v) is pre-weighted by w1 = SO/√(SO² + u² + v²). Line
//! integrals G(μ, t) of the weighted data along u sinμ - v cosμ = t are
//! obtained through the 2D slice theorem with a NUFFT, differentiated in t
//! spectrally, and post-weighted by w2 = (SO² + t²)/SO², giving the
//! ρ-derivative of the Radon transform on the view's umbrella.

use crate::error::{Error, Result};
use crate::fft::CenteredFft;
use crate::geometry::{umbrella_coordinates, ConeGeometry, PolarCoord, UmbrellaGrid};
use crate::nufft::{plan_nufft, NufftOptions, NufftPlan};
use crate::scalar::{Complex, Real};
use crate::volume::DetectorFrame;

/// Derivative-Radon samples of one view on its umbrella, t fastest then μ.
#[derive(Clone, Debug, PartialEq)]
pub struct UmbrellaView<T> {
    pub view_index: usize,
    pub grid: UmbrellaGrid<T>,
    pub values: Vec<T>,
    pub coords: Vec<PolarCoord<T>>,
}

impl<T: Real> UmbrellaView<T> {
    /// View with coordinates filled in and values from `f`.
    pub fn from_fn(
        geom: &ConeGeometry<T>,
        view_index: usize,
        grid: UmbrellaGrid<T>,
        f: impl Fn(PolarCoord<T>) -> T,
    ) -> Result<Self> {
        let coords = umbrella_coordinates(geom, view_index, &grid)?;
        let values = coords.iter().map(|&c| f(c)).collect();
        Ok(UmbrellaView {
            view_index,
            grid,
            values,
            coords,
        })
    }
}

/// Shared per-geometry state for both directions.
pub struct GrangeatPlan<T: Real> {
    geom: ConeGeometry<T>,
    grid: UmbrellaGrid<T>,
    plan: NufftPlan<T>,
    fft: CenteredFft<T>,
    /// virtual pixel pitches
    du: T,
    dv: T,
    w1: Vec<T>,
    w2: Vec<T>,
}

impl<T: Real> GrangeatPlan<T> {
    /// Kernel width 5 per detector axis.
    pub fn new(geom: &ConeGeometry<T>, grid: UmbrellaGrid<T>) -> Result<Self> {
        Self::with_width(geom, grid, 5)
    }

    pub fn with_width(geom: &ConeGeometry<T>, grid: UmbrellaGrid<T>, j: usize) -> Result<Self> {
        geom.validate()?;
        let grid = UmbrellaGrid::new(grid.n_mu, grid.n_t, grid.dt)?;
        let mag = geom.virtual_scale();
        let (du, dv) = (geom.pitch_u() * mag, geom.pitch_v() * mag);
        if grid.dt < du.max(dv) * (T::one() - T::lit(1e-9)) {
            return Err(Error::invalid(
                "dt",
                "umbrella offset step is finer than the virtual pixel pitch",
            ));
        }
        let mut nodes = Vec::with_capacity(2 * grid.len());
        for i in 0..grid.n_mu {
            let (s, c) = grid.mu(i).sin_cos();
            for m in 0..grid.n_t {
                let w = grid.omega(m);
                nodes.push(w * s * du);
                nodes.push(-w * c * dv);
            }
        }
        let dims = [geom.nu, geom.nv];
        let opts = NufftOptions::with_width(2, j).shift(NufftOptions::centered_shift(&dims));
        let plan = plan_nufft(&dims, &nodes, &opts)?;
        let so = geom.so_mm;
        let mut w1 = Vec::with_capacity(geom.nu * geom.nv);
        for jv in 0..geom.nv {
            let v = geom.v_coord(jv) * mag;
            for iu in 0..geom.nu {
                let u = geom.u_coord(iu) * mag;
                w1.push(so / (so * so + u * u + v * v).sqrt());
            }
        }
        let w2 = (0..grid.n_t)
            .map(|k| {
                let t = grid.t(k);
                (so * so + t * t) / (so * so)
            })
            .collect();
        Ok(GrangeatPlan {
            geom: geom.clone(),
            grid,
            plan,
            fft: CenteredFft::new(grid.n_t),
            du,
            dv,
            w1,
            w2,
        })
    }

    pub fn grid(&self) -> &UmbrellaGrid<T> {
        &self.grid
    }

    pub fn geometry(&self) -> &ConeGeometry<T> {
        &self.geom
    }

    pub fn nufft_plan(&self) -> &NufftPlan<T> {
        &self.plan
    }

    /// Detector line integrals (physical detector, u fastest) → umbrella
    /// derivative-Radon values (t fastest, then μ).
    pub fn forward(&self, frame: &[T]) -> Result<Vec<T>> {
        let (nu, nv) = (self.geom.nu, self.geom.nv);
        if frame.len() != nu * nv {
            return Err(Error::dims("detector frame", nu * nv, frame.len()));
        }
        let x: Vec<Complex<T>> = frame
            .iter()
            .zip(&self.w1)
            .map(|(&g, &w)| Complex::new(g * w, T::zero()))
            .collect();
        let mut s = self.plan.forward(&x)?;
        let area = self.du * self.dv;
        let nt = self.grid.n_t;
        for line in s.chunks_exact_mut(nt) {
            for (m, v) in line.iter_mut().enumerate() {
                let w = self.grid.omega(m);
                *v = if m == 0 {
                    Complex::new(T::zero(), T::zero())
                } else {
                    Complex::new(-v.im, v.re) * (w * area)
                };
            }
        }
        self.fft.inverse(&mut s);
        let inv_dt = T::one() / self.grid.dt;
        Ok(s.iter()
            .enumerate()
            .map(|(i, v)| v.re * inv_dt * self.w2[i % nt])
            .collect())
    }

    /// Umbrella derivative-Radon values → detector line integrals.
    pub fn reverse(&self, values: &[T]) -> Result<Vec<T>> {
        let nt = self.grid.n_t;
        if values.len() != self.grid.len() {
            return Err(Error::dims("umbrella values", self.grid.len(), values.len()));
        }
        let dt = self.grid.dt;
        let mut s: Vec<Complex<T>> = values
            .iter()
            .enumerate()
            .map(|(i, &r)| Complex::new(r / self.w2[i % nt] * dt, T::zero()))
            .collect();
        self.fft.forward(&mut s);
        let dw = self.grid.d_omega();
        let c = dw * self.grid.d_mu() / (T::lit(4.0) * T::PI() * T::PI());
        let half = nt / 2;
        for line in s.chunks_exact_mut(nt) {
            // G(0) extrapolated in ω² from G'(ω)/(iω) at the first three bins
            let g_at = |k: usize| {
                let w = dw * T::idx(k);
                let p = line[half + k];
                let n = line[half - k];
                // G(ω) = G'(ω)/(iω)
                let gp = Complex::new(p.im / w, -p.re / w);
                let gn = Complex::new(-n.im / w, n.re / w);
                (gp.re + gn.re) / T::lit(2.0)
            };
            let dc = if half >= 4 {
                T::lit(1.5) * g_at(1) - T::lit(0.6) * g_at(2) + T::lit(0.1) * g_at(3)
            } else if half >= 2 {
                g_at(1)
            } else {
                T::zero()
            };
            for (m, v) in line.iter_mut().enumerate() {
                *v = if m == 0 {
                    Complex::new(T::zero(), T::zero())
                } else if m == half {
                    // a sixth of the first bin integrates |ω| across the kink at 0
                    Complex::new(dc * dw / T::lit(6.0), T::zero())
                } else if m > half {
                    Complex::new(v.im, -v.re)
                } else {
                    Complex::new(-v.im, v.re)
                };
                *v = *v * c;
            }
        }
        let x = self.plan.adjoint(&s)?;
        Ok(x.iter().zip(&self.w1).map(|(v, &w)| v.re / w).collect())
    }
}

/// Umbrella view → physical detector frame.
pub fn reverse_grangeat_view<T: Real>(u: &UmbrellaView<T>, geom: &ConeGeometry<T>) -> Result<DetectorFrame<T>> {
    if u.view_index >= geom.n_views {
        return Err(Error::invalid("view_index", "must be below n_views"));
    }
    let plan = GrangeatPlan::new(geom, u.grid)?;
    Ok(DetectorFrame {
        view_index: u.view_index,
        nu: geom.nu,
        nv: geom.nv,
        pitch_u_mm: geom.pitch_u(),
        pitch_v_mm: geom.pitch_v(),
        data: plan.reverse(&u.values)?,
    })
}

/// Physical detector frame → umbrella view with `n_mu` × `n_t` lines.
pub fn forward_grangeat_view<T: Real>(
    d: &DetectorFrame<T>,
    geom: &ConeGeometry<T>,
    n_mu: usize,
    n_t: usize,
) -> Result<UmbrellaView<T>> {
    if d.nu != geom.nu || d.nv != geom.nv {
        return Err(Error::dims(
            "detector frame",
            format!("{}x{}", geom.nu, geom.nv),
            format!("{}x{}", d.nu, d.nv),
        ));
    }
    let grid = UmbrellaGrid::for_geometry(geom, n_mu, n_t)?;
    let plan = GrangeatPlan::new(geom, grid)?;
    Ok(UmbrellaView {
        view_index: d.view_index,
        grid,
        values: plan.forward(&d.data)?,
        coords: umbrella_coordinates(geom, d.view_index, &grid)?,
    })
}
