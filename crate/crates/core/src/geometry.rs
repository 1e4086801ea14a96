//! Cone-beam geometry, polar Radon coordinates and the radial / umbrella sample sets.

use crate::error::{Error, Result};
use crate::scalar::{wrap_two_pi, Real};
use serde::{Deserialize, Serialize};

pub type Vec3<T> = [T; 3];

#[inline]
pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn axpy<T: Real>(a: T, x: Vec3<T>, y: Vec3<T>) -> Vec3<T> {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2]]
}

#[inline]
pub(crate) fn scale<T: Real>(a: T, x: Vec3<T>) -> Vec3<T> {
    [a * x[0], a * x[1], a * x[2]]
}

#[inline]
pub(crate) fn norm<T: Real>(x: Vec3<T>) -> T {
    dot(x, x).sqrt()
}

/// Circular cone-beam scanner. The detector is flat, centred on the central
/// ray and perpendicular to it; view `k` sits at azimuth 2πk/n_views.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeGeometry<T> {
    pub so_mm: T,
    pub sd_mm: T,
    pub det_width_mm: T,
    pub det_height_mm: T,
    pub nu: usize,
    pub nv: usize,
    pub n_views: usize,
    pub object_extent_mm: T,
}

impl<T: Real> ConeGeometry<T> {
    /// The reference scanner: SO 1100 mm, SD 1500 mm, 512 mm square detector
    /// with 128² pixels, 256 views, 360 mm object cube.
    pub fn reference() -> Self {
        ConeGeometry {
            so_mm: T::lit(1100.0),
            sd_mm: T::lit(1500.0),
            det_width_mm: T::lit(512.0),
            det_height_mm: T::lit(512.0),
            nu: 128,
            nv: 128,
            n_views: 256,
            object_extent_mm: T::lit(360.0),
        }
    }

    /// Reference scanner with an n² detector and 2n views.
    pub fn reference_scaled(n: usize) -> Self {
        ConeGeometry {
            nu: n,
            nv: n,
            n_views: 2 * n,
            ..Self::reference()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v.is_finite() && v > T::zero();
        if !pos(self.so_mm) {
            return Err(Error::invalid("so_mm", "must be positive"));
        }
        if !(self.sd_mm.is_finite() && self.sd_mm > self.so_mm) {
            return Err(Error::invalid("sd_mm", "must exceed so_mm"));
        }
        if !pos(self.det_width_mm) {
            return Err(Error::invalid("det_width_mm", "must be positive"));
        }
        if !pos(self.det_height_mm) {
            return Err(Error::invalid("det_height_mm", "must be positive"));
        }
        if self.nu == 0 {
            return Err(Error::invalid("nu", "must be at least 1"));
        }
        if self.nv == 0 {
            return Err(Error::invalid("nv", "must be at least 1"));
        }
        if self.n_views == 0 {
            return Err(Error::invalid("n_views", "must be at least 1"));
        }
        if !pos(self.object_extent_mm) {
            return Err(Error::invalid("object_extent_mm", "must be positive"));
        }
        if self.object_extent_mm * T::lit(3f64.sqrt() / 2.0) >= self.so_mm {
            return Err(Error::invalid(
                "object_extent_mm",
                "object does not fit inside the source circle",
            ));
        }
        Ok(())
    }

    pub fn view_angle(&self, view: usize) -> T {
        T::TAU() * T::idx(view) / T::idx(self.n_views)
    }

    /// Unit vector from the rotation axis towards the source.
    pub fn source_dir(&self, view: usize) -> Vec3<T> {
        let a = self.view_angle(view);
        [a.cos(), a.sin(), T::zero()]
    }

    pub fn source(&self, view: usize) -> Vec3<T> {
        scale(self.so_mm, self.source_dir(view))
    }

    /// Detector axes (e_u, e_v) for a view.
    pub fn detector_axes(&self, view: usize) -> (Vec3<T>, Vec3<T>) {
        let a = self.view_angle(view);
        ([-a.sin(), a.cos(), T::zero()], [T::zero(), T::zero(), T::one()])
    }

    pub fn pitch_u(&self) -> T {
        self.det_width_mm / T::idx(self.nu)
    }

    pub fn pitch_v(&self) -> T {
        self.det_height_mm / T::idx(self.nv)
    }

    /// Magnification from the physical detector to the virtual one through the axis.
    pub fn virtual_scale(&self) -> T {
        self.so_mm / self.sd_mm
    }

    /// Physical u coordinate of pixel column `i`.
    pub fn u_coord(&self, i: usize) -> T {
        (T::idx(i) - T::idx(self.nu - 1) / T::lit(2.0)) * self.pitch_u()
    }

    pub fn v_coord(&self, j: usize) -> T {
        (T::idx(j) - T::idx(self.nv - 1) / T::lit(2.0)) * self.pitch_v()
    }

    /// World position of a physical detector pixel centre.
    pub fn pixel_position(&self, view: usize, i: usize, j: usize) -> Vec3<T> {
        let s = self.source(view);
        let sd = self.source_dir(view);
        let (eu, ev) = self.detector_axes(view);
        let c = axpy(-self.sd_mm, sd, s);
        axpy(self.v_coord(j), ev, axpy(self.u_coord(i), eu, c))
    }
}

/// Point in (derivative) Radon space: signed distance and unit normal angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarCoord<T> {
    pub rho: T,
    pub theta: T,
    pub phi: T,
}

impl<T: Real> PolarCoord<T> {
    pub fn new(rho: T, theta: T, phi: T) -> Self {
        PolarCoord { rho, theta, phi }
    }

    /// Canonical coordinate of the plane {x : x·n = rho}; n need not be normalised.
    /// θ lands in [0, π) and φ in [0, 2π).
    pub fn from_plane(rho: T, n: Vec3<T>) -> Self {
        let len = norm(n);
        let (mut rho, n) = (rho / len, scale(T::one() / len, n));
        let mut theta = n[2].max(-T::one()).min(T::one()).acos();
        let mut phi = if n[0] == T::zero() && n[1] == T::zero() {
            T::zero()
        } else {
            wrap_two_pi(n[1].atan2(n[0]))
        };
        if theta >= T::PI() {
            rho = -rho;
            theta = T::zero();
            phi = wrap_two_pi(phi + T::PI());
        }
        PolarCoord { rho, theta, phi }
    }

    pub fn normal(&self) -> Vec3<T> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [cp * st, sp * st, ct]
    }

    /// Re-expresses any (ρ, θ, φ) with θ in [0, π), φ in [0, 2π). Returns the
    /// canonical coordinate and whether the plane orientation was reversed
    /// (ρ → -ρ, n → -n).
    pub fn canonical(&self) -> (Self, bool) {
        let n = self.normal();
        let c = Self::from_plane(self.rho, n);
        let flipped = dot(c.normal(), n) < T::zero();
        (c, flipped)
    }
}

/// x = ρ cosφ sinθ, y = ρ sinφ sinθ, z = ρ cosθ.
pub fn polar_to_cartesian<T: Real>(p: PolarCoord<T>) -> Vec3<T> {
    scale(p.rho, p.normal())
}

/// Tensor grid over (ρ, θ, φ): ρ_k = ρmax(2k - Nρ)/Nρ, θ_j = πj/Nθ, φ_l = 2πl/Nφ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGridSpec<T> {
    pub n_rho: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub rho_max: T,
}

impl<T: Real> RadialGridSpec<T> {
    pub fn new(n_rho: usize, n_theta: usize, n_phi: usize, rho_max: T) -> Result<Self> {
        let s = RadialGridSpec {
            n_rho,
            n_theta,
            n_phi,
            rho_max,
        };
        s.validate()?;
        Ok(s)
    }

    /// Nρ = Nθ = Nφ = 2N with ρ spacing equal to the voxel size.
    pub fn practical(n: usize, voxel_mm: T) -> Self {
        RadialGridSpec {
            n_rho: 2 * n,
            n_theta: 2 * n,
            n_phi: 2 * n,
            rho_max: T::idx(n) * voxel_mm,
        }
    }

    /// Nρ = N, Nθ = Nφ = ⌈πN⌉, ρ spacing equal to the voxel size.
    pub fn theoretical(n: usize, voxel_mm: T) -> Self {
        let a = (std::f64::consts::PI * n as f64 - 1e-9).ceil() as usize;
        let n_rho = n + n % 2;
        RadialGridSpec {
            n_rho,
            n_theta: a,
            n_phi: a,
            rho_max: T::idx(n_rho) * voxel_mm / T::lit(2.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rho < 2 || self.n_rho % 2 != 0 {
            return Err(Error::invalid("n_rho", "must be even and at least 2"));
        }
        if self.n_theta == 0 {
            return Err(Error::invalid("n_theta", "must be at least 1"));
        }
        if self.n_phi == 0 {
            return Err(Error::invalid("n_phi", "must be at least 1"));
        }
        if !(self.rho_max.is_finite() && self.rho_max > T::zero()) {
            return Err(Error::invalid("rho_max", "must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_rho * self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_lines(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn d_rho(&self) -> T {
        T::lit(2.0) * self.rho_max / T::idx(self.n_rho)
    }

    pub fn d_theta(&self) -> T {
        T::PI() / T::idx(self.n_theta)
    }

    pub fn d_phi(&self) -> T {
        T::TAU() / T::idx(self.n_phi)
    }

    pub fn rho(&self, k: usize) -> T {
        self.rho_max * (T::idx(2 * k) - T::idx(self.n_rho)) / T::idx(self.n_rho)
    }

    pub fn theta(&self, j: usize) -> T {
        self.d_theta() * T::idx(j)
    }

    pub fn phi(&self, l: usize) -> T {
        self.d_phi() * T::idx(l)
    }

    /// Radial frequency (rad per length unit) of centered FFT bin `m` along ρ.
    pub fn omega(&self, m: usize) -> T {
        T::PI() * (T::idx(m) - T::idx(self.n_rho / 2)) / self.rho_max
    }

    pub fn d_omega(&self) -> T {
        T::PI() / self.rho_max
    }

    /// Flat index, ρ fastest, then θ, then φ.
    #[inline]
    pub fn index(&self, k: usize, j: usize, l: usize) -> usize {
        k + self.n_rho * (j + self.n_theta * l)
    }
}

pub fn radial_nodes<T: Real>(spec: &RadialGridSpec<T>) -> Vec<PolarCoord<T>> {
    let mut out = Vec::with_capacity(spec.len());
    for l in 0..spec.n_phi {
        for j in 0..spec.n_theta {
            for k in 0..spec.n_rho {
                out.push(PolarCoord::new(spec.rho(k), spec.theta(j), spec.phi(l)));
            }
        }
    }
    out
}

/// Line family on the virtual detector: μ_i = πi/n_mu, t_k = (k - n_t/2)·dt.
/// A line (μ, t) holds the points u sinμ - v cosμ = t.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UmbrellaGrid<T> {
    pub n_mu: usize,
    pub n_t: usize,
    pub dt: T,
}

impl<T: Real> UmbrellaGrid<T> {
    /// Offset step equal to the coarser virtual pixel pitch.
    pub fn for_geometry(geom: &ConeGeometry<T>, n_mu: usize, n_t: usize) -> Result<Self> {
        let dt = geom.pitch_u().max(geom.pitch_v()) * geom.virtual_scale();
        Self::new(n_mu, n_t, dt)
    }

    /// n_mu = n_t = 2·nu.
    pub fn default_for(geom: &ConeGeometry<T>) -> Result<Self> {
        Self::for_geometry(geom, 2 * geom.nu, 2 * geom.nu)
    }

    pub fn new(n_mu: usize, n_t: usize, dt: T) -> Result<Self> {
        if n_mu == 0 {
            return Err(Error::invalid("n_mu", "must be at least 1"));
        }
        if n_t == 0 {
            return Err(Error::invalid("n_t", "must be at least 1"));
        }
        if n_t % 2 != 0 {
            return Err(Error::invalid("n_t", "must be even"));
        }
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        Ok(UmbrellaGrid { n_mu, n_t, dt })
    }

    pub fn len(&self) -> usize {
        self.n_mu * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mu(&self, i: usize) -> T {
        T::PI() * T::idx(i) / T::idx(self.n_mu)
    }

    pub fn t(&self, k: usize) -> T {
        (T::idx(k) - T::idx(self.n_t / 2)) * self.dt
    }

    pub fn t_max(&self) -> T {
        T::idx(self.n_t / 2) * self.dt
    }

    pub fn d_mu(&self) -> T {
        T::PI() / T::idx(self.n_mu)
    }

    /// Frequency of centered bin `m` along t.
    pub fn omega(&self, m: usize) -> T {
        T::TAU() * (T::idx(m) - T::idx(self.n_t / 2)) / (T::idx(self.n_t) * self.dt)
    }

    pub fn d_omega(&self) -> T {
        T::TAU() / (T::idx(self.n_t) * self.dt)
    }

    /// Flat index, t fastest, then μ.
    #[inline]
    pub fn index(&self, i_mu: usize, k_t: usize) -> usize {
        k_t + self.n_t * i_mu
    }
}

/// Plane through the source of `view` and the virtual-detector line (μ, t),
/// oriented by n ∝ SO·n_L + t·ŝ. θ equals π only when that normal is -z.
pub fn umbrella_plane<T: Real>(geom: &ConeGeometry<T>, view: usize, mu: T, t: T) -> PolarCoord<T> {
    let sdir = geom.source_dir(view);
    let (eu, ev) = geom.detector_axes(view);
    let nl = axpy(mu.sin(), eu, scale(-mu.cos(), ev));
    let n = axpy(t, sdir, scale(geom.so_mm, nl));
    let r = (geom.so_mm * geom.so_mm + t * t).sqrt();
    let n = scale(T::one() / r, n);
    let rho = geom.so_mm * t / r;
    let c = PolarCoord::from_plane(rho, n);
    if dot(c.normal(), n) < T::zero() {
        // keep the orientation at the south pole
        PolarCoord::new(rho, T::PI(), c.phi)
    } else {
        c
    }
}

/// Every umbrella plane of one view, ordered t fastest then μ.
pub fn umbrella_coordinates<T: Real>(
    geom: &ConeGeometry<T>,
    view_index: usize,
    grid: &UmbrellaGrid<T>,
) -> Result<Vec<PolarCoord<T>>> {
    if view_index >= geom.n_views {
        return Err(Error::invalid("view_index", "must be below n_views"));
    }
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.n_mu {
        let mu = grid.mu(i);
        for k in 0..grid.n_t {
            out.push(umbrella_plane(geom, view_index, mu, grid.t(k)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Vec3<f64>, b: Vec3<f64>) -> bool {
        (0..3).all(|i| (a[i] - b[i]).abs() < 1e-12)
    }

    #[test]
    fn polar_examples() {
        assert!(close(polar_to_cartesian(PolarCoord::new(1.0, 0.0, 0.7)), [0.0, 0.0, 1.0]));
        assert!(close(polar_to_cartesian(PolarCoord::new(1.0, PI / 2.0, 0.0)), [1.0, 0.0, 0.0]));
        assert!(close(polar_to_cartesian(PolarCoord::new(2.0, PI / 2.0, PI / 2.0)), [0.0, 2.0, 0.0]));
    }

    #[test]
    fn radial_grid_examples() {
        let s = RadialGridSpec::new(2, 1, 1, 1.0).unwrap();
        let nodes = radial_nodes(&s);
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[0].rho, -1.0);
        assert_eq!(nodes[1].rho, 0.0);
        assert_eq!(nodes[0].theta, 0.0);
        assert_eq!(nodes[0].phi, 0.0);
        assert_eq!(radial_nodes(&RadialGridSpec::new(4, 3, 2, 1.0).unwrap()).len(), 24);
        assert!(RadialGridSpec::new(3, 1, 1, 1.0).is_err());
        assert!(RadialGridSpec::new(4, 0, 1, 1.0).is_err());
    }

    #[test]
    fn node_ordering_rho_fastest() {
        let s = RadialGridSpec::new(4, 3, 2, 2.0).unwrap();
        let nodes = radial_nodes(&s);
        assert_eq!(nodes[s.index(1, 2, 1)], PolarCoord::new(s.rho(1), s.theta(2), s.phi(1)));
    }

    #[test]
    fn canonical_pole_flip() {
        let (c, flipped) = PolarCoord::new(0.3, PI, 0.2).canonical();
        assert!(flipped);
        assert!((c.rho + 0.3).abs() < 1e-15);
        assert_eq!(c.theta, 0.0);
        let p = polar_to_cartesian(PolarCoord::new(0.3, PI, 0.2));
        assert!(close(polar_to_cartesian(c), p));
    }

    #[test]
    fn umbrella_vertical_line_example() {
        let g = ConeGeometry::<f64>::reference();
        let t = 37.5;
        let p = umbrella_plane(&g, 0, PI / 2.0, t);
        let n = p.normal();
        let r = (t * t + g.so_mm * g.so_mm).sqrt();
        assert!(close(n, [t / r, g.so_mm / r, 0.0]));
        assert!((p.rho - g.so_mm * t / r).abs() < 1e-12);
    }

    #[test]
    fn umbrella_origin_lines() {
        let g = ConeGeometry::<f64>::reference_scaled(16);
        let grid = UmbrellaGrid::default_for(&g).unwrap();
        let c = umbrella_coordinates(&g, 3, &grid).unwrap();
        for i in 0..grid.n_mu {
            assert_eq!(c[grid.index(i, grid.n_t / 2)].rho, 0.0);
        }
        assert!(umbrella_coordinates(&g, 32, &grid).is_err());
        assert!(UmbrellaGrid::<f64>::new(0, 4, 1.0).is_err());
        assert!(UmbrellaGrid::<f64>::new(4, 0, 1.0).is_err());
    }

    #[test]
    fn geometry_validation() {
        let mut g = ConeGeometry::<f64>::reference();
        assert!(g.validate().is_ok());
        g.sd_mm = 900.0;
        assert!(g.validate().is_err());
        let mut g = ConeGeometry::<f64>::reference();
        g.object_extent_mm = 1400.0;
        assert!(g.validate().is_err());
    }
}
