//! Ellipsoid phantoms, analytic line / plane integral oracles, support masks
//! and auxiliary test images.

use crate::geometry::{dot, PolarCoord, Vec3};
use crate::scalar::Real;
use crate::volume::{Image2D, ProjectionSet, Volume3D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solid ellipsoid rotated about z, adding `density` inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipsoid<T> {
    pub center: Vec3<T>,
    pub axes: Vec3<T>,
    /// Rotation about z, radians.
    pub angle: T,
    pub density: T,
}

impl<T: Real> Ellipsoid<T> {
    pub fn ball(center: Vec3<T>, radius: T, density: T) -> Self {
        Ellipsoid {
            center,
            axes: [radius; 3],
            angle: T::zero(),
            density,
        }
    }

    /// Direction into the unit-ball frame (rotation then axis scaling).
    #[inline]
    fn to_unit(&self, v: Vec3<T>) -> Vec3<T> {
        let (s, c) = self.angle.sin_cos();
        [
            (c * v[0] + s * v[1]) / self.axes[0],
            (-s * v[0] + c * v[1]) / self.axes[1],
            v[2] / self.axes[2],
        ]
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        let y = self.to_unit([p[0] - self.center[0], p[1] - self.center[1], p[2] - self.center[2]]);
        dot(y, y) <= T::one()
    }

    /// Length of the chord cut from the line p + s·d (|d| = 1).
    pub fn chord(&self, p: Vec3<T>, d: Vec3<T>) -> T {
        let y0 = self.to_unit([p[0] - self.center[0], p[1] - self.center[1], p[2] - self.center[2]]);
        let e = self.to_unit(d);
        let a = dot(e, e);
        let b = dot(y0, e);
        let disc = b * b - a * (dot(y0, y0) - T::one());
        if disc <= T::zero() {
            T::zero()
        } else {
            T::lit(2.0) * disc.sqrt() / a
        }
    }

    /// (s, ρ') with the plane {x·n = ρ} mapped to {y·m̂ = ρ'} in the unit-ball
    /// frame, s = |D Rᵀ n|.
    fn plane_reduce(&self, rho: T, n: Vec3<T>) -> (T, T) {
        let (sn, cs) = self.angle.sin_cos();
        let m = [
            (cs * n[0] + sn * n[1]) * self.axes[0],
            (-sn * n[0] + cs * n[1]) * self.axes[1],
            n[2] * self.axes[2],
        ];
        let s = dot(m, m).sqrt();
        (s, (rho - dot(self.center, n)) / s)
    }

    fn abc(&self) -> T {
        self.axes[0] * self.axes[1] * self.axes[2]
    }

    /// Integral of the density over the plane {x·n = ρ}, |n| = 1.
    pub fn plane_integral(&self, rho: T, n: Vec3<T>) -> T {
        let (s, r) = self.plane_reduce(rho, n);
        if r.abs() >= T::one() {
            return T::zero();
        }
        self.density * self.abc() * T::PI() * (T::one() - r * r) / s
    }

    /// ρ-derivative of `plane_integral`.
    pub fn plane_integral_derivative(&self, rho: T, n: Vec3<T>) -> T {
        let (s, r) = self.plane_reduce(rho, n);
        if r.abs() >= T::one() {
            return T::zero();
        }
        -T::lit(2.0) * T::PI() * self.density * self.abc() * r / (s * s)
    }

    pub fn volume(&self) -> T {
        T::lit(4.0 / 3.0) * T::PI() * self.abc()
    }
}

/// Σ density × chord over the ellipsoids, for the ray origin + s·dir.
pub fn analytic_line_integral<T: Real>(origin: Vec3<T>, dir: Vec3<T>, ellipsoids: &[Ellipsoid<T>]) -> T {
    let l = dot(dir, dir).sqrt();
    let d = [dir[0] / l, dir[1] / l, dir[2] / l];
    ellipsoids.iter().map(|e| e.density * e.chord(origin, d)).sum()
}

/// d/dρ of the plane integral at the plane (ρ, θ, φ).
pub fn analytic_derivative_radon<T: Real>(p: PolarCoord<T>, ellipsoids: &[Ellipsoid<T>]) -> T {
    let n = p.normal();
    ellipsoids.iter().map(|e| e.plane_integral_derivative(p.rho, n)).sum()
}

/// Plane integral at (ρ, θ, φ).
pub fn analytic_radon<T: Real>(p: PolarCoord<T>, ellipsoids: &[Ellipsoid<T>]) -> T {
    let n = p.normal();
    ellipsoids.iter().map(|e| e.plane_integral(p.rho, n)).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Phantom<T> {
    pub ellipsoids: Vec<Ellipsoid<T>>,
}

// Modified 3D Shepp-Logan in units of the half extent, after Kak & Slaney and
// the usual phantom3d table: (x, y, z, a, b, c, angle°, density). The two side
// ellipsoids share their axes and the small bottom pair is placed at ±0.07 so
// that the object is exactly mirror symmetric about x = 0.
const SHEPP_LOGAN: [[f64; 8]; 10] = [
    [0.0, 0.0, 0.0, 0.69, 0.92, 0.81, 0.0, 1.0],
    [0.0, -0.0184, 0.0, 0.6624, 0.874, 0.78, 0.0, -0.8],
    [0.22, 0.0, 0.0, 0.11, 0.31, 0.22, -18.0, -0.2],
    [-0.22, 0.0, 0.0, 0.11, 0.31, 0.22, 18.0, -0.2],
    [0.0, 0.35, -0.15, 0.21, 0.25, 0.41, 0.0, 0.1],
    [0.0, 0.1, 0.25, 0.046, 0.046, 0.05, 0.0, 0.1],
    [0.0, -0.1, 0.25, 0.046, 0.046, 0.05, 0.0, 0.1],
    [-0.07, -0.605, 0.0, 0.046, 0.023, 0.05, 0.0, 0.1],
    [0.0, -0.606, 0.0, 0.023, 0.023, 0.02, 0.0, 0.1],
    [0.07, -0.605, 0.0, 0.046, 0.023, 0.05, 0.0, 0.1],
];

impl<T: Real> Phantom<T> {
    /// Shepp-Logan scaled so the normalised [-1, 1] cube spans `extent_mm`.
    pub fn shepp_logan(extent_mm: T) -> Self {
        let h = extent_mm / T::lit(2.0);
        let ellipsoids = SHEPP_LOGAN
            .iter()
            .map(|r| Ellipsoid {
                center: [T::lit(r[0]) * h, T::lit(r[1]) * h, T::lit(r[2]) * h],
                axes: [T::lit(r[3]) * h, T::lit(r[4]) * h, T::lit(r[5]) * h],
                angle: T::lit(r[6].to_radians()),
                density: T::lit(r[7]),
            })
            .collect();
        Phantom { ellipsoids }
    }

    pub fn ball(radius: T, density: T) -> Self {
        Phantom {
            ellipsoids: vec![Ellipsoid::ball([T::zero(); 3], radius, density)],
        }
    }

    pub fn value(&self, p: Vec3<T>) -> T {
        self.ellipsoids
            .iter()
            .filter(|e| e.contains(p))
            .map(|e| e.density)
            .sum()
    }

    /// Samples the phantom at voxel centres.
    pub fn voxelize(&self, n: usize, voxel_mm: T) -> Volume3D<T> {
        self.voxelize_supersampled(n, voxel_mm, 1)
    }

    /// Averages s³ sub-voxel samples per voxel.
    pub fn voxelize_supersampled(&self, n: usize, voxel_mm: T, s: usize) -> Volume3D<T> {
        let mut v = Volume3D::zeros(n, voxel_mm);
        let sub: Vec<T> = (0..s)
            .map(|q| (T::idx(q) + T::lit(0.5)) / T::idx(s) - T::lit(0.5))
            .collect();
        let w = T::one() / T::idx(s * s * s);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let c = [v.coord(i), v.coord(j), v.coord(k)];
                    let mut acc = T::zero();
                    for &dz in &sub {
                        for &dy in &sub {
                            for &dx in &sub {
                                acc += self.value([
                                    c[0] + dx * voxel_mm,
                                    c[1] + dy * voxel_mm,
                                    c[2] + dz * voxel_mm,
                                ]);
                            }
                        }
                    }
                    let idx = v.index(i, j, k);
                    v.data[idx] = acc * w;
                }
            }
        }
        v
    }

    pub fn line_integral(&self, origin: Vec3<T>, dir: Vec3<T>) -> T {
        analytic_line_integral(origin, dir, &self.ellipsoids)
    }

    pub fn derivative_radon(&self, p: PolarCoord<T>) -> T {
        analytic_derivative_radon(p, &self.ellipsoids)
    }

    /// Σ density × ellipsoid volume.
    pub fn mass(&self) -> T {
        self.ellipsoids.iter().map(|e| e.density * e.volume()).sum()
    }

    /// Rotates the whole object about z by `angle`.
    pub fn rotated_z(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Phantom {
            ellipsoids: self
                .ellipsoids
                .iter()
                .map(|e| Ellipsoid {
                    center: [
                        c * e.center[0] - s * e.center[1],
                        s * e.center[0] + c * e.center[1],
                        e.center[2],
                    ],
                    angle: e.angle + angle,
                    ..*e
                })
                .collect(),
        }
    }
}

/// Shepp-Logan volume with N³ voxels spanning `extent_mm`.
pub fn shepp_logan_3d<T: Real>(n: usize, extent_mm: T) -> Volume3D<T> {
    Phantom::shepp_logan(extent_mm).voxelize(n, extent_mm / T::idx(n))
}

/// Central axial slice of the Shepp-Logan phantom on an n² grid.
pub fn shepp_logan_slice<T: Real>(n: usize) -> Image2D<T> {
    let p = Phantom::shepp_logan(T::idx(n));
    let mut img = Image2D::zeros(n);
    let c = T::idx(n - 1) / T::lit(2.0);
    for j in 0..n {
        for i in 0..n {
            img.data[i + n * j] = p.value([T::idx(i) - c, T::idx(j) - c, T::zero()]);
        }
    }
    img
}

/// Uniform noise in [0, 1), fully determined by `seed`.
pub fn random_image<T: Real>(n: usize, seed: u64) -> Image2D<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image2D {
        n,
        data: (0..n * n).map(|_| T::lit(rng.random::<f64>())).collect(),
    }
}

/// Support of a labelled grid with enclosed holes filled, then eroded
/// `erosion` times with the axis-neighbour structuring element.
fn support_mask(dims: &[usize], nonzero: &[bool], erosion: usize) -> Vec<bool> {
    let total: usize = dims.iter().product();
    let strides: Vec<usize> = (0..dims.len())
        .map(|a| dims[..a].iter().product())
        .collect();
    let coords = |p: usize, a: usize| (p / strides[a]) % dims[a];
    let neighbours = |p: usize, out: &mut Vec<usize>| {
        out.clear();
        for a in 0..dims.len() {
            let c = coords(p, a);
            if c > 0 {
                out.push(p - strides[a]);
            }
            if c + 1 < dims[a] {
                out.push(p + strides[a]);
            }
        }
    };
    let on_border = |p: usize| (0..dims.len()).any(|a| coords(p, a) == 0 || coords(p, a) + 1 == dims[a]);

    // background = zeros reachable from the border
    let mut outside = vec![false; total];
    let mut stack: Vec<usize> = (0..total).filter(|&p| !nonzero[p] && on_border(p)).collect();
    for &p in &stack {
        outside[p] = true;
    }
    let mut nb = Vec::with_capacity(6);
    while let Some(p) = stack.pop() {
        neighbours(p, &mut nb);
        for &q in &nb {
            if !outside[q] && !nonzero[q] {
                outside[q] = true;
                stack.push(q);
            }
        }
    }
    let mut mask: Vec<bool> = outside.iter().map(|&o| !o).collect();
    for _ in 0..erosion {
        let prev = mask.clone();
        for p in 0..total {
            if prev[p] {
                neighbours(p, &mut nb);
                if on_border(p) || nb.iter().any(|&q| !prev[q]) {
                    mask[p] = false;
                }
            }
        }
    }
    mask
}

/// Filled support of a volume, eroded by `erosion` voxels.
pub fn interior_mask_volume<T: Real>(vol: &Volume3D<T>, erosion: usize) -> Vec<bool> {
    let nz: Vec<bool> = vol.data.iter().map(|v| *v != T::zero()).collect();
    support_mask(&[vol.n; 3], &nz, erosion)
}

/// Per-frame filled support of projection data, eroded by `erosion` pixels.
pub fn interior_mask_projections<T: Real>(p: &ProjectionSet<T>, erosion: usize) -> Vec<bool> {
    let m = p.frame_len();
    let mut out = Vec::with_capacity(p.data.len());
    for v in 0..p.n_views {
        let nz: Vec<bool> = p.data[v * m..(v + 1) * m].iter().map(|x| *x != T::zero()).collect();
        out.extend(support_mask(&[p.nu, p.nv], &nz, erosion));
    }
    out
}
