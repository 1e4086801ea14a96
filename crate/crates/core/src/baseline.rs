//! Reference operators: trilinear ray-driven cone-beam projector and FDK.

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::geometry::{axpy, dot, ConeGeometry, Vec3};
use crate::scalar::{Complex, Real};
use crate::volume::{ProjectionSet, Volume3D};
use rayon::prelude::*;

/// Eight lattice neighbours of a point with trilinear weights. Neighbours
/// outside the volume carry `None` and read as zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySample<T> {
    pub index: [Option<usize>; 8],
    pub weight: [T; 8],
}

impl<T: Real> RaySample<T> {
    /// Neighbours of the world point `p` in `vol`.
    pub fn at(vol: &Volume3D<T>, p: Vec3<T>) -> Self {
        let n = vol.n;
        let half = T::idx(n - 1) / T::lit(2.0);
        let g = [
            p[0] / vol.voxel_mm + half,
            p[1] / vol.voxel_mm + half,
            p[2] / vol.voxel_mm + half,
        ];
        let f0 = [g[0].floor(), g[1].floor(), g[2].floor()];
        let fr = [g[0] - f0[0], g[1] - f0[1], g[2] - f0[2]];
        let i0 = [
            f0[0].to_i64().unwrap_or(-2),
            f0[1].to_i64().unwrap_or(-2),
            f0[2].to_i64().unwrap_or(-2),
        ];
        let mut index = [None; 8];
        let mut weight = [T::zero(); 8];
        for c in 0..8 {
            let o = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
            let mut w = T::one();
            let mut inside = true;
            let mut lin = 0usize;
            let mut stride = 1usize;
            for a in 0..3 {
                w *= if o[a] == 1 { fr[a] } else { T::one() - fr[a] };
                let i = i0[a] + o[a] as i64;
                if i < 0 || i >= n as i64 {
                    inside = false;
                } else {
                    lin += i as usize * stride;
                }
                stride *= n;
            }
            weight[c] = w;
            index[c] = if inside { Some(lin) } else { None };
        }
        RaySample { index, weight }
    }

    pub fn value(&self, data: &[T]) -> T {
        let mut acc = T::zero();
        for c in 0..8 {
            if let Some(i) = self.index[c] {
                acc += self.weight[c] * data[i];
            }
        }
        acc
    }
}

pub(crate) fn check_volume_geometry<T: Real>(vol: &Volume3D<T>, geom: &ConeGeometry<T>) -> Result<()> {
    geom.validate()?;
    let ext = vol.extent_mm();
    if (ext - geom.object_extent_mm).abs() > T::lit(1e-6) * geom.object_extent_mm {
        return Err(Error::invalid(
            "object_extent_mm",
            format!("volume spans {ext} mm but geometry expects {}", geom.object_extent_mm),
        ));
    }
    Ok(())
}

/// Trilinear sample of `data` with no bookkeeping, zero outside.
#[inline]
fn trilinear<T: Real>(data: &[T], n: usize, g: Vec3<T>) -> T {
    let f = [g[0].floor(), g[1].floor(), g[2].floor()];
    let (x0, y0, z0) = (
        f[0].to_isize().unwrap_or(-2),
        f[1].to_isize().unwrap_or(-2),
        f[2].to_isize().unwrap_or(-2),
    );
    let ni = n as isize;
    if x0 < -1 || y0 < -1 || z0 < -1 || x0 >= ni || y0 >= ni || z0 >= ni {
        return T::zero();
    }
    let (fx, fy, fz) = (g[0] - f[0], g[1] - f[1], g[2] - f[2]);
    let at = |x: isize, y: isize, z: isize| {
        if x < 0 || y < 0 || z < 0 || x >= ni || y >= ni || z >= ni {
            T::zero()
        } else {
            data[(x + ni * (y + ni * z)) as usize]
        }
    };
    let c00 = at(x0, y0, z0) * (T::one() - fx) + at(x0 + 1, y0, z0) * fx;
    let c10 = at(x0, y0 + 1, z0) * (T::one() - fx) + at(x0 + 1, y0 + 1, z0) * fx;
    let c01 = at(x0, y0, z0 + 1) * (T::one() - fx) + at(x0 + 1, y0, z0 + 1) * fx;
    let c11 = at(x0, y0 + 1, z0 + 1) * (T::one() - fx) + at(x0 + 1, y0 + 1, z0 + 1) * fx;
    let c0 = c00 * (T::one() - fy) + c10 * fy;
    let c1 = c01 * (T::one() - fy) + c11 * fy;
    c0 * (T::one() - fz) + c1 * fz
}

/// Ray-driven projector: every ray is sampled where it crosses N planes
/// perpendicular to the central ray (spacing one voxel), by trilinear
/// interpolation, and summed with the physical step length.
pub fn ct_project_linear<T: Real>(vol: &Volume3D<T>, geom: &ConeGeometry<T>) -> Result<ProjectionSet<T>> {
    Ok(ct_project_linear_counted(vol, geom)?.0)
}

/// As `ct_project_linear`, also returning the number of interpolation
/// multiplications (8 per sample).
pub fn ct_project_linear_counted<T: Real>(
    vol: &Volume3D<T>,
    geom: &ConeGeometry<T>,
) -> Result<(ProjectionSet<T>, u64)> {
    check_volume_geometry(vol, geom)?;
    vol.check_finite("volume")?;
    let n = vol.n;
    let h = vol.voxel_mm;
    let half = T::idx(n - 1) / T::lit(2.0);
    let frame = geom.nu * geom.nv;
    let mut out = ProjectionSet::zeros(geom.nu, geom.nv, geom.n_views, geom.pitch_u(), geom.pitch_v());
    out.data
        .par_chunks_mut(frame)
        .enumerate()
        .for_each(|(view, f)| {
            let s = geom.source(view);
            let sd = geom.source_dir(view);
            let central = [-sd[0], -sd[1], -sd[2]];
            for j in 0..geom.nv {
                for i in 0..geom.nu {
                    let p = geom.pixel_position(view, i, j);
                    let d = [p[0] - s[0], p[1] - s[1], p[2] - s[2]];
                    let l = dot(d, d).sqrt();
                    let d = [d[0] / l, d[1] / l, d[2] / l];
                    let dc = dot(d, central);
                    let step = h / dc;
                    let mut acc = T::zero();
                    for k in 0..n {
                        let q = (T::idx(k) - half) * h;
                        let x = axpy((q + geom.so_mm) / dc, d, s);
                        acc += trilinear(&vol.data, n, [x[0] / h + half, x[1] / h + half, x[2] / h + half]);
                    }
                    f[i + geom.nu * j] = acc * step;
                }
            }
        });
    let count = 8 * (n as u64) * (geom.nu * geom.nv * geom.n_views) as u64;
    Ok((out, count))
}

/// Discrete ramp |ω| on an FFT grid of length m with sample spacing dx.
/// The DC bin gets a quarter of the first nonzero bin's weight.
pub fn ramp_weights<T: Real>(m: usize, dx: T) -> Vec<T> {
    let dw = T::TAU() / (T::idx(m) * dx);
    (0..m)
        .map(|k| {
            let kk = if k <= m / 2 { k } else { m - k };
            if kk == 0 {
                dw / T::lit(4.0)
            } else {
                dw * T::idx(kk)
            }
        })
        .collect()
}

/// Feldkamp-Davis-Kress reconstruction for a full circular scan.
pub fn fdk_reconstruct<T: Real>(
    projs: &ProjectionSet<T>,
    geom: &ConeGeometry<T>,
    n: usize,
) -> Result<Volume3D<T>> {
    geom.validate()?;
    if projs.nu != geom.nu || projs.nv != geom.nv || projs.n_views != geom.n_views {
        return Err(Error::dims(
            "projections",
            format!("{}x{}x{}", geom.nu, geom.nv, geom.n_views),
            format!("{}x{}x{}", projs.nu, projs.nv, projs.n_views),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    if let Some(v) = projs.first_non_finite_view() {
        return Err(Error::NonFinite(format!("projection view {v}")));
    }
    let (nu, nv) = (geom.nu, geom.nv);
    let so = geom.so_mm;
    let mag = geom.virtual_scale();
    let dpu = geom.pitch_u() * mag;
    let dpv = geom.pitch_v() * mag;
    let m = (2 * nu).next_power_of_two();
    let ramp = ramp_weights(m, dpu);
    let fft = FftNd::<T>::new(&[m]);

    // cosine weighting and row filtering on the virtual detector
    let filtered: Vec<Vec<T>> = (0..geom.n_views)
        .into_par_iter()
        .map(|view| {
            let src = projs.frame_data(view);
            let mut out = vec![T::zero(); nu * nv];
            let mut row = vec![Complex::new(T::zero(), T::zero()); m];
            for j in 0..nv {
                let zeta = geom.v_coord(j) * mag;
                for x in row.iter_mut() {
                    *x = Complex::new(T::zero(), T::zero());
                }
                for i in 0..nu {
                    let p = geom.u_coord(i) * mag;
                    let w = so / (so * so + p * p + zeta * zeta).sqrt();
                    row[i] = Complex::new(src[i + nu * j] * w, T::zero());
                }
                fft.forward(&mut row);
                for (x, r) in row.iter_mut().zip(&ramp) {
                    *x = *x * *r;
                }
                fft.inverse(&mut row);
                for i in 0..nu {
                    out[i + nu * j] = row[i].re / T::idx(m);
                }
            }
            out
        })
        .collect();

    let voxel = geom.object_extent_mm / T::idx(n);
    let mut vol = Volume3D::zeros(n, voxel);
    // ½ for the full turn, 2π/views per view, 1/2π from the inverse transform
    let scale = T::one() / T::idx(2 * geom.n_views);
    let trig: Vec<(Vec3<T>, Vec3<T>)> = (0..geom.n_views)
        .map(|v| (geom.source_dir(v), geom.detector_axes(v).0))
        .collect();
    let cu = T::idx(nu - 1) / T::lit(2.0);
    let cv = T::idx(nv - 1) / T::lit(2.0);
    let coords: Vec<T> = (0..n).map(|i| vol.coord(i)).collect();
    vol.data.par_chunks_mut(n * n).enumerate().for_each(|(k, slab)| {
        let z = coords[k];
        for j in 0..n {
            for i in 0..n {
                let x = [coords[i], coords[j], z];
                let mut acc = T::zero();
                for (view, (sd, eu)) in trig.iter().enumerate() {
                    let l = so - dot(x, *sd);
                    let r = so / l;
                    let fu = dot(x, *eu) * r / dpu + cu;
                    let fv = z * r / dpv + cv;
                    acc += r * r * bilinear(&filtered[view], nu, nv, fu, fv);
                }
                slab[i + n * j] = acc * scale;
            }
        }
    });
    Ok(vol)
}

#[inline]
fn bilinear<T: Real>(data: &[T], nu: usize, nv: usize, fu: T, fv: T) -> T {
    let (u0, v0) = (fu.floor(), fv.floor());
    let (iu, iv) = (u0.to_isize().unwrap_or(-2), v0.to_isize().unwrap_or(-2));
    let (a, b) = (fu - u0, fv - v0);
    let at = |i: isize, j: isize| {
        if i < 0 || j < 0 || i >= nu as isize || j >= nv as isize {
            T::zero()
        } else {
            data[i as usize + nu * j as usize]
        }
    };
    (at(iu, iv) * (T::one() - a) + at(iu + 1, iv) * a) * (T::one() - b)
        + (at(iu, iv + 1) * (T::one() - a) + at(iu + 1, iv + 1) * a) * b
}
