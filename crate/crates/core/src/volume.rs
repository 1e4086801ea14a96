//! Sampled images: volumes, 2D slices and detector data.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cubic volume, x fastest. Voxel centres sit at (i - (N-1)/2)·voxel_mm.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume3D<T> {
    pub n: usize,
    pub voxel_mm: T,
    pub data: Vec<T>,
}

impl<T: Real> Volume3D<T> {
    pub fn zeros(n: usize, voxel_mm: T) -> Self {
        Volume3D {
            n,
            voxel_mm,
            data: vec![T::zero(); n * n * n],
        }
    }

    pub fn from_data(n: usize, voxel_mm: T, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n * n {
            return Err(Error::dims("volume data", n * n * n, data.len()));
        }
        if !(voxel_mm.is_finite() && voxel_mm > T::zero()) {
            return Err(Error::invalid("voxel_mm", "must be positive"));
        }
        Ok(Volume3D { n, voxel_mm, data })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[self.index(i, j, k)]
    }

    /// World coordinate of voxel index `i` along any axis.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        (T::idx(i) - T::idx(self.n - 1) / T::lit(2.0)) * self.voxel_mm
    }

    pub fn extent_mm(&self) -> T {
        T::idx(self.n) * self.voxel_mm
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what.to_string()))
        }
    }

    /// Axial slice k as a 2D image.
    pub fn slice_z(&self, k: usize) -> Image2D<T> {
        let n = self.n;
        Image2D {
            n,
            data: self.data[k * n * n..(k + 1) * n * n].to_vec(),
        }
    }

    pub fn cast<U: Real>(&self) -> Volume3D<U> {
        Volume3D {
            n: self.n,
            voxel_mm: U::lit(self.voxel_mm.as_f64()),
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// Square 2D image, x fastest, unit pixel pitch.
#[derive(Clone, Debug, PartialEq)]
pub struct Image2D<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> Image2D<T> {
    pub fn zeros(n: usize) -> Self {
        Image2D {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_data(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::dims("image data", n * n, data.len()));
        }
        Ok(Image2D { n, data })
    }

    /// Pixels whose centre lies inside the inscribed disk.
    pub fn inscribed_disk(n: usize) -> Vec<bool> {
        let c = (n as f64 - 1.0) / 2.0;
        let r2 = (n as f64 / 2.0).powi(2);
        (0..n * n)
            .map(|p| {
                let (x, y) = ((p % n) as f64 - c, (p / n) as f64 - c);
                x * x + y * y <= r2
            })
            .collect()
    }
}

/// One detector readout, u fastest. Values are line integrals (density·mm).
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorFrame<T> {
    pub view_index: usize,
    pub nu: usize,
    pub nv: usize,
    pub pitch_u_mm: T,
    pub pitch_v_mm: T,
    pub data: Vec<T>,
}

impl<T: Real> DetectorFrame<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i + self.nu * j]
    }
}

/// All views of a scan, u fastest, then v, then view.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionSet<T> {
    pub nu: usize,
    pub nv: usize,
    pub n_views: usize,
    pub pitch_u_mm: T,
    pub pitch_v_mm: T,
    pub data: Vec<T>,
}

impl<T: Real> ProjectionSet<T> {
    pub fn zeros(nu: usize, nv: usize, n_views: usize, pitch_u_mm: T, pitch_v_mm: T) -> Self {
        ProjectionSet {
            nu,
            nv,
            n_views,
            pitch_u_mm,
            pitch_v_mm,
            data: vec![T::zero(); nu * nv * n_views],
        }
    }

    pub fn frame_len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn frame_data(&self, view: usize) -> &[T] {
        let m = self.frame_len();
        &self.data[view * m..(view + 1) * m]
    }

    pub fn frame(&self, view: usize) -> DetectorFrame<T> {
        DetectorFrame {
            view_index: view,
            nu: self.nu,
            nv: self.nv,
            pitch_u_mm: self.pitch_u_mm,
            pitch_v_mm: self.pitch_v_mm,
            data: self.frame_data(view).to_vec(),
        }
    }

    pub fn from_frames(frames: Vec<DetectorFrame<T>>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::invalid("frames", "need at least one view"))?;
        let (nu, nv, pu, pv) = (first.nu, first.nv, first.pitch_u_mm, first.pitch_v_mm);
        let mut data = Vec::with_capacity(nu * nv * frames.len());
        for f in &frames {
            if f.nu != nu || f.nv != nv || f.data.len() != nu * nv {
                return Err(Error::dims("frame", format!("{nu}x{nv}"), format!("{}x{}", f.nu, f.nv)));
            }
            data.extend_from_slice(&f.data);
        }
        Ok(ProjectionSet {
            nu,
            nv,
            n_views: frames.len(),
            pitch_u_mm: pu,
            pitch_v_mm: pv,
            data,
        })
    }

    /// Index of the first view containing a NaN or infinity.
    pub fn first_non_finite_view(&self) -> Option<usize> {
        let m = self.frame_len();
        (0..self.n_views).find(|&v| self.data[v * m..(v + 1) * m].iter().any(|x| !x.is_finite()))
    }
}
