//! Cone-beam CT operators built on the non-uniform FFT.
//!
//! The forward projector maps a volume to cone-beam detector data through the
//! 3D Fourier slice theorem, radial-to-umbrella resampling of the derivative
//! Radon space and a per-view reverse Grangeat step. The backprojector runs the
//! same chain transposed. Baselines (trilinear ray projector, FDK), analytic
//! ellipsoid oracles and a multiplication-count model come along for validation.

pub mod analysis;
pub mod baseline;
pub mod error;
pub mod fft;
pub mod geometry;
pub mod grangeat;
pub mod io;
pub mod nufft;
pub mod phantom;
pub mod pipeline;
pub mod radon_fourier;
pub mod resampling;
pub mod scalar;
pub mod volume;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

/// Double-precision aliases.
pub type Volume = volume::Volume3D<f64>;
pub type Image = volume::Image2D<f64>;
pub type Projections = volume::ProjectionSet<f64>;
pub type Frame = volume::DetectorFrame<f64>;
pub type Geometry = geometry::ConeGeometry<f64>;
pub type GridSpec = geometry::RadialGridSpec<f64>;
pub type Plan = nufft::NufftPlan<f64>;
pub type Projector = pipeline::NufftProjector<f64>;

/// Single-precision aliases.
pub type VolumeF32 = volume::Volume3D<f32>;
pub type ProjectionsF32 = volume::ProjectionSet<f32>;
pub type GeometryF32 = geometry::ConeGeometry<f32>;
pub type ProjectorF32 = pipeline::NufftProjector<f32>;
