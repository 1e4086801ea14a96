mod common;

use cbnufft::geometry::{PolarCoord, RadialGridSpec};
use cbnufft::phantom::Phantom;
use cbnufft::radon_fourier::{image_to_radial_spectrum, radial_ifft, spectral_rho_derivative, RadialRadon3D};
use cbnufft::volume::Volume3D;
use common::*;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Isotropic Gaussians (centre, width, weight) sampled at voxel centres.
fn gaussians(n: usize, h: f64, g: &[([f64; 3], f64, f64)]) -> Volume3D<f64> {
    let mut v = Volume3D::zeros(n, h);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let x = [v.coord(i), v.coord(j), v.coord(k)];
                let idx = v.index(i, j, k);
                v.data[idx] = g
                    .iter()
                    .map(|(c, s, w)| {
                        let r2: f64 = (0..3).map(|a| (x[a] - c[a]).powi(2)).sum();
                        w * (-r2 / (2.0 * s * s)).exp()
                    })
                    .sum();
            }
        }
    }
    v
}

/// d/dρ of the plane integral of the same Gaussians, in closed form.
fn gaussians_derivative_radon(p: PolarCoord<f64>, g: &[([f64; 3], f64, f64)]) -> f64 {
    let n = p.normal();
    g.iter()
        .map(|(c, s, w)| {
            let d = p.rho - (c[0] * n[0] + c[1] * n[1] + c[2] * n[2]);
            -w * 2.0 * PI * d * (-d * d / (2.0 * s * s)).exp()
        })
        .sum()
}

fn derivative_radon(vol: &Volume3D<f64>, spec: &RadialGridSpec<f64>) -> RadialRadon3D<f64> {
    let mut s = image_to_radial_spectrum(vol, spec).unwrap();
    s.zero_nyquist();
    radial_ifft(&spectral_rho_derivative(&s))
}

const BLOBS: [([f64; 3], f64, f64); 2] = [([3.0, -2.0, 1.5], 2.5, 1.0), ([-6.0, 4.0, -3.0], 2.0, 0.7)];

#[test]
fn fourier_slice_matches_closed_form() {
    let (n, h) = (32, 1.0);
    let vol = gaussians(n, h, &BLOBS);
    let spec = RadialGridSpec::new(64, 12, 24, n as f64 * h).unwrap();
    let got = derivative_radon(&vol, &spec);
    let want = RadialRadon3D::from_fn(spec, |p| gaussians_derivative_radon(p, &BLOBS));
    let e = rel_l2(&got.data, &want.data);
    assert!(e < 1e-2, "{e}");
}

#[test]
fn spectrum_is_linear_and_hermitian() {
    let (n, h) = (16, 2.0);
    let vol = gaussians(n, h, &BLOBS);
    let spec = RadialGridSpec::new(32, 6, 8, n as f64 * h).unwrap();
    let s = image_to_radial_spectrum(&vol, &spec).unwrap();
    let mut tripled = vol.clone();
    tripled.data.iter_mut().for_each(|v| *v *= 3.0);
    let s3 = image_to_radial_spectrum(&tripled, &spec).unwrap();
    let scale = s.data.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for (a, b) in s.data.iter().zip(&s3.data) {
        assert!((b - a * 3.0).norm() < 1e-12 * scale);
    }
    // bins m and Nρ - m sit at opposite frequencies on the same line
    for line in s.data.chunks_exact(spec.n_rho) {
        for m in 1..spec.n_rho {
            assert!((line[m] - line[spec.n_rho - m].conj()).norm() < 1e-6 * scale);
        }
    }
}

#[test]
fn even_object_gives_odd_profiles() {
    let (n, h) = (16, 2.0);
    let vol = gaussians(n, h, &[([0.0; 3], 4.0, 1.0)]);
    let spec = RadialGridSpec::new(32, 5, 6, n as f64 * h).unwrap();
    let r = derivative_radon(&vol, &spec);
    let scale = r.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for line in r.data.chunks_exact(spec.n_rho) {
        for k in 1..spec.n_rho {
            assert!((line[k] + line[spec.n_rho - k]).abs() < 1e-5 * scale);
        }
    }
}

/// -2πρ inside the ball, half of it on the surface where the profile jumps.
fn ball_profile(rho: f64, r: f64) -> f64 {
    match rho.abs().partial_cmp(&r) {
        Some(std::cmp::Ordering::Less) => -2.0 * PI * rho,
        Some(std::cmp::Ordering::Equal) => -PI * rho,
        _ => 0.0,
    }
}

#[test]
fn ball_profile_from_voxels() {
    let (n, h, r) = (64, 1.0, 20.0);
    let spec = RadialGridSpec::new(256, 3, 4, 128.0 * h).unwrap();
    let want = RadialRadon3D::from_fn(spec, |p| ball_profile(p.rho, r));
    let err = |ss: usize| {
        let vol = Phantom::ball(r, 1.0).voxelize_supersampled(n, h, ss);
        rel_l2(&derivative_radon(&vol, &spec).data, &want.data)
    };
    let (plain, fine) = (err(1), err(3));
    // the voxelised sphere is not band-limited and the profile jumps by 2πr,
    // so the band-limited profile keeps a few percent of ringing
    assert!(fine < 5e-2, "{fine}");
    assert!(fine < plain);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn derivative_profiles_scale_with_density(a in 0.1f64..5.0) {
        let (n, h) = (12, 3.0);
        let spec = RadialGridSpec::new(24, 3, 4, n as f64 * h).unwrap();
        let base = derivative_radon(&gaussians(n, h, &BLOBS), &spec);
        let g: Vec<_> = BLOBS.iter().map(|&(c, s, w)| (c, s, a * w)).collect();
        let scaled = derivative_radon(&gaussians(n, h, &g), &spec);
        let m = base.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in base.data.iter().zip(&scaled.data) {
            prop_assert!((y - a * x).abs() < 1e-9 * a * m);
        }
    }
}
