mod common;

use cbnufft::nufft::{periodic_sinc, plan_nufft, sinc_resample, NufftOptions};
use common::*;
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_c(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    (0..n).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn nodes(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<f64> {
    (0..m * d).map(|_| rng.random_range(-PI..PI)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn adjoint_dot_test(seed in any::<u64>(), d in 1usize..=3, n in 2usize..10, m in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = vec![2 * n; d];
        let len: usize = dims.iter().product();
        let w = nodes(&mut rng, m, d);
        let plan = plan_nufft(&dims, &w, &NufftOptions::new(d).shift(NufftOptions::centered_shift(&dims))).unwrap();
        let x = random_c(&mut rng, len);
        let y = random_c(&mut rng, m);
        let l = cdot(&plan.forward(&x).unwrap(), &y);
        let r = cdot(&x, &plan.adjoint(&y).unwrap());
        prop_assert!((l - r).norm() <= 1e-12 * l.norm().max(r.norm()).max(1e-300));
    }

    #[test]
    fn forward_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [6usize, 10];
        let w = nodes(&mut rng, 20, 2);
        let plan = plan_nufft(&dims, &w, &NufftOptions::new(2)).unwrap();
        let (x, y) = (random_c(&mut rng, 60), random_c(&mut rng, 60));
        let z: Vec<C> = x.iter().zip(&y).map(|(p, q)| p * a + q * b).collect();
        let (fx, fy, fz) = (plan.forward(&x).unwrap(), plan.forward(&y).unwrap(), plan.forward(&z).unwrap());
        for i in 0..20 {
            prop_assert!((fz[i] - (fx[i] * a + fy[i] * b)).norm() < 1e-12 * (1.0 + fz[i].norm()));
        }
    }
}

#[test]
fn error_falls_with_kernel_width() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dims = [32usize];
    let w = nodes(&mut rng, 200, 1);
    let x = random_c(&mut rng, 32);
    let want = nudft(&x, &dims, &w, &[0.0]);
    let errs: Vec<f64> = (2..=6)
        .map(|j| {
            let plan = plan_nufft(&dims, &w, &NufftOptions::with_width(1, j)).unwrap();
            rel_max(&plan.forward(&x).unwrap(), &want)
        })
        .collect();
    for p in errs.windows(2) {
        assert!(p[1] < p[0], "{errs:?}");
    }
    assert!(errs[4] < 1e-5);
}

#[test]
fn small_3d_matches_nudft() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dims = [8usize, 8, 8];
    let w = nodes(&mut rng, 200, 3);
    let shift = NufftOptions::centered_shift(&dims);
    let plan = plan_nufft(&dims, &w, &NufftOptions::new(3).shift(shift.clone())).unwrap();
    let x = random_c(&mut rng, 512);
    let got = plan.forward(&x).unwrap();
    let want = nudft(&x, &dims, &w, &shift);
    let e: f64 = got.iter().zip(&want).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let r: f64 = want.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    assert!(e / r < 1e-5, "{}", e / r);
}

#[test]
fn sixteen_node_adjoint_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dims = [16usize];
    let w = nodes(&mut rng, 16, 1);
    let plan = plan_nufft(&dims, &w, &NufftOptions::new(1)).unwrap();
    let y = random_c(&mut rng, 16);
    // Σ_m y_m exp(+iω_m (n - N/2)) written out directly
    let want: Vec<C> = (0..16)
        .map(|n| w.iter().zip(&y).map(|(&om, &v)| v * C::from_polar(1.0, om * (n as f64 - 8.0))).sum())
        .collect();
    assert!(rel_max(&plan.adjoint(&y).unwrap(), &want) < 1e-5);
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let dims = [12usize, 12];
    let w = nodes(&mut rng, 50, 2);
    let w32: Vec<f32> = w.iter().map(|&v| v as f32).collect();
    let x = random_c(&mut rng, 144);
    let x32: Vec<Complex<f32>> = x.iter().map(|v| Complex::new(v.re as f32, v.im as f32)).collect();
    let a = plan_nufft(&dims, &w, &NufftOptions::new(2)).unwrap().forward(&x).unwrap();
    let b = plan_nufft(&dims, &w32, &NufftOptions::new(2)).unwrap().forward(&x32).unwrap();
    let b: Vec<C> = b.iter().map(|v| C::new(v.re as f64, v.im as f64)).collect();
    assert!(rel_max(&b, &a) < 1e-4);
}

#[test]
fn truncated_sinc_approaches_full_resampler() {
    let k = 48usize;
    // smooth periodic samples, so the sinc tails carry little weight
    let y: Vec<C> = (0..k)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / k as f64;
            C::new(t.cos() + 0.3 * (2.0 * t).sin(), 0.2 * (3.0 * t).cos())
        })
        .collect();
    let pos: Vec<f64> = (0..30).map(|i| 0.37 + 1.53 * i as f64).collect();
    let full = sinc_resample(&y, &pos);
    let truncated = |half: i64| -> Vec<C> {
        pos.iter()
            .map(|&p| {
                let c = p.floor() as i64;
                (c - half + 1..=c + half)
                    .map(|i| y[i.rem_euclid(k as i64) as usize] * periodic_sinc(p - i as f64, k))
                    .sum()
            })
            .collect()
    };
    let errs: Vec<f64> = [1, 2, 4, 8, 24].iter().map(|&h| rel_max(&truncated(h), &full)).collect();
    assert!(errs[0] > errs[2] && errs[2] > errs[3], "{errs:?}");
    assert!(errs[4] < 1e-12, "{errs:?}");
}
