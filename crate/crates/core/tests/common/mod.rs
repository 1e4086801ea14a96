//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the closed forms it is compared against.

#![allow(dead_code)]

use cbnufft::phantom::Ellipsoid;
use cbnufft::Complex;

pub type C = Complex<f64>;

/// Σ_n x(n) exp(-i ω·(n - N/2 + shift)) over a 1 to 3 dimensional grid,
/// first axis fastest, `dims.len()` coordinates per node.
pub fn nudft(x: &[C], dims: &[usize], nodes: &[f64], shift: &[f64]) -> Vec<C> {
    let d = dims.len();
    nodes
        .chunks_exact(d)
        .map(|w| {
            let mut acc = C::new(0.0, 0.0);
            for (flat, &v) in x.iter().enumerate() {
                let mut rem = flat;
                let mut ph = 0.0;
                for a in 0..d {
                    let i = rem % dims[a];
                    rem /= dims[a];
                    ph += w[a] * (i as f64 - (dims[a] / 2) as f64 + shift[a]);
                }
                acc += v * C::new(ph.cos(), -ph.sin());
            }
            acc
        })
        .collect()
}

/// Conjugate transpose of `nudft`.
pub fn nudft_adjoint(y: &[C], dims: &[usize], nodes: &[f64], shift: &[f64]) -> Vec<C> {
    let d = dims.len();
    let len: usize = dims.iter().product();
    (0..len)
        .map(|flat| {
            let mut acc = C::new(0.0, 0.0);
            for (w, &v) in nodes.chunks_exact(d).zip(y) {
                let mut rem = flat;
                let mut ph = 0.0;
                for a in 0..d {
                    let i = rem % dims[a];
                    rem /= dims[a];
                    ph += w[a] * (i as f64 - (dims[a] / 2) as f64 + shift[a]);
                }
                acc += v * C::new(ph.cos(), ph.sin());
            }
            acc
        })
        .collect()
}

/// max |a - b| / max |b|
pub fn rel_max(a: &[C], b: &[C]) -> f64 {
    let e = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    e / b.iter().map(|y| y.norm()).fold(0.0, f64::max)
}

/// ‖a - b‖₂ / ‖b‖₂
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let e: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let r: f64 = b.iter().map(|y| y * y).sum();
    (e / r).sqrt()
}

pub fn cdot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn add(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

/// Quadratic form of the ellipsoid, below 1 inside.
fn quad(e: &Ellipsoid<f64>, x: [f64; 3]) -> f64 {
    let v = [x[0] - e.center[0], x[1] - e.center[1], x[2] - e.center[2]];
    let (s, c) = e.angle.sin_cos();
    let p = (c * v[0] + s * v[1]) / e.axes[0];
    let q = (-s * v[0] + c * v[1]) / e.axes[1];
    let r = v[2] / e.axes[2];
    p * p + q * q + r * r
}

/// Golden-section minimum of a unimodal function on [lo, hi].
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo < 1e-13 * (1.0 + hi.abs().max(lo.abs())) {
            break;
        }
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Boundary between `inside` (true at a) and outside (false at b).
fn bisect(inside: impl Fn(f64) -> bool, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if inside(m) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

const REACH: f64 = 5000.0;

/// Length of {s : p + s·d inside e} for unit d, found by minimising the
/// quadratic form and bisecting on point membership.
pub fn numeric_chord(e: &Ellipsoid<f64>, p: [f64; 3], d: [f64; 3]) -> f64 {
    let (s0, q0) = golden(|s| quad(e, add(p, d, s)), -REACH, REACH);
    if q0 >= 1.0 {
        return 0.0;
    }
    let inside = |s: f64| e.contains(add(p, d, s));
    let hi = bisect(inside, s0, REACH);
    let lo = bisect(inside, s0, -REACH);
    hi - lo
}

/// Σ density × numeric chord for the ray origin + s·dir.
pub fn numeric_line_integral(ellipsoids: &[Ellipsoid<f64>], origin: [f64; 3], dir: [f64; 3]) -> f64 {
    let l = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let d = [dir[0] / l, dir[1] / l, dir[2] / l];
    ellipsoids.iter().map(|e| e.density * numeric_chord(e, origin, d)).sum()
}

/// Orthonormal pair spanning the plane with unit normal n.
pub fn plane_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let h = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let k = h[0] * n[0] + h[1] * n[1] + h[2] * n[2];
    let a = [h[0] - k * n[0], h[1] - k * n[1], h[2] - k * n[2]];
    let la = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let a = [a[0] / la, a[1] / la, a[2] / la];
    let b = [n[1] * a[2] - n[2] * a[1], n[2] * a[0] - n[0] * a[2], n[0] * a[1] - n[1] * a[0]];
    (a, b)
}

/// Smallest quadratic-form value over the plane {x·n = ρ}; the plane cuts
/// the ellipsoid iff this is below 1.
pub fn plane_min_quad(e: &Ellipsoid<f64>, rho: f64, n: [f64; 3]) -> f64 {
    let (a, b) = plane_basis(n);
    let o = [rho * n[0], rho * n[1], rho * n[2]];
    let inner = |s: f64| golden(|t| quad(e, add(add(o, a, s), b, t)), -REACH, REACH).1;
    golden(inner, -REACH, REACH).1
}

/// Integral of one ellipsoid's density over {x·n = ρ}: chords along b
/// integrated across a with the substitution s = m + w cos u, which turns the
/// elliptic cross-section profile into a smooth integrand.
pub fn numeric_plane_integral(e: &Ellipsoid<f64>, rho: f64, n: [f64; 3], nodes: usize) -> f64 {
    let (a, b) = plane_basis(n);
    let o = [rho * n[0], rho * n[1], rho * n[2]];
    let h = |s: f64| golden(|t| quad(e, add(add(o, a, s), b, t)), -REACH, REACH).1;
    let (s_star, q) = golden(h, -REACH, REACH);
    if q >= 1.0 {
        return 0.0;
    }
    let cuts = |s: f64| h(s) < 1.0;
    let s1 = bisect(cuts, s_star, REACH);
    let s0 = bisect(cuts, s_star, -REACH);
    let (m, w) = (0.5 * (s0 + s1), 0.5 * (s1 - s0));
    let du = std::f64::consts::PI / nodes as f64;
    let sum: f64 = (0..nodes)
        .map(|k| {
            let u = (k as f64 + 0.5) * du;
            numeric_chord(e, add(o, a, m + w * u.cos()), b) * w * u.sin()
        })
        .sum();
    e.density * sum * du
}
