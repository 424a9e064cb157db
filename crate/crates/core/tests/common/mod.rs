//! Helpers shared by the integration tests: an independent loop-closure
//! oracle and random vertex generators.
#![allow(dead_code)]

use rand::Rng;
use std::f64::consts::{PI, TAU};

pub type M3 = [[f64; 3]; 3];

pub fn rot_z_plane(dir: f64, angle: f64) -> M3 {
    // Rodrigues rotation about the in-plane unit axis (cos dir, sin dir, 0).
    let (ux, uy) = (dir.cos(), dir.sin());
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [c + ux * ux * t, ux * uy * t, uy * s],
        [ux * uy * t, c + uy * uy * t, -ux * s],
        [-uy * s, ux * s, c],
    ]
}

pub fn mul(a: &M3, b: &M3) -> M3 {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}

/// Frobenius distance of the ordered rotation product around the vertex from
/// the identity. Crease k points along alpha[1] + ... + alpha[k].
pub fn closure(alpha: [f64; 4], rho: [f64; 4]) -> f64 {
    let dirs = [0.0, alpha[1], alpha[1] + alpha[2], alpha[1] + alpha[2] + alpha[3]];
    let mut m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for k in 0..4 {
        m = mul(&m, &rot_z_plane(dirs[k], rho[k]));
    }
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = m[i][j] - if i == j { 1.0 } else { 0.0 };
            s += d * d;
        }
    }
    s.sqrt()
}

fn split<R: Rng>(rng: &mut R) -> [f64; 4] {
    let mut c = [rng.gen::<f64>() * TAU, rng.gen::<f64>() * TAU, rng.gen::<f64>() * TAU];
    c.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [c[0], c[1] - c[0], c[2] - c[1], TAU - c[2]]
}

/// Vertex with all sectors in (margin, pi - margin) and no sum within `margin` of pi.
pub fn random_generic<R: Rng>(rng: &mut R, margin: f64) -> [f64; 4] {
    loop {
        let a = split(rng);
        if a.iter().all(|&x| x > margin && x < PI - margin)
            && (a[0] + a[1] - PI).abs() > margin
            && (a[1] + a[2] - PI).abs() > margin
            && (a[0] + a[2] - PI).abs() > margin
        {
            return a;
        }
    }
}

/// Flat-foldable vertex (a0 + a2 = pi) with no collinear creases. Opposite
/// sectors sum to `PI` exactly in floating point: the obtuse one is drawn
/// and the subtraction from `PI` is then exact.
pub fn random_flatfoldable<R: Rng>(rng: &mut R, margin: f64) -> [f64; 4] {
    let pair = |rng: &mut R| {
        let big = PI / 2.0 + rng.gen::<f64>() * (PI / 2.0 - margin);
        let small = PI - big;
        if rng.gen_bool(0.5) {
            (big, small)
        } else {
            (small, big)
        }
    };
    loop {
        let (a0, a2) = pair(rng);
        let (a1, a3) = pair(rng);
        if (a0 + a1 - PI).abs() > margin && (a0 - a1).abs() > margin && a2 > margin && a3 > margin {
            return [a0, a1, a2, a3];
        }
    }
}

/// Straight-line vertex with creases 0 and 2 collinear.
pub fn random_straightline<R: Rng>(rng: &mut R, margin: f64) -> [f64; 4] {
    loop {
        let a0 = margin + rng.gen::<f64>() * (PI - 2.0 * margin);
        let a1 = margin + rng.gen::<f64>() * (PI - 2.0 * margin);
        if (a0 + a1 - PI).abs() > margin && (a0 - a1).abs() > margin {
            return [a0, a1, PI - a1, PI - a0];
        }
    }
}

pub fn wrapped(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

pub fn max_wrapped_diff(a: [f64; 4], b: [f64; 4]) -> f64 {
    (0..4).map(|i| wrapped(a[i] - b[i]).abs()).fold(0.0, f64::max)
}
