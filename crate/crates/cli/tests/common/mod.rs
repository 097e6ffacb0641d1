//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's geometry; norms are re-evaluated from their definition.
#![allow(dead_code)]

use proxpair::{BodyPair, ConvexBody, Exponent, NormSpec};
use proxpair_cli::spec::ProblemSpec;

pub type Point = Vec<f64>;

pub fn norm_oracle(norm: &NormSpec, v: &[f64]) -> f64 {
    let w = |i: usize| norm.weights().map_or(1.0, |w| w[i]);
    match norm.p() {
        Exponent::Infinity => v
            .iter()
            .enumerate()
            .map(|(i, x)| (w(i) * x).abs())
            .fold(0.0, f64::max),
        Exponent::Finite(p) => v
            .iter()
            .enumerate()
            .map(|(i, x)| (w(i) * x).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p),
    }
}

pub fn dist_oracle(norm: &NormSpec, a: &[f64], b: &[f64]) -> f64 {
    let diff: Point = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm_oracle(norm, &diff)
}

pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Point {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

/// Points at parameter step `step` on every segment between two vertices.
pub fn edge_grid(verts: &[Point], step: f64) -> Vec<Point> {
    let n = (1.0 / step).round() as usize;
    if verts.len() == 1 {
        return verts.to_vec();
    }
    let mut out = Vec::new();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            for k in 0..=n {
                out.push(lerp(&verts[i], &verts[j], k as f64 / n as f64));
            }
        }
    }
    out
}

pub fn vertices(body: &ConvexBody) -> Vec<Point> {
    body.vertices().expect("polytope fixture")
}

/// `(min, max)` of the distance over all grid pairs.
pub fn grid_extremes(norm: &NormSpec, pa: &[Point], pb: &[Point]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for x in pa {
        for y in pb {
            let v = dist_oracle(norm, x, y);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

fn bary(t: &[Point; 3], s: f64, u: f64) -> Point {
    (0..t[0].len())
        .map(|k| (1.0 - s - u) * t[0][k] + s * t[1][k] + u * t[2][k])
        .collect()
}

/// Barycentric grid of step `h` restricted to the window of half-width `w`
/// around `(s0, u0)`.
fn tri_window(t: &[Point; 3], s0: f64, u0: f64, w: f64, h: f64) -> Vec<(f64, f64, Point)> {
    let n = (2.0 * w / h).round() as i64;
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let s = s0 - w + i as f64 * h;
            let u = u0 - w + j as f64 * h;
            if s >= -1e-12 && u >= -1e-12 && s + u <= 1.0 + 1e-12 {
                let (s, u) = (s.max(0.0), u.max(0.0));
                out.push((s, u, bary(t, s, u)));
            }
        }
    }
    out
}

/// Distance between two triangles: a step-1e-2 barycentric grid on each,
/// then step-1e-3 grids zoomed around the best pair, repeated until the
/// best pair stops moving.
pub fn triangle_distance_oracle(norm: &NormSpec, t1: &[Point; 3], t2: &[Point; 3]) -> f64 {
    let best_of = |g1: &[(f64, f64, Point)], g2: &[(f64, f64, Point)]| {
        let mut best = (f64::INFINITY, (0.0, 0.0), (0.0, 0.0));
        for a in g1 {
            for b in g2 {
                let v = dist_oracle(norm, &a.2, &b.2);
                if v < best.0 {
                    best = (v, (a.0, a.1), (b.0, b.1));
                }
            }
        }
        best
    };
    let coarse1 = tri_window(t1, 0.5, 0.5, 0.5, 1e-2);
    let coarse2 = tri_window(t2, 0.5, 0.5, 0.5, 1e-2);
    let mut best = best_of(&coarse1, &coarse2);
    for _ in 0..20 {
        let g1 = tri_window(t1, best.1 .0, best.1 .1, 0.02, 1e-3);
        let g2 = tri_window(t2, best.2 .0, best.2 .1, 0.02, 1e-3);
        let next = best_of(&g1, &g2);
        let moved = next.0 < best.0 - 1e-15;
        best = next;
        if !moved {
            break;
        }
    }
    best.0
}

pub fn pair_of(spec: &ProblemSpec, i: usize) -> BodyPair {
    let (a, b) = &spec.pairs[i];
    BodyPair::new(spec.body(a).clone(), spec.body(b).clone(), spec.norm.clone()).unwrap()
}

/// `argmin` of `||x - f(x)||` over the edge grid of `verts`.
pub fn grid_argmin(norm: &NormSpec, verts: &[Point], step: f64, f: impl Fn(&[f64]) -> Point) -> (Point, f64) {
    edge_grid(verts, step)
        .into_iter()
        .map(|x| {
            let v = dist_oracle(norm, &x, &f(&x));
            (x, v)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid")
}

/// Report text with the wall-time line removed.
pub fn strip_wall_time(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time\""))
        .collect::<Vec<_>>()
        .join("\n")
}
