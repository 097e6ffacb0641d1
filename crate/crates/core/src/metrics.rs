//! Distances, diameters, Chebyshev-type radii, proximal cores and the
//! classification of a pair (proximal, semisharp, sharp, parallel).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::{self, BodyPair, ConvexBody};
use crate::conic;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Vector};
use crate::norm::NormSpec;
use crate::rng;

/// Sampling budget shared by the sampled procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Interior samples per body.
    pub samples: usize,
    /// Random directions used by mate-set searches (on top of the axes).
    pub directions: usize,
    /// Alternating-projection refinements started from unmatched candidates.
    pub refine: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            samples: 64,
            directions: 4,
            refine: 8,
            seed: 0,
        }
    }
}

impl Budget {
    pub fn with_seed(seed: u64) -> Self {
        Budget {
            seed,
            ..Budget::default()
        }
    }
}

/// `d(A, B)` with its attaining points and duality certificate.
#[derive(Debug, Clone, Serialize)]
pub struct Distance {
    pub d: f64,
    pub x: Vector,
    pub y: Vector,
    pub lower: f64,
    pub gap: f64,
    pub iterations: u32,
}

/// Minimal distance between the two bodies, certified to `tol`.
pub fn pair_distance(pair: &BodyPair, tol: f64) -> Result<Distance> {
    let c = conic::distance(&pair.a, &pair.b, &pair.norm)?;
    let gap = c.gap();
    if gap > tol {
        return Err(Error::GapNotClosed {
            context: "pair distance",
            gap,
            tol,
        });
    }
    Ok(Distance {
        d: c.value,
        x: c.x,
        y: c.y,
        lower: c.lower,
        gap,
        iterations: c.iterations,
    })
}

/// A body seen from outside as the farthest-point function
/// `x -> max_j ||x - k_j|| + rho_j`: vertices with `rho = 0`, or one ball.
pub fn far_targets(body: &ConvexBody) -> Vec<(Vector, f64)> {
    match body.flatten() {
        ConvexBody::Polytope(v) => v.into_iter().map(|p| (p, 0.0)).collect(),
        ConvexBody::Ball { center, r } => vec![(center, r)],
        ConvexBody::Translate { .. } => unreachable!(),
    }
}

/// `delta(x, K) = sup { ||x - y|| : y in K }`, exact.
pub fn point_radius(x: &[f64], k: &ConvexBody, norm: &NormSpec) -> Result<f64> {
    check_dim(norm.dim(), x)?;
    if k.dim() != norm.dim() {
        return Err(Error::DimensionMismatch {
            expected: norm.dim(),
            found: k.dim(),
        });
    }
    Ok(conic::far_value(x, &far_targets(k), norm))
}

/// Unit vector along `v`, or along the first axis when `v = 0`.
fn unit_along(v: &[f64], norm: &NormSpec) -> Vector {
    let nv = norm.eval(v);
    if nv > 0.0 {
        linalg::scale(v, 1.0 / nv)
    } else {
        let mut e = vec![0.0; v.len()];
        e[0] = 1.0 / norm.weight(0);
        e
    }
}

/// `delta(H, K) = sup { ||x - y|| : x in H, y in K }`, exact.
///
/// The maximum over vertex pairs (balls contribute center plus radius);
/// ties go to the lowest `(i, j)` in row-major order.
pub fn pair_diameter(pair: &BodyPair) -> (f64, Vector, Vector) {
    diameter(&pair.a, &pair.b, &pair.norm)
}

pub fn diameter(h: &ConvexBody, k: &ConvexBody, norm: &NormSpec) -> (f64, Vector, Vector) {
    let th = far_targets(h);
    let tk = far_targets(k);
    let vals = th
        .iter()
        .flat_map(|(p, rp)| tk.iter().map(move |(q, rq)| norm.dist(p, q) + rp + rq));
    let (idx, val) = linalg::argmax_first(vals).expect("non-empty bodies");
    let ((p, rp), (q, rq)) = (&th[idx / tk.len()], &tk[idx % tk.len()]);
    let u = unit_along(&linalg::sub(p, q), norm);
    let x = linalg::add(p, &linalg::scale(&u, *rp));
    let y = linalg::add(q, &linalg::scale(&u, -rq));
    (val, x, y)
}

/// `r(H, K) = inf { delta(x, K) : x in H }` with its center.
#[derive(Debug, Clone, Serialize)]
pub struct Radius {
    pub r: f64,
    pub center: Vector,
    pub lower: f64,
    pub gap: f64,
    pub iterations: u32,
}

pub fn restricted_radius(h: &ConvexBody, k: &ConvexBody, norm: &NormSpec, tol: f64) -> Result<Radius> {
    let c = conic::minimax_radius(h, &far_targets(k), norm)?;
    let gap = c.gap();
    if gap > tol {
        return Err(Error::GapNotClosed {
            context: "restricted radius",
            gap,
            tol,
        });
    }
    Ok(Radius {
        r: c.value,
        center: c.center,
        lower: c.lower,
        gap,
        iterations: c.iterations,
    })
}

/// How the proximal core was characterized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreMethod {
    /// `B = A + h` with `||h|| = d`, so `A_0 = A` and `B_0 = B`.
    Parallel,
    /// Disjoint balls of a strictly convex norm touch in one point each.
    BallTangency,
    Sampled,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Screening {
    pub a_candidates: usize,
    pub a_certified: usize,
    pub b_candidates: usize,
    pub b_certified: usize,
}

/// Certified proximal points `A_0`, `B_0` and their mate association.
#[derive(Debug, Clone, Serialize)]
pub struct ProximalCore {
    pub a0: ConvexBody,
    pub b0: ConvexBody,
    /// Certified pairs `(x, x')` with `||x - x'|| <= d + tol`. Convex
    /// combinations of these pairs are again certified pairs.
    pub pairs: Vec<(Vector, Vector)>,
    pub certified_exact: bool,
    pub method: CoreMethod,
    pub parallel_shift: Option<Vector>,
    pub d: f64,
    pub tol: f64,
    pub screening: Screening,
}

impl ProximalCore {
    /// Every screened point of `A` was certified proximal (or `A_0 = A`
    /// holds analytically).
    pub fn covers_a(&self) -> bool {
        self.method == CoreMethod::Parallel
            || self.screening.a_certified == self.screening.a_candidates
    }

    pub fn covers_b(&self) -> bool {
        self.method == CoreMethod::Parallel
            || self.screening.b_certified == self.screening.b_candidates
    }

    pub fn is_detected(&self) -> bool {
        !self.pairs.is_empty()
    }

    /// A mate `x'` in `B` of `x` in `A`.
    pub fn mate_in_b(&self, pair: &BodyPair, x: &[f64]) -> Result<Vector> {
        self.mate(pair, x, 1.0)
    }

    /// A mate `y'` in `A` of `y` in `B`.
    pub fn mate_in_a(&self, pair: &BodyPair, y: &[f64]) -> Result<Vector> {
        self.mate(pair, y, -1.0)
    }

    fn mate(&self, pair: &BodyPair, x: &[f64], side: f64) -> Result<Vector> {
        check_dim(pair.norm.dim(), x)?;
        let limit = self.d + self.tol;
        if let Some(h) = &self.parallel_shift {
            let m = linalg::add(x, &linalg::scale(h, side));
            if pair.norm.dist(x, &m) <= limit {
                return Ok(m);
            }
        }
        let other = if side > 0.0 { &pair.b } else { &pair.a };
        let p = other.project(x, &pair.norm)?;
        if p.value <= limit {
            Ok(p.y)
        } else {
            Err(Error::NoMate {
                point: x.to_vec(),
                distance: p.value,
            })
        }
    }
}

/// Screens `candidates` of one side against the other body; returns the
/// certified pairs oriented as `(point, mate)`.
fn screen(
    candidates: &[Vector],
    other: &ConvexBody,
    norm: &NormSpec,
    limit: f64,
) -> Result<Vec<Option<Vector>>> {
    candidates
        .par_iter()
        .map(|x| {
            let p = other.project(x, norm)?;
            Ok((p.value <= limit).then_some(p.y))
        })
        .collect()
}

fn candidates(body: &ConvexBody, count: usize, seed: u64, norm: &NormSpec) -> Vec<Vector> {
    let mut out = body.vertices().unwrap_or_default();
    out.extend(body.sample(count, seed, norm));
    out
}

/// Alternating projections from `x`, stopping once the pair is within `limit`.
fn alternate(pair: &BodyPair, mut x: Vector, limit: f64, rounds: usize) -> Result<Option<(Vector, Vector)>> {
    for _ in 0..rounds {
        let y = pair.b.project(&x, &pair.norm)?.y;
        if pair.norm.dist(&x, &y) <= limit {
            return Ok(Some((x, y)));
        }
        x = pair.a.project(&y, &pair.norm)?.y;
    }
    Ok(None)
}

/// Certified proximal points of the pair.
///
/// Candidates are the vertices of both bodies plus seeded samples; each is
/// projected onto the other body and kept when its distance is at most
/// `d + tol`. A bounded number of unmatched candidates is refined by
/// alternating projections, and the distance witness is always kept.
pub fn proximal_core(pair: &BodyPair, tol: f64, budget: &Budget) -> Result<ProximalCore> {
    let dist = pair_distance(pair, tol)?;
    let d = dist.d;
    let norm = &pair.norm;
    let limit = d + tol;

    let a_cands = candidates(&pair.a, budget.samples, rng_seed(budget.seed, 0), norm);
    let b_cands = candidates(&pair.b, budget.samples, rng_seed(budget.seed, 1), norm);
    let a_hits = screen(&a_cands, &pair.b, norm, limit)?;
    let b_hits = screen(&b_cands, &pair.a, norm, limit)?;
    let screening = Screening {
        a_candidates: a_cands.len(),
        a_certified: a_hits.iter().filter(|h| h.is_some()).count(),
        b_candidates: b_cands.len(),
        b_certified: b_hits.iter().filter(|h| h.is_some()).count(),
    };

    let mut pairs: Vec<(Vector, Vector)> = vec![(dist.x.clone(), dist.y.clone())];
    for (x, hit) in a_cands.iter().zip(&a_hits) {
        if let Some(y) = hit {
            pairs.push((x.clone(), y.clone()));
        }
    }
    for (y, hit) in b_cands.iter().zip(&b_hits) {
        if let Some(x) = hit {
            pairs.push((x.clone(), y.clone()));
        }
    }
    let unmatched: Vec<Vector> = a_cands
        .iter()
        .zip(&a_hits)
        .filter(|(_, h)| h.is_none())
        .map(|(x, _)| x.clone())
        .take(budget.refine)
        .collect();
    let refined: Result<Vec<_>> = unmatched
        .into_par_iter()
        .map(|x| alternate(pair, x, limit, 50))
        .collect();
    pairs.extend(refined?.into_iter().flatten());

    let shift = parallel_shift(pair, d, tol);
    let tangency = ball_tangency(pair, d, tol);
    let (a0, b0, method) = if shift.is_some() {
        (pair.a.clone(), pair.b.clone(), CoreMethod::Parallel)
    } else if let Some((x, y)) = &tangency {
        pairs = vec![(x.clone(), y.clone())];
        (
            ConvexBody::point(x.clone()),
            ConvexBody::point(y.clone()),
            CoreMethod::BallTangency,
        )
    } else {
        let xs: Vec<Vector> = pairs.iter().map(|p| p.0.clone()).collect();
        let ys: Vec<Vector> = pairs.iter().map(|p| p.1.clone()).collect();
        (body::convex_hull(&xs)?, body::convex_hull(&ys)?, CoreMethod::Sampled)
    };
    Ok(ProximalCore {
        a0,
        b0,
        pairs,
        certified_exact: method != CoreMethod::Sampled,
        method,
        parallel_shift: shift,
        d,
        tol,
        screening,
    })
}

fn rng_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt)
}

/// `h` with `B = A + h` and `||h|| = d`, when it exists.
pub fn parallel_shift(pair: &BodyPair, d: f64, tol: f64) -> Option<Vector> {
    let h = body::translate_offset(pair, tol)?;
    ((pair.norm.eval(&h) - d).abs() <= tol).then_some(h)
}

fn ball_tangency(pair: &BodyPair, d: f64, tol: f64) -> Option<(Vector, Vector)> {
    let (ConvexBody::Ball { center: ca, r: ra }, ConvexBody::Ball { center: cb, r: rb }) =
        (pair.a.flatten(), pair.b.flatten())
    else {
        return None;
    };
    if d <= tol || !pair.norm.is_strictly_convex().is_strict() {
        return None;
    }
    let u = unit_along(&linalg::sub(&cb, &ca), &pair.norm);
    Some((
        linalg::add(&ca, &linalg::scale(&u, ra)),
        linalg::add(&cb, &linalg::scale(&u, -rb)),
    ))
}

/// Maximal violation of the two Pythagorean identities at `x in A_0`,
/// `y in B_0`.
pub fn pythagorean_residual(
    pair: &BodyPair,
    x: &[f64],
    y: &[f64],
    core: &ProximalCore,
) -> Result<f64> {
    let n = &pair.norm;
    let xm = core.mate_in_b(pair, x)?;
    let ym = core.mate_in_a(pair, y)?;
    let sq = |a: &[f64], b: &[f64]| n.dist(a, b).powi(2);
    let full = sq(x, y);
    let r1 = (sq(x, &ym) + sq(x, &xm) - full).abs();
    let r2 = (sq(&xm, y) + sq(&ym, y) - full).abs();
    Ok(r1.max(r2))
}

/// Which body contributes the center point of a mate witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
}

/// A point with two distinct near-mates in the other body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MateWitness {
    pub side: Side,
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    pub dist_xy: f64,
    pub dist_xz: f64,
    pub dist_yz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SemisharpVerdict {
    /// Every closed convex pair of a strictly convex space is semisharp.
    HoldsStrictlyConvex,
    /// No witness found within the budget; a sampled claim only.
    Holds { candidates: usize, directions: usize },
    Fails { witness: MateWitness },
}

impl SemisharpVerdict {
    pub fn fails(&self) -> bool {
        matches!(self, SemisharpVerdict::Fails { .. })
    }
}

/// Searches for a point of one body with two distinct mates in the other.
///
/// A witness must satisfy `||x - y||, ||x - z|| <= d + tol` and
/// `||y - z|| > 10 tol`. Strictly convex norms are settled analytically. For
/// the others, mate sets are probed with two slacks; a spread that shrinks
/// with the slack comes from the slack itself, not from a flat piece, and is
/// not reported.
pub fn semisharp_check(
    pair: &BodyPair,
    core: &ProximalCore,
    tol: f64,
    budget: &Budget,
) -> Result<SemisharpVerdict> {
    if pair.norm.is_strictly_convex().is_strict() {
        return Ok(SemisharpVerdict::HoldsStrictlyConvex);
    }
    let dirs = directions(pair.norm.dim(), budget);
    let xs: Vec<Vector> = dedup_cap(core.pairs.iter().map(|p| p.0.clone()), budget);
    let ys: Vec<Vector> = dedup_cap(core.pairs.iter().map(|p| p.1.clone()), budget);
    let swapped = pair.swapped();
    for (side, pts, p) in [(Side::A, &xs, pair), (Side::B, &ys, &swapped)] {
        if let Some(w) = mate_spread(p, core.d, pts, &dirs, tol)? {
            return Ok(SemisharpVerdict::Fails {
                witness: MateWitness { side, ..w },
            });
        }
    }
    Ok(SemisharpVerdict::Holds {
        candidates: xs.len() + ys.len(),
        directions: dirs.len(),
    })
}

/// Searches for a violation of property UC. In finite dimension this is a
/// point with two separated near-mates; the returned witness is re-verified
/// by three norm evaluations.
pub fn property_uc_falsify(
    pair: &BodyPair,
    core: &ProximalCore,
    tol: f64,
    budget: &Budget,
) -> Result<Option<MateWitness>> {
    if core.a0.is_singleton(tol) && core.b0.is_singleton(tol) && core.certified_exact {
        return Ok(None);
    }
    match semisharp_check(pair, core, tol, budget)? {
        SemisharpVerdict::Fails { witness } => {
            let n = &pair.norm;
            let ok = n.dist(&witness.x, &witness.y) <= core.d + tol
                && n.dist(&witness.x, &witness.z) <= core.d + tol
                && n.dist(&witness.y, &witness.z) > 10.0 * tol;
            Ok(ok.then_some(witness))
        }
        _ => Ok(None),
    }
}

fn dedup_cap(points: impl Iterator<Item = Vector>, budget: &Budget) -> Vec<Vector> {
    let pts: Vec<Vector> = points.collect();
    let mut out = linalg::dedup_points(&pts, 1e-9);
    out.truncate(budget.samples.max(1) + 64);
    out
}

fn directions(dim: usize, budget: &Budget) -> Vec<Vector> {
    let mut dirs: Vec<Vector> = (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            e
        })
        .collect();
    for i in 0..budget.directions {
        let mut g = rng::stream(rng_seed(budget.seed, 2), i as u64);
        dirs.push((0..dim).map(|_| rng::normal(&mut g)).collect());
    }
    dirs
}

/// First point of `pts` (in order) whose mate set in `pair.b` has a flat
/// spread along one of `dirs`.
fn mate_spread(
    pair: &BodyPair,
    d: f64,
    pts: &[Vector],
    dirs: &[Vector],
    tol: f64,
) -> Result<Option<MateWitness>> {
    let norm = &pair.norm;
    let limit = d + tol;
    let verts = pair.b.vertices().unwrap_or_default();
    let witness = |x: &[f64], y: Vector, z: Vector| {
        let w = MateWitness {
            side: Side::A,
            x: x.to_vec(),
            dist_xy: norm.dist(x, &y),
            dist_xz: norm.dist(x, &z),
            dist_yz: norm.dist(&y, &z),
            y,
            z,
        };
        (w.dist_xy <= limit && w.dist_xz <= limit && w.dist_yz > 10.0 * tol).then_some(w)
    };
    // Exact vertex mates first.
    for x in pts {
        let mates: Vec<&Vector> = verts.iter().filter(|v| norm.dist(x, v) <= limit).collect();
        for (i, y) in mates.iter().enumerate() {
            for z in &mates[i + 1..] {
                if let Some(w) = witness(x, (*y).clone(), (*z).clone()) {
                    return Ok(Some(w));
                }
            }
        }
    }
    let found: Result<Vec<Option<MateWitness>>> = pts
        .par_iter()
        .map(|x| {
            let base = pair.b.project(x, norm)?.value;
            if base > d + tol / 2.0 {
                return Ok(None);
            }
            for u in dirs {
                let Some((y1, z1)) = extremes(pair, x, base + tol / 2.0, u)? else {
                    continue;
                };
                let s1 = norm.dist(&y1, &z1);
                if s1 <= 10.0 * tol {
                    continue;
                }
                let Some((y2, z2)) = extremes(pair, x, base + tol / 200.0, u)? else {
                    continue;
                };
                let s2 = norm.dist(&y2, &z2);
                if s2 > 10.0 * tol && s2 >= 0.5 * s1 {
                    let snap = |p: Vector| {
                        verts
                            .iter()
                            .find(|v| linalg::max_abs_diff(v, &p) <= 1e-6 && norm.dist(x, v) <= limit)
                            .cloned()
                            .unwrap_or(p)
                    };
                    if let Some(w) = witness(x, snap(y2), snap(z2)) {
                        return Ok(Some(w));
                    }
                }
            }
            Ok(None)
        })
        .collect();
    Ok(found?.into_iter().flatten().next())
}

fn extremes(pair: &BodyPair, x: &[f64], rho: f64, u: &[f64]) -> Result<Option<(Vector, Vector)>> {
    let neg = linalg::scale(u, -1.0);
    let hi = conic::constrained_extreme(&pair.b, x, rho, u, &pair.norm)?;
    let lo = conic::constrained_extreme(&pair.b, x, rho, &neg, &pair.norm)?;
    Ok(hi.zip(lo))
}

/// One term of a minimizing sequence and its distance to a fixed mate.
#[derive(Debug, Clone, Serialize)]
pub struct RateEntry {
    pub n: usize,
    /// `||x_n - y|| - d`
    pub excess: f64,
    /// `||x_n - x||` for the mate `x` of `y`.
    pub to_mate: f64,
}

/// Logs how a minimizing sequence `x_n` for `y` approaches the mate `x`.
pub fn mate_convergence(norm: &NormSpec, d: f64, y: &[f64], mate: &[f64], seq: &[Vector]) -> Vec<RateEntry> {
    seq.iter()
        .enumerate()
        .map(|(n, xn)| RateEntry {
            n,
            excess: norm.dist(xn, y) - d,
            to_mate: norm.dist(xn, mate),
        })
        .collect()
}

/// Classification flags of a pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairFlags {
    pub proximal: bool,
    pub semisharp: bool,
    pub sharp: bool,
    pub parallel: Option<Vector>,
    /// Outcome of the `||h|| = d` check when `B` is a translate of `A`.
    pub shift_norm_matches_d: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    pub x_d: Vector,
    pub y_d: Vector,
    pub x_delta: Vector,
    pub y_delta: Vector,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificates {
    pub tol: f64,
    pub d_lower: f64,
    pub d_gap: f64,
    pub r12_gap: f64,
    pub r21_gap: f64,
    pub iterations: u32,
    /// Proximality and semisharpness beyond the exact cases are sampled.
    pub flags_sampled: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairMetrics {
    pub d: f64,
    pub delta: f64,
    pub r12: f64,
    pub r21: f64,
    #[serde(rename = "Rmax")]
    pub rmax: f64,
    pub witnesses: Witnesses,
    pub flags: PairFlags,
    pub certificates: Certificates,
}

/// Full metric analysis of a pair.
#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub metrics: PairMetrics,
    pub core: ProximalCore,
    pub semisharp: SemisharpVerdict,
}

pub fn analyze(pair: &BodyPair, tol: f64, budget: &Budget) -> Result<Analysis> {
    let dist = pair_distance(pair, tol)?;
    let (delta, x_delta, y_delta) = pair_diameter(pair);
    let r12 = restricted_radius(&pair.a, &pair.b, &pair.norm, tol)?;
    let r21 = restricted_radius(&pair.b, &pair.a, &pair.norm, tol)?;
    let core = proximal_core(pair, tol, budget)?;
    let semisharp = semisharp_check(pair, &core, tol, budget)?;
    let proximal = core.covers_a() && core.covers_b();
    let semisharp_ok = !semisharp.fails();
    let sharp = proximal && semisharp_ok;
    let offset = body::translate_offset(pair, tol);
    let shift_norm_matches_d = offset
        .as_ref()
        .map(|h| (pair.norm.eval(h) - dist.d).abs() <= tol);
    let parallel = if sharp && shift_norm_matches_d == Some(true) {
        offset
    } else {
        None
    };
    let metrics = PairMetrics {
        d: dist.d,
        delta,
        r12: r12.r,
        r21: r21.r,
        rmax: r12.r.max(r21.r),
        witnesses: Witnesses {
            x_d: dist.x.clone(),
            y_d: dist.y.clone(),
            x_delta,
            y_delta,
        },
        flags: PairFlags {
            proximal,
            semisharp: semisharp_ok,
            sharp,
            parallel,
            shift_norm_matches_d,
        },
        certificates: Certificates {
            tol,
            d_lower: dist.lower,
            d_gap: dist.gap,
            r12_gap: r12.gap,
            r21_gap: r21.gap,
            iterations: dist.iterations + r12.iterations + r21.iterations,
            flags_sampled: !core.certified_exact,
        },
    };
    Ok(Analysis {
        metrics,
        core,
        semisharp,
    })
}
