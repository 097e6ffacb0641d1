//! Normal-structure constants of a pair, estimated from sampled sub-pairs,
//! and the nested tail-hull construction driven by admissible centers.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::{self, BodyPair, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::metrics::{self, CoreMethod, ProximalCore, SemisharpVerdict};
use crate::norm::NormSpec;
use crate::rng;

/// Largest sampled `N` still accepted as uniform normal structure.
pub const PUNS_MARGIN: f64 = 1e-3;

/// Which sub-pair family a sample is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Proximal, d-matching, nondegenerate sub-pairs.
    Upsilon,
    /// d-matching, nondegenerate sub-pairs.
    UpsilonBar,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubPair {
    pub h1: ConvexBody,
    pub h2: ConvexBody,
    pub proximal: bool,
    pub d_matches: bool,
    pub nondegenerate: bool,
    /// `d(H1, H2)` (an upper bound attained by a generator pair).
    pub d: f64,
    pub delta: f64,
    /// `R(H1, H2)`
    pub rmax: f64,
    /// `delta(H1)`, the self-diameter of the first body.
    pub self_diameter: f64,
}

impl SubPair {
    pub fn ratio(&self) -> f64 {
        if self.delta > 0.0 {
            self.rmax / self.delta
        } else {
            0.0
        }
    }

    pub fn admissible(&self, family: Family) -> bool {
        self.nondegenerate
            && self.d_matches
            && (family == Family::UpsilonBar || self.proximal)
    }
}

/// Points of `A` and `B` whose membership has been verified once, and
/// matched pairs among them.
struct Pool {
    a: Vec<Vector>,
    b: Vec<Vector>,
    matched: Vec<(Vector, Vector)>,
    x_d: Vector,
    y_d: Vector,
}

fn verified(points: Vec<Vector>, body: &ConvexBody, norm: &NormSpec, tol: f64) -> Result<Vec<Vector>> {
    let keep: Result<Vec<bool>> = points
        .par_iter()
        .map(|p| body.contains(p, norm, tol))
        .collect();
    Ok(points
        .into_iter()
        .zip(keep?)
        .filter_map(|(p, k)| k.then_some(p))
        .collect())
}

fn build_pool(pair: &BodyPair, core: &ProximalCore, seed: u64, tol: f64) -> Result<Pool> {
    let norm = &pair.norm;
    let limit = core.d + tol;
    let matched: Vec<(Vector, Vector)> = core
        .pairs
        .iter()
        .filter(|(x, y)| norm.dist(x, y) <= limit)
        .cloned()
        .collect();
    let ok: Result<Vec<bool>> = matched
        .par_iter()
        .map(|(x, y)| Ok(pair.a.contains(x, norm, tol)? && pair.b.contains(y, norm, tol)?))
        .collect();
    let matched: Vec<(Vector, Vector)> = matched
        .into_iter()
        .zip(ok?)
        .filter_map(|(m, k)| k.then_some(m))
        .collect();
    let (x_d, y_d) = matched.first().cloned().ok_or(Error::DegeneratePair)?;
    let mut a = pair.a.vertices().unwrap_or_default();
    a.extend(pair.a.sample(32, seed ^ 0xA, norm));
    let mut b = pair.b.vertices().unwrap_or_default();
    b.extend(pair.b.sample(32, seed ^ 0xB, norm));
    Ok(Pool {
        a: verified(a, &pair.a, norm, tol)?,
        b: verified(b, &pair.b, norm, tol)?,
        matched,
        x_d,
        y_d,
    })
}

fn pick<'a, T, R: Rng>(g: &mut R, items: &'a [T]) -> &'a T {
    &items[g.random_range(0..items.len())]
}

/// Sub-pair number `i` of the stream `seed`. Sample 0 is the whole
/// (core) pair.
fn draw(pool: &Pool, core: &ProximalCore, pair: &BodyPair, family: Family, seed: u64, i: usize) -> (Vec<Vector>, Vec<Vector>) {
    if i == 0 {
        return match family {
            Family::Upsilon => (gens(&core.a0, &pair.norm), gens(&core.b0, &pair.norm)),
            Family::UpsilonBar => (gens(&pair.a, &pair.norm), gens(&pair.b, &pair.norm)),
        };
    }
    let mut g = rng::stream(seed, i as u64);
    match family {
        Family::Upsilon => {
            let k = g.random_range(1..=pool.matched.len().min(5));
            let mut picked: Vec<(Vector, Vector)> = (0..k).map(|_| pick(&mut g, &pool.matched).clone()).collect();
            // Convex combinations of matched pairs are matched pairs.
            let extra = g.random_range(0..=2);
            for _ in 0..extra {
                let j = g.random_range(0..picked.len());
                let l = g.random_range(0..picked.len());
                let t: f64 = g.random();
                let (a, b) = (&picked[j], &picked[l]);
                let m = (linalg::lerp(&a.0, &b.0, t), linalg::lerp(&a.1, &b.1, t));
                picked.push(m);
            }
            picked.into_iter().unzip()
        }
        Family::UpsilonBar => {
            // Either side may stay a single point.
            let ka = g.random_range(0..=4);
            let kb = g.random_range(0..=4);
            let mut h1 = vec![pool.x_d.clone()];
            let mut h2 = vec![pool.y_d.clone()];
            for _ in 0..ka {
                h1.push(pick(&mut g, &pool.a).clone());
            }
            for _ in 0..kb {
                h2.push(pick(&mut g, &pool.b).clone());
            }
            (h1, h2)
        }
    }
}

/// Generators of a body for sub-pair purposes: vertices, or the ball itself
/// is represented by its center plus boundary points on the axes.
pub(crate) fn gens(body: &ConvexBody, norm: &NormSpec) -> Vec<Vector> {
    match body.flatten() {
        ConvexBody::Polytope(v) => v,
        ConvexBody::Ball { center, r } => {
            let mut out = vec![center.clone()];
            for k in 0..center.len() {
                for s in [-1.0, 1.0] {
                    let mut p = center.clone();
                    p[k] += s * r / norm.weight(k);
                    out.push(p);
                }
            }
            out
        }
        ConvexBody::Translate { .. } => unreachable!(),
    }
}

fn evaluate(h1: Vec<Vector>, h2: Vec<Vector>, pair: &BodyPair, d: f64, tol: f64, family: Family) -> Result<SubPair> {
    let norm = &pair.norm;
    // Upsilon generators are drawn as pairs: h1[i] is matched with h2[i].
    let matched = family == Family::Upsilon
        && h1.len() == h2.len()
        && h1.iter().zip(&h2).all(|(x, y)| norm.dist(x, y) <= d + tol);
    let h1 = linalg::dedup_points(&h1, 1e-12);
    let h2 = linalg::dedup_points(&h2, 1e-12);
    let b1 = ConvexBody::Polytope(h1.clone());
    let b2 = ConvexBody::Polytope(h2.clone());
    let nondegenerate = h1.len() > 1 || h2.len() > 1;
    // Generators are verified members of A and B, so d(H1, H2) >= d(A, B).
    let d_sub = h1
        .iter()
        .flat_map(|x| h2.iter().map(move |y| (x, y)))
        .map(|(x, y)| norm.dist(x, y))
        .fold(f64::INFINITY, f64::min);
    let d_matches = d_sub <= d + tol;
    // Convex combinations of matched pairs are matched pairs, so matched
    // generators make the hulls proximal.
    let proximal = matched;
    let (delta, _, _) = metrics::diameter(&b1, &b2, norm);
    let (self_diameter, _, _) = metrics::diameter(&b1, &b1, norm);
    let rmax = if nondegenerate && d_matches {
        let r12 = metrics::restricted_radius(&b1, &b2, norm, tol)?;
        let r21 = metrics::restricted_radius(&b2, &b1, norm, tol)?;
        r12.r.max(r21.r)
    } else {
        0.0
    };
    Ok(SubPair {
        h1: b1,
        h2: b2,
        proximal,
        d_matches,
        nondegenerate,
        d: d_sub,
        delta,
        rmax,
        self_diameter,
    })
}

/// Random sub-pairs of `pair` built from verified points; flags are checked,
/// not assumed. Matched generators keep Upsilon samples proximal; a distance
/// witness pair keeps Upsilon-bar samples d-matching.
pub fn subpair_sampler(
    pair: &BodyPair,
    core: &ProximalCore,
    family: Family,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<SubPair>> {
    let pool = build_pool(pair, core, seed, tol)?;
    sample_with(&pool, pair, core, family, count, seed, tol)
}

fn sample_with(
    pool: &Pool,
    pair: &BodyPair,
    core: &ProximalCore,
    family: Family,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<SubPair>> {
    let stream = seed.wrapping_add(match family {
        Family::Upsilon => 0x55,
        Family::UpsilonBar => 0xBB,
    });
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (h1, h2) = draw(pool, core, pair, family, stream, i);
            let mut sp = evaluate(h1, h2, pair, core.d, tol, family)?;
            if family == Family::Upsilon && i == 0 {
                // The core bodies are hulls of matched pairs, or exact.
                sp.proximal = true;
            }
            Ok(sp)
        })
        .collect()
}

/// `sqrt((delta^2 / 2 + d^2) / (delta^2 + d^2))`: the ratio bound for a
/// parallel sub-pair of an inner-product space whose bodies have
/// self-diameter `delta`.
pub fn hilbert_ratio_bound(self_diameter: f64, d: f64) -> f64 {
    let (s, d2) = (self_diameter * self_diameter, d * d);
    if s + d2 == 0.0 {
        return 0.0;
    }
    ((s / 2.0 + d2) / (s + d2)).sqrt()
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PunsVerdict {
    /// Sampled evidence only; `N` itself is never computed.
    HasStructureSampled,
    NotEstablished { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct HilbertAudit {
    pub violations: usize,
    /// Largest `|delta^2(x, K2) - delta^2(x, K1) - d^2|` over vertices of
    /// parallel samples.
    pub max_orthogonality_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureEstimate {
    /// Largest sampled `R / delta` over Upsilon samples: a lower bound on `N`.
    pub n_hat: f64,
    /// Largest sampled ratio over Upsilon-bar samples: a lower bound on `c0`.
    pub c0_hat: f64,
    /// Largest per-sample Hilbert ratio bound, for inner-product norms.
    pub hilbert_bound: Option<f64>,
    pub hilbert_audit: Option<HilbertAudit>,
    pub samples: usize,
    pub c0_samples: usize,
    pub seed: u64,
    /// The pair is not proximal and the estimate refers to `(A_0, B_0)`.
    pub on_core: bool,
    pub verdict: PunsVerdict,
}

/// Estimates `N(A, B)` (and `c0`) from `count` sub-pairs of each family.
pub fn estimate_n(
    pair: &BodyPair,
    core: &ProximalCore,
    semisharp: Option<&SemisharpVerdict>,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<StructureEstimate> {
    let pool = build_pool(pair, core, seed, tol)?;
    let ups = sample_with(&pool, pair, core, Family::Upsilon, count, seed, tol)?;
    let ups: Vec<&SubPair> = ups.iter().filter(|s| s.admissible(Family::Upsilon)).collect();
    if ups.is_empty() {
        return Err(Error::DegeneratePair);
    }
    let n_hat = ups.iter().map(|s| s.ratio()).fold(0.0, f64::max);
    let bars = sample_with(&pool, pair, core, Family::UpsilonBar, count, seed, tol)?;
    let bars: Vec<&SubPair> = bars.iter().filter(|s| s.admissible(Family::UpsilonBar)).collect();
    let c0_bar = bars.iter().map(|s| s.ratio()).fold(0.0, f64::max);

    let (hilbert_bound, hilbert_audit) = if pair.norm.is_hilbert() {
        let mut bound: f64 = 0.0;
        let mut violations = 0;
        let mut resid: f64 = 0.0;
        for s in &ups {
            let b = hilbert_ratio_bound(s.self_diameter, core.d);
            bound = bound.max(b);
            if s.ratio() > b + 1e-9 {
                violations += 1;
            }
            if core.method == CoreMethod::Parallel {
                resid = resid.max(orthogonality_residual(s, core.d, &pair.norm));
            }
        }
        (
            Some(bound),
            Some(HilbertAudit {
                violations,
                max_orthogonality_residual: resid,
            }),
        )
    } else {
        (None, None)
    };
    let on_core = !(core.covers_a() && core.covers_b());
    let verdict = puns_verdict(n_hat, hilbert_bound, semisharp);
    Ok(StructureEstimate {
        n_hat,
        c0_hat: c0_bar.max(n_hat),
        hilbert_bound,
        hilbert_audit,
        samples: ups.len(),
        c0_samples: bars.len() + ups.len(),
        seed,
        on_core,
        verdict,
    })
}

/// `|delta^2(x, K2) - delta^2(x, K1) - d^2|` over the vertices of `K1`.
fn orthogonality_residual(s: &SubPair, d: f64, norm: &NormSpec) -> f64 {
    let Some(verts) = s.h1.vertices() else { return 0.0 };
    verts
        .iter()
        .map(|x| {
            let r2 = metrics::point_radius(x, &s.h2, norm).unwrap_or(f64::NAN);
            let r1 = metrics::point_radius(x, &s.h1, norm).unwrap_or(f64::NAN);
            (r2 * r2 - r1 * r1 - d * d).abs()
        })
        .fold(0.0, f64::max)
}

pub fn puns_verdict(n_hat: f64, hilbert_bound: Option<f64>, semisharp: Option<&SemisharpVerdict>) -> PunsVerdict {
    if n_hat > 1.0 - PUNS_MARGIN {
        return PunsVerdict::NotEstablished {
            reason: format!("sampled N = {n_hat} exceeds 1 - {PUNS_MARGIN}"),
        };
    }
    if let Some(b) = hilbert_bound {
        if b >= 1.0 {
            return PunsVerdict::NotEstablished {
                reason: format!("Hilbert bound {b} is not below 1"),
            };
        }
    }
    if semisharp.is_some_and(|v| v.fails()) {
        return PunsVerdict::NotEstablished {
            reason: "pair is not semisharp proximal".into(),
        };
    }
    PunsVerdict::HasStructureSampled
}

/// Lower bound on `c0` from `count` Upsilon-bar samples.
pub fn estimate_c0(pair: &BodyPair, core: &ProximalCore, count: usize, seed: u64, tol: f64) -> Result<f64> {
    let samples = subpair_sampler(pair, core, Family::UpsilonBar, count, seed, tol)?;
    let best = samples
        .iter()
        .filter(|s| s.admissible(Family::UpsilonBar))
        .map(|s| s.ratio())
        .fold(f64::NAN, f64::max);
    if best.is_nan() {
        Err(Error::DegeneratePair)
    } else {
        Ok(best)
    }
}

/// Admissible centers `{x in C1 : delta(x, C2) - d <= c (delta(C1, C2) - d)}`
/// and the symmetric set in `C2`, sampled and re-verified.
pub fn fact41_centers(
    c1: &ConvexBody,
    c2: &ConvexBody,
    norm: &NormSpec,
    c: f64,
    tol: f64,
    seed: u64,
) -> Result<(Vec<Vector>, Vec<Vector>)> {
    let pair = BodyPair::new(c1.clone(), c2.clone(), norm.clone())?;
    let d = metrics::pair_distance(&pair, tol)?.d;
    let (delta, _, _) = metrics::diameter(c1, c2, norm);
    let a = admissible(c1, c2, norm, d, delta, c, tol, seed)?;
    if a.is_empty() {
        return Err(Error::EmptyAdmissible { side: 'A', c });
    }
    let b = admissible(c2, c1, norm, d, delta, c, tol, seed.wrapping_add(1))?;
    if b.is_empty() {
        return Err(Error::EmptyAdmissible { side: 'B', c });
    }
    Ok((a, b))
}

#[allow(clippy::too_many_arguments)]
fn admissible(
    c1: &ConvexBody,
    c2: &ConvexBody,
    norm: &NormSpec,
    d: f64,
    delta: f64,
    c: f64,
    tol: f64,
    seed: u64,
) -> Result<Vec<Vector>> {
    let bound = d + c * (delta - d);
    let center = metrics::restricted_radius(c1, c2, norm, tol)?.center;
    let mut cands = vec![center.clone()];
    let verts = gens(c1, norm);
    for v in &verts {
        cands.push(v.clone());
        cands.push(linalg::midpoint(&center, v));
        cands.push(linalg::lerp(&center, v, 0.9));
    }
    cands.extend(c1.sample(16, seed, norm));
    let targets = metrics::far_targets(c2);
    Ok(cands
        .into_iter()
        .filter(|x| crate::conic::far_value(x, &targets, norm) <= bound)
        .collect())
}

/// One level of a contraction trace.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub delta: f64,
    pub d: f64,
    pub gap: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NestedOutcome {
    /// Both tail hulls collapsed to single points.
    Singleton { x: Vector, y: Vector },
    /// All requested levels were built and every level contracted.
    Completed,
    /// The gap closed while the hulls kept more than one point, so
    /// `R / delta` of that level bounds `c0` from below and exceeds `c`.
    PremiseViolated { level: usize, ratio: f64 },
    /// A level failed its contraction inequality.
    ContractionFailed { level: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct NestedTrace {
    pub c: f64,
    pub levels: Vec<LevelRecord>,
    pub outcome: NestedOutcome,
}

impl NestedTrace {
    /// The trace certifies the per-level contraction.
    pub fn certified(&self) -> bool {
        matches!(self.outcome, NestedOutcome::Singleton { .. } | NestedOutcome::Completed)
            && self.levels.iter().all(|l| l.ok)
    }
}

/// A minimizing sequence `x_n = (1 - 2^-n) x* + 2^-n x~` (same for `y`),
/// truncated after `terms` terms; the limit `(x*, y*)` closes each tail.
#[derive(Debug, Clone, Serialize)]
pub struct MinimizingSequence {
    pub x_star: Vector,
    pub y_star: Vector,
    pub x_start: Vector,
    pub y_start: Vector,
    pub terms: usize,
}

impl MinimizingSequence {
    /// Seeded start points drawn from the bodies, limit at the core's
    /// distance witness.
    pub fn seeded(pair: &BodyPair, core: &ProximalCore, seed: u64) -> Result<Self> {
        let (x_star, y_star) = core.pairs.first().cloned().ok_or(Error::DegeneratePair)?;
        Ok(MinimizingSequence {
            x_star,
            y_star,
            x_start: pair.a.sample(1, seed, &pair.norm).remove(0),
            y_start: pair.b.sample(1, seed.wrapping_add(1), &pair.norm).remove(0),
            terms: 8,
        })
    }

    pub fn constant(x: Vector, y: Vector) -> Self {
        MinimizingSequence {
            x_star: x.clone(),
            y_star: y.clone(),
            x_start: x,
            y_start: y,
            terms: 8,
        }
    }

    pub fn term(&self, n: usize) -> (Vector, Vector) {
        let t = 0.5f64.powi(n as i32);
        (
            linalg::lerp(&self.x_star, &self.x_start, t),
            linalg::lerp(&self.y_star, &self.y_start, t),
        )
    }
}

/// Builds `levels` levels of nested tail hulls and checks the per-level
/// contraction `g_m <= c g_{m-1}` of the gap `g = delta - d`.
///
/// Level 0 holds the tail hulls of the sequence (each closed by its limit).
/// Level `m` at index `n` is the hull of the admissible centers of all
/// level-`(m-1)` tails with index `>= n`, including the limit.
pub fn nested_hull_demo(
    pair: &BodyPair,
    core: &ProximalCore,
    seq: &MinimizingSequence,
    levels: usize,
    c: f64,
    tol: f64,
    seed: u64,
) -> Result<NestedTrace> {
    let norm = &pair.norm;
    let d = core.d;
    let terms = seq.terms.max(1);
    // tails[j] for j < terms is the tail from term j + 1; tails[terms] is
    // the limit.
    let mut tails: Vec<(Vec<Vector>, Vec<Vector>)> = (0..=terms)
        .map(|j| {
            let mut h = vec![seq.x_star.clone()];
            let mut k = vec![seq.y_star.clone()];
            for n in (j + 1)..=terms {
                let (x, y) = seq.term(n);
                h.push(x);
                k.push(y);
            }
            (reduce(h), reduce(k))
        })
        .collect();

    let mut records: Vec<LevelRecord> = Vec::new();
    let mut prev_gap = f64::NAN;
    for level in 0..=levels {
        if level > 0 {
            let next: Result<Vec<(Vec<Vector>, Vec<Vector>)>> = (0..=terms)
                .into_par_iter()
                .map(|n| {
                    let mut h = Vec::new();
                    let mut k = Vec::new();
                    for (j, (hj, kj)) in tails.iter().enumerate().skip(n) {
                        let (bh, bk) = (ConvexBody::Polytope(hj.clone()), ConvexBody::Polytope(kj.clone()));
                        let (delta, _, _) = metrics::diameter(&bh, &bk, norm);
                        let s = rng_seed(seed, level, j);
                        h.extend(admissible(&bh, &bk, norm, d, delta, c, tol, s)?);
                        k.extend(admissible(&bk, &bh, norm, d, delta, c, tol, s ^ 1)?);
                    }
                    if h.is_empty() || k.is_empty() {
                        return Err(Error::EmptyAdmissible {
                            side: if h.is_empty() { 'A' } else { 'B' },
                            c,
                        });
                    }
                    Ok((reduce(h), reduce(k)))
                })
                .collect();
            tails = next?;
        }
        let (h, k) = &tails[0];
        let (bh, bk) = (ConvexBody::Polytope(h.clone()), ConvexBody::Polytope(k.clone()));
        let (delta, _, _) = metrics::diameter(&bh, &bk, norm);
        let gap = (delta - d).max(0.0);
        let bound = if level == 0 { gap } else { c * prev_gap + 1e-9 };
        let ok = gap <= bound;
        records.push(LevelRecord {
            level,
            delta,
            d,
            gap,
            bound,
            ok,
        });
        if !ok {
            return Ok(NestedTrace {
                c,
                levels: records,
                outcome: NestedOutcome::ContractionFailed { level },
            });
        }
        if gap <= tol {
            if bh.is_singleton(tol) && bk.is_singleton(tol) {
                return Ok(NestedTrace {
                    c,
                    levels: records,
                    outcome: NestedOutcome::Singleton {
                        x: h[0].clone(),
                        y: k[0].clone(),
                    },
                });
            }
            let r12 = metrics::restricted_radius(&bh, &bk, norm, tol)?.r;
            let r21 = metrics::restricted_radius(&bk, &bh, norm, tol)?.r;
            let ratio = if delta > 0.0 { r12.max(r21) / delta } else { 0.0 };
            if ratio > c {
                return Ok(NestedTrace {
                    c,
                    levels: records,
                    outcome: NestedOutcome::PremiseViolated { level, ratio },
                });
            }
        }
        prev_gap = gap;
    }
    Ok(NestedTrace {
        c,
        levels: records,
        outcome: NestedOutcome::Completed,
    })
}

fn rng_seed(seed: u64, level: usize, j: usize) -> u64 {
    seed ^ ((level as u64) << 32) ^ (j as u64).wrapping_mul(0x9E37_79B9)
}

/// Irredundant generators of the hull of `points`.
fn reduce(points: Vec<Vector>) -> Vec<Vector> {
    match body::convex_hull(&points) {
        Ok(ConvexBody::Polytope(v)) => v,
        _ => linalg::dedup_points(&points, 1e-12),
    }
}
