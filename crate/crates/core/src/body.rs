//! Convex bodies in vertex or ball representation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Vector};
use crate::norm::NormSpec;
use crate::rng;

/// Relative tolerance used to discard hull points lying in the hull of the rest.
const HULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "RawBody")]
pub enum ConvexBody {
    Polytope(Vec<Vector>),
    /// Closed ball of the ambient norm.
    Ball { center: Vector, r: f64 },
    Translate { base: Box<ConvexBody>, shift: Vector },
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawBody {
    Polytope(Vec<Vector>),
    Ball { center: Vector, r: f64 },
    Translate { base: Box<ConvexBody>, shift: Vector },
}

impl TryFrom<RawBody> for ConvexBody {
    type Error = Error;

    fn try_from(raw: RawBody) -> Result<Self> {
        let body = match raw {
            RawBody::Polytope(v) => ConvexBody::Polytope(v),
            RawBody::Ball { center, r } => ConvexBody::Ball { center, r },
            RawBody::Translate { base, shift } => ConvexBody::Translate { base, shift },
        };
        body.validate()?;
        Ok(body)
    }
}

impl ConvexBody {
    pub fn point(v: Vector) -> Self {
        ConvexBody::Polytope(vec![v])
    }

    pub fn segment(a: Vector, b: Vector) -> Self {
        ConvexBody::Polytope(vec![a, b])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexBody::Polytope(v) => {
                let first = v.first().ok_or(Error::InvalidBody("polytope has no vertices".into()))?;
                if first.is_empty() {
                    return Err(Error::InvalidBody("vertices must have positive dimension".into()));
                }
                for p in v {
                    check_dim(first.len(), p)?;
                    if p.iter().any(|x| !x.is_finite()) {
                        return Err(Error::InvalidBody("non-finite vertex coordinate".into()));
                    }
                }
                Ok(())
            }
            ConvexBody::Ball { center, r } => {
                if center.is_empty() || center.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidBody("ball center must be finite and non-empty".into()));
                }
                if !(r.is_finite() && *r >= 0.0) {
                    return Err(Error::InvalidBody(format!("ball radius must be >= 0, got {r}")));
                }
                Ok(())
            }
            ConvexBody::Translate { base, shift } => {
                base.validate()?;
                check_dim(base.dim(), shift)?;
                if shift.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidBody("non-finite shift".into()));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Polytope(v) => v[0].len(),
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::Translate { base, .. } => base.dim(),
        }
    }

    /// Equivalent polytope or ball with all translates applied.
    pub fn flatten(&self) -> ConvexBody {
        match self {
            ConvexBody::Translate { base, shift } => match base.flatten() {
                ConvexBody::Polytope(v) => {
                    ConvexBody::Polytope(v.iter().map(|p| linalg::add(p, shift)).collect())
                }
                ConvexBody::Ball { center, r } => ConvexBody::Ball {
                    center: linalg::add(&center, shift),
                    r,
                },
                ConvexBody::Translate { .. } => unreachable!(),
            },
            other => other.clone(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> ConvexBody {
        ConvexBody::Translate {
            base: Box::new(self.clone()),
            shift: shift.to_vec(),
        }
        .flatten()
    }

    /// Vertex list for polytopes (after flattening); `None` for balls.
    pub fn vertices(&self) -> Option<Vec<Vector>> {
        match self.flatten() {
            ConvexBody::Polytope(v) => Some(v),
            _ => None,
        }
    }

    /// True when the body is a single point.
    pub fn is_singleton(&self, tol: f64) -> bool {
        match self.flatten() {
            ConvexBody::Polytope(v) => v.iter().all(|p| linalg::max_abs_diff(p, &v[0]) <= tol),
            ConvexBody::Ball { r, .. } => r <= tol,
            ConvexBody::Translate { .. } => unreachable!(),
        }
    }

    /// Support function value `sup <dir, x>`; no zero check.
    pub fn support_value(&self, dir: &[f64], norm: &NormSpec) -> f64 {
        match self {
            ConvexBody::Polytope(v) => v
                .iter()
                .map(|p| linalg::dot(p, dir))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::Ball { center, r } => linalg::dot(center, dir) + r * norm.dual_norm(dir),
            ConvexBody::Translate { base, shift } => {
                base.support_value(dir, norm) + linalg::dot(shift, dir)
            }
        }
    }

    /// Maximizer of `<dir, x>` over the body. Polytopes return the
    /// lowest-index maximizing vertex.
    pub fn support(&self, dir: &[f64], norm: &NormSpec) -> Result<(f64, Vector)> {
        check_dim(self.dim(), dir)?;
        if dir.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(match self.flatten() {
            ConvexBody::Polytope(v) => {
                let (k, val) = linalg::argmax_first(v.iter().map(|p| linalg::dot(p, dir)))
                    .expect("validated polytope");
                (val, v[k].clone())
            }
            ConvexBody::Ball { center, r } => {
                let z = norm.dual_maximizer(dir);
                let x = linalg::add(&center, &linalg::scale(&z, r));
                (linalg::dot(&center, dir) + r * norm.dual_norm(dir), x)
            }
            ConvexBody::Translate { .. } => unreachable!(),
        })
    }

    /// Distance from `v` to the body, with its nearest point.
    pub fn project(&self, v: &[f64], norm: &NormSpec) -> Result<conic::DistanceCert> {
        check_dim(self.dim(), v)?;
        if let ConvexBody::Ball { center, r } = self.flatten() {
            // Radial projection is a nearest point in every norm.
            let nd = norm.dist(v, &center);
            let (value, y) = if nd <= r {
                (0.0, v.to_vec())
            } else {
                (nd - r, linalg::lerp(&center, v, r / nd))
            };
            return Ok(conic::DistanceCert {
                value,
                lower: value,
                x: v.to_vec(),
                y,
                iterations: 0,
            });
        }
        conic::distance(&ConvexBody::point(v.to_vec()), self, norm)
    }

    /// Whether `v` lies within `tol` of the body in the ambient norm.
    pub fn contains(&self, v: &[f64], norm: &NormSpec, tol: f64) -> Result<bool> {
        check_dim(self.dim(), v)?;
        if let ConvexBody::Polytope(verts) = self {
            if verts.iter().any(|p| norm.dist(p, v) <= tol) {
                return Ok(true);
            }
        }
        Ok(self.project(v, norm)?.value <= tol)
    }

    /// `count` points of the body, deterministic in `seed`. Point `i` depends
    /// only on `(seed, i)`.
    pub fn sample(&self, count: usize, seed: u64, norm: &NormSpec) -> Vec<Vector> {
        let flat = self.flatten();
        (0..count)
            .map(|i| {
                let mut g = rng::stream(seed, i as u64);
                match &flat {
                    ConvexBody::Polytope(v) => {
                        let w = rng::simplex_weights(&mut g, v.len());
                        linalg::combine(v, &w)
                    }
                    ConvexBody::Ball { center, r } => {
                        let n = center.len();
                        let dir: Vec<f64> = (0..n).map(|_| rng::normal(&mut g)).collect();
                        let nd = norm.eval(&dir);
                        let u: f64 = rand::Rng::random(&mut g);
                        let s = if nd > 0.0 { r * u.powf(1.0 / n as f64) / nd } else { 0.0 };
                        linalg::add(center, &linalg::scale(&dir, s))
                    }
                    ConvexBody::Translate { .. } => unreachable!(),
                }
            })
            .collect()
    }
}

/// Polytope spanned by `points` with redundant points removed.
///
/// A point is dropped when it lies within `1e-9` (relative to the point
/// cloud's extent) of the hull of the points still kept.
pub fn convex_hull(points: &[Vector]) -> Result<ConvexBody> {
    let first = points.first().ok_or(Error::EmptyInput("convex hull points"))?;
    let dim = first.len();
    for p in points {
        check_dim(dim, p)?;
    }
    let extent = points
        .iter()
        .map(|p| linalg::max_abs_diff(p, first))
        .fold(0.0, f64::max);
    let tol = HULL_TOL * extent.max(1.0);
    let mut kept = linalg::dedup_points(points, tol);
    if kept.len() <= 2 {
        return Ok(ConvexBody::Polytope(kept));
    }
    let norm = NormSpec::euclidean(dim);
    // Points that uniquely maximize some coordinate direction are always
    // extreme; only the rest need a membership solve.
    let mut sure = vec![false; kept.len()];
    for k in 0..dim {
        for sign in [1.0, -1.0] {
            let mut dir = vec![0.0; dim];
            dir[k] = sign;
            let vals: Vec<f64> = kept.iter().map(|p| linalg::dot(p, &dir)).collect();
            let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let hits: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= best - tol).collect();
            if hits.len() == 1 {
                sure[hits[0]] = true;
            }
        }
    }
    let mut i = 0;
    while i < kept.len() && kept.len() > 1 {
        if sure[i] {
            i += 1;
            continue;
        }
        let others: Vec<Vector> = kept
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let d = conic::distance(&ConvexBody::point(kept[i].clone()), &ConvexBody::Polytope(others), &norm)?;
        if d.value <= tol {
            kept.remove(i);
            sure.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(ConvexBody::Polytope(kept))
}

/// Checks that no vertex is within tolerance of the hull of the others.
pub fn is_irredundant(verts: &[Vector]) -> Result<bool> {
    if verts.len() <= 1 {
        return Ok(true);
    }
    let norm = NormSpec::euclidean(verts[0].len());
    let extent = verts
        .iter()
        .map(|p| linalg::max_abs_diff(p, &verts[0]))
        .fold(0.0, f64::max);
    let tol = HULL_TOL * extent.max(1.0);
    let flags: Result<Vec<bool>> = (0..verts.len())
        .into_par_iter()
        .map(|i| {
            let others: Vec<Vector> = verts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| p.clone())
                .collect();
            let d = conic::distance(&ConvexBody::point(verts[i].clone()), &ConvexBody::Polytope(others), &norm)?;
            Ok(d.lower > tol || d.value > tol)
        })
        .collect();
    Ok(flags?.into_iter().all(|f| f))
}

/// The pair `(A, B)` together with its ambient norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodyPair {
    pub a: ConvexBody,
    pub b: ConvexBody,
    pub norm: NormSpec,
}

impl BodyPair {
    pub fn new(a: ConvexBody, b: ConvexBody, norm: NormSpec) -> Result<Self> {
        a.validate()?;
        b.validate()?;
        if a.dim() != norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: norm.dim(),
                found: a.dim(),
            });
        }
        if b.dim() != norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: norm.dim(),
                found: b.dim(),
            });
        }
        Ok(BodyPair {
            a: a.flatten(),
            b: b.flatten(),
            norm,
        })
    }

    pub fn swapped(&self) -> BodyPair {
        BodyPair {
            a: self.b.clone(),
            b: self.a.clone(),
            norm: self.norm.clone(),
        }
    }
}

/// Returns `h` with `B = A + h` within `tol`, if such a shift exists.
///
/// Polytopes are compared by their irredundant vertex sets and balls by
/// center and radius.
pub fn translate_offset(pair: &BodyPair, tol: f64) -> Option<Vector> {
    match (pair.a.flatten(), pair.b.flatten()) {
        (ConvexBody::Ball { center: ca, r: ra }, ConvexBody::Ball { center: cb, r: rb }) => {
            ((ra - rb).abs() <= tol).then(|| linalg::sub(&cb, &ca))
        }
        (ConvexBody::Polytope(va), ConvexBody::Polytope(vb)) => {
            let va = convex_hull(&va).ok()?.vertices()?;
            let vb = convex_hull(&vb).ok()?.vertices()?;
            if va.len() != vb.len() {
                return None;
            }
            let h = linalg::sub(&linalg::centroid(&vb), &linalg::centroid(&va));
            let matches = |from: &[Vector], to: &[Vector], s: f64| {
                from.iter().all(|p| {
                    let q = linalg::add(p, &linalg::scale(&h, s));
                    to.iter().any(|t| pair.norm.dist(&q, t) <= tol)
                })
            };
            (matches(&va, &vb, 1.0) && matches(&vb, &va, -1.0)).then_some(h)
        }
        _ => None,
    }
}
