//! Affine cyclic maps, certificates of relative nonexpansiveness, and best
//! proximity pairs by iterated orbit-hull shrinking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::{self, BodyPair, ConvexBody};
use crate::conic;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Vector};
use crate::metrics::{self, Budget};
use crate::norm::{Exponent, NormSpec};
use crate::structure;

/// Relative tolerance of the structural isometry checks.
const ISOMETRY_TOL: f64 = 1e-12;
/// Slack allowed on the one-step gap inequality.
const GAP_SLACK: f64 = 1e-9;
/// Tolerance of the d-preservation check.
const D_TOL: f64 = 1e-7;
/// Orbit rounds before the hull is declared non-stabilizing.
pub const MAX_ORBIT_ROUNDS: usize = 200;

/// `x -> M x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let m = AffineMap { matrix, offset };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self::translation(vec![0.0; dim])
    }

    pub fn translation(shift: Vec<f64>) -> Self {
        let n = shift.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        AffineMap { matrix, offset: shift }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.offset.len();
        if n == 0 {
            return Err(Error::InvalidMap("offset is empty".into()));
        }
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMap(format!("matrix must be {n}x{n}")));
        }
        if self.matrix.iter().flatten().chain(&self.offset).any(|x| !x.is_finite()) {
            return Err(Error::InvalidMap("non-finite entry".into()));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Vector {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| linalg::dot(row, x) + b)
            .collect()
    }

    /// Whether the linear part preserves `norm`.
    pub fn is_linear_isometry(&self, norm: &NormSpec) -> bool {
        let n = self.dim();
        let w = |i: usize| norm.weight(i);
        // Conjugate by the weights: ||x|| = |W x|_p, so M is an isometry iff
        // W M W^-1 is one for the unweighted norm.
        let c: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| w(i) * self.matrix[i][j] / w(j)).collect())
            .collect();
        if norm.p() == Exponent::Finite(2.0) {
            (0..n).all(|i| {
                (0..n).all(|j| {
                    let g: f64 = (0..n).map(|k| c[k][i] * c[k][j]).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    (g - e).abs() <= ISOMETRY_TOL
                })
            })
        } else {
            let unit = |x: f64| (x.abs() - 1.0).abs() <= ISOMETRY_TOL;
            let zero = |x: f64| x.abs() <= ISOMETRY_TOL;
            let rows = c.iter().all(|r| r.iter().filter(|&&x| unit(x)).count() == 1 && r.iter().all(|&x| unit(x) || zero(x)));
            let cols = (0..n).all(|j| (0..n).filter(|&i| unit(c[i][j])).count() == 1);
            rows && cols
        }
    }
}

/// How relative nonexpansiveness is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateMode {
    /// Prove it from the structure of the maps, falling back to an audit.
    #[serde(rename = "isometry")]
    Isometry,
    /// Sampled audit only.
    #[serde(rename = "audit")]
    Audit,
}

#[derive(Deserialize)]
struct RawMapSpec {
    #[serde(rename = "T_AB")]
    t_ab: AffineMap,
    #[serde(rename = "T_BA")]
    t_ba: AffineMap,
    mode: CertificateMode,
}

/// A cyclic map given by one affine map per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMapSpec")]
pub struct CyclicMapSpec {
    #[serde(rename = "T_AB")]
    pub t_ab: AffineMap,
    #[serde(rename = "T_BA")]
    pub t_ba: AffineMap,
    pub mode: CertificateMode,
}

impl TryFrom<RawMapSpec> for CyclicMapSpec {
    type Error = Error;

    fn try_from(r: RawMapSpec) -> Result<Self> {
        CyclicMapSpec::new(r.t_ab, r.t_ba, r.mode)
    }
}

impl CyclicMapSpec {
    pub fn new(t_ab: AffineMap, t_ba: AffineMap, mode: CertificateMode) -> Result<Self> {
        t_ab.validate()?;
        t_ba.validate()?;
        if t_ab.dim() != t_ba.dim() {
            return Err(Error::DimensionMismatch {
                expected: t_ab.dim(),
                found: t_ba.dim(),
            });
        }
        Ok(CyclicMapSpec { t_ab, t_ba, mode })
    }

    /// The same affine map on both sides.
    pub fn uniform(t: AffineMap, mode: CertificateMode) -> Self {
        CyclicMapSpec {
            t_ab: t.clone(),
            t_ba: t,
            mode,
        }
    }

    pub fn dim(&self) -> usize {
        self.t_ab.dim()
    }

    /// `T x` for `x` in `A`.
    pub fn on_a(&self, x: &[f64]) -> Vector {
        self.t_ab.apply(x)
    }

    /// `T y` for `y` in `B`.
    pub fn on_b(&self, y: &[f64]) -> Vector {
        self.t_ba.apply(y)
    }
}

fn probes(body: &ConvexBody, count: usize, seed: u64, norm: &NormSpec) -> Vec<Vector> {
    let mut out = structure::gens(body, norm);
    out.extend(body.sample(count, seed, norm));
    out
}

fn salt(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn image_inside(
    map: &AffineMap,
    points: &[Vector],
    target: &ConvexBody,
    norm: &NormSpec,
    tol: f64,
) -> Result<Option<Vector>> {
    let hits: Vec<bool> = points
        .par_iter()
        .map(|p| target.contains(&map.apply(p), norm, tol))
        .collect::<Result<_>>()?;
    Ok(hits.iter().position(|h| !h).map(|i| points[i].clone()))
}

/// Verifies `T(A) in B` and `T(B) in A` on the generators of each body plus
/// seeded samples.
pub fn check_cyclic(t: &CyclicMapSpec, pair: &BodyPair, budget: &Budget, tol: f64) -> Result<()> {
    if t.dim() != pair.norm.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.norm.dim(),
            found: t.dim(),
        });
    }
    let pa = probes(&pair.a, budget.samples, salt(budget.seed, 1), &pair.norm);
    if let Some(p) = image_inside(&t.t_ab, &pa, &pair.b, &pair.norm, tol)? {
        return Err(Error::NotCyclic { side: 'A', point: p });
    }
    let pb = probes(&pair.b, budget.samples, salt(budget.seed, 2), &pair.norm);
    if let Some(p) = image_inside(&t.t_ba, &pb, &pair.a, &pair.norm, tol)? {
        return Err(Error::NotCyclic { side: 'B', point: p });
    }
    Ok(())
}

/// Structural argument behind an isometry certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IsometryMethod {
    /// Both sides use one affine map whose linear part preserves the norm.
    SharedIsometry,
    /// The differences `a_i - b_j` of vertices and their images have equal
    /// Gram matrices, so one linear isometry carries `x - y` to `Tx - Ty`.
    Gram,
    /// A weighted signed permutation carries every `a_i - b_j` to its image.
    SignedPermutation,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonexpansiveCertificate {
    /// `||Tx - Ty|| = ||x - y||` for all `x` in `A`, `y` in `B`.
    Isometry {
        method: IsometryMethod,
        audit_samples: usize,
        audit_max_deviation: f64,
    },
    /// Sampled evidence only. `downgraded` marks an isometry request that
    /// could not be proved structurally.
    Audited {
        samples: usize,
        worst_ratio: f64,
        downgraded: bool,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub x: Vector,
    pub y: Vector,
    /// `||Tx - Ty||`.
    pub image_distance: f64,
    /// `||x - y||`.
    pub distance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NonexpansiveVerdict {
    Certified(NonexpansiveCertificate),
    Violation(Violation),
}

impl NonexpansiveVerdict {
    pub fn certificate(&self) -> Option<&NonexpansiveCertificate> {
        match self {
            NonexpansiveVerdict::Certified(c) => Some(c),
            NonexpansiveVerdict::Violation(_) => None,
        }
    }
}

/// Cyclicity first, then `||Tx - Ty|| <= ||x - y||` per the map's mode.
pub fn check_relatively_nonexpansive(
    t: &CyclicMapSpec,
    pair: &BodyPair,
    budget: &Budget,
    tol: f64,
) -> Result<NonexpansiveVerdict> {
    check_cyclic(t, pair, budget, tol)?;
    let audit = audit_pairs(t, pair, budget);
    if let Some(v) = audit.violation {
        return Ok(NonexpansiveVerdict::Violation(v));
    }
    let method = match t.mode {
        CertificateMode::Isometry => isometry_method(t, pair),
        CertificateMode::Audit => None,
    };
    let cert = match method {
        Some(method) => NonexpansiveCertificate::Isometry {
            method,
            audit_samples: audit.samples,
            audit_max_deviation: audit.max_deviation,
        },
        None => NonexpansiveCertificate::Audited {
            samples: audit.samples,
            worst_ratio: audit.worst_ratio,
            downgraded: t.mode == CertificateMode::Isometry,
        },
    };
    Ok(NonexpansiveVerdict::Certified(cert))
}

struct Audit {
    samples: usize,
    worst_ratio: f64,
    max_deviation: f64,
    violation: Option<Violation>,
}

fn audit_pairs(t: &CyclicMapSpec, pair: &BodyPair, budget: &Budget) -> Audit {
    let norm = &pair.norm;
    let xs = probes(&pair.a, budget.samples, salt(budget.seed, 3), norm);
    let ys = probes(&pair.b, budget.samples, salt(budget.seed, 4), norm);
    let txs: Vec<Vector> = xs.iter().map(|x| t.on_a(x)).collect();
    let tys: Vec<Vector> = ys.iter().map(|y| t.on_b(y)).collect();
    let rows: Vec<(usize, f64, f64, usize)> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = (0.0, 0.0, 0);
            let mut dev: f64 = 0.0;
            for j in 0..ys.len() {
                let lhs = norm.dist(&txs[i], &tys[j]);
                let rhs = norm.dist(&xs[i], &ys[j]);
                let ratio = if rhs > 0.0 {
                    lhs / rhs
                } else if lhs > 0.0 {
                    f64::INFINITY
                } else {
                    continue;
                };
                dev = dev.max((ratio - 1.0).abs());
                if ratio > worst.0 {
                    worst = (ratio, rhs, j);
                }
            }
            (i, worst.0, dev, worst.2)
        })
        .collect();
    let samples = xs.len() * ys.len();
    let max_deviation = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let (best, worst_ratio) = linalg::argmax_first(rows.iter().map(|r| r.1)).unwrap_or((0, 0.0));
    let violation = (worst_ratio > 1.0 + ISOMETRY_TOL)
        .then(|| {
            let (i, j) = (rows[best].0, rows[best].3);
            let (x, y) = (xs[i].clone(), ys[j].clone());
            // Re-evaluate from scratch before reporting.
            let image_distance = norm.dist(&t.on_a(&x), &t.on_b(&y));
            let distance = norm.dist(&x, &y);
            (image_distance > distance * (1.0 + ISOMETRY_TOL)).then(|| Violation {
                ratio: image_distance / distance,
                x,
                y,
                image_distance,
                distance,
            })
        })
        .flatten();
    Audit {
        samples,
        worst_ratio,
        max_deviation,
        violation,
    }
}

fn isometry_method(t: &CyclicMapSpec, pair: &BodyPair) -> Option<IsometryMethod> {
    let norm = &pair.norm;
    let same = linalg::max_abs_diff(&t.t_ab.offset, &t.t_ba.offset) == 0.0
        && t.t_ab.matrix == t.t_ba.matrix;
    if same && t.t_ab.is_linear_isometry(norm) {
        return Some(IsometryMethod::SharedIsometry);
    }
    let (va, vb) = (pair.a.vertices()?, pair.b.vertices()?);
    let mut from = Vec::with_capacity(va.len() * vb.len());
    let mut to = Vec::with_capacity(va.len() * vb.len());
    for a in &va {
        let ta = t.on_a(a);
        for b in &vb {
            from.push(linalg::sub(a, b));
            to.push(linalg::sub(&ta, &t.on_b(b)));
        }
    }
    let w: Vec<f64> = (0..norm.dim()).map(|i| norm.weight(i)).collect();
    let scale = |v: &Vector| -> Vector { v.iter().zip(&w).map(|(x, w)| x * w).collect() };
    let from: Vec<Vector> = from.iter().map(scale).collect();
    let to: Vec<Vector> = to.iter().map(scale).collect();
    if norm.p() == Exponent::Finite(2.0) {
        gram_match(&from, &to).then_some(IsometryMethod::Gram)
    } else {
        signed_permutation(&from, &to).then_some(IsometryMethod::SignedPermutation)
    }
}

/// Equal Gram matrices: a linear isometry of the span maps `from` to `to`.
fn gram_match(from: &[Vector], to: &[Vector]) -> bool {
    let big = from
        .iter()
        .chain(to)
        .map(|v| linalg::dot(v, v))
        .fold(1.0, f64::max);
    let eps = ISOMETRY_TOL * big;
    (0..from.len()).into_par_iter().all(|k| {
        (k..from.len()).all(|l| (linalg::dot(&from[k], &from[l]) - linalg::dot(&to[k], &to[l])).abs() <= eps)
    })
}

/// A signed permutation `P` with `P from_k = to_k` for every `k`, by
/// backtracking over coordinates.
fn signed_permutation(from: &[Vector], to: &[Vector]) -> bool {
    let n = from.first().map_or(0, |v| v.len());
    let big = from
        .iter()
        .chain(to)
        .flat_map(|v| v.iter().map(|x| x.abs()))
        .fold(1.0, f64::max);
    let eps = ISOMETRY_TOL * big;
    let fits = |i: usize, j: usize, s: f64| from.iter().zip(to).all(|(f, t)| (t[j] - s * f[i]).abs() <= eps);
    fn go(i: usize, n: usize, used: &mut Vec<bool>, fits: &dyn Fn(usize, usize, f64) -> bool) -> bool {
        if i == n {
            return true;
        }
        for j in 0..n {
            if used[j] {
                continue;
            }
            for s in [1.0, -1.0] {
                if fits(i, j, s) {
                    used[j] = true;
                    if go(i + 1, n, used, fits) {
                        return true;
                    }
                    used[j] = false;
                }
            }
        }
        false
    }
    go(0, n, &mut vec![false; n], &fits)
}

/// The refined pair `z1 = (u + v')/2`, `z2 = (u' + v)/2`.
#[derive(Debug, Clone, Serialize)]
pub struct Midpoint {
    pub z1: Vector,
    pub z2: Vector,
    /// Mate of `u` in `K`.
    pub u_mate: Vector,
    /// Mate of `v` in `H`.
    pub v_mate: Vector,
    /// `||z1 - z2||`.
    pub separation: f64,
    /// `delta(z1, K)`.
    pub radius_z1: f64,
    /// `delta(z2, H)`.
    pub radius_z2: f64,
}

fn mate(x: &[f64], other: &ConvexBody, norm: &NormSpec, limit: f64) -> Result<Vector> {
    let p = other.project(x, norm)?;
    if p.value <= limit {
        Ok(p.y)
    } else {
        Err(Error::NoMate {
            point: x.to_vec(),
            distance: p.value,
        })
    }
}

/// Averages `u` with the mate of `v` and `v` with the mate of `u`; mates are
/// nearest points in the other body, accepted within `d + tol`.
pub fn midpoint_refine(
    h: &ConvexBody,
    k: &ConvexBody,
    u: &[f64],
    v: &[f64],
    norm: &NormSpec,
    d: f64,
    tol: f64,
) -> Result<Midpoint> {
    check_dim(norm.dim(), u)?;
    check_dim(norm.dim(), v)?;
    let u_mate = mate(u, k, norm, d + tol)?;
    let v_mate = mate(v, h, norm, d + tol)?;
    let z1 = linalg::midpoint(u, &v_mate);
    let z2 = linalg::midpoint(&u_mate, v);
    let separation = norm.dist(&z1, &z2);
    if (separation - d).abs() > tol {
        return Err(Error::GapNotClosed {
            context: "midpoint separation",
            gap: (separation - d).abs(),
            tol,
        });
    }
    Ok(Midpoint {
        radius_z1: metrics::point_radius(&z1, k, norm)?,
        radius_z2: metrics::point_radius(&z2, h, norm)?,
        z1,
        z2,
        u_mate,
        v_mate,
        separation,
    })
}

/// Checks recorded by one shrinking step.
#[derive(Debug, Clone, Serialize)]
pub struct StepCertificate {
    pub c: f64,
    pub gap_before: f64,
    pub gap_after: f64,
    /// `gap_after <= c gap_before + 1e-9`.
    pub gap_ok: bool,
    /// Every orbit pair satisfies the admissibility inequalities.
    pub filter_ok: bool,
    /// `T` maps the generators and samples of each new body into the other.
    pub invariance_ok: bool,
    /// `d(H1, K1)` equals `d` within `1e-7`.
    pub d_ok: bool,
    pub d_after: f64,
    pub orbit_rounds: usize,
    pub orbit_points: usize,
    pub midpoint: Option<Midpoint>,
}

impl StepCertificate {
    pub fn passed(&self) -> bool {
        self.gap_ok && self.filter_ok && self.invariance_ok && self.d_ok
    }

    pub fn ratio(&self) -> f64 {
        if self.gap_before > 0.0 {
            self.gap_after / self.gap_before
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Step {
    pub h1: ConvexBody,
    pub k1: ConvexBody,
    pub certificate: StepCertificate,
}

/// The forward orbit of `(z1, z2)`: pairs `(a_n, b_n)` with
/// `(a_{n+1}, b_{n+1}) = (T b_n, T a_n)`, stopped once a new pair lies within
/// `tol` of the hulls already built. Every pair is within `d` of its partner.
fn orbit(
    t: &CyclicMapSpec,
    z1: &[f64],
    z2: &[f64],
    norm: &NormSpec,
    tol: f64,
) -> Result<(Vec<Vector>, Vec<Vector>, usize)> {
    let mut xs = vec![z1.to_vec()];
    let mut ys = vec![z2.to_vec()];
    let (mut a, mut b) = (z1.to_vec(), z2.to_vec());
    for round in 1..=MAX_ORBIT_ROUNDS {
        (a, b) = (t.on_b(&b), t.on_a(&a));
        let in_a = ConvexBody::Polytope(xs.clone()).contains(&a, norm, tol)?;
        let in_b = ConvexBody::Polytope(ys.clone()).contains(&b, norm, tol)?;
        if in_a && in_b {
            return Ok((xs, ys, round));
        }
        xs.push(a.clone());
        ys.push(b.clone());
    }
    Err(Error::OrbitNotStabilized {
        rounds: MAX_ORBIT_ROUNDS,
    })
}

/// One shrinking step on a `T`-invariant proximal pair `(H, K)` at distance `d`.
///
/// Takes the two restricted Chebyshev centers, refines them to a matched pair
/// `(z1, z2)`, and replaces `(H, K)` by the hulls of the `T`-orbit of that
/// pair, which is the smallest closed convex `T`-invariant proximal pair
/// containing it. The certificate records the admissibility filter, the gap
/// inequality, invariance and d-preservation.
#[allow(clippy::too_many_arguments)]
pub fn shrink_step(
    h: &ConvexBody,
    k: &ConvexBody,
    t: &CyclicMapSpec,
    norm: &NormSpec,
    d: f64,
    c: f64,
    tol: f64,
    budget: &Budget,
) -> Result<Step> {
    let gap_before = metrics::diameter(h, k, norm).0 - d;
    if h.is_singleton(0.0) && k.is_singleton(0.0) {
        return Ok(Step {
            h1: h.clone(),
            k1: k.clone(),
            certificate: StepCertificate {
                c,
                gap_before,
                gap_after: gap_before,
                gap_ok: true,
                filter_ok: true,
                invariance_ok: true,
                d_ok: true,
                d_after: d + gap_before,
                orbit_rounds: 0,
                orbit_points: 1,
                midpoint: None,
            },
        });
    }
    let u = metrics::restricted_radius(h, k, norm, tol)?.center;
    let v = metrics::restricted_radius(k, h, norm, tol)?.center;
    let mid = midpoint_refine(h, k, &u, &v, norm, d, tol)?;
    let (xs, ys, rounds) = orbit(t, &mid.z1, &mid.z2, norm, tol)?;
    let h1 = body::convex_hull(&xs)?;
    let k1 = body::convex_hull(&ys)?;

    let bound = d + c * gap_before + GAP_SLACK;
    let (tk, th) = (metrics::far_targets(&k1), metrics::far_targets(&h1));
    let filter_ok = xs
        .iter()
        .zip(&ys)
        .all(|(x, y)| conic::far_value(x, &tk, norm) <= bound && conic::far_value(y, &th, norm) <= bound);
    let gap_after = metrics::diameter(&h1, &k1, norm).0 - d;
    let gap_ok = gap_after <= c * gap_before + GAP_SLACK;

    let ph = probes(&h1, 4, salt(budget.seed, 5), norm);
    let pk = probes(&k1, 4, salt(budget.seed, 6), norm);
    let invariance_ok = image_inside(&t.t_ab, &ph, &k1, norm, tol)?.is_none()
        && image_inside(&t.t_ba, &pk, &h1, norm, tol)?.is_none();
    let d_after = conic::distance(&h1, &k1, norm)?.value;
    let d_ok = (d_after - d).abs() <= D_TOL;

    Ok(Step {
        certificate: StepCertificate {
            c,
            gap_before,
            gap_after,
            gap_ok,
            filter_ok,
            invariance_ok,
            d_ok,
            d_after,
            orbit_rounds: rounds,
            orbit_points: xs.len(),
            midpoint: Some(mid),
        },
        h1,
        k1,
    })
}

/// `c = max((3 + n_hat)/4, 0.75) + 1e-3`, capped below 1.
pub fn contraction_constant(n_hat: f64) -> f64 {
    ((3.0 + n_hat) / 4.0).clamp(0.75, 1.0) + 1e-3
}

fn capped(c: f64) -> f64 {
    c.min(1.0 - 1e-9)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub budget: Budget,
    /// Sub-pairs drawn to estimate `N` when `c` is not given.
    pub structure_samples: usize,
    pub c: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: crate::DEFAULT_TOL,
            max_iter: 60,
            budget: Budget::default(),
            structure_samples: 64,
            c: None,
        }
    }
}

/// One recorded level of a solve.
#[derive(Debug, Clone, Serialize)]
pub struct ShrinkRecord {
    #[serde(rename = "level")]
    pub n: usize,
    #[serde(rename = "delta")]
    pub delta_n: f64,
    #[serde(rename = "d")]
    pub d_n: f64,
    /// `delta_n - d`.
    pub gap: f64,
    /// `c^n (delta_0 - d)` plus `n` times the per-step slack.
    pub bound: f64,
    #[serde(rename = "ok")]
    pub within_bound: bool,
    pub invariance_ok: bool,
    pub pair_snapshot: (ConvexBody, ConvexBody),
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveOutcome {
    Converged {
        x_star: Vector,
        y_star: Vector,
        /// `||x* - Tx*|| - d`.
        residual_x: f64,
        /// `||y* - Ty*|| - d`.
        residual_y: f64,
    },
    BudgetExhausted,
    CertificateFailed { level: usize, reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct ShrinkTrace {
    pub iterations: Vec<ShrinkRecord>,
    pub c_used: f64,
    /// Sampled lower bound on `N` the constant was derived from.
    pub n_hat: Option<f64>,
    /// `(3 + n_hat)/4`. `n_hat` is a lower bound on `N`, so the constant built
    /// from the true `N` may exceed `c_used`; the step certificates decide.
    pub c_target: Option<f64>,
    pub d: f64,
    pub tol: f64,
    /// The pair was not proximal and the solve ran on its proximal core.
    pub on_core: bool,
    pub nonexpansive: NonexpansiveCertificate,
    pub steps: Vec<StepCertificate>,
    pub outcome: SolveOutcome,
}

impl ShrinkTrace {
    pub fn certified(&self) -> bool {
        matches!(self.outcome, SolveOutcome::Converged { .. })
    }

    pub fn solution(&self) -> Option<(&Vector, &Vector)> {
        match &self.outcome {
            SolveOutcome::Converged { x_star, y_star, .. } => Some((x_star, y_star)),
            _ => None,
        }
    }
}

/// Best proximity pair of a relatively nonexpansive affine cyclic map.
///
/// Shrinks `(A, B)` (or its proximal core) until `delta_n - d <= tol`, then
/// returns the Chebyshev center `x*` of the final `H_n` and `y* = Tx*`, both
/// re-verified against `d + 2 tol`.
pub fn solve_bpp(pair: &BodyPair, t: &CyclicMapSpec, opts: &SolveOptions) -> Result<ShrinkTrace> {
    let tol = opts.tol;
    let norm = &pair.norm;
    let nonexpansive = match check_relatively_nonexpansive(t, pair, &opts.budget, tol)? {
        NonexpansiveVerdict::Certified(c) => c,
        NonexpansiveVerdict::Violation(v) => {
            return Err(Error::InvalidMap(format!(
                "not relatively nonexpansive: ||Tx - Ty|| / ||x - y|| = {} at x = {:?}, y = {:?}",
                v.ratio, v.x, v.y
            )))
        }
    };
    let core = metrics::proximal_core(pair, tol, &opts.budget)?;
    let on_core = !(core.covers_a() && core.covers_b());
    let work = if on_core {
        BodyPair::new(core.a0.clone(), core.b0.clone(), norm.clone())?
    } else {
        pair.clone()
    };
    let d = core.d;

    let (c_used, n_hat) = match opts.c {
        Some(c) => (capped(c), None),
        None => {
            let n = match structure::estimate_n(&work, &core, None, opts.structure_samples, opts.budget.seed, tol) {
                Ok(e) => e.n_hat,
                Err(Error::DegeneratePair) => 0.0,
                Err(e) => return Err(e),
            };
            (capped(contraction_constant(n)), Some(n))
        }
    };

    let (mut h, mut k) = (work.a.clone(), work.b.clone());
    let delta0 = metrics::diameter(&h, &k, norm).0;
    let gap0 = delta0 - d;
    let mut iterations = vec![ShrinkRecord {
        n: 0,
        delta_n: delta0,
        d_n: d,
        gap: gap0,
        bound: gap0,
        within_bound: true,
        invariance_ok: true,
        pair_snapshot: (h.clone(), k.clone()),
    }];
    let mut steps = Vec::new();
    let mut gap = gap0;
    let mut outcome = None;
    for n in 1..=opts.max_iter {
        if gap <= tol {
            break;
        }
        let step = match shrink_step(&h, &k, t, norm, d, c_used, tol, &opts.budget) {
            Ok(s) => s,
            Err(e @ Error::OrbitNotStabilized { .. }) => {
                outcome = Some(SolveOutcome::CertificateFailed {
                    level: n,
                    reason: e.to_string(),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        let cert = step.certificate;
        gap = cert.gap_after;
        let bound = c_used.powi(n as i32) * gap0 + n as f64 * GAP_SLACK;
        iterations.push(ShrinkRecord {
            n,
            delta_n: d + gap,
            d_n: cert.d_after,
            gap,
            bound,
            within_bound: gap <= bound,
            invariance_ok: cert.invariance_ok,
            pair_snapshot: (step.h1.clone(), step.k1.clone()),
        });
        let passed = cert.passed();
        let reason = failed_checks(&cert);
        steps.push(cert);
        if !passed {
            outcome = Some(SolveOutcome::CertificateFailed { level: n, reason });
            break;
        }
        (h, k) = (step.h1, step.k1);
    }

    let outcome = match outcome {
        Some(o) => o,
        None if gap > tol => SolveOutcome::BudgetExhausted,
        None => finish(pair, t, &h, &k, d, tol, iterations.len() - 1)?,
    };
    Ok(ShrinkTrace {
        iterations,
        c_used,
        n_hat,
        c_target: n_hat.map(|n| (3.0 + n) / 4.0),
        d,
        tol,
        on_core,
        nonexpansive,
        steps,
        outcome,
    })
}

fn failed_checks(c: &StepCertificate) -> String {
    let mut out = Vec::new();
    if !c.gap_ok {
        out.push(format!("gap {} exceeds c * {}", c.gap_after, c.gap_before));
    }
    if !c.filter_ok {
        out.push("orbit pair outside the admissible set".to_string());
    }
    if !c.invariance_ok {
        out.push("hull pair not T-invariant".to_string());
    }
    if !c.d_ok {
        out.push(format!("distance changed to {}", c.d_after));
    }
    out.join("; ")
}

fn finish(
    pair: &BodyPair,
    t: &CyclicMapSpec,
    h: &ConvexBody,
    k: &ConvexBody,
    d: f64,
    tol: f64,
    level: usize,
) -> Result<SolveOutcome> {
    let norm = &pair.norm;
    let x = if h.is_singleton(0.0) {
        structure::gens(h, norm).swap_remove(0)
    } else {
        metrics::restricted_radius(h, k, norm, tol)?.center
    };
    let y = t.on_a(&x);
    let residual_x = norm.dist(&x, &y) - d;
    let residual_y = norm.dist(&y, &t.on_b(&y)) - d;
    let mut bad = Vec::new();
    if residual_x > 2.0 * tol {
        bad.push(format!("||x* - Tx*|| - d = {residual_x}"));
    }
    if residual_y > 2.0 * tol {
        bad.push(format!("||y* - Ty*|| - d = {residual_y}"));
    }
    if !pair.a.contains(&x, norm, tol)? {
        bad.push("x* outside A".to_string());
    }
    if !pair.b.contains(&y, norm, tol)? {
        bad.push("Tx* outside B".to_string());
    }
    Ok(if bad.is_empty() {
        SolveOutcome::Converged {
            x_star: x,
            y_star: y,
            residual_x,
            residual_y,
        }
    } else {
        SolveOutcome::CertificateFailed {
            level,
            reason: bad.join("; "),
        }
    })
}
