//! Conic programs over convex bodies, solved with Clarabel.
//!
//! Every optimal value returned here is recomputed exactly from a primal
//! point that lies in its body, and is paired with an independent lower bound
//! built from support functions. The solver's own reported objective is never
//! trusted.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use serde::Serialize;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::norm::{Exponent, NormSpec};

/// Affine expression `c + sum a_i x_i` in the program variables.
#[derive(Debug, Clone, Default)]
pub(crate) struct Aff {
    terms: Vec<(usize, f64)>,
    c: f64,
}

impl Aff {
    pub(crate) fn var(i: usize) -> Self {
        Aff {
            terms: vec![(i, 1.0)],
            c: 0.0,
        }
    }

    pub(crate) fn constant(c: f64) -> Self {
        Aff {
            terms: Vec::new(),
            c,
        }
    }

    pub(crate) fn add_term(&mut self, i: usize, a: f64) {
        if a != 0.0 {
            self.terms.push((i, a));
        }
    }

    pub(crate) fn plus(mut self, other: &Aff, s: f64) -> Aff {
        self.c += s * other.c;
        for &(i, a) in &other.terms {
            self.add_term(i, s * a);
        }
        self
    }

    fn scaled(mut self, s: f64) -> Aff {
        self.c *= s;
        self.terms.iter_mut().for_each(|t| t.1 *= s);
        self
    }
}

enum Block {
    Zero(Vec<Aff>),
    Nonneg(Vec<Aff>),
    Soc(Vec<Aff>),
    Pow(f64, [Aff; 3]),
}

impl Block {
    fn rows(&self) -> &[Aff] {
        match self {
            Block::Zero(r) | Block::Nonneg(r) | Block::Soc(r) => r,
            Block::Pow(_, r) => r,
        }
    }
}

/// `minimize q'x` subject to affine expressions lying in cones.
#[derive(Default)]
pub(crate) struct Program {
    nvars: usize,
    q: Vec<f64>,
    blocks: Vec<Block>,
}

pub(crate) struct Solved {
    pub x: Vec<f64>,
    duals: Vec<Vec<f64>>,
    pub iterations: u32,
}

impl Solved {
    pub(crate) fn dual(&self, block: usize) -> &[f64] {
        &self.duals[block]
    }
}

impl Program {
    pub(crate) fn vars(&mut self, k: usize) -> usize {
        let start = self.nvars;
        self.nvars += k;
        self.q.resize(self.nvars, 0.0);
        start
    }

    pub(crate) fn set_cost(&mut self, i: usize, c: f64) {
        self.q[i] = c;
    }

    fn push(&mut self, b: Block) -> usize {
        self.blocks.push(b);
        self.blocks.len() - 1
    }

    pub(crate) fn zero(&mut self, rows: Vec<Aff>) -> usize {
        self.push(Block::Zero(rows))
    }

    pub(crate) fn nonneg(&mut self, rows: Vec<Aff>) -> usize {
        self.push(Block::Nonneg(rows))
    }

    /// `||expr|| <= t` in the ambient norm.
    pub(crate) fn norm_le(&mut self, norm: &NormSpec, expr: &[Aff], t: Aff) {
        let u: Vec<Aff> = expr
            .iter()
            .enumerate()
            .map(|(i, e)| e.clone().scaled(norm.weight(i)))
            .collect();
        match norm.p() {
            Exponent::Finite(2.0) => {
                let mut rows = vec![t];
                rows.extend(u);
                self.push(Block::Soc(rows));
            }
            Exponent::Infinity => {
                let rows = u
                    .iter()
                    .flat_map(|e| [t.clone().plus(e, -1.0), t.clone().plus(e, 1.0)])
                    .collect();
                self.nonneg(rows);
            }
            Exponent::Finite(p) => {
                let s = self.vars(u.len());
                let mut budget = t.clone();
                for i in 0..u.len() {
                    budget.add_term(s + i, -1.0);
                }
                if p == 1.0 {
                    let mut rows: Vec<Aff> = u
                        .iter()
                        .enumerate()
                        .flat_map(|(i, e)| {
                            [
                                Aff::var(s + i).plus(e, -1.0),
                                Aff::var(s + i).plus(e, 1.0),
                            ]
                        })
                        .collect();
                    rows.push(budget);
                    self.nonneg(rows);
                } else {
                    for (i, e) in u.iter().enumerate() {
                        self.push(Block::Pow(1.0 / p, [Aff::var(s + i), t.clone(), e.clone()]));
                    }
                    self.nonneg(vec![budget]);
                }
            }
        }
    }

    pub(crate) fn solve(&self, context: &'static str) -> Result<Solved> {
        let mut ii = Vec::new();
        let mut jj = Vec::new();
        let mut vv = Vec::new();
        let mut b = Vec::new();
        let mut cones = Vec::new();
        let mut row = 0;
        for block in &self.blocks {
            for e in block.rows() {
                for &(j, a) in &e.terms {
                    ii.push(row);
                    jj.push(j);
                    vv.push(-a);
                }
                b.push(e.c);
                row += 1;
            }
            let k = block.rows().len();
            cones.push(match block {
                Block::Zero(_) => SupportedConeT::ZeroConeT(k),
                Block::Nonneg(_) => SupportedConeT::NonnegativeConeT(k),
                Block::Soc(_) => SupportedConeT::SecondOrderConeT(k),
                Block::Pow(alpha, _) => SupportedConeT::PowerConeT(*alpha),
            });
        }
        let a = CscMatrix::new_from_triplets(row, self.nvars, ii, jj, vv);
        let p = CscMatrix::zeros((self.nvars, self.nvars));
        let settings = DefaultSettings {
            verbose: false,
            tol_gap_abs: 1e-11,
            tol_gap_rel: 1e-11,
            tol_feas: 1e-11,
            max_iter: 200,
            ..Default::default()
        };
        let mut solver = DefaultSolver::new(&p, &self.q, &a, &b, &cones, settings)
            .map_err(|e| Error::Solver {
                context,
                status: format!("setup: {e:?}"),
            })?;
        solver.solve();
        let sol = &solver.solution;
        match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => {}
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                return Err(Error::Solver {
                    context,
                    status: "infeasible".into(),
                })
            }
            other => {
                return Err(Error::Solver {
                    context,
                    status: format!("{other:?}"),
                })
            }
        }
        let mut duals = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for block in &self.blocks {
            let k = block.rows().len();
            duals.push(sol.z[at..at + k].to_vec());
            at += k;
        }
        Ok(Solved {
            x: sol.x.clone(),
            duals,
            iterations: sol.iterations,
        })
    }
}

/// A point constrained to lie in a body, as affine expressions in the
/// program variables.
pub(crate) enum Handle {
    Fixed(Vector),
    Hull { start: usize, verts: Vec<Vector> },
    Ball { start: usize, center: Vector, r: f64 },
}

impl Handle {
    pub(crate) fn new(prog: &mut Program, body: &ConvexBody, norm: &NormSpec) -> Handle {
        match body.flatten() {
            ConvexBody::Polytope(v) if v.len() == 1 => Handle::Fixed(v[0].clone()),
            ConvexBody::Polytope(verts) => {
                let start = prog.vars(verts.len());
                prog.nonneg((0..verts.len()).map(|i| Aff::var(start + i)).collect());
                let mut sum = Aff::constant(-1.0);
                for i in 0..verts.len() {
                    sum.add_term(start + i, 1.0);
                }
                prog.zero(vec![sum]);
                Handle::Hull { start, verts }
            }
            ConvexBody::Ball { center, r } => {
                let n = center.len();
                let start = prog.vars(n);
                let u: Vec<Aff> = (0..n).map(|i| Aff::var(start + i)).collect();
                prog.norm_le(norm, &u, Aff::constant(r));
                Handle::Ball { start, center, r }
            }
            ConvexBody::Translate { .. } => unreachable!("flatten removes translates"),
        }
    }

    pub(crate) fn expr(&self) -> Vec<Aff> {
        match self {
            Handle::Fixed(v) => v.iter().map(|&c| Aff::constant(c)).collect(),
            Handle::Hull { start, verts } => {
                let n = verts[0].len();
                (0..n)
                    .map(|k| {
                        let mut e = Aff::default();
                        for (i, v) in verts.iter().enumerate() {
                            e.add_term(start + i, v[k]);
                        }
                        e
                    })
                    .collect()
            }
            Handle::Ball { start, center, .. } => center
                .iter()
                .enumerate()
                .map(|(i, &c)| Aff::var(start + i).plus(&Aff::constant(c), 1.0))
                .collect(),
        }
    }

    /// Maps a solver iterate to a point that lies in the body exactly.
    pub(crate) fn recover(&self, x: &[f64], norm: &NormSpec) -> Vector {
        match self {
            Handle::Fixed(v) => v.clone(),
            Handle::Hull { start, verts } => {
                let mut w: Vec<f64> = x[*start..start + verts.len()]
                    .iter()
                    .map(|&l| l.max(0.0))
                    .collect();
                let total: f64 = w.iter().sum();
                if total <= 0.0 {
                    return verts[0].clone();
                }
                w.iter_mut().for_each(|l| *l /= total);
                // Snap to a vertex when the weights are numerically one-hot.
                if let Some(k) = w.iter().position(|&l| l > 1.0 - 1e-10) {
                    return verts[k].clone();
                }
                linalg::combine(verts, &w)
            }
            Handle::Ball { start, center, r } => {
                let u = &x[*start..start + center.len()];
                let nu = norm.eval(u);
                let s = if nu > *r && nu > 0.0 { r / nu } else { 1.0 };
                linalg::add(center, &linalg::scale(u, s))
            }
        }
    }
}

/// Minimal distance between two bodies with a two-sided certificate.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceCert {
    /// `||x - y||` evaluated at the returned points.
    pub value: f64,
    /// Certified lower bound on the true minimum.
    pub lower: f64,
    pub x: Vector,
    pub y: Vector,
    pub iterations: u32,
}

impl DistanceCert {
    pub fn gap(&self) -> f64 {
        (self.value - self.lower).max(0.0)
    }
}

/// Weak-duality bound `-h_A(-w) - h_B(w)` for a dual-feasible functional.
fn separation_bound(a: &ConvexBody, b: &ConvexBody, w: &[f64], norm: &NormSpec) -> f64 {
    let s = norm.dual_norm(w);
    if s.is_nan() || s <= 0.0 || !s.is_finite() {
        return 0.0;
    }
    let w = linalg::scale(w, 1.0 / s);
    let neg = linalg::scale(&w, -1.0);
    let ha = a.support_value(&neg, norm);
    let hb = b.support_value(&w, norm);
    -ha - hb
}

/// Solves the square system `m z = rhs` by Gaussian elimination with partial
/// pivoting; `None` when a pivot falls below `tiny`.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>, tiny: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= tiny {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                let (top, bottom) = m.split_at_mut(r);
                for (x, y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * y;
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut z = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * z[c]).sum();
        z[r] = (rhs[r] - s) / m[r][r];
    }
    Some(z)
}

/// Weights of the point of smallest norm in the affine hull of `p[s]`.
fn affine_minimizer(p: &[Vector], s: &[usize], tiny: f64) -> Option<Vec<f64>> {
    let k = s.len();
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = linalg::dot(&p[s[i]], &p[s[j]]);
        }
        m[i][k] = 1.0;
        m[k][i] = 1.0;
    }
    let mut rhs = vec![0.0; k + 1];
    rhs[k] = 1.0;
    let z = solve_dense(m, rhs, tiny)?;
    Some(z[..k].to_vec())
}

/// Convex weights of the Euclidean nearest point of `conv(p)` to the origin
/// (Wolfe's minimum-norm-point algorithm). `None` if the active system
/// degenerates numerically.
pub(crate) fn min_norm_point(p: &[Vector]) -> Option<Vec<f64>> {
    let scale = p.iter().map(|v| linalg::dot(v, v)).fold(0.0, f64::max);
    if scale == 0.0 {
        let mut w = vec![0.0; p.len()];
        w[0] = 1.0;
        return Some(w);
    }
    let tiny = 1e-14 * scale;
    let start = p
        .iter()
        .enumerate()
        .min_by(|a, b| linalg::dot(a.1, a.1).total_cmp(&linalg::dot(b.1, b.1)))?
        .0;
    let mut s = vec![start];
    let mut lam = vec![1.0];
    let mut x = p[start].clone();
    for _ in 0..(20 * p.len() + 100) {
        let (j, v) = p
            .iter()
            .enumerate()
            .map(|(i, q)| (i, linalg::dot(&x, q)))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if linalg::dot(&x, &x) - v <= 1e-15 * scale || s.contains(&j) {
            break;
        }
        s.push(j);
        lam.push(0.0);
        loop {
            let mu = affine_minimizer(p, &s, tiny)?;
            if mu.iter().all(|&m| m > 0.0) {
                lam = mu;
                break;
            }
            let theta = lam
                .iter()
                .zip(&mu)
                .filter(|(_, &m)| m <= 0.0)
                .map(|(&l, &m)| l / (l - m))
                .fold(1.0, f64::min);
            for (l, m) in lam.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let keep: Vec<bool> = lam.iter().map(|&l| l > 1e-15).collect();
            if keep.iter().all(|&k| k) {
                // Guarantee progress: drop the smallest weight.
                let (i, _) = lam.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
                s.remove(i);
                lam.remove(i);
            } else {
                let mut i = 0;
                s.retain(|_| {
                    i += 1;
                    keep[i - 1]
                });
                lam.retain(|&l| l > 1e-15);
            }
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= total);
            if s.len() == 1 {
                break;
            }
        }
        x = vec![0.0; x.len()];
        for (&i, &l) in s.iter().zip(&lam) {
            x = linalg::add(&x, &linalg::scale(&p[i], l));
        }
    }
    let mut w = vec![0.0; p.len()];
    for (&i, &l) in s.iter().zip(&lam) {
        w[i] = l;
    }
    Some(w)
}

/// Exact Euclidean distance between two polytopes through the minimum-norm
/// point of their (weighted) difference set.
fn hilbert_polytope_distance(a: &[Vector], b: &[Vector], norm: &NormSpec) -> Option<(Vector, Vector)> {
    if a.len() * b.len() > 4096 {
        return None;
    }
    let w: Vec<f64> = (0..norm.dim()).map(|i| norm.weight(i)).collect();
    let mut diffs = Vec::with_capacity(a.len() * b.len());
    for p in a {
        for q in b {
            diffs.push(p.iter().zip(q).zip(&w).map(|((x, y), w)| w * (x - y)).collect());
        }
    }
    let lam = min_norm_point(&diffs)?;
    let mut x = vec![0.0; norm.dim()];
    let mut y = vec![0.0; norm.dim()];
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            let l = lam[i * b.len() + j];
            if l > 0.0 {
                x = linalg::add(&x, &linalg::scale(p, l));
                y = linalg::add(&y, &linalg::scale(q, l));
            }
        }
    }
    Some((x, y))
}

/// `min ||x - y||` over `x in a`, `y in b`.
pub fn distance(a: &ConvexBody, b: &ConvexBody, norm: &NormSpec) -> Result<DistanceCert> {
    if norm.is_hilbert() {
        if let (ConvexBody::Polytope(pa), ConvexBody::Polytope(pb)) = (a.flatten(), b.flatten()) {
            if let Some((x, y)) = hilbert_polytope_distance(&pa, &pb, norm) {
                let diff = linalg::sub(&x, &y);
                let value = norm.eval(&diff);
                let w = norm.subgradient(&diff);
                let lower = separation_bound(a, b, &w, norm).max(0.0).min(value);
                if value - lower <= 1e-12 * value.max(1.0) {
                    return Ok(DistanceCert {
                        value,
                        lower,
                        x,
                        y,
                        iterations: 0,
                    });
                }
            }
        }
    }
    let mut prog = Program::default();
    let ha = Handle::new(&mut prog, a, norm);
    let hb = Handle::new(&mut prog, b, norm);
    if let (Handle::Fixed(x), Handle::Fixed(y)) = (&ha, &hb) {
        let value = norm.dist(x, y);
        return Ok(DistanceCert {
            value,
            lower: value,
            x: x.clone(),
            y: y.clone(),
            iterations: 0,
        });
    }
    let n = norm.dim();
    let z = prog.vars(n);
    let t = prog.vars(1);
    prog.set_cost(t, 1.0);
    let (xa, xb) = (ha.expr(), hb.expr());
    let link = prog.zero(
        (0..n)
            .map(|k| Aff::var(z + k).plus(&xa[k], -1.0).plus(&xb[k], 1.0))
            .collect(),
    );
    let zs: Vec<Aff> = (0..n).map(|k| Aff::var(z + k)).collect();
    prog.norm_le(norm, &zs, Aff::var(t));
    let sol = prog.solve("distance")?;
    let x = ha.recover(&sol.x, norm);
    let y = hb.recover(&sol.x, norm);
    let diff = linalg::sub(&x, &y);
    let value = norm.eval(&diff);
    let nu = sol.dual(link).to_vec();
    let mut lower = 0.0f64;
    for w in [
        norm.subgradient(&diff),
        nu.clone(),
        linalg::scale(&nu, -1.0),
    ] {
        lower = lower.max(separation_bound(a, b, &w, norm));
    }
    Ok(DistanceCert {
        value,
        lower: lower.min(value),
        x,
        y,
        iterations: sol.iterations,
    })
}

/// `min_{x in h} max_j (||x - k_j|| + rho_j)` with a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusCert {
    pub value: f64,
    pub lower: f64,
    pub center: Vector,
    pub iterations: u32,
}

impl RadiusCert {
    pub fn gap(&self) -> f64 {
        (self.value - self.lower).max(0.0)
    }
}

pub(crate) fn far_value(x: &[f64], targets: &[(Vector, f64)], norm: &NormSpec) -> f64 {
    targets
        .iter()
        .map(|(k, rho)| norm.dist(x, k) + rho)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn minimax_radius(
    h: &ConvexBody,
    targets: &[(Vector, f64)],
    norm: &NormSpec,
) -> Result<RadiusCert> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("radius targets"));
    }
    let mut prog = Program::default();
    let hx = Handle::new(&mut prog, h, norm);
    if let Handle::Fixed(x) = &hx {
        let value = far_value(x, targets, norm);
        return Ok(RadiusCert {
            value,
            lower: value,
            center: x.clone(),
            iterations: 0,
        });
    }
    let n = norm.dim();
    let t = prog.vars(1);
    prog.set_cost(t, 1.0);
    let xe = hx.expr();
    let mut links = Vec::with_capacity(targets.len());
    for (k, rho) in targets {
        let z = prog.vars(n);
        links.push(
            prog.zero(
                (0..n)
                    .map(|i| Aff::var(z + i).plus(&xe[i], -1.0).plus(&Aff::constant(k[i]), 1.0))
                    .collect(),
            ),
        );
        let zs: Vec<Aff> = (0..n).map(|i| Aff::var(z + i)).collect();
        prog.norm_le(norm, &zs, Aff::var(t).plus(&Aff::constant(*rho), -1.0));
    }
    let sol = prog.solve("minimax radius")?;
    let center = hx.recover(&sol.x, norm);
    let value = far_value(&center, targets, norm);

    let ys: Vec<Vector> = links.iter().map(|&b| sol.dual(b).to_vec()).collect();
    let mut lower = targets.iter().map(|t| t.1).fold(0.0, f64::max);
    for sign in [1.0, -1.0] {
        if let Some(lb) = radius_bound(h, targets, &ys, sign, norm) {
            lower = lower.max(lb);
        }
    }
    Ok(RadiusCert {
        value,
        lower: lower.min(value),
        center,
        iterations: sol.iterations,
    })
}

/// Weak-duality bound for the minimax program from multipliers `y_j`.
fn radius_bound(
    h: &ConvexBody,
    targets: &[(Vector, f64)],
    ys: &[Vector],
    sign: f64,
    norm: &NormSpec,
) -> Option<f64> {
    let total: f64 = ys.iter().map(|y| norm.dual_norm(y)).sum();
    if total.is_nan() || total <= 0.0 || !total.is_finite() {
        return None;
    }
    let s = sign / total;
    let n = norm.dim();
    let mut sum = vec![0.0; n];
    let mut lb = 0.0;
    for ((k, rho), y) in targets.iter().zip(ys) {
        let y = linalg::scale(y, s);
        for i in 0..n {
            sum[i] += y[i];
        }
        lb += norm.dual_norm(&y) * rho - linalg::dot(&y, k);
    }
    let neg = linalg::scale(&sum, -1.0);
    Some(lb - h.support_value(&neg, norm))
}

/// Maximizes `<dir, y>` over `y in body` with `||y - x|| <= rho`.
/// Returns `None` when the constraint set is empty.
pub fn constrained_extreme(
    body: &ConvexBody,
    x: &[f64],
    rho: f64,
    dir: &[f64],
    norm: &NormSpec,
) -> Result<Option<Vector>> {
    let mut prog = Program::default();
    let hy = Handle::new(&mut prog, body, norm);
    if let Handle::Fixed(y) = &hy {
        return Ok((norm.dist(x, y) <= rho).then(|| y.clone()));
    }
    let ye = hy.expr();
    let n = norm.dim();
    let diff: Vec<Aff> = (0..n)
        .map(|i| ye[i].clone().plus(&Aff::constant(x[i]), -1.0))
        .collect();
    prog.norm_le(norm, &diff, Aff::constant(rho));
    // maximize <dir, y>  ==  minimize -<dir, y>
    let mut obj = Aff::default();
    for i in 0..n {
        obj = obj.plus(&ye[i], -dir[i]);
    }
    for &(j, a) in &obj.terms {
        prog.q[j] += a;
    }
    match prog.solve("constrained extreme") {
        Ok(sol) => Ok(Some(hy.recover(&sol.x, norm))),
        Err(Error::Solver { status, .. }) if status == "infeasible" => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seg(a: [f64; 2], b: [f64; 2]) -> ConvexBody {
        ConvexBody::Polytope(vec![a.to_vec(), b.to_vec()])
    }

    #[test]
    fn min_norm_point_of_a_triangle() {
        let p = vec![vec![1.0, -1.0], vec![1.0, 1.0], vec![3.0, 0.0]];
        let w = min_norm_point(&p).unwrap();
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.5, epsilon = 1e-15);
        assert_eq!(w[2], 0.0);
        let inside = vec![vec![-1.0, -1.0], vec![2.0, -1.0], vec![0.0, 2.0]];
        let w = min_norm_point(&inside).unwrap();
        let x = linalg::combine(&inside, &w);
        assert!(linalg::euclid(&x) < 1e-14);
    }

    #[test]
    fn euclidean_projection_is_exact() {
        let a = seg([0.0, 0.0], [0.0, 1.0]);
        let c = distance(&ConvexBody::point(vec![1.0, 0.3]), &a, &NormSpec::euclidean(2)).unwrap();
        assert_abs_diff_eq!(c.y[1], 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(c.value, 1.0, epsilon = 1e-14);
        assert!(c.gap() <= 1e-14);
    }

    #[test]
    fn parallel_segments_distance_all_norms() {
        let a = seg([0.0, 0.0], [0.0, 1.0]);
        let b = seg([1.0, 0.0], [1.0, 1.0]);
        for norm in [
            NormSpec::euclidean(2),
            NormSpec::l1(2),
            NormSpec::linf(2),
            NormSpec::lp(3.0, 2).unwrap(),
        ] {
            let c = distance(&a, &b, &norm).unwrap();
            assert_abs_diff_eq!(c.value, 1.0, epsilon = 1e-8);
            assert!(c.gap() < 1e-7, "gap {} for {norm:?}", c.gap());
        }
    }

    #[test]
    fn ball_distance_certified() {
        let a = ConvexBody::Ball {
            center: vec![0.0, 0.0],
            r: 1.0,
        };
        let b = ConvexBody::Ball {
            center: vec![4.0, 0.0],
            r: 1.0,
        };
        for norm in [NormSpec::euclidean(2), NormSpec::lp(1.5, 2).unwrap()] {
            let c = distance(&a, &b, &norm).unwrap();
            assert_abs_diff_eq!(c.value, 2.0, epsilon = 1e-7);
            assert!(c.gap() < 1e-7);
        }
    }

    #[test]
    fn overlapping_bodies_have_zero_distance() {
        let sq = ConvexBody::Polytope(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]);
        let c = distance(&sq, &sq, &NormSpec::euclidean(2)).unwrap();
        assert!(c.value < 1e-8);
        assert_eq!(c.lower, 0.0f64.min(c.value).max(c.lower));
    }

    #[test]
    fn square_chebyshev_radius() {
        let verts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        let targets: Vec<_> = verts.iter().map(|v| (v.clone(), 0.0)).collect();
        let sq = ConvexBody::Polytope(verts);
        for norm in [NormSpec::euclidean(2), NormSpec::linf(2), NormSpec::l1(2)] {
            let c = minimax_radius(&sq, &targets, &norm).unwrap();
            let expected = norm.eval(&[0.5, 0.5]);
            assert_abs_diff_eq!(c.value, expected, epsilon = 1e-7);
            assert!(c.gap() < 1e-7, "gap {} for {norm:?}", c.gap());
        }
    }

    #[test]
    fn constrained_extreme_finds_far_mate() {
        let b = seg([1.0, 1.0], [1.0, -1.0]);
        let norm = NormSpec::linf(2);
        let y = constrained_extreme(&b, &[0.0, 0.0], 1.0, &[0.0, 1.0], &norm)
            .unwrap()
            .unwrap();
        assert_abs_diff_eq!(y[1], 1.0, epsilon = 1e-8);
        let none = constrained_extreme(&b, &[0.0, 0.0], 0.5, &[0.0, 1.0], &norm).unwrap();
        assert!(none.is_none());
    }
}
