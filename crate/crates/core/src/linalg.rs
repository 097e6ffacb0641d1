//! Small dense vector helpers. Vectors are plain `Vec<f64>` / `&[f64]`.

/// A point of the ambient space.
pub type Vector = Vec<f64>;

pub fn add(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(1 - t) a + t b`
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vector {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

pub fn midpoint(a: &[f64], b: &[f64]) -> Vector {
    lerp(a, b, 0.5)
}

/// Convex combination `sum_i w_i p_i`. Weights are used as given.
pub fn combine(points: &[Vector], weights: &[f64]) -> Vector {
    let dim = points.first().map_or(0, Vec::len);
    let mut out = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(p) {
            *o += w * x;
        }
    }
    out
}

pub fn centroid(points: &[Vector]) -> Vector {
    let w = 1.0 / points.len() as f64;
    combine(points, &vec![w; points.len()])
}

/// Largest absolute coordinate difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn euclid(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes points lying within `tol` (coordinatewise) of an earlier point.
pub fn dedup_points(points: &[Vector], tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| max_abs_diff(p, q) <= tol) {
            out.push(p.clone());
        }
    }
    out
}

/// Index of the first maximum; ties go to the lowest index.
pub(crate) fn argmax_first(values: impl IntoIterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}
