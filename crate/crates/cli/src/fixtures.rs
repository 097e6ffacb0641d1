//! The canonical fixture set.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use proxpair::solver::AffineMap;
use proxpair::{CertificateMode, ConvexBody, CyclicMapSpec, NormSpec, Vector};
use serde_json::json;

use crate::spec::{ProblemSpec, TaskKind, TaskSpec};

pub const FIXTURE_NAMES: [&str; 6] = [
    "example1-dim4",
    "example2-linf",
    "semisharp-counterexample-linf",
    "parallel-segments-l2",
    "reflection-bpp",
    "rotation-fixedpoint",
];

/// Shift between the two slices of the four-dimensional example.
pub const EXAMPLE1_SHIFT: f64 = 0.5;

fn task(kind: TaskKind) -> TaskSpec {
    TaskSpec::new(kind, 0)
}

fn spec(name: &str, norm: NormSpec, seed: u64, bodies: Vec<(&str, ConvexBody)>) -> ProblemSpec {
    ProblemSpec {
        name: name.to_string(),
        norm,
        seed,
        tol: None,
        bodies: bodies.into_iter().map(|(n, b)| (n.to_string(), b)).collect(),
        pairs: vec![("A".into(), "B".into())],
        maps: BTreeMap::new(),
        tasks: Vec::new(),
        meta: BTreeMap::new(),
    }
}

/// Vertices of the rhombicuboctahedron inscribed in the unit sphere: all
/// permutations of `(+-1, +-1, +-(1 + sqrt 2))`, normalized.
pub fn rhombicuboctahedron() -> Vec<Vector> {
    let big = 1.0 + 2f64.sqrt();
    let scale = (5.0 + 2.0 * 2f64.sqrt()).sqrt();
    let mut out = Vec::with_capacity(24);
    for pos in 0..3 {
        for sb in [1.0, -1.0] {
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let mut v = [0.0; 3];
                    let others: Vec<usize> = (0..3).filter(|&k| k != pos).collect();
                    v[pos] = sb * big;
                    v[others[0]] = s1;
                    v[others[1]] = s2;
                    out.push(v.iter().map(|x| x / scale).collect());
                }
            }
        }
    }
    out
}

/// Hausdorff distance between the unit ball and the inscribed
/// rhombicuboctahedron: one minus its inradius, taken over the 26 facet normals.
pub fn rhombicuboctahedron_error(verts: &[Vector]) -> f64 {
    let mut normals: Vec<[f64; 3]> = Vec::new();
    for k in 0..3 {
        for s in [1.0, -1.0] {
            let mut n = [0.0; 3];
            n[k] = s;
            normals.push(n);
        }
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for si in [1.0, -1.0] {
            for sj in [1.0, -1.0] {
                let mut n = [0.0; 3];
                n[i] = si;
                n[j] = sj;
                normals.push(n);
            }
        }
    }
    for a in [1.0, -1.0] {
        for b in [1.0, -1.0] {
            for c in [1.0, -1.0] {
                normals.push([a, b, c]);
            }
        }
    }
    let inradius = normals
        .iter()
        .map(|n| {
            let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
            verts
                .iter()
                .map(|v| v.iter().zip(n).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
                / len
        })
        .fold(f64::INFINITY, f64::min);
    1.0 - inradius
}

pub fn example1_dim4() -> ProblemSpec {
    let poly = rhombicuboctahedron();
    let error = rhombicuboctahedron_error(&poly);
    let lift = |shift: f64| -> Vec<Vector> {
        poly.iter()
            .map(|v| {
                let mut p = vec![shift];
                p.extend_from_slice(v);
                p
            })
            .collect()
    };
    let mut s = spec(
        "example1-dim4",
        NormSpec::euclidean(4),
        101,
        vec![
            ("A", ConvexBody::Polytope(lift(0.0))),
            ("B", ConvexBody::Polytope(lift(EXAMPLE1_SHIFT))),
        ],
    );
    s.tasks = vec![
        task(TaskKind::Analyze),
        TaskSpec {
            budget: Some(256),
            ..task(TaskKind::Structure)
        },
    ];
    s.meta.insert("shift".into(), json!(EXAMPLE1_SHIFT));
    s.meta.insert(
        "slice".into(),
        json!("unit ball of the last three coordinates, approximated by an inscribed 24-vertex rhombicuboctahedron"),
    );
    s.meta.insert("hausdorff_error".into(), json!(error));
    s
}

fn unit_segments() -> Vec<(&'static str, ConvexBody)> {
    vec![
        ("A", ConvexBody::segment(vec![0.0, 0.0], vec![0.0, 1.0])),
        ("B", ConvexBody::segment(vec![1.0, 0.0], vec![1.0, 1.0])),
    ]
}

pub fn example2_linf() -> ProblemSpec {
    let mut s = spec("example2-linf", NormSpec::linf(2), 202, unit_segments());
    s.tasks = vec![
        task(TaskKind::Analyze),
        TaskSpec {
            budget: Some(1000),
            levels: Some(5),
            c: Some(vec![0.9, 0.99, 0.999]),
            ..task(TaskKind::Structure)
        },
    ];
    s
}

pub fn semisharp_counterexample_linf() -> ProblemSpec {
    let mut s = spec(
        "semisharp-counterexample-linf",
        NormSpec::linf(2),
        303,
        vec![
            ("A", ConvexBody::point(vec![0.0, 0.0])),
            ("B", ConvexBody::segment(vec![1.0, 1.0], vec![1.0, -1.0])),
        ],
    );
    s.tasks = vec![task(TaskKind::Analyze), task(TaskKind::Falsify)];
    s
}

pub fn parallel_segments_l2() -> ProblemSpec {
    let mut s = spec("parallel-segments-l2", NormSpec::euclidean(2), 404, unit_segments());
    s.maps.insert(
        "translate".into(),
        CyclicMapSpec::new(
            AffineMap::translation(vec![1.0, 0.0]),
            AffineMap::translation(vec![-1.0, 0.0]),
            CertificateMode::Isometry,
        )
        .expect("valid map"),
    );
    s.tasks = vec![
        task(TaskKind::Analyze),
        TaskSpec {
            levels: Some(5),
            c: Some(vec![0.95]),
            ..task(TaskKind::Structure)
        },
        TaskSpec {
            map: Some("translate".into()),
            ..task(TaskKind::Solve)
        },
        task(TaskKind::Falsify),
    ];
    s
}

pub fn reflection_bpp() -> ProblemSpec {
    let mut s = spec("reflection-bpp", NormSpec::euclidean(2), 505, unit_segments());
    let t = AffineMap::new(vec![vec![-1.0, 0.0], vec![0.0, -1.0]], vec![1.0, 1.0]).expect("valid map");
    s.maps
        .insert("reflection".into(), CyclicMapSpec::uniform(t, CertificateMode::Isometry));
    s.tasks = vec![TaskSpec {
        map: Some("reflection".into()),
        ..task(TaskKind::Solve)
    }];
    s.meta.insert("map".into(), json!("x -> (1, 1) - x on both segments"));
    s
}

pub fn rotation_fixedpoint() -> ProblemSpec {
    let square = ConvexBody::Polytope(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
    ]);
    let mut s = spec(
        "rotation-fixedpoint",
        NormSpec::euclidean(2),
        606,
        vec![("A", square.clone()), ("B", square)],
    );
    // Quarter turn about (1/2, 1/2).
    let t = AffineMap::new(vec![vec![0.0, -1.0], vec![1.0, 0.0]], vec![1.0, 0.0]).expect("valid map");
    s.maps
        .insert("rotation".into(), CyclicMapSpec::uniform(t, CertificateMode::Isometry));
    s.tasks = vec![TaskSpec {
        map: Some("rotation".into()),
        ..task(TaskKind::Solve)
    }];
    s.meta.insert("center".into(), json!([0.5, 0.5]));
    s
}

pub fn canonical() -> Vec<ProblemSpec> {
    vec![
        example1_dim4(),
        example2_linf(),
        semisharp_counterexample_linf(),
        parallel_segments_l2(),
        reflection_bpp(),
        rotation_fixedpoint(),
    ]
}

/// Writes every canonical fixture as `<name>.json` into `dir`.
pub fn emit_fixtures(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    canonical()
        .into_iter()
        .map(|s| {
            let path = dir.join(format!("{}.json", s.name));
            std::fs::write(&path, s.to_json())?;
            Ok(path)
        })
        .collect()
}
