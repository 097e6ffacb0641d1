use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use proxpair::body::{translate_offset, BodyPair, ConvexBody};
use proxpair::linalg;
use proxpair::metrics::{
    self, analyze, mate_convergence, pair_diameter, pair_distance, point_radius,
    property_uc_falsify, proximal_core, pythagorean_residual, restricted_radius, semisharp_check,
    Budget, CoreMethod, SemisharpVerdict, Side,
};
use proxpair::NormSpec;

const TOL: f64 = 1e-7;

fn seg(a: [f64; 2], b: [f64; 2]) -> ConvexBody {
    ConvexBody::segment(a.to_vec(), b.to_vec())
}

fn square() -> ConvexBody {
    ConvexBody::Polytope(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
    ])
}

fn example2() -> BodyPair {
    BodyPair::new(
        seg([0.0, 0.0], [0.0, 1.0]),
        seg([1.0, 0.0], [1.0, 1.0]),
        NormSpec::linf(2),
    )
    .unwrap()
}

fn parallel_l2() -> BodyPair {
    BodyPair::new(
        seg([0.0, 0.0], [0.0, 1.0]),
        seg([1.0, 0.0], [1.0, 1.0]),
        NormSpec::euclidean(2),
    )
    .unwrap()
}

/// Brute-force minimum of `f` over `[0,1]` by a grid with zoom refinement.
fn grid_min(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = (f64::INFINITY, 0.0);
    for _ in 0..4 {
        let n = 1000;
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let v = f(t);
            if v < best.0 {
                best = (v, t);
            }
        }
        let w = (hi - lo) / 100.0;
        lo = (best.1 - w).max(0.0);
        hi = (best.1 + w).min(1.0);
    }
    best
}

#[test]
fn example2_distance_and_diameter() {
    let p = example2();
    let d = pair_distance(&p, TOL).unwrap();
    assert_abs_diff_eq!(d.d, 1.0, epsilon = 1e-9);
    // oracle: enumerate vertex pairs
    let verts = |b: &ConvexBody| b.vertices().unwrap();
    let mut best: f64 = 0.0;
    for a in verts(&p.a) {
        for b in verts(&p.b) {
            best = best.max(p.norm.dist(&a, &b));
        }
    }
    let (delta, x, y) = pair_diameter(&p);
    assert_eq!(delta, best);
    assert_eq!(delta, 1.0);
    assert_eq!(p.norm.dist(&x, &y), delta);
}

#[test]
fn identical_bodies_are_at_distance_zero() {
    let p = BodyPair::new(square(), square(), NormSpec::euclidean(2)).unwrap();
    let d = pair_distance(&p, TOL).unwrap();
    assert!(d.d <= TOL);
    assert!(linalg::max_abs_diff(&d.x, &d.y) <= 1e-6);
}

#[test]
fn translated_slice_distance_is_the_shift() {
    // A lies in x1 = 0, B = A + (0.5, 0, 0, 0).
    let mut verts = Vec::new();
    for s in [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
        verts.push(vec![0.0, s[0], s[1], s[2]]);
    }
    let a = ConvexBody::Polytope(verts);
    let b = a.translated(&[0.5, 0.0, 0.0, 0.0]);
    let p = BodyPair::new(a, b, NormSpec::euclidean(4)).unwrap();
    assert_abs_diff_eq!(pair_distance(&p, TOL).unwrap().d, 0.5, epsilon = 1e-9);
}

#[test]
fn diameter_examples() {
    let n = NormSpec::euclidean(2);
    let p = BodyPair::new(
        ConvexBody::point(vec![0.0, 0.0]),
        ConvexBody::point(vec![3.0, 0.0]),
        n.clone(),
    )
    .unwrap();
    assert_eq!(pair_diameter(&p).0, 3.0);
    assert_eq!(pair_distance(&p, TOL).unwrap().d, 3.0);
    let sq = BodyPair::new(square(), square(), n).unwrap();
    assert_abs_diff_eq!(pair_diameter(&sq).0, 2f64.sqrt(), epsilon = 1e-15);
}

#[test]
fn point_radius_examples() {
    let n2 = NormSpec::euclidean(2);
    assert_abs_diff_eq!(point_radius(&[0.0, 0.0], &square(), &n2).unwrap(), 2f64.sqrt());
    assert_eq!(point_radius(&[0.0, 0.0], &ConvexBody::point(vec![0.0, 0.0]), &n2).unwrap(), 0.0);
    let oracle = [[1.0, 0.0], [1.0, 1.0]]
        .iter()
        .map(|v| NormSpec::linf(2).eval(v))
        .fold(0.0, f64::max);
    let r = point_radius(&[0.0, 0.0], &seg([1.0, 0.0], [1.0, 1.0]), &NormSpec::linf(2)).unwrap();
    assert_eq!(r, oracle);
    assert_eq!(r, 1.0);
}

#[test]
fn restricted_radius_examples() {
    let n = NormSpec::euclidean(2);
    let s = seg([0.0, 0.0], [2.0, 0.0]);
    let r = restricted_radius(&s, &s, &n, TOL).unwrap();
    assert_abs_diff_eq!(r.r, 1.0, epsilon = 1e-7);
    assert!(linalg::max_abs_diff(&r.center, &[1.0, 0.0]) < 1e-6);

    let x = ConvexBody::point(vec![0.3, 0.2]);
    let r = restricted_radius(&x, &square(), &n, TOL).unwrap();
    assert_eq!(r.r, point_radius(&[0.3, 0.2], &square(), &n).unwrap());

    let r = restricted_radius(&square(), &square(), &n, TOL).unwrap();
    // grid refinement oracle over the square
    let mut best = (f64::INFINITY, vec![0.0, 0.0]);
    let (mut lo, mut hi) = ([0.0, 0.0], [1.0, 1.0]);
    for _ in 0..4 {
        for i in 0..=100 {
            for j in 0..=100 {
                let p = vec![
                    lo[0] + (hi[0] - lo[0]) * i as f64 / 100.0,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / 100.0,
                ];
                let v = point_radius(&p, &square(), &n).unwrap();
                if v < best.0 {
                    best = (v, p);
                }
            }
        }
        let w = (hi[0] - lo[0]) / 20.0;
        lo = [best.1[0] - w, best.1[1] - w];
        hi = [best.1[0] + w, best.1[1] + w];
    }
    assert_abs_diff_eq!(r.r, best.0, epsilon = 1e-6);
    assert_abs_diff_eq!(r.r, 2f64.sqrt() / 2.0, epsilon = 1e-7);
    assert!(linalg::max_abs_diff(&r.center, &[0.5, 0.5]) < 1e-5);
}

#[test]
fn example2_core_is_everything() {
    let core = proximal_core(&example2(), 1e-6, &Budget::with_seed(3)).unwrap();
    assert!(core.covers_a() && core.covers_b());
    assert_eq!(core.screening.a_certified, core.screening.a_candidates);
    assert_eq!(core.screening.b_certified, core.screening.b_candidates);
    assert!(core.screening.a_candidates >= 2);
}

#[test]
fn tangent_balls_have_point_cores() {
    let n = NormSpec::euclidean(2);
    let p = BodyPair::new(
        ConvexBody::Ball {
            center: vec![0.0, 0.0],
            r: 1.0,
        },
        ConvexBody::Ball {
            center: vec![4.0, 0.0],
            r: 1.0,
        },
        n.clone(),
    )
    .unwrap();
    let core = proximal_core(&p, TOL, &Budget::with_seed(1)).unwrap();
    assert_eq!(core.method, CoreMethod::BallTangency);
    assert!(core.certified_exact);
    assert_eq!(core.a0, ConvexBody::point(vec![1.0, 0.0]));
    assert_eq!(core.b0, ConvexBody::point(vec![3.0, 0.0]));
    // grid oracle: closest pair on the two circles
    let (best, t) = grid_min(|t| {
        let a = [(std::f64::consts::TAU * t).cos(), (std::f64::consts::TAU * t).sin()];
        n.dist(&a, &[3.0, 0.0])
    });
    assert_abs_diff_eq!(best, 2.0, epsilon = 1e-9);
    assert!(t.min(1.0 - t) < 1e-4);
}

#[test]
fn linf_point_segment_fails_semisharp_exactly() {
    let p = BodyPair::new(
        ConvexBody::point(vec![0.0, 0.0]),
        seg([1.0, 1.0], [1.0, -1.0]),
        NormSpec::linf(2),
    )
    .unwrap();
    let core = proximal_core(&p, TOL, &Budget::with_seed(0)).unwrap();
    let SemisharpVerdict::Fails { witness } = semisharp_check(&p, &core, TOL, &Budget::default()).unwrap()
    else {
        panic!("expected a witness");
    };
    assert_eq!(witness.side, Side::A);
    assert_eq!(witness.x, vec![0.0, 0.0]);
    let mut mates = [witness.y.clone(), witness.z.clone()];
    mates.sort_by(|a, b| b[1].total_cmp(&a[1]));
    assert_eq!(mates, [vec![1.0, 1.0], vec![1.0, -1.0]]);
    let n = NormSpec::linf(2);
    assert_eq!(n.dist(&witness.x, &witness.y), 1.0);
    assert_eq!(n.dist(&witness.x, &witness.z), 1.0);
    assert_eq!(n.dist(&witness.y, &witness.z), 2.0);

    let uc = property_uc_falsify(&p, &core, TOL, &Budget::default()).unwrap();
    assert!(uc.is_some());
}

#[test]
fn euclidean_pairs_are_semisharp() {
    let pairs = [
        parallel_l2(),
        BodyPair::new(
            ConvexBody::point(vec![0.0, 0.0]),
            seg([1.0, 1.0], [1.0, -1.0]),
            NormSpec::euclidean(2),
        )
        .unwrap(),
        BodyPair::new(
            square(),
            ConvexBody::Polytope(vec![vec![2.0, 0.5], vec![3.0, 0.0], vec![3.0, 2.0]]),
            NormSpec::euclidean(2),
        )
        .unwrap(),
    ];
    for p in pairs {
        let core = proximal_core(&p, TOL, &Budget::with_seed(5)).unwrap();
        let v = semisharp_check(&p, &core, TOL, &Budget::with_seed(5)).unwrap();
        assert_eq!(v, SemisharpVerdict::HoldsStrictlyConvex);
        assert!(property_uc_falsify(&p, &core, TOL, &Budget::with_seed(5)).unwrap().is_none());
    }
}

#[test]
fn singleton_b_is_semisharp() {
    // (3, 3) has the single nearest point (1, 1) in the square.
    let p = BodyPair::new(square(), ConvexBody::point(vec![3.0, 3.0]), NormSpec::linf(2)).unwrap();
    let core = proximal_core(&p, TOL, &Budget::default()).unwrap();
    let v = semisharp_check(&p, &core, TOL, &Budget::default()).unwrap();
    assert!(!v.fails(), "{v:?}");
}

#[test]
fn singleton_cores_have_no_uc_counterexample() {
    let p = BodyPair::new(
        ConvexBody::Ball {
            center: vec![0.0, 0.0],
            r: 1.0,
        },
        ConvexBody::Ball {
            center: vec![0.0, 5.0],
            r: 2.0,
        },
        NormSpec::lp(3.0, 2).unwrap(),
    )
    .unwrap();
    let core = proximal_core(&p, TOL, &Budget::default()).unwrap();
    assert!(core.a0.is_singleton(0.0) && core.b0.is_singleton(0.0));
    assert!(property_uc_falsify(&p, &core, TOL, &Budget::default()).unwrap().is_none());
}

#[test]
fn pythagorean_examples() {
    let p = parallel_l2();
    let core = proximal_core(&p, TOL, &Budget::default()).unwrap();
    assert_eq!(core.method, CoreMethod::Parallel);
    let r = pythagorean_residual(&p, &[0.0, 0.0], &[1.0, 1.0], &core).unwrap();
    assert!(r < 1e-12);
    // y = x'
    let r = pythagorean_residual(&p, &[0.0, 0.4], &[1.0, 0.4], &core).unwrap();
    assert!(r < 1e-12);

    let l1 = BodyPair::new(p.a.clone(), p.b.clone(), NormSpec::l1(2)).unwrap();
    let core = proximal_core(&l1, TOL, &Budget::default()).unwrap();
    let r = pythagorean_residual(&l1, &[0.0, 0.0], &[1.0, 1.0], &core).unwrap();
    // ||x - y'||^2 + ||x - x'||^2 = 1 + 1 against ||x - y||^2 = 4
    assert_abs_diff_eq!(r, 2.0, epsilon = 1e-9);
}

#[test]
fn parallel_mates_are_translates() {
    let p = parallel_l2();
    let core = proximal_core(&p, TOL, &Budget::with_seed(8)).unwrap();
    let h = translate_offset(&p, 1e-9).unwrap();
    for (x, _) in &core.pairs {
        if p.a.contains(x, &p.norm, 1e-9).unwrap() {
            let m = core.mate_in_b(&p, x).unwrap();
            assert!(linalg::max_abs_diff(&m, &linalg::add(x, &h)) <= 1e-9);
        }
    }
}

#[test]
fn analysis_flags_for_fixtures() {
    let a = analyze(&parallel_l2(), TOL, &Budget::default()).unwrap();
    assert!(a.metrics.flags.proximal && a.metrics.flags.sharp);
    assert_eq!(a.metrics.flags.parallel, Some(vec![1.0, 0.0]));
    assert_eq!(a.metrics.flags.shift_norm_matches_d, Some(true));

    let b = analyze(&example2(), TOL, &Budget::default()).unwrap();
    assert!(b.metrics.flags.proximal);
    assert!(!b.metrics.flags.semisharp);
    assert_eq!(b.metrics.flags.parallel, None);
    assert_abs_diff_eq!(b.metrics.rmax, 1.0, epsilon = 1e-7);
}

#[test]
fn minimizing_sequences_approach_the_mate_in_l2() {
    // y = (1, 0.5) in B; its mate in A is (0, 0.5).
    let p = parallel_l2();
    let y = [1.0, 0.5];
    let x = [0.0, 0.5];
    let seq: Vec<Vec<f64>> = (0..20)
        .map(|n| linalg::lerp(&x, &[0.0, 1.0], 0.5f64.powi(n)))
        .collect();
    let log = mate_convergence(&p.norm, 1.0, &y, &x, &seq);
    assert!(log.last().unwrap().excess < 1e-10);
    assert!(log.last().unwrap().to_mate < 1e-5);
    for w in log.windows(2) {
        assert!(w[1].to_mate <= w[0].to_mate);
    }
}

fn random_pair_2d() -> impl Strategy<Value = BodyPair> {
    let poly = || proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 2), 1..6);
    (poly(), poly(), prop_oneof![Just(0usize), Just(1), Just(2)]).prop_map(|(a, b, k)| {
        let norm = [NormSpec::euclidean(2), NormSpec::l1(2), NormSpec::linf(2)][k].clone();
        let b: Vec<Vec<f64>> = b.into_iter().map(|v| vec![v[0] + 2.0, v[1]]).collect();
        BodyPair::new(ConvexBody::Polytope(a), ConvexBody::Polytope(b), norm).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radii_sit_between_distance_and_diameter(p in random_pair_2d()) {
        let d = pair_distance(&p, TOL).unwrap().d;
        let (delta, _, _) = pair_diameter(&p);
        let r12 = restricted_radius(&p.a, &p.b, &p.norm, TOL).unwrap().r;
        let r21 = restricted_radius(&p.b, &p.a, &p.norm, TOL).unwrap().r;
        for r in [r12, r21] {
            prop_assert!(d <= r + 1e-7);
            prop_assert!(r <= delta + 1e-7);
        }
    }

    #[test]
    fn distance_is_below_every_vertex_pair(p in random_pair_2d()) {
        let dist = pair_distance(&p, TOL).unwrap();
        prop_assert!(p.a.contains(&dist.x, &p.norm, 1e-9).unwrap());
        prop_assert!(p.b.contains(&dist.y, &p.norm, 1e-9).unwrap());
        for a in p.a.vertices().unwrap() {
            for b in p.b.vertices().unwrap() {
                prop_assert!(dist.d <= p.norm.dist(&a, &b) + 1e-9);
            }
        }
        prop_assert!(dist.gap <= TOL);
    }
}

#[test]
fn point_radius_rejects_dimension_mismatch() {
    assert!(metrics::point_radius(&[0.0], &square(), &NormSpec::euclidean(2)).is_err());
}
