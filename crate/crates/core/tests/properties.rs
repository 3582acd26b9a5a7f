use std::f64::consts::PI;

use geogossip::engine::{sample_point, Algorithm, InitParams, Trial, TrialSetup};
use geogossip::model::{c_kappa, comparison_angle, comparison_triangle, model_distance, s_kappa, TriangleSides};
use geogossip::network::Graph;
use geogossip::spaces::{so3_exp, Letter, Mat3, SpdMatrix, TreePoint, Word};
use geogossip::stats::{disagreement, variance, DistanceMatrix};
use geogossip::{distance, geodesic_point, midpoint, CurvatureBound, SpaceKind, SpacePoint};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind_strategy() -> impl Strategy<Value = SpaceKind> {
    prop::sample::select(SpaceKind::ALL.to_vec())
}

fn points(kind: SpaceKind, seed: u64, n: usize) -> Vec<SpacePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = InitParams { dim: 3, tree_max_len: 12, ..InitParams::default() };
    (0..n).map(|_| sample_point(kind, &params, &mut rng).unwrap()).collect()
}

fn letters() -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0u8..4).prop_map(Letter::from_index), 0..24)
}

fn tree_point() -> impl Strategy<Value = TreePoint> {
    (letters(), 0.01f64..=1.0).prop_map(|(l, lambda)| {
        let w = Word::reduce(l);
        if w.is_empty() {
            TreePoint::root()
        } else {
            TreePoint::new(w, lambda).unwrap()
        }
    })
}

fn matrix(entries: [f64; 9]) -> Mat3 {
    Mat3::from_rows([
        [entries[0], entries[1], entries[2]],
        [entries[3], entries[4], entries[5]],
        [entries[6], entries[7], entries[8]],
    ])
}

fn invertible() -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(-2.0f64..2.0).prop_filter_map("near-singular", |e| {
        let m = matrix(e);
        (m.det().abs() > 0.1).then_some(m)
    })
}

fn rotation_vector() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.5f64..1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_axioms(kind in kind_strategy(), seed in any::<u64>()) {
        let pts = points(kind, seed, 3);
        let (p, q, r) = (&pts[0], &pts[1], &pts[2]);
        let tol = kind.identity_tolerance();
        let pq = distance(kind, p, q).unwrap();
        prop_assert!(distance(kind, p, p).unwrap() <= tol);
        prop_assert!((pq - distance(kind, q, p).unwrap()).abs() <= tol);
        prop_assert!(pq <= distance(kind, p, r).unwrap() + distance(kind, r, q).unwrap() + tol);
    }

    #[test]
    fn geodesic_identities(kind in kind_strategy(), seed in any::<u64>(), t in 0.0f64..=1.0) {
        let pts = points(kind, seed, 2);
        let (p, q) = (&pts[0], &pts[1]);
        let d = distance(kind, p, q).unwrap();
        let g = geodesic_point(kind, p, q, t).unwrap();
        let tol = kind.identity_tolerance() * (1.0 + d);
        prop_assert!((distance(kind, p, &g).unwrap() - t * d).abs() <= tol);
        prop_assert!((distance(kind, &g, q).unwrap() - (1.0 - t) * d).abs() <= tol);
        prop_assert!(distance(kind, &geodesic_point(kind, p, q, 0.0).unwrap(), p).unwrap() <= tol);
        prop_assert!(distance(kind, &geodesic_point(kind, p, q, 1.0).unwrap(), q).unwrap() <= tol);
        let m1 = midpoint(kind, p, q).unwrap();
        let m2 = midpoint(kind, q, p).unwrap();
        prop_assert!(distance(kind, &m1, &m2).unwrap() <= tol);
    }

    #[test]
    fn geodesic_additivity(kind in kind_strategy(), seed in any::<u64>(), s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let pts = points(kind, seed, 2);
        let (p, q) = (&pts[0], &pts[1]);
        let d = distance(kind, p, q).unwrap();
        let a = geodesic_point(kind, p, q, s).unwrap();
        let b = geodesic_point(kind, p, q, t).unwrap();
        let tol = kind.identity_tolerance() * (1.0 + d);
        prop_assert!((distance(kind, &a, &b).unwrap() - (s - t).abs() * d).abs() <= tol);
    }

    #[test]
    fn tree_geodesics(x in tree_point(), y in tree_point(), t in 0.0f64..=1.0) {
        let (x, y) = (SpacePoint::Tree(x), SpacePoint::Tree(y));
        let d = distance(SpaceKind::Tree, &x, &y).unwrap();
        let g = geodesic_point(SpaceKind::Tree, &x, &y, t).unwrap();
        prop_assert!((distance(SpaceKind::Tree, &x, &g).unwrap() - t * d).abs() <= 1e-9);
        prop_assert!((distance(SpaceKind::Tree, &g, &y).unwrap() - (1.0 - t) * d).abs() <= 1e-9);
    }

    #[test]
    fn word_reduction(l in letters(), m in letters()) {
        let w = Word::reduce(l.clone());
        prop_assert_eq!(Word::reduce(w.letters().to_vec()), w.clone());
        prop_assert!(w.letters().windows(2).all(|p| p[1] != p[0].inverse()));
        prop_assert!(w.concat_reduce(&w.inverse()).is_empty());
        let v = Word::reduce(m.clone());
        let joined = Word::reduce(l.into_iter().chain(m));
        prop_assert_eq!(w.concat_reduce(&v), joined);
    }

    #[test]
    fn spd_congruence_invariance(seed in any::<u64>(), a in invertible()) {
        let pts = points(SpaceKind::Spd, seed, 2);
        let (SpacePoint::Spd(p), SpacePoint::Spd(q)) = (&pts[0], &pts[1]) else { unreachable!() };
        let d = distance(SpaceKind::Spd, &pts[0], &pts[1]).unwrap();
        let pa: SpdMatrix = p.congruence(&a).unwrap();
        let qa: SpdMatrix = q.congruence(&a).unwrap();
        let da = distance(SpaceKind::Spd, &pa.into(), &qa.into()).unwrap();
        prop_assert!((d - da).abs() <= 1e-7, "{} vs {}", d, da);
    }

    #[test]
    fn so3_bi_invariance(seed in any::<u64>(), u in rotation_vector(), v in rotation_vector()) {
        let pts = points(SpaceKind::So3, seed, 2);
        let (SpacePoint::Rotation(p), SpacePoint::Rotation(q)) = (&pts[0], &pts[1]) else { unreachable!() };
        let d = distance(SpaceKind::So3, &pts[0], &pts[1]).unwrap();
        let (l, r) = (so3_exp(&u), so3_exp(&v));
        let moved = |x: &geogossip::spaces::Rotation| SpacePoint::Rotation(l.compose(x).compose(&r));
        let dm = distance(SpaceKind::So3, &moved(p), &moved(q)).unwrap();
        prop_assert!((d - dm).abs() <= 1e-9, "{} vs {}", d, dm);
    }

    #[test]
    fn trig_identity(kappa in prop::sample::select(vec![-1.0, 0.0, 0.25, 1.0, 4.0]), t in 0.0f64..3.0) {
        let c = c_kappa(kappa, t).unwrap();
        let s = s_kappa(kappa, t).unwrap();
        prop_assert!((c * c + kappa * s * s - 1.0).abs() <= 1e-9 * (1.0 + c * c));
    }

    #[test]
    fn comparison_triangle_round_trip(
        kappa in prop::sample::select(vec![-1.0, 0.0, 0.25, 1.0, 4.0]),
        u in 0.05f64..0.95,
        v in 0.05f64..0.95,
        alpha in 0.05f64..(PI - 0.05),
    ) {
        // sides drawn through an angle, so they always form a triangle
        let reach = if kappa > 0.0 { CurvatureBound::new(kappa).r_kappa } else { 3.0 };
        let (b, c) = (u * reach, v * reach);
        let far = geogossip::model::model_point_polar(kappa, b, alpha);
        let near = geogossip::model::model_point_polar(kappa, c, 0.0);
        let a = model_distance(&far, &near).unwrap();
        let sides = TriangleSides::new(a, b, c);
        let [p, q, r] = comparison_triangle(kappa, &sides).unwrap();
        prop_assert!((model_distance(&q, &r).unwrap() - a).abs() <= 1e-9);
        prop_assert!((model_distance(&p, &r).unwrap() - b).abs() <= 1e-9);
        prop_assert!((model_distance(&p, &q).unwrap() - c).abs() <= 1e-9);
        prop_assert!((comparison_angle(kappa, &sides).unwrap() - alpha).abs() <= 1e-7);
    }

    #[test]
    fn midpoint_steps_never_raise_cat0_variance_or_diameter(
        kind in prop::sample::select(vec![SpaceKind::Euclidean, SpaceKind::Spd, SpaceKind::Tree]),
        seed in any::<u64>(),
        path in any::<bool>(),
    ) {
        let g = if path { Graph::path(6).unwrap() } else { Graph::complete(6).unwrap() };
        let mut setup = TrialSetup::new(kind, Algorithm::Midpoint, seed);
        setup.init.tree_max_len = 12;
        let mut trial = Trial::new(&setup, &g, 0).unwrap();
        let mut previous = variance(trial.configuration()).unwrap();
        let mut diameter = trial.distances().diameter();
        for _ in 0..40 {
            trial.step().unwrap();
            let now = variance(trial.configuration()).unwrap();
            prop_assert!(now <= previous + 1e-9 * (1.0 + previous));
            previous = now;
            let d = trial.distances().diameter();
            prop_assert!(d <= diameter + 1e-9 * (1.0 + diameter));
            diameter = d;
        }
        let fresh = DistanceMatrix::compute(trial.configuration()).unwrap();
        for (v, w, d) in fresh.pairs() {
            prop_assert_eq!(trial.distances().get(v, w), d);
        }
    }

    #[test]
    fn disagreement_vanishes_only_at_consensus(kind in kind_strategy(), seed in any::<u64>()) {
        let g = Graph::path(4).unwrap();
        let pts = points(kind, seed, 4);
        let c = geogossip::engine::Configuration::new(kind, pts.clone()).unwrap();
        prop_assert!(disagreement(&c, &g).unwrap() > 0.0);
        let same = geogossip::engine::Configuration::new(kind, vec![pts[0].clone(); 4]).unwrap();
        prop_assert_eq!(disagreement(&same, &g).unwrap(), 0.0);
        prop_assert_eq!(variance(&same).unwrap(), 0.0);
    }
}
