use anosov_core::flow::{FlowPoint, Leaf, SuspensionFlow};
use anosov_core::{IntegerMatrix, RoofFunction, TorusPoint};
use proptest::prelude::*;

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn cat_flow(a: f64) -> SuspensionFlow {
    SuspensionFlow::new(IntegerMatrix::cat_map(), RoofFunction::cosine(2, 1.0, a, 0).unwrap())
        .unwrap()
        .with_chart_radius(0.3)
}

fn companion_flow() -> SuspensionFlow {
    let m = IntegerMatrix::companion(&[-1, 0, 1]).unwrap();
    SuspensionFlow::new(m, RoofFunction::cosine(3, 1.0, 0.15, 1).unwrap()).unwrap()
}

/// Stable eigenvector of the cat map, `(1, -phi)` normalized, with eigenvalue `1/phi^2`.
fn cat_stable() -> ([f64; 2], f64) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let n = (1.0 + phi * phi).sqrt();
    ([1.0 / n, -phi / n], 1.0 / (phi * phi))
}

/// `sum_k r(L^k x + lambda^k v) - r(L^k x)` for `x` with denominator 8, where the
/// orbit of `x` is computed exactly in integers.
fn stable_adjustment_oracle(num: [i64; 2], t: f64, a: f64) -> f64 {
    let (e, lambda) = cat_stable();
    let mut k = num;
    let mut scale = t;
    let mut sum = 0.0;
    for _ in 0..80 {
        let x0 = k[0] as f64 / 8.0;
        sum += a * ((TAU * (x0 + scale * e[0])).cos() - (TAU * x0).cos());
        k = [(2 * k[0] + k[1]).rem_euclid(8), (k[0] + k[1]).rem_euclid(8)];
        scale *= lambda;
    }
    sum
}

#[test]
fn stable_adjustment_matches_exact_orbit_oracle() {
    let f = cat_flow(0.2);
    let (e, _) = cat_stable();
    for (num, t) in [([1, 3], 0.1), ([5, 2], -0.2), ([0, 7], 0.25)] {
        let x = TorusPoint::from_f64(&[num[0] as f64 / 8.0, num[1] as f64 / 8.0]);
        let v = [t * e[0], t * e[1]];
        let d = f.time_adjustment(&x, &v, Leaf::Stable).unwrap();
        let oracle = stable_adjustment_oracle(num, t, 0.2);
        assert!((d - oracle).abs() < 1e-13, "{d} vs {oracle}");
    }
}

#[test]
fn stable_leaf_points_converge_forward() {
    let f = cat_flow(0.2);
    let (e, _) = cat_stable();
    let p = FlowPoint::new(TorusPoint::from_f64(&[0.31, 0.77]), 0.4);
    let v = [0.2 * e[0], 0.2 * e[1]];
    let q = f.strong_manifold_point(&p, &v, Leaf::Stable).unwrap();
    let naive = FlowPoint::new(p.x.translate(&v), p.s);
    let d = f.distance(&f.evolve(&p, 30.0), &f.evolve(&q, 30.0));
    let d_naive = f.distance(&f.evolve(&p, 30.0), &f.evolve(&naive, 30.0));
    assert!(d < 1e-6, "{d}");
    assert!(d_naive > 1e-2, "{d_naive}");
}

#[test]
fn unstable_leaf_points_converge_backward() {
    let f = cat_flow(0.2);
    let (e, _) = cat_stable();
    let u = [-e[1], e[0]];
    let p = FlowPoint::new(TorusPoint::from_f64(&[0.61, 0.13]), 0.1);
    let v = [0.2 * u[0], 0.2 * u[1]];
    let q = f.strong_manifold_point(&p, &v, Leaf::Unstable).unwrap();
    let naive = FlowPoint::new(p.x.translate(&v), p.s);
    let d = f.distance(&f.evolve(&p, -30.0), &f.evolve(&q, -30.0));
    let d_naive = f.distance(&f.evolve(&p, -30.0), &f.evolve(&naive, -30.0));
    assert!(d < 1e-6, "{d}");
    assert!(d_naive > 1e-2, "{d_naive}");
}

#[test]
fn companion_unstable_plane_contracts_backward() {
    let f = companion_flow();
    let p = FlowPoint::new(TorusPoint::from_f64(&[0.2, 0.45, 0.7]), 0.3);
    for c in [[0.03, 0.0], [0.0, -0.04], [0.02, 0.02]] {
        let (q, _) = f.strong_point_frame(&p, &c, Leaf::Unstable).unwrap();
        let d = f.distance(&f.evolve(&p, -40.0), &f.evolve(&q, -40.0));
        assert!(d < 1e-3, "{d}");
    }
}

#[test]
fn off_leaf_displacement_is_rejected() {
    let f = cat_flow(0.2);
    assert!(f.time_adjustment(&TorusPoint::origin(2), &[0.01, 0.01], Leaf::Stable).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_additive(
        x0 in 0.0f64..1.0,
        x1 in 0.0f64..1.0,
        x2 in 0.0f64..1.0,
        s in 0.0f64..0.8,
        t1 in -25.0f64..25.0,
        t2 in -25.0f64..25.0,
    ) {
        let f = companion_flow();
        let p = f.normalize(TorusPoint::from_f64(&[x0, x1, x2]), s);
        let a = f.evolve(&f.evolve(&p, t1), t2);
        let b = f.evolve(&p, t1 + t2);
        prop_assert!(f.distance(&a, &b) <= 1e-9);
    }

    #[test]
    fn cat_map_round_trip(x0 in 0.0f64..1.0, x1 in 0.0f64..1.0, t in 0.0f64..40.0) {
        let f = cat_flow(0.3);
        let p = f.normalize(TorusPoint::from_f64(&[x0, x1]), 0.0);
        let q = f.evolve(&f.evolve(&p, t), -t);
        prop_assert!(f.distance(&p, &q) <= 1e-9);
    }
}
