use anosov_core::flow::{FlowPoint, Leaf, SuspensionFlow};
use anosov_core::pcf::{
    conjugacy_invariance_check, matching_kernel_dimension, pcf_gradient, planted_translation, random_flow_point,
    random_in_ball, random_quadrilateral, reconstruct_conjugacy_patch, sample, search_independent_pairs,
    temporal_distance_geometric, temporal_distance_series, PcfPair, Quadrilateral,
};
use anosov_core::{IntegerMatrix, RoofFunction, TorusPoint, TrigPolynomial};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn companion3() -> IntegerMatrix {
    IntegerMatrix::companion(&[-1, 0, 1]).unwrap()
}

fn companion_roof() -> RoofFunction {
    let p = TrigPolynomial::constant(3, 1.0)
        .with_real_mode(&[1, 0, 0], 0.08, 0.0)
        .with_real_mode(&[0, 1, 1], 0.0, 0.05)
        .with_real_mode(&[1, -1, 0], 0.03, 0.02);
    RoofFunction::new(p).unwrap()
}

fn companion_flow() -> SuspensionFlow {
    SuspensionFlow::new(companion3(), companion_roof()).unwrap()
}

fn cat_flow() -> SuspensionFlow {
    SuspensionFlow::new(IntegerMatrix::cat_map(), RoofFunction::cosine(2, 1.0, 0.15, 0).unwrap()).unwrap()
}

#[test]
fn constant_roofs_have_vanishing_temporal_distance() {
    for m in [IntegerMatrix::cat_map(), companion3()] {
        let d = m.dim();
        let f = SuspensionFlow::new(m, RoofFunction::constant(d, 1.7).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let q = random_quadrilateral(&f, &mut rng, 0.04);
            assert!(temporal_distance_series(&f, &q).unwrap().abs() <= 1e-10);
            assert!(temporal_distance_geometric(&f, &q, 1e-8).unwrap().abs() <= 1e-10);
        }
    }
}

#[test]
fn series_and_geometric_agree_on_cat_map() {
    let f = SuspensionFlow::new(IntegerMatrix::cat_map(), RoofFunction::cosine(2, 1.0, 0.1, 0).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nonzero = 0;
    for _ in 0..100 {
        let q = random_quadrilateral(&f, &mut rng, 0.05);
        let s = sample(&f, &q, 1e-8).unwrap();
        assert!(s.discrepancy <= 1e-8, "{s:?}");
        if s.value_series.abs() > 1e-6 {
            nonzero += 1;
        }
    }
    assert!(nonzero > 50);
}

#[test]
fn series_and_geometric_agree_on_companion() {
    let f = SuspensionFlow::new(companion3(), RoofFunction::cosine(3, 1.0, 0.1, 0).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let q = random_quadrilateral(&f, &mut rng, 0.05);
        let s = sample(&f, &q, 1e-8).unwrap();
        assert!(s.discrepancy <= 1e-8, "{s:?}");
    }
}

#[test]
fn series_and_geometric_agree_on_multimode_roof() {
    let f = companion_flow();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let q = random_quadrilateral(&f, &mut rng, 0.05);
        worst = worst.max(sample(&f, &q, 1e-8).unwrap().discrepancy);
    }
    assert!(worst <= 1e-7, "{worst}");
}

#[test]
fn displacements_beyond_the_chart_are_rejected() {
    let f = cat_flow();
    let a = FlowPoint::new(TorusPoint::from_f64(&[0.1, 0.2]), 0.0);
    let q = Quadrilateral::from_frame(&f, a, &[0.2], &[0.01]);
    assert!(temporal_distance_series(&f, &q).is_err());
}

#[test]
fn planted_translation_preserves_temporal_distance() {
    let f1 = companion_flow();
    let v = TorusPoint::from_f64(&[0.123, 0.456, 0.789]);
    let (f2, h) = planted_translation(&f1, &v).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let quads: Vec<Quadrilateral> = (0..50).map(|_| random_quadrilateral(&f1, &mut rng, 0.05)).collect();
    let worst = conjugacy_invariance_check(&f1, &f2, &h, &quads).unwrap();
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn planted_conjugacy_with_time_shift_preserves_temporal_distance() {
    let f1 = companion_flow();
    let v = TorusPoint::from_f64(&[0.3, 0.05, 0.6]);
    let (f2, h) = planted_translation(&f1, &v).unwrap();
    let h = h.with_time_shift(0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let quads: Vec<Quadrilateral> = (0..50).map(|_| random_quadrilateral(&f1, &mut rng, 0.03)).collect();
    let worst = conjugacy_invariance_check(&f1, &f2, &h, &quads).unwrap();
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn translated_flow_is_a_different_flow() {
    let f1 = companion_flow();
    let (f2, _) = planted_translation(&f1, &TorusPoint::from_f64(&[0.123, 0.456, 0.789])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let q = random_quadrilateral(&f1, &mut rng, 0.05);
    let v1 = temporal_distance_series(&f1, &q).unwrap();
    let v2 = temporal_distance_series(&f2, &q).unwrap();
    assert!((v1 - v2).abs() > 1e-6);
}

fn fd_error(f: &SuspensionFlow, a: FlowPoint, cs: &[f64], cu: &[f64], g: &[f64], h: f64) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..cu.len() {
        let mut up = cu.to_vec();
        let mut dn = cu.to_vec();
        up[j] += h;
        dn[j] -= h;
        let vp = temporal_distance_series(f, &Quadrilateral::from_frame(f, a, cs, &up)).unwrap();
        let vm = temporal_distance_series(f, &Quadrilateral::from_frame(f, a, cs, &dn)).unwrap();
        worst = worst.max(((vp - vm) / (2.0 * h) - g[j]).abs());
    }
    worst
}

/// The temporal distance is only `C^{1+alpha}` along `E^u`, so central
/// differences converge at a Holder rate rather than quadratically.
#[test]
fn gradient_matches_finite_differences() {
    let f = companion_flow();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let a = random_flow_point(&f, &mut rng);
        let cs = random_in_ball(&mut rng, 1, 0.04);
        let cu = random_in_ball(&mut rng, 2, 0.03);
        let qs = f.frame(Leaf::Stable).mul_vec(&cs);
        let qu = f.frame(Leaf::Unstable).mul_vec(&cu);
        let g = pcf_gradient(&f, &a, &qs, &qu).unwrap();
        let coarse = fd_error(&f, a, &cs, &cu, &g, 1e-5);
        let fine = fd_error(&f, a, &cs, &cu, &g, 1e-8);
        assert!(coarse <= 1e-4, "{coarse}");
        assert!(fine <= 1e-7, "{fine}");
        assert!(fine < coarse);
    }
}

#[test]
fn gradient_matches_finite_differences_single_mode() {
    let f = SuspensionFlow::new(companion3(), RoofFunction::cosine(3, 1.0, 0.1, 0).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..50 {
        let a = random_flow_point(&f, &mut rng);
        let cs = random_in_ball(&mut rng, 1, 0.04);
        let cu = random_in_ball(&mut rng, 2, 0.03);
        let qs = f.frame(Leaf::Stable).mul_vec(&cs);
        let qu = f.frame(Leaf::Unstable).mul_vec(&cu);
        let g = pcf_gradient(&f, &a, &qs, &qu).unwrap();
        let e = fd_error(&f, a, &cs, &cu, &g, 1e-7);
        assert!(e <= 1e-7, "{e}");
    }
}

#[test]
fn nonzero_gradient_found_quickly() {
    let f = companion_flow();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let p = random_flow_point(&f, &mut rng);
    let (pairs, draws) = search_independent_pairs(&f, &p, &mut rng, 1, 20, 0.04).unwrap();
    assert_eq!(pairs.len(), 1);
    assert!(draws <= 20);
    let g = pairs[0].gradient(&f, &p, &[0.0, 0.0]).unwrap();
    assert!(g.iter().any(|v| v.abs() > 1e-6));
}

#[test]
fn matching_kernel_is_trivial_for_generic_roof() {
    let f = companion_flow();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let p = random_flow_point(&f, &mut rng);
    let (pairs, _) = search_independent_pairs(&f, &p, &mut rng, 2, 50, 0.04).unwrap();
    assert_eq!(pairs.len(), 2);
    let rep = matching_kernel_dimension(&f, &p, &pairs).unwrap();
    assert_eq!(rep.rank, 2);
    assert_eq!(rep.kernel_dim, 0);
}

#[test]
fn matching_kernel_is_full_for_constant_roof() {
    let f = SuspensionFlow::new(companion3(), RoofFunction::constant(3, 1.0).unwrap()).unwrap();
    let p = FlowPoint::new(TorusPoint::from_f64(&[0.1, 0.2, 0.3]), 0.0);
    let pairs = vec![
        PcfPair { a_offset: vec![0.01, 0.0], s_coords: vec![0.02] },
        PcfPair { a_offset: vec![0.0, -0.02], s_coords: vec![0.03] },
    ];
    let rep = matching_kernel_dimension(&f, &p, &pairs).unwrap();
    assert_eq!(rep.kernel_dim, 2);
}

#[test]
fn patch_reconstruction_recovers_translation() {
    let f1 = companion_flow();
    let v = TorusPoint::from_f64(&[1.0 / 7.0, 2.0 / 7.0, 3.0 / 7.0]);
    let (f2, h) = planted_translation(&f1, &v).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let p = random_flow_point(&f1, &mut rng);
    let (pairs, _) = search_independent_pairs(&f1, &p, &mut rng, 2, 50, 0.04).unwrap();
    let rec = reconstruct_conjugacy_patch(&f1, &f2, &h, &p, &pairs, 0.01, 5).unwrap();
    assert_eq!(rec.errors.len(), 25);
    assert!(rec.sup_error <= 1e-4, "{}", rec.sup_error);
}
