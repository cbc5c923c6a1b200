use anosov_core::flow::SuspensionFlow;
use anosov_core::perturb::{
    claim44_check, claim44_rhs, find_heteroclinic, gradient_grid, grassmannian_sweep, holonomy_derivative,
    homoclinic_return_sequence, kappa, remainder_exponent, stable_graph_time, stable_graph_time_with, Bump,
    HeteroclinicDatum, SectionChart, BACKWARD_STEPS,
};
use anosov_core::spectral::invariant_unstable_subspaces;
use anosov_core::{Error, IntegerMatrix, RoofFunction};

fn companion3() -> IntegerMatrix {
    IntegerMatrix::companion(&[-1, 0, 1]).unwrap()
}

fn chart_with(m: IntegerMatrix, roof: RoofFunction) -> SectionChart {
    SectionChart::new(SuspensionFlow::new(m, roof).unwrap(), 0.45).unwrap()
}

fn constant_chart() -> SectionChart {
    chart_with(companion3(), RoofFunction::constant(3, 1.0).unwrap())
}

fn datum(c: &SectionChart) -> HeteroclinicDatum {
    find_heteroclinic(c, 6, 2, 0.3, 0.15, 0.44).unwrap()
}

#[test]
fn heteroclinic_datum_is_consistent() {
    let c = constant_chart();
    let d = datum(&c);
    assert_eq!(d.q.period_n, 6);
    assert!((d.y_r + 0.298_958_704_386_529_55).abs() < 1e-12);
    assert_eq!(d.lift, vec![0, -1, -1]);
    assert!(d.stable_residual < 1e-14);
    assert!(d.weak_unstable_residual < 1e-14);
    // Backward orbits of r and q approach at the weakest unstable rate.
    let xi = c.spectral().xi_min();
    let predicted = d.backward_distances[0] * xi.powi(-(BACKWARD_STEPS as i32));
    let last = d.backward_distances[BACKWARD_STEPS];
    assert!(last < 5.0 * predicted && last > 0.2 * predicted, "{last} vs {predicted}");
}

#[test]
fn constant_roof_claim44_rhs_is_the_first_return_gradient() {
    let c = constant_chart();
    let d = datum(&c);
    let g = [0.6, -0.8];
    let b = Bump::standard(&c, &d, &g).unwrap();
    assert!(c.stable_graph_time_derivative(d.y_r).unwrap().iter().all(|v| *v == 0.0));
    let au = c.unstable_matrix();
    let rhs = claim44_rhs(&c, &d, Some(&b)).unwrap();
    for j in 0..2 {
        let expected = b.amplitude * (au[(0, j)] * g[0] + au[(1, j)] * g[1]);
        assert!((rhs[j] - expected).abs() < 1e-15);
    }
}

#[test]
fn claim44_finite_differences_converge() {
    let c = constant_chart();
    let d = datum(&c);
    let b = Bump::standard(&c, &d, &[1.0, 0.0]).unwrap();
    let rep = claim44_check(&c, &d, Some(&b), &[1e-2, 3e-3, 1e-3, 3e-4, 1e-4]).unwrap();
    assert!(rep.fitted_order >= 0.9, "{}", rep.fitted_order);
    assert!((rep.kappa - 2.0).abs() < 1e-12);
    assert!(rep.errors.windows(2).all(|w| w[1] < w[0]));
    assert!(*rep.errors.last().unwrap() < 1e-4);
}

#[test]
fn kappa_matches_moduli() {
    let c = constant_chart();
    let sd = c.spectral();
    // lambda mu^2 = lambda (1 / lambda) = 1 for x^3 + x^2 - 1.
    assert!((sd.stable_rate() * sd.xi_max().powf(kappa(sd)) - 1.0).abs() < 1e-13);
}

#[test]
fn remainder_decays_at_order_two() {
    let c = constant_chart();
    let d = datum(&c);
    let b = Bump::standard(&c, &d, &[1.0, 0.0]).unwrap();
    let xs = homoclinic_return_sequence(&c, &b, 1e-4, 1e-1, 3).unwrap();
    assert!(xs.len() >= 20);
    let fit = remainder_exponent(&c, &d, Some(&b), &xs).unwrap();
    assert!(fit.exponent >= 1.8, "{}", fit.exponent);
    assert!(fit.below_envelope);
}

#[test]
fn zero_bump_remainder_is_noise() {
    let c = constant_chart();
    let d = datum(&c);
    let b = Bump::standard(&c, &d, &[1.0, 0.0]).unwrap();
    let xs = homoclinic_return_sequence(&c, &b, 1e-4, 1e-1, 3).unwrap();
    let r = remainder_exponent(&c, &d, Some(&b.with_amplitude(0.0)), &xs);
    assert!(matches!(r, Err(Error::ResidualBelowNoise { .. })));
}

#[test]
fn refining_the_return_threshold_is_stable() {
    let c = chart_with(companion3(), RoofFunction::cosine(3, 1.0, 0.1, 0).unwrap());
    let d = datum(&c);
    let b = Bump::standard(&c, &d, &[0.3, 1.0]).unwrap();
    for x in [[0.01, -0.004], [0.0, 0.02], [-0.03, 0.01]] {
        let coarse = stable_graph_time(&c, Some(&b), &x, d.y_r).unwrap();
        let fine = stable_graph_time_with(&c, Some(&b), &x, d.y_r, 1e-14).unwrap();
        assert!((coarse.value - fine.value).abs() <= 1e-10);
        assert!(fine.iterations >= coarse.iterations);
    }
}

#[test]
fn corner_is_affine_in_amplitude() {
    let c = chart_with(companion3(), RoofFunction::cosine(3, 1.0, 0.1, 0).unwrap());
    let d = datum(&c);
    let b = Bump::standard(&c, &d, &[1.0, 1.0]).unwrap();
    let base = claim44_rhs(&c, &d, None).unwrap();
    let unit = claim44_rhs(&c, &d, Some(&b.with_amplitude(1.0))).unwrap();
    for k in 1..=10 {
        let a = 0.05 * k as f64;
        let v = claim44_rhs(&c, &d, Some(&b.with_amplitude(a))).unwrap();
        for j in 0..2 {
            let expected = base[j] + a * (unit[j] - base[j]);
            assert!((v[j] - expected).abs() < 1e-12);
        }
    }
    let h = holonomy_derivative(&c, &d, Some(&b)).unwrap();
    assert_eq!(h[(2, 2)], 1.0);
    assert_eq!(h[(1, 0)], 0.0);
}

#[test]
fn complex_pair_sweep_is_vacuous() {
    let c = constant_chart();
    let d = datum(&c);
    let b = Bump::standard(&c, &d, &[1.0, 0.0]).unwrap();
    let cat = invariant_unstable_subspaces(c.spectral()).unwrap();
    let rep = grassmannian_sweep(&c, &d, &b, &gradient_grid(2, 4, &[0.5, 1.0]), &cat).unwrap();
    assert!(rep.vacuous);
    assert!(rep.entries.iter().all(|e| e.contains.is_empty()));
}

#[test]
fn totally_real_sweep_escapes_every_invariant_subspace() {
    let m = IntegerMatrix::companion(&[1, 3, -2, -2]).unwrap();
    let c = chart_with(m, RoofFunction::constant(4, 1.0).unwrap());
    let cat = invariant_unstable_subspaces(c.spectral()).unwrap();
    assert!(cat.finite);
    assert_eq!(cat.subspaces.len(), 6);
    let d = find_heteroclinic(&c, 3, 1, 0.3, 0.15, 0.44).unwrap();
    let b = Bump::standard(&c, &d, &[1.0, 0.0, 0.0]).unwrap();
    let rep = grassmannian_sweep(&c, &d, &b, &gradient_grid(3, 8, &[0.5, 1.0, 2.0]), &cat).unwrap();
    assert!(!rep.vacuous);
    assert!(rep.any_avoids_all);
    assert!(rep.diameter > 0.0);
    assert_eq!(rep.entries.len(), 24);
    // With the zero gradient the image is the unperturbed tilt and differs from any nonzero one.
    let zero = grassmannian_sweep(&c, &d, &b, &[vec![0.0; 3], vec![1.0, 0.0, 0.0]], &cat).unwrap();
    assert!(zero.diameter > 0.0);
}
