use anosov_core::regularity::{bunching_report, default_nu_grid, sampled_sups, volume_identity_holds};
use anosov_core::spectral::SpectralData;
use anosov_core::{Error, IntegerMatrix};

fn companion3() -> SpectralData {
    SpectralData::new(&IntegerMatrix::companion(&[-1, 0, 1]).unwrap()).unwrap()
}

fn stable_root() -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid * mid + mid * mid - 1.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn companion_stable_product_at_nu_one() {
    let r = bunching_report(&companion3(), 1.0, 1.0, &default_nu_grid()).unwrap();
    let s = stable_root();
    let oracle = s * (1.0 / s).sqrt();
    let row = r.at(1.0).unwrap();
    assert!((row.stable_sup - oracle).abs() < 1e-13);
    assert!((row.stable_sup - 0.86885).abs() < 1e-4);
    // xi_1 = xi_l, so the weak product carries an extra factor 1 / xi.
    assert!((row.weak_stable_sup - s).abs() < 1e-13);
    let below = |f: &dyn Fn(f64) -> f64| {
        default_nu_grid().into_iter().filter(|&nu| f(nu).ln() < -1e-12).last()
    };
    let xi = (1.0 / s).sqrt();
    assert_eq!(r.nu_max_stable, below(&|nu| s * xi.powf(nu)));
    assert_eq!(r.nu_max_weak, below(&|nu| s * xi.powf(nu - 1.0)));
    assert_eq!(r.nu_max_stable, Some(1.9));
    assert_eq!(r.nu_max_weak, Some(2.9));
}

#[test]
fn cat_map_is_marginal() {
    let sd = SpectralData::new(&IntegerMatrix::cat_map()).unwrap();
    let r = bunching_report(&sd, 1.0, 1.0, &default_nu_grid()).unwrap();
    let row = r.at(1.0).unwrap();
    assert!((row.stable_sup - 1.0).abs() < 1e-9);
    assert_eq!(r.nu_max_stable, Some(0.9));
    assert!(volume_identity_holds(&r));
}

#[test]
fn volume_identity_over_long_times() {
    for sd in [companion3(), SpectralData::new(&IntegerMatrix::cat_map()).unwrap()] {
        for t in [1.3, 7.5, 40.0] {
            let r = bunching_report(&sd, 1.3, t, &[1.0]).unwrap();
            assert!((r.jacobian_product - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn sups_scale_with_time() {
    let sd = companion3();
    let grid = default_nu_grid();
    let r1 = bunching_report(&sd, 1.0, 1.0, &grid).unwrap();
    let r3 = bunching_report(&sd, 1.0, 3.0, &grid).unwrap();
    assert!((r3.iterations - 3.0).abs() < 1e-15);
    for (a, b) in r1.rows.iter().zip(&r3.rows) {
        assert!((b.stable_sup - a.stable_sup.powi(3)).abs() <= 1e-12 * b.stable_sup.max(1.0));
        if a.stable_sup < 1.0 {
            assert!(b.stable_sup < a.stable_sup);
        }
    }
    assert_eq!(r1.nu_max_stable, r3.nu_max_stable);
}

/// Sampled sups differ from the closed form by a bounded factor (the frame of
/// the complex pair is not conformal), so their growth rates agree to `O(1/n)`.
#[test]
fn sampled_sups_approach_closed_form() {
    let sd = companion3();
    for n in [1u32, 4, 9, 20, 40, 80] {
        let r = bunching_report(&sd, 1.0, n as f64, &[1.0]).unwrap();
        let row = &r.rows[0];
        let (weak, stable) = sampled_sups(&sd, n, 1.0, 400);
        let gap_w = (weak.ln() - row.weak_stable_sup.ln()).abs();
        let gap_s = (stable.ln() - row.stable_sup.ln()).abs();
        assert!(gap_w <= 1.5 && gap_s <= 1.5, "n = {n}: {gap_w} {gap_s}");
    }
    let (weak, _) = sampled_sups(&sd, 80, 1.0, 400);
    let r = bunching_report(&sd, 1.0, 80.0, &[1.0]).unwrap();
    assert!((weak.ln() / 80.0 - r.rows[0].weak_stable_sup.ln() / 80.0).abs() < 0.01);
}

#[test]
fn sampled_sups_are_exact_for_the_cat_map() {
    let sd = SpectralData::new(&IntegerMatrix::cat_map()).unwrap();
    let r = bunching_report(&sd, 1.0, 5.0, &[1.0]).unwrap();
    let (weak, stable) = sampled_sups(&sd, 5, 1.0, 16);
    assert!((stable - r.rows[0].stable_sup).abs() < 1e-9);
    assert!((weak - r.rows[0].weak_stable_sup).abs() < 1e-9 * r.rows[0].weak_stable_sup);
}

#[test]
fn higher_codimension_is_rejected() {
    let m = IntegerMatrix::companion(&[1, 3, -2, -2]).unwrap();
    let sd = SpectralData::new(&m).unwrap();
    if sd.stable_dim != 1 {
        assert!(matches!(bunching_report(&sd, 1.0, 1.0, &[1.0]), Err(Error::NotCodimensionOne { .. })));
    }
    let flipped = SpectralData::new(&IntegerMatrix::companion(&[-1, 0, 1]).unwrap().inverse()).unwrap();
    assert_eq!(flipped.stable_dim, 2);
    assert!(matches!(bunching_report(&flipped, 1.0, 1.0, &[1.0]), Err(Error::NotCodimensionOne { stable_dim: 2 })));
}
