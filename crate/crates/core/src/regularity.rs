//! Bunching quantities for linear suspensions.
//!
//! Over flow time `t` the base is iterated `n = t / mean(roof)` times on average.
//! For a linear base the extremal vectors lie in root subspaces, so
//!
//! ```text
//! stable_sup      = (lambda_s xi_l^nu)^n
//! weak_stable_sup = (lambda_s xi_l^nu / xi_1)^n
//! ```
//!
//! with `lambda_s` the stable modulus and `xi_1 <= xi_l` the extreme unstable moduli.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::spectral::SpectralData;

/// `i / 10` for `i = 0..=40`.
pub fn default_nu_grid() -> Vec<f64> {
    (0..=40).map(|i| i as f64 / 10.0).collect()
}

/// A sup counts as below one only when its logarithm is below `-LOG_MARGIN`.
pub const LOG_MARGIN: f64 = 1e-12;
pub const VOLUME_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct BunchingRow {
    pub nu: f64,
    pub weak_stable_sup: f64,
    pub stable_sup: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BunchingReport {
    pub t: f64,
    /// Average number of base iterations in time `t`.
    pub iterations: f64,
    pub rows: Vec<BunchingRow>,
    pub nu_max_weak: Option<f64>,
    pub nu_max_stable: Option<f64>,
    /// `J^s J^u`, the product of the stable and unstable Jacobians over time `t`.
    pub jacobian_product: f64,
}

impl BunchingReport {
    pub fn at(&self, nu: f64) -> Option<&BunchingRow> {
        self.rows.iter().find(|r| (r.nu - nu).abs() < 1e-12)
    }
}

fn log_sups(sd: &SpectralData, n: f64, nu: f64) -> (f64, f64) {
    let ls = libm::log(sd.stable_rate());
    let l1 = libm::log(sd.xi_min());
    let ll = libm::log(sd.xi_max());
    let stable = n * (ls + nu * ll);
    (stable - n * l1, stable)
}

pub fn bunching_report(sd: &SpectralData, roof_mean: f64, t: f64, nu_grid: &[f64]) -> Result<BunchingReport> {
    if sd.stable_dim != 1 {
        return Err(Error::NotCodimensionOne { stable_dim: sd.stable_dim });
    }
    if !(roof_mean > 0.0) || !(t >= roof_mean) {
        return Err(Error::invalid("t must be at least the mean return time"));
    }
    let n = t / roof_mean;
    let mut rows = Vec::with_capacity(nu_grid.len());
    let mut nu_max_weak: Option<f64> = None;
    let mut nu_max_stable: Option<f64> = None;
    for &nu in nu_grid {
        let (lw, ls) = log_sups(sd, n, nu);
        if lw < -LOG_MARGIN {
            nu_max_weak = Some(nu_max_weak.map_or(nu, |v| v.max(nu)));
        }
        if ls < -LOG_MARGIN {
            nu_max_stable = Some(nu_max_stable.map_or(nu, |v| v.max(nu)));
        }
        rows.push(BunchingRow { nu, weak_stable_sup: libm::exp(lw), stable_sup: libm::exp(ls) });
    }
    let log_volume: f64 = sd.moduli.iter().map(|m| libm::log(*m)).sum();
    Ok(BunchingReport {
        t,
        iterations: n,
        rows,
        nu_max_weak,
        nu_max_stable,
        jacobian_product: libm::exp(n * log_volume),
    })
}

pub fn volume_identity_holds(report: &BunchingReport) -> bool {
    (report.jacobian_product - 1.0).abs() <= VOLUME_TOLERANCE
}

/// Van der Corput radical inverse in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Unit vectors in `R^k`: Halton points in `[-1, 1]^k` inside the unit ball, normalized.
fn halton_directions(k: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let v: Vec<f64> = (0..k).map(|j| 2.0 * radical_inverse(i, PRIMES[j % PRIMES.len()]) - 1.0).collect();
        i += 1;
        let n = linalg::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            out.push(linalg::scaled(&v, 1.0 / n));
        }
    }
    out
}

fn sampled_sup(m: &Mat, dirs: &[Vec<f64>]) -> f64 {
    dirs.iter().map(|v| linalg::norm(&m.mul_vec(v))).fold(0.0, f64::max)
}

fn sampled_inf(m: &Mat, dirs: &[Vec<f64>]) -> f64 {
    dirs.iter().map(|v| linalg::norm(&m.mul_vec(v))).fold(f64::INFINITY, f64::min)
}

/// `(weak_stable_sup, stable_sup)` estimated over `samples` quasi-random unit vectors
/// per bundle, after `n` base iterations.
pub fn sampled_sups(sd: &SpectralData, n: u32, nu: f64, samples: usize) -> (f64, f64) {
    let an_s = sd.stable_restriction.pow(n);
    let an_u = sd.unstable_restriction.pow(n);
    let ds = halton_directions(sd.stable_dim, samples);
    let du = halton_directions(sd.unstable_dim, samples);
    let s = sampled_sup(&an_s, &ds);
    let u_max = sampled_sup(&an_u, &du);
    // sup |A_u^-n v| over unit v equals 1 / inf |A_u^n w| over unit w.
    let u_min = sampled_inf(&an_u, &du);
    let stable = s * libm::pow(u_max, nu);
    (stable / u_min, stable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::IntegerMatrix;

    #[test]
    fn grid_shape() {
        let g = default_nu_grid();
        assert_eq!(g.len(), 41);
        assert_eq!(g[10], 1.0);
        assert_eq!(g[40], 4.0);
    }

    #[test]
    fn weak_below_stable() {
        let sd = SpectralData::new(&IntegerMatrix::companion(&[-1, 0, 1]).unwrap()).unwrap();
        let r = bunching_report(&sd, 1.0, 3.0, &default_nu_grid()).unwrap();
        for row in &r.rows {
            assert!(row.weak_stable_sup <= row.stable_sup);
        }
        assert!(volume_identity_holds(&r));
    }

    #[test]
    fn short_time_rejected() {
        let sd = SpectralData::new(&IntegerMatrix::cat_map()).unwrap();
        assert!(bunching_report(&sd, 1.0, 0.5, &[1.0]).is_err());
    }
}
