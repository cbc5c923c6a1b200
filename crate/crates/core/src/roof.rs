//! Positive roof functions, periodic orbits of the base, Birkhoff sums, periodic
//! obstructions and a frequency-space solver for `r = c + u o L - u`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::spectral::IntegerMatrix;
use crate::sum::Compensated;
use crate::torus::TorusPoint;
use crate::trig::TrigPolynomial;

/// A trigonometric polynomial with a certified positive lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct RoofFunction {
    poly: TrigPolynomial,
    positivity_margin: f64,
    upper_bound: f64,
}

/// Grid resolution per axis: 256 on the first two axes, 32 on the others, and a
/// single node on axes the polynomial does not depend on.
fn grid_shape(p: &TrigPolynomial) -> Vec<usize> {
    p.active_axes()
        .iter()
        .enumerate()
        .map(|(j, &active)| if !active { 1 } else if j < 2 { 256 } else { 32 })
        .collect()
}

fn for_each_grid_point(shape: &[usize], mut f: impl FnMut(&[f64])) {
    let total: usize = shape.iter().product();
    let mut x = vec![0.0; shape.len()];
    for idx in 0..total {
        let mut rem = idx;
        for (xi, &n) in x.iter_mut().zip(shape) {
            *xi = (rem % n) as f64 / n as f64;
            rem /= n;
        }
        f(&x);
    }
}

impl RoofFunction {
    pub fn new(poly: TrigPolynomial) -> Result<Self> {
        let shape = grid_shape(&poly);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for_each_grid_point(&shape, |x| {
            let v = poly.eval(x);
            lo = lo.min(v);
            hi = hi.max(v);
        });
        let diag = libm::sqrt(
            shape.iter().filter(|&&n| n > 1).map(|&n| 1.0 / (n as f64 * n as f64)).sum::<f64>(),
        );
        let slack = poly.lipschitz_bound() * diag;
        let margin = lo - slack;
        if !(margin > 0.0) {
            return Err(Error::NonPositiveRoof { margin });
        }
        Ok(RoofFunction { poly, positivity_margin: margin, upper_bound: hi + slack })
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        RoofFunction::new(TrigPolynomial::constant(dim, c))
    }

    /// `c + a cos(2 pi x_axis)`.
    pub fn cosine(dim: usize, c: f64, a: f64, axis: usize) -> Result<Self> {
        let mut k = vec![0; dim];
        k[axis] = 1;
        RoofFunction::new(TrigPolynomial::constant(dim, c).with_real_mode(&k, a, 0.0))
    }

    pub fn poly(&self) -> &TrigPolynomial {
        &self.poly
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn positivity_margin(&self) -> f64 {
        self.positivity_margin
    }

    /// Certified upper bound on the roof.
    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn mean(&self) -> f64 {
        self.poly.mean()
    }

    pub fn is_constant(&self) -> bool {
        self.poly.terms().all(|(k, _)| k.iter().all(|&v| v == 0))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.poly.eval(x)
    }

    pub fn eval_point(&self, p: &TorusPoint) -> f64 {
        self.poly.eval_point(p)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.poly.gradient(x)
    }
}

/// An orbit of the base map on rational points, listed in dynamical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicOrbit {
    pub points: Vec<Vec<Rational>>,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.points.len()
    }

    pub fn record(&self, roof: &RoofFunction) -> PeriodicOrbitRecord {
        let mut s = Compensated::default();
        for p in &self.points {
            s.add(roof.eval_point(&TorusPoint::from_rationals(p)));
        }
        PeriodicOrbitRecord { base_points: self.points.clone(), period_n: self.period(), flow_period: s.value() }
    }

    /// Human-readable representative, e.g. `(1/5;2/5)`.
    pub fn representative(&self) -> String {
        format_point(&self.points[0])
    }
}

pub fn format_point(p: &[Rational]) -> String {
    let mut s = String::from("(");
    for (i, c) in p.iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        s.push_str(&alloc::format!("{c}"));
    }
    s.push(')');
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbitRecord {
    pub base_points: Vec<Vec<Rational>>,
    /// Minimal period.
    pub period_n: usize,
    pub flow_period: f64,
}

fn apply_rational(m: &IntegerMatrix, x: &[Rational]) -> Vec<Rational> {
    let d = m.dim();
    (0..d)
        .map(|i| {
            (0..d)
                .fold(Rational::ZERO, |acc, j| acc + Rational::from_int(m.get(i, j) as i128) * x[j])
                .fract()
        })
        .collect()
}

/// Diagonalizes an integer matrix by unimodular row and column operations,
/// returning the diagonal and the accumulated column transform `C`
/// (so that `R A C = diag` for some unimodular `R`).
fn diagonalize(n: usize, a: &[i128]) -> (Vec<i128>, Vec<i128>) {
    let mut a = a.to_vec();
    let mut c = vec![0i128; n * n];
    for i in 0..n {
        c[i * n + i] = 1;
    }
    let swap_cols = |m: &mut [i128], i: usize, j: usize| {
        for r in 0..n {
            m.swap(r * n + i, r * n + j);
        }
    };
    for t in 0..n {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    let v = a[i * n + j];
                    if v != 0 && best.is_none_or(|(bi, bj)| v.abs() < a[bi * n + bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (vec![0; n], c);
            };
            if pi != t {
                for j in 0..n {
                    a.swap(pi * n + j, t * n + j);
                }
            }
            if pj != t {
                swap_cols(&mut a, pj, t);
                swap_cols(&mut c, pj, t);
            }
            let p = a[t * n + t];
            let mut clean = true;
            for i in t + 1..n {
                let q = a[i * n + t] / p;
                if q != 0 {
                    for j in t..n {
                        a[i * n + j] -= q * a[t * n + j];
                    }
                }
                clean &= a[i * n + t] == 0;
            }
            for j in t + 1..n {
                let q = a[t * n + j] / p;
                if q != 0 {
                    for i in t..n {
                        a[i * n + j] -= q * a[i * n + t];
                    }
                    for i in 0..n {
                        c[i * n + j] -= q * c[i * n + t];
                    }
                }
                clean &= a[t * n + j] == 0;
            }
            if clean {
                break;
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), c)
}

/// `|det(M^n - I)|`, or an error when it vanishes.
pub fn periodic_point_count(m: &IntegerMatrix, n: u32) -> Result<u128> {
    let d = m.dim();
    let mut a = m.pow_wide(n);
    for i in 0..d {
        a[i * d + i] -= 1;
    }
    let det = crate::spectral::determinant(d, &a);
    if det == 0 {
        return Err(Error::NonHyperbolicPeriod { period: n });
    }
    Ok(det.unsigned_abs())
}

/// All solutions of `M^n x = x` on the torus, grouped into orbits of `M`. Each
/// orbit appears once and its length is its minimal period (a divisor of `n`).
pub fn periodic_points(m: &IntegerMatrix, n: u32) -> Result<Vec<PeriodicOrbit>> {
    if n == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    let d = m.dim();
    let mut a = m.pow_wide(n);
    for i in 0..d {
        a[i * d + i] -= 1;
    }
    let (diag, c) = diagonalize(d, &a);
    if diag.contains(&0) {
        return Err(Error::NonHyperbolicPeriod { period: n });
    }
    let sizes: Vec<i128> = diag.iter().map(|v| v.abs()).collect();
    let total: i128 = sizes.iter().product();
    let mut points = BTreeSet::new();
    for idx in 0..total {
        let mut rem = idx;
        let y: Vec<Rational> = sizes
            .iter()
            .map(|&s| {
                let k = rem % s;
                rem /= s;
                Rational::new(k, s)
            })
            .collect();
        let x: Vec<Rational> = (0..d)
            .map(|i| (0..d).fold(Rational::ZERO, |acc, j| acc + Rational::from_int(c[i * d + j]) * y[j]).fract())
            .collect();
        points.insert(x);
    }
    let mut orbits = Vec::new();
    let mut seen = BTreeSet::new();
    for p in &points {
        if seen.contains(p) {
            continue;
        }
        let mut orbit = vec![p.clone()];
        seen.insert(p.clone());
        let mut q = apply_rational(m, p);
        while &q != p {
            seen.insert(q.clone());
            orbit.push(q.clone());
            q = apply_rational(m, &q);
        }
        orbits.push(PeriodicOrbit { points: orbit });
    }
    Ok(orbits)
}

/// `sum_{k<n} r(M^k x)` with compensated summation.
pub fn birkhoff_sum(r: &RoofFunction, m: &IntegerMatrix, x: &TorusPoint, n: usize) -> f64 {
    let mut s = Compensated::default();
    let mut p = *x;
    for _ in 0..n {
        s.add(r.eval_point(&p));
        p = m.apply(&p);
    }
    s.value()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionReport {
    /// Orbits of minimal period `<= n_max` with their average roof value.
    pub entries: Vec<(PeriodicOrbitRecord, f64)>,
    pub spread: f64,
}

pub fn periodic_obstructions(r: &RoofFunction, m: &IntegerMatrix, n_max: u32) -> Result<ObstructionReport> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let mut entries = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in 1..=n_max {
        for orbit in periodic_points(m, n)? {
            if orbit.period() != n as usize {
                continue;
            }
            let rec = orbit.record(r);
            let avg = rec.flow_period / rec.period_n as f64;
            lo = lo.min(avg);
            hi = hi.max(avg);
            entries.push((rec, avg));
        }
    }
    Ok(ObstructionReport { entries, spread: hi - lo })
}

pub fn is_constant_roof_equivalent(r: &RoofFunction, m: &IntegerMatrix, n_max: u32, tol: f64) -> Result<bool> {
    Ok(periodic_obstructions(r, m, n_max)?.spread <= tol)
}

/// `u o M - u`.
pub fn coboundary(u: &TrigPolynomial, m: &IntegerMatrix) -> TrigPolynomial {
    u.compose_linear(m.entries()).sub(u)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoboundarySolution {
    pub constant_c: f64,
    pub transfer_u: TrigPolynomial,
    pub residual_sup: f64,
    pub obstruction_spread: f64,
    pub trunc: i64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoboundaryOptions {
    pub n_max: u32,
    pub tolerance: f64,
    /// Residuals at or below this level count as converged.
    pub noise_floor: f64,
    pub grid: usize,
}

impl Default for CoboundaryOptions {
    fn default() -> Self {
        CoboundaryOptions { n_max: 6, tolerance: 1e-8, noise_floor: 1e-10, grid: 48 }
    }
}

fn max_norm(k: &[i64]) -> i64 {
    k.iter().map(|v| v.abs()).max().unwrap_or(0)
}

fn mat_vec_i64(d: usize, m: &[i64], k: &[i64]) -> Vec<i64> {
    (0..d).map(|i| (0..d).map(|j| m[i * d + j] * k[j]).sum()).collect()
}

/// Transfer function truncated to frequencies of max-norm at most `trunc`.
fn solve_frequency_orbits(r: &TrigPolynomial, m: &IntegerMatrix, trunc: i64) -> TrigPolynomial {
    let d = m.dim();
    let nt = m.transpose();
    let nt_inv = nt.inverse();
    let cap = (trunc.max(1) << 20).max(max_norm_of(r) << 20);
    let mut visited = BTreeSet::new();
    let mut coeffs: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
    for (k, _) in r.terms() {
        if max_norm(k) == 0 || visited.contains(k) {
            continue;
        }
        // Walk back to where the orbit is far outside the support, then forward.
        let mut start = k.clone();
        for _ in 0..400 {
            if max_norm(&start) > cap {
                break;
            }
            start = mat_vec_i64(d, nt_inv.entries(), &start);
        }
        let mut a = Complex64::new(0.0, 0.0);
        let mut kk = start;
        let mut inside = false;
        for _ in 0..2000 {
            let b = r.coefficient(&kk);
            if b != Complex64::new(0.0, 0.0) {
                visited.insert(kk.clone());
            }
            a -= b;
            if max_norm(&kk) <= trunc && a != Complex64::new(0.0, 0.0) {
                coeffs.insert(kk.clone(), a);
            }
            kk = mat_vec_i64(d, nt.entries(), &kk);
            let big = max_norm(&kk) > cap;
            if big && inside {
                break;
            }
            inside |= !big;
        }
    }
    let terms: Vec<(Vec<i64>, Complex64)> = coeffs.into_iter().collect();
    TrigPolynomial::from_terms(d, &terms).expect("Hermitian data yields Hermitian solution")
}

fn max_norm_of(p: &TrigPolynomial) -> i64 {
    p.max_frequency().max(1)
}

/// `sup |u o M - u - (r - c)|` over a shifted grid disjoint from the positivity grid.
pub fn coboundary_residual(r: &TrigPolynomial, c: f64, u: &TrigPolynomial, m: &IntegerMatrix, n: usize) -> f64 {
    let d = m.dim();
    let target = r.sub(&TrigPolynomial::constant(d, c));
    let shape: Vec<usize> = (0..d).map(|j| if j < 3 { n } else { 4 }).collect();
    let offsets = [0.381_966_011_250_105_1, 0.236_067_977_499_789_7, 0.145_898_033_750_315_5];
    let total: usize = shape.iter().product();
    let mut worst = 0.0_f64;
    let mut x = vec![0.0; d];
    for idx in 0..total {
        let mut rem = idx;
        for (j, xi) in x.iter_mut().enumerate() {
            let nj = shape[j];
            *xi = ((rem % nj) as f64 + offsets[j % 3]) / nj as f64;
            rem /= nj;
        }
        let mx = m.apply_real(&x);
        let v = u.eval(&mx) - u.eval(&x) - target.eval(&x);
        worst = worst.max(v.abs());
    }
    worst
}

pub fn solve_coboundary(r: &RoofFunction, m: &IntegerMatrix, trunc: i64) -> Result<CoboundarySolution> {
    solve_coboundary_with(r, m, trunc, &CoboundaryOptions::default())
}

pub fn solve_coboundary_with(
    r: &RoofFunction,
    m: &IntegerMatrix,
    trunc: i64,
    opts: &CoboundaryOptions,
) -> Result<CoboundarySolution> {
    if r.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: r.dim() });
    }
    if trunc < r.poly().max_frequency() {
        return Err(Error::invalid("truncation below the roof's largest frequency"));
    }
    let obstruction = periodic_obstructions(r, m, opts.n_max)?;
    if obstruction.spread > opts.tolerance {
        return Err(Error::ObstructionNonzero { spread: obstruction.spread, tolerance: opts.tolerance });
    }
    let c = r.mean();
    let u1 = solve_frequency_orbits(r.poly(), m, trunc);
    let res1 = coboundary_residual(r.poly(), c, &u1, m, opts.grid);
    if res1 <= opts.noise_floor {
        return Ok(CoboundarySolution {
            constant_c: c,
            transfer_u: u1,
            residual_sup: res1,
            obstruction_spread: obstruction.spread,
            trunc,
        });
    }
    let u2 = solve_frequency_orbits(r.poly(), m, 2 * trunc);
    let res2 = coboundary_residual(r.poly(), c, &u2, m, opts.grid);
    if res2 < res1 {
        Ok(CoboundarySolution {
            constant_c: c,
            transfer_u: u2,
            residual_sup: res2,
            obstruction_spread: obstruction.spread,
            trunc: 2 * trunc,
        })
    } else {
        Err(Error::TruncationInsufficient { residual: res1 })
    }
}
