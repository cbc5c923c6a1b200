//! Univariate polynomials: exact integer/rational arithmetic for square-free
//! decomposition, and Aberth-Ehrlich iteration with a posteriori error bounds for
//! the roots. Coefficient slices are ordered from the constant term upwards.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::rational::Rational;

/// Polynomial with rational coefficients, constant term first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly(Vec<Rational>);

impl RatPoly {
    pub fn from_ints(c: &[i64]) -> Self {
        RatPoly(c.iter().map(|&a| Rational::from_int(a as i128)).collect()).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn monic(&self) -> Self {
        match self.0.last() {
            None => self.clone(),
            Some(&lead) => RatPoly(self.0.iter().map(|&c| c / lead).collect()),
        }
    }

    pub fn derivative(&self) -> Self {
        RatPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * Rational::from_int(i as i128))
                .collect(),
        )
        .trimmed()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let get = |p: &Self, i: usize| p.0.get(i).copied().unwrap_or(Rational::ZERO);
        RatPoly((0..n).map(|i| get(self, i) - get(other, i)).collect()).trimmed()
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.0.clone();
        let dd = d.degree();
        let lead = *d.0.last().unwrap();
        if self.0.len() < d.0.len() {
            return (RatPoly(Vec::new()), self.clone());
        }
        let mut q = vec![Rational::ZERO; self.0.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd] / lead;
            q[k] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &dj) in d.0.iter().enumerate() {
                r[k + j] = r[k + j] - c * dj;
            }
        }
        r.truncate(dd);
        (RatPoly(q).trimmed(), RatPoly(r).trimmed())
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Rational::to_f64).collect()
    }
}

/// Yun's square-free decomposition: returns `(factor, multiplicity)` with monic,
/// square-free, pairwise coprime factors of positive degree.
pub fn squarefree_decomposition(p: &[i64]) -> Vec<(RatPoly, usize)> {
    let f = RatPoly::from_ints(p).monic();
    let mut out = Vec::new();
    if f.is_constant() {
        return out;
    }
    let fp = f.derivative();
    let a = f.gcd(&fp);
    let mut b = f.divrem(&a).0;
    let mut c = fp.divrem(&a).0;
    let mut d = c.sub(&b.derivative());
    let mut i = 1;
    while !b.is_constant() {
        let ai = b.gcd(&d);
        b = b.divrem(&ai).0;
        c = d.divrem(&ai).0;
        d = c.sub(&b.derivative());
        if !ai.is_constant() {
            out.push((ai, i));
        }
        i += 1;
    }
    out
}

pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// A root of an integer polynomial with its multiplicity and a radius within
/// which a true root is guaranteed (up to floating rounding in the bound itself).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    pub error_bound: f64,
}

/// Simultaneous Aberth-Ehrlich iteration on a monic square-free polynomial.
pub fn aberth(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    // Fujiwara bound on root moduli.
    let bound = (0..n)
        .map(|i| {
            let a = monic[i].abs();
            let k = (n - i) as f64;
            if i == 0 {
                libm::pow(a / 2.0, 1.0 / k)
            } else {
                libm::pow(a, 1.0 / k)
            }
        })
        .fold(0.0_f64, f64::max)
        * 2.0;
    let radius = 0.5 * bound.max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * core::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::new(radius * libm::cos(theta), radius * libm::sin(theta))
        })
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(&monic, z[k]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    s += (z[k] - z[j]).inv();
                }
            }
            let step = w / (Complex64::new(1.0, 0.0) - w * s);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-16 {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(&monic, *zk);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.norm() > 1e-8 * zk.norm().max(1.0) {
                break;
            }
            *zk -= step;
        }
    }
    z
}

/// Bound from `|p(z)| / |p'(z)|` (inflated by degree) plus Horner rounding.
fn newton_bound(coeffs: &[f64], z: Complex64) -> f64 {
    let n = coeffs.len() - 1;
    let (p, dp) = eval_with_derivative(coeffs, z);
    let zn = z.norm();
    let mut absval = 0.0;
    for &c in coeffs.iter().rev() {
        absval = absval * zn + c.abs();
    }
    let rounding = 4.0 * (n as f64 + 1.0) * f64::EPSILON * absval;
    let dpn = dp.norm();
    if dpn == 0.0 {
        return f64::INFINITY;
    }
    (n as f64) * (p.norm() + rounding) / dpn + 4.0 * f64::EPSILON * zn
}

/// Distinct roots of an integer polynomial with multiplicities. Real roots are
/// returned with an exactly zero imaginary part; non-real roots come in exact
/// conjugate pairs. Order: by modulus, then by argument.
pub fn roots(p: &[i64]) -> Vec<Root> {
    let mut out = Vec::new();
    for (factor, mult) in squarefree_decomposition(p) {
        let c = factor.to_f64();
        let approx = aberth(&c);
        let mut reals = Vec::new();
        let mut uppers = Vec::new();
        for z in approx {
            let err = newton_bound(&c, z);
            if z.im.abs() <= err.max(1e-300) {
                let mut x = z.re;
                for _ in 0..3 {
                    let (pv, dv) = eval_with_derivative(&c, Complex64::new(x, 0.0));
                    if dv.re != 0.0 {
                        let nx = x - pv.re / dv.re;
                        if (nx - x).abs() <= 1e-8 * x.abs().max(1.0) {
                            x = nx;
                        }
                    }
                }
                let v = Complex64::new(x, 0.0);
                reals.push(Root { value: v, multiplicity: mult, error_bound: newton_bound(&c, v) });
            } else if z.im > 0.0 {
                uppers.push(Root { value: z, multiplicity: mult, error_bound: err });
            }
        }
        // A root misread as real would break pairing; the count check keeps
        // complex roots consistent with the degree.
        let expected_pairs = (c.len() - 1 - reals.len()) / 2;
        uppers.truncate(expected_pairs);
        for r in uppers {
            out.push(r);
            out.push(Root { value: r.value.conj(), ..r });
        }
        out.extend(reals);
    }
    out.sort_by(|a, b| {
        a.value
            .norm()
            .total_cmp(&b.value.norm())
            .then(a.value.arg().total_cmp(&b.value.arg()))
    });
    out
}
