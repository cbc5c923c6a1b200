//! Real trigonometric polynomials `p(x) = sum_k c_k e^{2 pi i k.x}` on the torus.
//!
//! Terms are kept with Hermitian symmetry `c_{-k} = conj(c_k)`. Evaluation on
//! lattice points reduces `k.x mod 1` exactly in fixed point, so the phase of a
//! term never loses precision however far the point has been iterated.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::torus::TorusPoint;

const TAU: f64 = 2.0 * PI;
const TWO_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    terms: BTreeMap<Vec<i64>, Complex64>,
    /// One representative per `{k, -k}` pair: frequency, coefficient, weight 1 or 2.
    half: Vec<(Vec<i64>, Complex64, f64)>,
}

fn negated(k: &[i64]) -> Vec<i64> {
    k.iter().map(|&v| -v).collect()
}

/// Phase `k.x mod 1` as a fraction in `[-1/2, 1/2)`, exact up to the final rounding.
fn lattice_phase(k: &[i64], p: &TorusPoint) -> f64 {
    let mut acc = 0u64;
    for (ki, ri) in k.iter().zip(p.raw()) {
        acc = acc.wrapping_add((*ki as u64).wrapping_mul(*ri));
    }
    (acc as i64) as f64 / TWO_64
}

impl TrigPolynomial {
    pub fn zero(dim: usize) -> Self {
        TrigPolynomial { dim, terms: BTreeMap::new(), half: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = TrigPolynomial::zero(dim);
        p.insert(alloc::vec![0; dim], Complex64::new(c, 0.0));
        p.rebuild();
        p
    }

    /// Builds from a full term list. Missing conjugate partners are an error,
    /// as is a non-real constant term. Repeated frequencies are summed.
    pub fn from_terms(dim: usize, terms: &[(Vec<i64>, Complex64)]) -> Result<Self> {
        if dim == 0 || dim > crate::torus::MAX_DIM {
            return Err(Error::invalid("polynomial dimension out of range"));
        }
        let mut p = TrigPolynomial::zero(dim);
        for (k, c) in terms {
            if k.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.len() });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::invalid("non-finite coefficient"));
            }
            p.insert(k.clone(), *c);
        }
        for (k, c) in &p.terms {
            let partner = p.terms.get(&negated(k)).copied().unwrap_or_default();
            let scale = c.norm().max(1.0);
            if (partner - c.conj()).norm() > 1e-12 * scale {
                return Err(Error::invalid("coefficients are not Hermitian symmetric"));
            }
        }
        p.rebuild();
        Ok(p)
    }

    /// Adds `a cos(2 pi k.x) + b sin(2 pi k.x)` (for `k != 0`) or the constant `a`.
    pub fn add_real_mode(&mut self, k: &[i64], a: f64, b: f64) {
        assert_eq!(k.len(), self.dim);
        if k.iter().all(|&v| v == 0) {
            self.insert(k.to_vec(), Complex64::new(a, 0.0));
        } else {
            let c = Complex64::new(a / 2.0, -b / 2.0);
            self.insert(k.to_vec(), c);
            self.insert(negated(k), c.conj());
        }
        self.rebuild();
    }

    pub fn with_real_mode(mut self, k: &[i64], a: f64, b: f64) -> Self {
        self.add_real_mode(k, a, b);
        self
    }

    fn insert(&mut self, k: Vec<i64>, c: Complex64) {
        *self.terms.entry(k).or_default() += c;
    }

    fn rebuild(&mut self) {
        self.terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        self.half.clear();
        for (k, c) in &self.terms {
            let neg = negated(k);
            if *k == neg {
                self.half.push((k.clone(), *c, 1.0));
            } else if *k > neg {
                self.half.push((k.clone(), *c, 2.0));
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.terms.get(k).copied().unwrap_or_default()
    }

    pub fn mean(&self) -> f64 {
        self.coefficient(&alloc::vec![0; self.dim]).re
    }

    /// Largest frequency in max-norm.
    pub fn max_frequency(&self) -> i64 {
        self.terms.keys().flat_map(|k| k.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    /// `sum |c_k| 2 pi |k|_2`, a Lipschitz constant for the Euclidean metric.
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c.norm() * TAU * libm::sqrt(k.iter().map(|&v| (v * v) as f64).sum()))
            .sum()
    }

    /// Sum of `|c_k|` over all terms, a bound on the sup norm.
    pub fn sup_bound(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    fn term_value(c: Complex64, weight: f64, phase: f64) -> f64 {
        let (s, co) = libm::sincos(TAU * phase);
        weight * (c.re * co - c.im * s)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.half
            .iter()
            .map(|(k, c, w)| {
                let ph: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
                Self::term_value(*c, *w, ph - libm::round(ph))
            })
            .sum()
    }

    /// Value at `p + disp`, with the lattice part of the phase reduced exactly.
    pub fn eval_at(&self, p: &TorusPoint, disp: &[f64]) -> f64 {
        self.half
            .iter()
            .map(|(k, c, w)| {
                let ph = lattice_phase(k, p) + k.iter().zip(disp).map(|(&ki, &d)| ki as f64 * d).sum::<f64>();
                Self::term_value(*c, *w, ph)
            })
            .sum()
    }

    pub fn eval_point(&self, p: &TorusPoint) -> f64 {
        self.half.iter().map(|(k, c, w)| Self::term_value(*c, *w, lattice_phase(k, p))).sum()
    }

    /// `p(base + disp + step) - p(base + disp)` without cancellation when `step` is small.
    pub fn difference_at(&self, base: &TorusPoint, disp: &[f64], step: &[f64]) -> f64 {
        self.half
            .iter()
            .map(|(k, c, w)| {
                let theta = TAU
                    * (lattice_phase(k, base) + k.iter().zip(disp).map(|(&ki, &d)| ki as f64 * d).sum::<f64>());
                let phi = TAU * k.iter().zip(step).map(|(&ki, &d)| ki as f64 * d).sum::<f64>();
                // e^{i phi} - 1 = 2i sin(phi/2) e^{i phi/2}
                let factor = Complex64::new(0.0, 2.0 * libm::sin(phi / 2.0)) * Complex64::from_polar(1.0, phi / 2.0);
                w * (c * Complex64::from_polar(1.0, theta) * factor).re
            })
            .sum()
    }

    /// Gradient (with respect to the torus coordinates) at a real point.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = alloc::vec![0.0; self.dim];
        for (k, c, w) in &self.half {
            let ph: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
            let d = Self::term_derivative(*c, *w, ph - libm::round(ph));
            for (gi, &ki) in g.iter_mut().zip(k) {
                *gi += d * ki as f64;
            }
        }
        g
    }

    pub fn gradient_at(&self, p: &TorusPoint, disp: &[f64]) -> Vec<f64> {
        let mut g = alloc::vec![0.0; self.dim];
        for (k, c, w) in &self.half {
            let ph = lattice_phase(k, p) + k.iter().zip(disp).map(|(&ki, &d)| ki as f64 * d).sum::<f64>();
            let d = Self::term_derivative(*c, *w, ph);
            for (gi, &ki) in g.iter_mut().zip(k) {
                *gi += d * ki as f64;
            }
        }
        g
    }

    /// `grad p(base + disp + step) - grad p(base + disp)` without cancellation.
    pub fn gradient_difference_at(&self, base: &TorusPoint, disp: &[f64], step: &[f64]) -> Vec<f64> {
        let mut g = alloc::vec![0.0; self.dim];
        for (k, c, w) in &self.half {
            let theta =
                TAU * (lattice_phase(k, base) + k.iter().zip(disp).map(|(&ki, &d)| ki as f64 * d).sum::<f64>());
            let phi = TAU * k.iter().zip(step).map(|(&ki, &d)| ki as f64 * d).sum::<f64>();
            let factor = Complex64::new(0.0, 2.0 * libm::sin(phi / 2.0)) * Complex64::from_polar(1.0, phi / 2.0);
            // d/dx Re(c e^{i theta}) = Re(i 2 pi c e^{i theta}) k
            let d = w * (Complex64::new(0.0, TAU) * c * Complex64::from_polar(1.0, theta) * factor).re;
            for (gi, &ki) in g.iter_mut().zip(k) {
                *gi += d * ki as f64;
            }
        }
        g
    }

    fn term_derivative(c: Complex64, weight: f64, phase: f64) -> f64 {
        let (s, co) = libm::sincos(TAU * phase);
        // Re(2 pi i c e^{i theta}) = -2 pi (c.re sin + c.im cos)
        -weight * TAU * (c.re * s + c.im * co)
    }

    /// `p o M` for an integer matrix `M` (row-major): frequency `k` moves to `M^T k`.
    pub fn compose_linear(&self, m: &[i64]) -> Self {
        let d = self.dim;
        let mut out = TrigPolynomial::zero(d);
        for (k, c) in &self.terms {
            let nk: Vec<i64> = (0..d).map(|j| (0..d).map(|i| m[i * d + j] * k[i]).sum()).collect();
            out.insert(nk, *c);
        }
        out.rebuild();
        out
    }

    /// `x -> p(x - v)`: coefficients pick up `e^{-2 pi i k.v}`.
    pub fn translate(&self, v: &[f64]) -> Self {
        let mut out = TrigPolynomial::zero(self.dim);
        for (k, c) in &self.terms {
            let ph: f64 = k.iter().zip(v).map(|(&ki, &vi)| ki as f64 * vi).sum();
            let ph = ph - libm::round(ph);
            out.insert(k.clone(), c * Complex64::from_polar(1.0, -TAU * ph));
        }
        out.rebuild();
        out
    }

    /// Translation by a lattice point, with the phases reduced exactly.
    pub fn translate_lattice(&self, v: &TorusPoint) -> Self {
        let mut out = TrigPolynomial::zero(self.dim);
        for (k, c) in &self.terms {
            out.insert(k.clone(), c * Complex64::from_polar(1.0, -TAU * lattice_phase(k, v)));
        }
        out.rebuild();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), *c);
        }
        out.rebuild();
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.rebuild();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Indices `j` with some nonzero frequency component `k_j`.
    pub fn active_axes(&self) -> Vec<bool> {
        let mut a = alloc::vec![false; self.dim];
        for k in self.terms.keys() {
            for (ai, &ki) in a.iter_mut().zip(k) {
                *ai |= ki != 0;
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_at_origin() {
        let p = TrigPolynomial::constant(2, 1.0).with_real_mode(&[1, 0], 0.1, 0.0);
        assert!((p.eval(&[0.0, 0.3]) - 1.1).abs() < 1e-15);
        assert!((p.eval(&[0.5, 0.0]) - 0.9).abs() < 1e-15);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn rejects_non_hermitian() {
        let t = [(alloc::vec![1, 0], Complex64::new(1.0, 0.0))];
        assert!(TrigPolynomial::from_terms(2, &t).is_err());
    }

    #[test]
    fn lattice_and_real_evaluation_agree() {
        let p = TrigPolynomial::constant(2, 1.0).with_real_mode(&[1, 2], 0.2, -0.1).with_real_mode(&[3, -1], 0.05, 0.3);
        let x = [0.123, 0.789];
        let tp = TorusPoint::from_f64(&x);
        assert!((p.eval(&x) - p.eval_point(&tp)).abs() < 1e-14);
        let w = [1e-9, -2e-9];
        let diff = p.difference_at(&tp, &[0.0, 0.0], &w);
        let g = p.gradient(&x);
        assert!((diff - (g[0] * w[0] + g[1] * w[1])).abs() < 1e-16);
        let gd = p.gradient_difference_at(&tp, &[0.0, 0.0], &[0.01, 0.02]);
        let g2 = p.gradient(&[x[0] + 0.01, x[1] + 0.02]);
        assert!((gd[0] - (g2[0] - g[0])).abs() < 1e-13);
        assert!((gd[1] - (g2[1] - g[1])).abs() < 1e-13);
    }

    #[test]
    fn composition_moves_frequencies_by_transpose() {
        let p = TrigPolynomial::zero(2).with_real_mode(&[1, 0], 1.0, 0.0);
        let m = [2, 1, 1, 1];
        let q = p.compose_linear(&m);
        let x = [0.31, 0.17];
        let mx = [2.0 * x[0] + x[1], x[0] + x[1]];
        assert!((q.eval(&x) - p.eval(&mx)).abs() < 1e-14);
    }

    #[test]
    fn translation() {
        let p = TrigPolynomial::constant(2, 1.0).with_real_mode(&[1, 1], 0.3, 0.2);
        let v = [0.25, 0.1];
        let q = p.translate(&v);
        let x = [0.6, 0.05];
        assert!((q.eval(&x) - p.eval(&[x[0] - v[0], x[1] - v[1]])).abs() < 1e-14);
    }
}
