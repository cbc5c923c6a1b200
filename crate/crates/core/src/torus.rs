//! Points of the torus `R^d / Z^d` stored as 64-bit fixed-point fractions.
//!
//! Coordinate `c` represents `c / 2^64`. Integer matrices act by wrapping
//! multiplication, which is exact modulo `2^64`, so a unimodular matrix and its
//! integer inverse are mutually inverse bijections of the lattice.

use alloc::vec::Vec;

use crate::rational::Rational;

pub const MAX_DIM: usize = 8;

const TWO_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusPoint {
    dim: u8,
    coords: [u64; MAX_DIM],
}

impl core::fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_list().entries((0..self.dim()).map(|i| self.coord(i))).finish()
    }
}

/// Signed fixed-point representation of `v - round(v)`.
fn to_fixed(v: f64) -> u64 {
    let frac = v - libm::round(v);
    let scaled = libm::round(frac * TWO_64);
    // frac is in [-1/2, 1/2], so the scaled value fits in i128 comfortably.
    (scaled as i128) as u64
}

impl TorusPoint {
    pub fn origin(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "torus dimension out of range");
        TorusPoint { dim: dim as u8, coords: [0; MAX_DIM] }
    }

    /// Reduces each coordinate modulo 1.
    pub fn from_f64(x: &[f64]) -> Self {
        let mut p = TorusPoint::origin(x.len());
        for (c, &v) in p.coords.iter_mut().zip(x) {
            *c = to_fixed(v);
        }
        p
    }

    pub fn from_rationals(x: &[Rational]) -> Self {
        let mut p = TorusPoint::origin(x.len());
        for (c, r) in p.coords.iter_mut().zip(x) {
            let f = r.fract();
            // floor(num * 2^64 / den) computed without overflow.
            let num = f.numer() as u128;
            let den = f.denom() as u128;
            let hi = (num << 32) / den;
            let rem = (num << 32) % den;
            let lo = (rem << 32) / den;
            *c = ((hi << 32) + lo) as u64;
        }
        p
    }

    pub fn from_raw(raw: &[u64]) -> Self {
        let mut p = TorusPoint::origin(raw.len());
        p.coords[..raw.len()].copy_from_slice(raw);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn raw(&self) -> &[u64] {
        &self.coords[..self.dim()]
    }

    /// Coordinate in `[0, 1)`.
    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i] as f64 / TWO_64
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.coord(i)).collect()
    }

    /// `self + v (mod 1)` for a real displacement.
    pub fn translate(&self, v: &[f64]) -> Self {
        assert_eq!(v.len(), self.dim());
        let mut p = *self;
        for (c, &vi) in p.coords.iter_mut().zip(v) {
            *c = c.wrapping_add(to_fixed(vi));
        }
        p
    }

    /// Translation by a displacement given as unevaluated sums `hi + lo`.
    pub(crate) fn translate_dd(&self, v: &[crate::dd::Dd]) -> Self {
        let mut p = *self;
        for (c, vi) in p.coords.iter_mut().zip(v) {
            let hi = vi.hi - libm::round(vi.hi);
            let a = (libm::round(hi * TWO_64) as i128) as u64;
            let b = (libm::round(vi.lo * TWO_64) as i128) as u64;
            *c = c.wrapping_add(a).wrapping_add(b);
        }
        p
    }

    pub fn add(&self, other: &TorusPoint) -> Self {
        let mut p = *self;
        for i in 0..self.dim() {
            p.coords[i] = p.coords[i].wrapping_add(other.coords[i]);
        }
        p
    }

    pub fn sub(&self, other: &TorusPoint) -> Self {
        let mut p = *self;
        for i in 0..self.dim() {
            p.coords[i] = p.coords[i].wrapping_sub(other.coords[i]);
        }
        p
    }

    /// Shortest representative of `self - other`, each coordinate in `[-1/2, 1/2)`.
    pub fn diff(&self, other: &TorusPoint) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (self.coords[i].wrapping_sub(other.coords[i]) as i64) as f64 / TWO_64)
            .collect()
    }

    pub fn distance(&self, other: &TorusPoint) -> f64 {
        crate::linalg::norm(&self.diff(other))
    }

    /// Applies an integer matrix (row-major, `dim x dim`) exactly on the lattice.
    pub fn apply_matrix(&self, entries: &[i64]) -> Self {
        let d = self.dim();
        debug_assert_eq!(entries.len(), d * d);
        let mut out = TorusPoint::origin(d);
        for i in 0..d {
            let mut acc = 0u64;
            for j in 0..d {
                acc = acc.wrapping_add((entries[i * d + j] as u64).wrapping_mul(self.coords[j]));
            }
            out.coords[i] = acc;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_mod_one() {
        let p = TorusPoint::from_f64(&[1.25, -0.25]);
        assert_eq!(p.coord(0), 0.25);
        assert_eq!(p.coord(1), 0.75);
    }

    #[test]
    fn rationals_match_floats() {
        let p = TorusPoint::from_rationals(&[Rational::new(1, 3), Rational::new(-2, 7)]);
        assert!((p.coord(0) - 1.0 / 3.0).abs() < 1e-16);
        assert!((p.coord(1) - 5.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn diff_is_shortest() {
        let a = TorusPoint::from_f64(&[0.95, 0.1]);
        let b = TorusPoint::from_f64(&[0.05, 0.2]);
        let d = a.diff(&b);
        assert!((d[0] + 0.1).abs() < 1e-15);
        assert!((d[1] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn cat_map_inverse_is_exact() {
        let m = [2i64, 1, 1, 1];
        let minv = [1i64, -1, -1, 2];
        let p = TorusPoint::from_f64(&[0.123_456_789, 0.987_654_321]);
        let mut q = p;
        for _ in 0..500 {
            q = q.apply_matrix(&m);
        }
        for _ in 0..500 {
            q = q.apply_matrix(&minv);
        }
        assert_eq!(p, q);
    }
}
