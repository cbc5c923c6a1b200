//! Small dense real linear algebra: LU solves, one-sided Jacobi SVD, kernels and
//! principal angles. Dimensions here never exceed a handful, so everything is
//! row-major `Vec<f64>` without blocking.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Row-major construction; panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Mat::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Mat::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self^T v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] += self[(i, j)] * v[i];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|a| a * a).sum::<f64>())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Largest singular value.
    pub fn norm2(&self) -> f64 {
        self.svd().sigma.first().copied().unwrap_or(0.0)
    }

    pub fn pow(&self, n: u32) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut out = Mat::identity(self.rows);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Gaussian elimination with partial pivoting; `None` when singular.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.to_vec();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))?;
            if a[(p, k)].abs() <= 1e-300_f64.max(scale * 1e-15) {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            for i in k + 1..n {
                let f = a[(i, k)] / a[(k, k)];
                if f == 0.0 {
                    continue;
                }
                for j in k..n {
                    a[(i, j)] -= f * a[(k, j)];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[(k, j)] * x[j];
            }
            x[k] = s / a[(k, k)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat> {
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(self.solve(&e)?);
        }
        Some(Mat::from_columns(n, &cols))
    }

    /// One-sided Jacobi SVD. Works for any shape; `sigma` has `cols` entries in
    /// decreasing order and `v` is `cols x cols` orthogonal.
    pub fn svd(&self) -> Svd {
        let m = self.rows;
        let n = self.cols;
        let mut u = self.clone();
        let mut v = Mat::identity(n);
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                    for i in 0..m {
                        let up = u[(i, p)];
                        let uq = u[(i, q)];
                        alpha += up * up;
                        beta += uq * uq;
                        gamma += up * uq;
                    }
                    if gamma == 0.0 || gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = c * t;
                    for i in 0..m {
                        let up = u[(i, p)];
                        let uq = u[(i, q)];
                        u[(i, p)] = c * up - s * uq;
                        u[(i, q)] = s * up + c * uq;
                    }
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v[(i, p)] = c * vp - s * vq;
                        v[(i, q)] = s * vp + c * vq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let norms: Vec<f64> = (0..n).map(|j| norm(&u.column(j))).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
        let mut su = Mat::zeros(m, n);
        let mut sv = Mat::zeros(n, n);
        let mut sigma = Vec::with_capacity(n);
        for (k, &j) in order.iter().enumerate() {
            sigma.push(norms[j]);
            for i in 0..m {
                su[(i, k)] = if norms[j] > 0.0 { u[(i, j)] / norms[j] } else { 0.0 };
            }
            for i in 0..n {
                sv[(i, k)] = v[(i, j)];
            }
        }
        Svd { u: su, sigma, v: sv }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

impl Svd {
    /// Number of singular values above `max(rel * sigma_max, abs)`.
    pub fn rank(&self, rel: f64, abs: f64) -> usize {
        let cutoff = self.cutoff(rel, abs);
        self.sigma.iter().filter(|&&s| s > cutoff).count()
    }

    fn cutoff(&self, rel: f64, abs: f64) -> f64 {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        (rel * smax).max(abs)
    }

    /// Right singular vectors spanning the numerical kernel.
    pub fn kernel(&self, rel: f64, abs: f64) -> Vec<Vec<f64>> {
        let cutoff = self.cutoff(rel, abs);
        (0..self.sigma.len()).filter(|&k| self.sigma[k] <= cutoff).map(|k| self.v.column(k)).collect()
    }

    /// The `k` right singular vectors with the smallest singular values.
    pub fn smallest(&self, k: usize) -> Vec<Vec<f64>> {
        let n = self.sigma.len();
        (n.saturating_sub(k)..n).map(|j| self.v.column(j)).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Orthonormal basis of the span (modified Gram-Schmidt, two passes). Vectors
/// whose residual falls below `1e-12` relative to their norm are dropped.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let n0 = norm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let n = norm(&w);
        if n > 1e-12 * n0 {
            basis.push(scaled(&w, 1.0 / n));
        }
    }
    basis
}

/// Euclidean distance from `v` to the span of an orthonormal family.
pub fn distance_to_span(v: &[f64], orthonormal: &[Vec<f64>]) -> f64 {
    let mut w = v.to_vec();
    for q in orthonormal {
        let c = dot(&w, q);
        for (wi, qi) in w.iter_mut().zip(q) {
            *wi -= c * qi;
        }
    }
    norm(&w)
}

/// Principal angles (radians, increasing) between the spans of two families.
pub fn principal_angles(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    if qa.is_empty() || qb.is_empty() {
        return Vec::new();
    }
    let mut c = Mat::zeros(qa.len(), qb.len());
    for (i, x) in qa.iter().enumerate() {
        for (j, y) in qb.iter().enumerate() {
            c[(i, j)] = dot(x, y);
        }
    }
    let k = qa.len().min(qb.len());
    let svd = if qa.len() >= qb.len() { c.svd() } else { c.transpose().svd() };
    let mut angles: Vec<f64> = svd.sigma.iter().take(k).map(|s| libm::acos(s.clamp(-1.0, 1.0))).collect();
    angles.sort_by(f64::total_cmp);
    angles
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse() {
        let a = Mat::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let x = a.solve(&[1.0, 2.0, 3.0]).unwrap();
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ri - bi).abs() < 1e-14);
        }
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).sub(&Mat::identity(3)).max_abs() < 1e-14);
        assert!(Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).solve(&[1.0, 1.0]).is_none());
    }

    #[test]
    fn svd_reconstructs() {
        let a = Mat::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let svd = a.svd();
        assert_eq!(svd.rank(1e-12, 0.0), 2);
        let k = svd.kernel(1e-12, 0.0);
        assert_eq!(k.len(), 1);
        assert!(norm(&a.mul_vec(&k[0])) < 1e-13);
        let mut us = svd.u.clone();
        for j in 0..3 {
            for i in 0..2 {
                us[(i, j)] *= svd.sigma[j];
            }
        }
        assert!(us.mul(&svd.v.transpose()).sub(&a).max_abs() < 1e-13);
    }

    #[test]
    fn principal_angles_of_planes() {
        let xy = [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let tilted = [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]];
        let ang = principal_angles(&xy, &tilted);
        assert!(ang[0].abs() < 1e-12);
        assert!((ang[1] - core::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }
}
