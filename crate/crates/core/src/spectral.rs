//! Unimodular integer matrices and their certified spectral data.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::poly::{self, Root};
use crate::torus::TorusPoint;

/// Square integer matrix with determinant `+-1`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    dim: usize,
    entries: Vec<i64>,
}

/// Exact determinant by fraction-free Bareiss elimination.
pub fn determinant(dim: usize, entries: &[i128]) -> i128 {
    let mut a = entries.to_vec();
    let n = dim;
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k * n + k] == 0 {
            match (k + 1..n).find(|&i| a[i * n + k] != 0) {
                None => return 0,
                Some(p) => {
                    for j in 0..n {
                        a.swap(k * n + j, p * n + j);
                    }
                    sign = -sign;
                }
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[n * n - 1]
}

fn mat_mul_i128(n: usize, a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut c = vec![0i128; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

impl IntegerMatrix {
    pub fn new(dim: usize, entries: Vec<i64>) -> Result<Self> {
        if !(2..=crate::torus::MAX_DIM).contains(&dim) {
            return Err(Error::invalid("matrix dimension must be between 2 and 8"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let m = IntegerMatrix { dim, entries };
        let det = m.determinant();
        if det.abs() != 1 {
            return Err(Error::NotUnimodular(det));
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[&[i64]]) -> Result<Self> {
        let d = rows.len();
        let mut e = Vec::with_capacity(d * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: r.len() });
            }
            e.extend_from_slice(r);
        }
        IntegerMatrix::new(d, e)
    }

    /// Companion matrix of the monic polynomial `x^d + a_{d-1} x^{d-1} + ... + a_0`,
    /// given `a_0..a_{d-1}`: ones on the subdiagonal, last column `-a_i`.
    pub fn companion(lower_coeffs: &[i64]) -> Result<Self> {
        let d = lower_coeffs.len();
        let mut e = vec![0i64; d * d];
        for i in 1..d {
            e[i * d + i - 1] = 1;
        }
        for i in 0..d {
            e[i * d + d - 1] = -lower_coeffs[i];
        }
        IntegerMatrix::new(d, e)
    }

    pub fn cat_map() -> Self {
        IntegerMatrix { dim: 2, entries: vec![2, 1, 1, 1] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    fn wide(&self) -> Vec<i128> {
        self.entries.iter().map(|&v| v as i128).collect()
    }

    pub fn determinant(&self) -> i128 {
        determinant(self.dim, &self.wide())
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let e = (0..d * d).map(|k| self.entries[(k % d) * d + k / d]).collect();
        IntegerMatrix { dim: d, entries: e }
    }

    /// Monic characteristic polynomial `det(xI - M)`, constant term first,
    /// by the Faddeev-LeVerrier recursion (all divisions are exact).
    pub fn characteristic_polynomial(&self) -> Vec<i64> {
        let n = self.dim;
        let a = self.wide();
        let mut c = vec![0i128; n + 1];
        c[n] = 1;
        let mut mk = vec![0i128; n * n];
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I, with M_0 = 0.
            let mut next = mat_mul_i128(n, &a, &mk);
            for i in 0..n {
                next[i * n + i] += c[n - k + 1];
            }
            mk = next;
            let am = mat_mul_i128(n, &a, &mk);
            let tr: i128 = (0..n).map(|i| am[i * n + i]).sum();
            c[n - k] = -tr / k as i128;
        }
        c.into_iter().map(|v| v as i64).collect()
    }

    /// Exact integer inverse via Cayley-Hamilton.
    pub fn inverse(&self) -> Self {
        let n = self.dim;
        let c = self.characteristic_polynomial();
        let a = self.wide();
        // M^{-1} = -(1/c_0) (M^{n-1} + c_{n-1} M^{n-2} + ... + c_1 I)
        let mut acc = vec![0i128; n * n];
        for i in 0..n {
            acc[i * n + i] = 1;
        }
        for k in (1..n).rev() {
            acc = mat_mul_i128(n, &a, &acc);
            for i in 0..n {
                acc[i * n + i] += c[k] as i128;
            }
        }
        // acc now equals M^{n-1} + c_{n-1} M^{n-2} + ... + c_1 I
        let s = -(c[0] as i128);
        IntegerMatrix { dim: n, entries: acc.into_iter().map(|v| (v * s) as i64).collect() }
    }

    /// `M^n` with entries in `i128`.
    pub fn pow_wide(&self, n: u32) -> Vec<i128> {
        let d = self.dim;
        let mut out = vec![0i128; d * d];
        for i in 0..d {
            out[i * d + i] = 1;
        }
        let a = self.wide();
        for _ in 0..n {
            out = mat_mul_i128(d, &out, &a);
        }
        out
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_row_major(self.dim, self.dim, self.entries.iter().map(|&v| v as f64).collect())
    }

    pub fn apply(&self, p: &TorusPoint) -> TorusPoint {
        p.apply_matrix(&self.entries)
    }

    pub fn apply_real(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d).map(|i| (0..d).map(|j| self.entries[i * d + j] as f64 * v[j]).sum()).collect()
    }
}

/// A primary component of the spectrum: a real eigenvalue, or a conjugate pair
/// represented by its member with positive imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBlock {
    pub eigenvalue: Complex64,
    pub error_bound: f64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub stable: bool,
    /// Orthonormal basis of the real root subspace (dimension `m` or `2m`).
    pub basis: Vec<Vec<f64>>,
}

impl SpectralBlock {
    pub fn is_real(&self) -> bool {
        self.eigenvalue.im == 0.0
    }

    pub fn modulus(&self) -> f64 {
        self.eigenvalue.norm()
    }

    pub fn real_dimension(&self) -> usize {
        if self.is_real() {
            self.algebraic_multiplicity
        } else {
            2 * self.algebraic_multiplicity
        }
    }

    /// `M - lambda I` (real) or `M^2 - 2 Re(lambda) M + |lambda|^2 I` (pair).
    fn minimal_factor(&self, m: &Mat) -> Mat {
        let n = m.rows();
        if self.is_real() {
            m.sub(&Mat::identity(n).scale(self.eigenvalue.re))
        } else {
            let l = self.eigenvalue;
            m.mul(m).sub(&m.scale(2.0 * l.re)).add_mat(&Mat::identity(n).scale(l.norm_sqr()))
        }
    }
}

impl Mat {
    fn add_mat(&self, other: &Mat) -> Mat {
        self.sub(&other.scale(-1.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub matrix: IntegerMatrix,
    pub char_poly: Vec<i64>,
    /// Eigenvalues with multiplicity, sorted by modulus then argument.
    pub eigenvalues: Vec<Root>,
    /// Moduli with multiplicity, increasing.
    pub moduli: Vec<f64>,
    pub blocks: Vec<SpectralBlock>,
    pub hyperbolic: bool,
    pub stable_dim: usize,
    pub unstable_dim: usize,
    pub codimension_one: bool,
    pub complex_unstable_pair: bool,
    /// `min |modulus - 1| - 10 * error_bound` over the eigenvalues.
    pub certified_gap: f64,
    /// Orthonormal bases (columns) of `E^s` and `E^u`.
    pub stable_basis: Mat,
    pub unstable_basis: Mat,
    /// Restrictions `Q_s^T L Q_s` and `Q_u^T L Q_u`.
    pub stable_restriction: Mat,
    pub unstable_restriction: Mat,
    /// Inverse of `[Q_s | Q_u]`: maps a vector to its adapted coordinates.
    pub adapted_inverse: Mat,
    pub(crate) stable_line: Option<Vec<Dd>>,
    pub(crate) unstable_line: Option<Vec<Dd>>,
    /// Left eigenvectors dual to the lines above: they annihilate the complementary bundle.
    pub(crate) stable_dual: Option<Vec<Dd>>,
    pub(crate) unstable_dual: Option<Vec<Dd>>,
}

/// Newton refinement of a simple real eigenpair in double-double arithmetic.
/// Returns a unit vector pointing the same way as `u`.
fn refine_eigenline(m: &IntegerMatrix, lambda: f64, u: &[f64]) -> Vec<Dd> {
    let d = m.dim();
    let pivot = (0..d).max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap();
    let mut x: Vec<Dd> = u.iter().map(|&v| Dd::new(v / u[pivot])).collect();
    let mut lam = Dd::new(lambda);
    for _ in 0..3 {
        let res: Vec<Dd> = (0..d)
            .map(|i| {
                let mut acc = Dd::default();
                for (j, xj) in x.iter().enumerate() {
                    acc = acc.add(Dd::new(m.get(i, j) as f64).mul(*xj));
                }
                acc.sub(lam.mul(x[i]))
            })
            .collect();
        // Unknowns: x_j for j != pivot, then lambda.
        let mut jac = Mat::zeros(d, d);
        for i in 0..d {
            let mut col = 0;
            for j in 0..d {
                if j == pivot {
                    continue;
                }
                jac[(i, col)] = m.get(i, j) as f64 - if i == j { lam.hi } else { 0.0 };
                col += 1;
            }
            jac[(i, d - 1)] = -x[i].hi;
        }
        let rhs: Vec<f64> = res.iter().map(|r| -r.hi).collect();
        let Some(delta) = jac.solve(&rhs) else { break };
        let mut col = 0;
        for (j, xj) in x.iter_mut().enumerate() {
            if j == pivot {
                continue;
            }
            *xj = xj.add(Dd::new(delta[col]));
            col += 1;
        }
        lam = lam.add(Dd::new(delta[d - 1]));
    }
    let mut n2 = Dd::default();
    for v in &x {
        n2 = n2.add(v.mul(*v));
    }
    let n = n2.sqrt();
    let sign = if x[pivot].hi * u[pivot] < 0.0 { -1.0 } else { 1.0 };
    x.iter().map(|v| v.div(n).mul(Dd::new(sign))).collect()
}

fn line_of(m: &IntegerMatrix, blocks: &[SpectralBlock], stable: bool, basis: &Mat) -> Option<Vec<Dd>> {
    let mut it = blocks.iter().filter(|b| b.stable == stable);
    let b = it.next()?;
    if it.next().is_some() || b.real_dimension() != 1 {
        return None;
    }
    Some(refine_eigenline(m, b.eigenvalue.re, &basis.column(0)))
}

fn dual_of(m: &IntegerMatrix, line: &[Dd], lambda: f64, guess: &[f64]) -> Vec<Dd> {
    let l = refine_eigenline(&m.transpose(), lambda, guess);
    let mut pairing = Dd::default();
    for (a, b) in l.iter().zip(line) {
        pairing = pairing.add(a.mul(*b));
    }
    l.iter().map(|v| v.div(pairing)).collect()
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

fn root_subspace(m: &Mat, block_factor: &Mat, mult: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut p = Mat::identity(m.rows());
    for _ in 0..mult {
        p = p.mul(block_factor);
    }
    let svd = p.svd();
    linalg::orthonormalize(&svd.smallest(dim))
}

/// Spectral data of a unimodular matrix. `tol` is the smallest admissible distance
/// of a modulus from 1; eigenvalues closer than `max(tol, 10 * error_bound)` make the
/// matrix non-hyperbolic.
pub fn spectral_data(m: &IntegerMatrix, tol: f64) -> Result<SpectralData> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let cp = m.characteristic_polynomial();
    let distinct = poly::roots(&cp);
    let mut eigenvalues = Vec::new();
    let mut gap = f64::INFINITY;
    let mut hyperbolic = true;
    for r in &distinct {
        let dist = (r.value.norm() - 1.0).abs();
        gap = gap.min(dist - 10.0 * r.error_bound);
        if dist <= tol.max(10.0 * r.error_bound) {
            hyperbolic = false;
        }
        for _ in 0..r.multiplicity {
            eigenvalues.push(*r);
        }
    }
    if !hyperbolic {
        return Err(Error::NotHyperbolic { margin: gap });
    }
    let mut moduli: Vec<f64> = eigenvalues.iter().map(|r| r.value.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let stable_dim = moduli.iter().filter(|&&x| x < 1.0).count();
    let unstable_dim = m.dim() - stable_dim;
    let complex_unstable_pair = distinct.iter().any(|r| r.value.im != 0.0 && r.value.norm() > 1.0);

    let lm = m.to_mat();
    let scale = lm.max_abs().max(1.0);
    let mut blocks = Vec::new();
    for r in distinct.iter().filter(|r| r.value.im >= 0.0) {
        let mut block = SpectralBlock {
            eigenvalue: r.value,
            error_bound: r.error_bound,
            algebraic_multiplicity: r.multiplicity,
            geometric_multiplicity: 0,
            stable: r.value.norm() < 1.0,
            basis: Vec::new(),
        };
        let factor = block.minimal_factor(&lm);
        let rdim = block.real_dimension();
        block.basis = root_subspace(&lm, &factor, r.multiplicity, rdim);
        let fsvd = factor.svd();
        let factor_scale = if block.is_real() { scale } else { scale * scale };
        let nullity = fsvd.sigma.iter().filter(|&&s| s <= 1e-7 * factor_scale).count();
        block.geometric_multiplicity = if block.is_real() { nullity } else { nullity / 2 };
        blocks.push(block);
    }
    blocks.sort_by(|a, b| {
        a.modulus().total_cmp(&b.modulus()).then(a.eigenvalue.arg().total_cmp(&b.eigenvalue.arg()))
    });

    let gather = |stable: bool| {
        let vs: Vec<Vec<f64>> =
            blocks.iter().filter(|b| b.stable == stable).flat_map(|b| b.basis.iter().cloned()).collect();
        linalg::orthonormalize(&vs)
    };
    let qs = gather(true);
    let qu = gather(false);
    if qs.len() != stable_dim || qu.len() != unstable_dim {
        return Err(Error::NoConvergence { terms: qs.len() + qu.len() });
    }
    let d = m.dim();
    let stable_basis = Mat::from_columns(d, &qs);
    let unstable_basis = Mat::from_columns(d, &qu);
    let stable_restriction = stable_basis.transpose().mul(&lm).mul(&stable_basis);
    let unstable_restriction = unstable_basis.transpose().mul(&lm).mul(&unstable_basis);
    let all: Vec<Vec<f64>> = qs.iter().chain(qu.iter()).cloned().collect();
    let adapted_inverse = Mat::from_columns(d, &all).inverse().ok_or(Error::NoConvergence { terms: d })?;
    let stable_line = line_of(m, &blocks, true, &stable_basis);
    let unstable_line = line_of(m, &blocks, false, &unstable_basis);
    let line_eigenvalue = |stable: bool| blocks.iter().find(|b| b.stable == stable).map(|b| b.eigenvalue.re).unwrap_or(0.0);
    let stable_dual = stable_line
        .as_ref()
        .map(|l| dual_of(m, l, line_eigenvalue(true), adapted_inverse.row(0)));
    let unstable_dual = unstable_line
        .as_ref()
        .map(|l| dual_of(m, l, line_eigenvalue(false), adapted_inverse.row(stable_dim)));
    Ok(SpectralData {
        matrix: m.clone(),
        char_poly: cp,
        eigenvalues,
        moduli,
        blocks,
        hyperbolic,
        stable_dim,
        unstable_dim,
        codimension_one: stable_dim == 1,
        complex_unstable_pair,
        certified_gap: gap,
        stable_basis,
        unstable_basis,
        stable_restriction,
        unstable_restriction,
        adapted_inverse,
        stable_line,
        unstable_line,
        stable_dual,
        unstable_dual,
    })
}

impl SpectralData {
    pub fn new(m: &IntegerMatrix) -> Result<Self> {
        spectral_data(m, DEFAULT_TOLERANCE)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Largest stable modulus (weakest contraction).
    pub fn stable_rate(&self) -> f64 {
        self.moduli[self.stable_dim - 1]
    }

    /// Smallest stable modulus (strongest contraction).
    pub fn strongest_contraction(&self) -> f64 {
        self.moduli[0]
    }

    /// Smallest unstable modulus.
    pub fn xi_min(&self) -> f64 {
        self.moduli[self.stable_dim]
    }

    /// Largest unstable modulus.
    pub fn xi_max(&self) -> f64 {
        *self.moduli.last().unwrap()
    }

    /// Splits `v` into its `E^s` and `E^u` components.
    pub fn split(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = self.adapted_inverse.mul_vec(v);
        let (cs, cu) = c.split_at(self.stable_dim);
        (self.stable_basis.mul_vec(cs), self.unstable_basis.mul_vec(cu))
    }

    /// Coordinates of `v` in the frame `[Q_s | Q_u]`.
    pub fn adapted_coordinates(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = self.adapted_inverse.mul_vec(v);
        let (cs, cu) = c.split_at(self.stable_dim);
        (cs.to_vec(), cu.to_vec())
    }

    /// Uniform constant `C` with `|A^k c| <= C rate^k |c|` on the given restriction,
    /// estimated from the first powers. Used for geometric tail certificates.
    pub fn growth_constant(restriction: &Mat, rate: f64, horizon: u32) -> f64 {
        let mut p = Mat::identity(restriction.rows());
        let mut c: f64 = 1.0;
        for k in 1..=horizon {
            p = p.mul(restriction);
            c = c.max(p.norm2() / libm::pow(rate, k as f64));
        }
        c
    }
}

/// The spectral-gap inequality `(ln mu)^2 - (ln xi_l)^2 > ln mu (ln xi_l - ln xi_1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralGapReport {
    pub mu: f64,
    pub xi_1: f64,
    pub xi_l: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn spectral_gap_condition(s: &SpectralData) -> Result<SpectralGapReport> {
    spectral_gap_condition_in_base(s, core::f64::consts::E)
}

/// Same inequality with logarithms taken in `base`.
pub fn spectral_gap_condition_in_base(s: &SpectralData, base: f64) -> Result<SpectralGapReport> {
    if !s.codimension_one {
        return Err(Error::NotCodimensionOne { stable_dim: s.stable_dim });
    }
    let lb = libm::log(base);
    let log = |x: f64| libm::log(x) / lb;
    let mu = 1.0 / s.moduli[0];
    let unstable: Vec<&SpectralBlock> = s.blocks.iter().filter(|b| !b.stable).collect();
    let lo = unstable.iter().min_by(|a, b| a.modulus().total_cmp(&b.modulus())).unwrap();
    let hi = unstable.iter().max_by(|a, b| a.modulus().total_cmp(&b.modulus())).unwrap();
    let xi_1 = lo.modulus();
    let xi_l = hi.modulus();
    let lhs = log(mu) * log(mu) - log(xi_l) * log(xi_l);
    let tie = xi_l - xi_1 <= 10.0 * (lo.error_bound + hi.error_bound);
    let rhs = if tie { 0.0 } else { log(mu) * (log(xi_l) - log(xi_1)) };
    Ok(SpectralGapReport { mu, xi_1, xi_l, lhs, rhs, satisfied: lhs > rhs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSubspaceCatalog {
    pub finite: bool,
    /// Orthonormal bases in `R^d`, each spanning an invariant subspace of `E^u`.
    pub subspaces: Vec<Vec<Vec<f64>>>,
    pub cause_of_infinitude: Option<String>,
}

/// Proper nontrivial invariant subspaces of the unstable restriction.
pub fn invariant_unstable_subspaces(s: &SpectralData) -> Result<InvariantSubspaceCatalog> {
    let unstable: Vec<&SpectralBlock> = s.blocks.iter().filter(|b| !b.stable).collect();
    if let Some(b) = unstable.iter().find(|b| b.geometric_multiplicity >= 2) {
        return Ok(InvariantSubspaceCatalog {
            finite: false,
            subspaces: Vec::new(),
            cause_of_infinitude: Some(format!(
                "eigenvalue {} has {} independent eigenvectors",
                fmt_complex(b.eigenvalue),
                b.geometric_multiplicity
            )),
        });
    }
    let lm = s.matrix.to_mat();
    // Nested invariant pieces of each block: kernels of the j-th power of its factor.
    let mut pieces: Vec<Vec<Vec<Vec<f64>>>> = Vec::new();
    for b in &unstable {
        let factor = b.minimal_factor(&lm);
        let step = if b.is_real() { 1 } else { 2 };
        let mut chain = vec![Vec::new()];
        for j in 1..b.algebraic_multiplicity {
            chain.push(root_subspace(&lm, &factor, j, j * step));
        }
        chain.push(b.basis.clone());
        pieces.push(chain);
    }
    let counts: Vec<usize> = pieces.iter().map(|c| c.len()).collect();
    let total: usize = counts.iter().product();
    let mut subspaces = Vec::new();
    for idx in 0..total {
        let mut rem = idx;
        let mut vs: Vec<Vec<f64>> = Vec::new();
        let mut picks = Vec::new();
        for (chain, &n) in pieces.iter().zip(&counts) {
            let j = rem % n;
            rem /= n;
            picks.push(j);
            vs.extend(chain[j].iter().cloned());
        }
        if vs.is_empty() || vs.len() == s.unstable_dim {
            continue;
        }
        let basis = linalg::orthonormalize(&vs);
        for q in &basis {
            let res = linalg::distance_to_span(&lm.mul_vec(q), &basis);
            if res > 1e-10 * lm.max_abs().max(1.0) {
                return Err(Error::NoConvergence { terms: basis.len() });
            }
        }
        subspaces.push(basis);
    }
    Ok(InvariantSubspaceCatalog { finite: true, subspaces, cause_of_infinitude: None })
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    /// Coefficients from the leading 1 down to the constant term.
    pub poly_coeffs: Vec<i64>,
    pub matrix: IntegerMatrix,
    pub spectral: SpectralData,
    pub gap: SpectralGapReport,
}

/// Hyperbolic codimension-one companion matrices of monic degree-`d` integer
/// polynomials with constant term `+-1` and other coefficients in `[-bound, bound]`,
/// ordered lexicographically by the coefficient list (leading term first).
pub fn enumerate_catalog(d: usize, bound: i64) -> Result<Vec<CatalogEntry>> {
    if !(2..=5).contains(&d) {
        return Err(Error::invalid("catalog degree must be in 2..=5"));
    }
    if !(0..=10).contains(&bound) {
        return Err(Error::invalid("coefficient bound must be in 0..=10"));
    }
    let mut out = Vec::new();
    let mut middle = vec![-bound; d - 1];
    loop {
        for a0 in [-1i64, 1] {
            // Descending list [1, a_{d-1}, ..., a_1, a_0].
            let mut desc = vec![1i64];
            desc.extend_from_slice(&middle);
            desc.push(a0);
            if let Some(entry) = catalog_candidate(&desc)? {
                out.push(entry);
            }
        }
        // Odometer over the middle coefficients, last position fastest.
        let mut i = middle.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if middle[i] < bound {
                middle[i] += 1;
                for v in middle.iter_mut().skip(i + 1) {
                    *v = -bound;
                }
                break;
            }
        }
    }
}

fn catalog_candidate(desc: &[i64]) -> Result<Option<CatalogEntry>> {
    let asc: Vec<i64> = desc.iter().rev().copied().collect();
    // Cheap floating screen: exactly one root well inside the unit circle and
    // none near it.
    let approx = poly::aberth(&asc.iter().map(|&v| v as f64).collect::<Vec<_>>());
    let inside = approx.iter().filter(|z| z.norm() < 1.0 - 1e-6).count();
    let near = approx.iter().any(|z| (z.norm() - 1.0).abs() <= 1e-6);
    if inside != 1 && !near {
        return Ok(None);
    }
    let m = IntegerMatrix::companion(&asc[..asc.len() - 1])?;
    let spectral = match spectral_data(&m, DEFAULT_TOLERANCE) {
        Ok(s) => s,
        Err(Error::NotHyperbolic { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !spectral.codimension_one {
        return Ok(None);
    }
    let gap = spectral_gap_condition(&spectral)?;
    Ok(Some(CatalogEntry { poly_coeffs: desc.to_vec(), matrix: m, spectral, gap }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_determinant() {
        assert_eq!(determinant(3, &[1, 2, 3, 0, 1, 4, 5, 6, 0]), 1);
        assert_eq!(determinant(2, &[0, 1, 1, 0]), -1);
        assert_eq!(determinant(2, &[1, 2, 2, 4]), 0);
    }

    #[test]
    fn rejects_non_unimodular() {
        assert_eq!(IntegerMatrix::new(2, vec![2, 0, 0, 1]), Err(Error::NotUnimodular(2)));
        assert!(IntegerMatrix::new(1, vec![1]).is_err());
    }

    #[test]
    fn inverse_is_exact() {
        let m = IntegerMatrix::companion(&[-1, 0, 1]).unwrap();
        let mi = m.inverse();
        let d = 3;
        for i in 0..d {
            for j in 0..d {
                let s: i64 = (0..d).map(|k| m.get(i, k) * mi.get(k, j)).sum();
                assert_eq!(s, i64::from(i == j));
            }
        }
    }

    #[test]
    fn stable_splitting_is_invariant() {
        let m = IntegerMatrix::companion(&[-1, 0, 1]).unwrap();
        let s = SpectralData::new(&m).unwrap();
        let lm = m.to_mat();
        let lhs = lm.mul(&s.unstable_basis);
        let rhs = s.unstable_basis.mul(&s.unstable_restriction);
        assert!(lhs.sub(&rhs).max_abs() < 1e-12);
        let (vs, vu) = s.split(&[0.3, -0.2, 0.7]);
        let back = linalg::add(&vs, &vu);
        assert!(linalg::norm(&linalg::sub(&back, &[0.3, -0.2, 0.7])) < 1e-14);
    }

    #[test]
    fn jordan_block_counts_nested_kernels() {
        // diag(cat, cat) has repeated eigenvalues with two eigenvectors each.
        let m = IntegerMatrix::new(4, vec![2, 1, 0, 0, 1, 1, 0, 0, 0, 0, 2, 1, 0, 0, 1, 1]).unwrap();
        let s = SpectralData::new(&m).unwrap();
        let cat = invariant_unstable_subspaces(&s).unwrap();
        assert!(!cat.finite);
        assert!(cat.cause_of_infinitude.is_some());
    }
}
