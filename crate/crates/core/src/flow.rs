//! The suspension flow on the mapping torus `{(x, s) : 0 <= s < r(x)}` with the
//! identification `(x, r(x)) ~ (Lx, 0)`, and its strong stable and unstable leaves.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::roof::RoofFunction;
use crate::spectral::{IntegerMatrix, SpectralData};
use crate::sum::Compensated;
use crate::torus::TorusPoint;

pub const DEFAULT_CHART_RADIUS: f64 = 0.05;
/// Series are cut once the certified tail drops below this.
pub const SERIES_THRESHOLD: f64 = 1e-14;
const MAX_TERMS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Leaf {
    Stable,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowPoint {
    pub x: TorusPoint,
    pub s: f64,
}

impl FlowPoint {
    pub fn new(x: TorusPoint, s: f64) -> Self {
        FlowPoint { x, s }
    }
}

#[derive(Clone, Debug)]
pub struct SuspensionFlow {
    base: IntegerMatrix,
    base_inv: IntegerMatrix,
    translation: Option<TorusPoint>,
    spectral: SpectralData,
    roof: RoofFunction,
    chart_radius: f64,
    lipschitz: f64,
    inv_stable_restriction: Mat,
    inv_unstable_restriction: Mat,
    stable_growth: f64,
    unstable_decay: f64,
}

impl SuspensionFlow {
    pub fn new(base: IntegerMatrix, roof: RoofFunction) -> Result<Self> {
        let spectral = SpectralData::new(&base)?;
        Self::from_parts(base, None, spectral, roof)
    }

    /// Affine base `x -> Lx + translation`.
    pub fn with_translation(base: IntegerMatrix, translation: TorusPoint, roof: RoofFunction) -> Result<Self> {
        let spectral = SpectralData::new(&base)?;
        Self::from_parts(base, Some(translation), spectral, roof)
    }

    pub fn from_parts(
        base: IntegerMatrix,
        translation: Option<TorusPoint>,
        spectral: SpectralData,
        roof: RoofFunction,
    ) -> Result<Self> {
        if roof.dim() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: roof.dim() });
        }
        if let Some(t) = &translation {
            if t.dim() != base.dim() {
                return Err(Error::DimensionMismatch { expected: base.dim(), got: t.dim() });
            }
        }
        let inv_s = spectral.stable_restriction.inverse().ok_or(Error::NoConvergence { terms: 0 })?;
        let inv_u = spectral.unstable_restriction.inverse().ok_or(Error::NoConvergence { terms: 0 })?;
        let stable_growth = SpectralData::growth_constant(&spectral.stable_restriction, spectral.stable_rate(), 64);
        let unstable_decay = SpectralData::growth_constant(&inv_u, 1.0 / spectral.xi_min(), 64);
        Ok(SuspensionFlow {
            base_inv: base.inverse(),
            base,
            translation,
            lipschitz: roof.poly().lipschitz_bound(),
            spectral,
            roof,
            chart_radius: DEFAULT_CHART_RADIUS,
            inv_stable_restriction: inv_s,
            inv_unstable_restriction: inv_u,
            stable_growth,
            unstable_decay,
        })
    }

    pub fn with_chart_radius(mut self, radius: f64) -> Self {
        self.chart_radius = radius;
        self
    }

    pub fn base(&self) -> &IntegerMatrix {
        &self.base
    }

    pub fn translation(&self) -> Option<&TorusPoint> {
        self.translation.as_ref()
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn roof(&self) -> &RoofFunction {
        &self.roof
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    pub fn apply_base(&self, x: &TorusPoint) -> TorusPoint {
        let y = self.base.apply(x);
        match &self.translation {
            Some(t) => y.add(t),
            None => y,
        }
    }

    pub fn apply_base_inverse(&self, x: &TorusPoint) -> TorusPoint {
        match &self.translation {
            Some(t) => self.base_inv.apply(&x.sub(t)),
            None => self.base_inv.apply(x),
        }
    }

    /// Brings `(x, s)` into the fundamental domain.
    pub fn normalize(&self, x: TorusPoint, s: f64) -> FlowPoint {
        self.normalize_counting(x, s).0
    }

    fn normalize_counting(&self, mut x: TorusPoint, mut s: f64) -> (FlowPoint, i64) {
        let mut crossings = 0i64;
        loop {
            let r = self.roof.eval_point(&x);
            if s >= r {
                s -= r;
                x = self.apply_base(&x);
                crossings += 1;
            } else if s < 0.0 {
                x = self.apply_base_inverse(&x);
                s += self.roof.eval_point(&x);
                crossings -= 1;
            } else {
                return (FlowPoint { x, s }, crossings);
            }
        }
    }

    pub fn evolve(&self, p: &FlowPoint, t: f64) -> FlowPoint {
        self.evolve_counting(p, t).0
    }

    /// Flow by `t` and report the signed number of roof crossings.
    pub fn evolve_counting(&self, p: &FlowPoint, t: f64) -> (FlowPoint, i64) {
        self.normalize_counting(p.x, p.s + t)
    }

    /// Torus distance and signed time offset `p.s - q'.s`, where `q'` is the
    /// representative of `q` under the identification whose base is closest to `p`.
    pub fn aligned_offset(&self, p: &FlowPoint, q: &FlowPoint) -> (f64, f64) {
        let fwd = self.apply_base(&q.x);
        let back = self.apply_base_inverse(&q.x);
        let cands = [
            (q.x, q.s),
            (fwd, q.s - self.roof.eval_point(&q.x)),
            (back, q.s + self.roof.eval_point(&back)),
        ];
        cands
            .iter()
            .map(|(x, s)| (p.x.distance(x), p.s - s))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
    }

    /// Constants `C` with `|A_s^k| <= C rate_s^k` and `|A_u^-k| <= C xi_1^-k`.
    pub fn growth_constants(&self) -> (f64, f64) {
        (self.stable_growth, self.unstable_decay)
    }

    /// Distance in the fundamental-domain metric, minimized over the identification.
    pub fn distance(&self, p: &FlowPoint, q: &FlowPoint) -> f64 {
        let d = |a: &TorusPoint, s: f64| p.x.distance(a).max((p.s - s).abs());
        let fwd = self.apply_base(&q.x);
        let back = self.apply_base_inverse(&q.x);
        d(&q.x, q.s)
            .min(d(&fwd, q.s - self.roof.eval_point(&q.x)))
            .min(d(&back, q.s + self.roof.eval_point(&back)))
    }

    pub fn birkhoff_sum(&self, x: &TorusPoint, n: usize) -> f64 {
        let mut s = Compensated::default();
        let mut p = *x;
        for _ in 0..n {
            s.add(self.roof.eval_point(&p));
            p = self.apply_base(&p);
        }
        s.value()
    }

    /// Coordinates of `v` in the orthonormal frame of the requested leaf, or
    /// `OffLeaf` when `v` has a transverse component of at least `1e-10`.
    pub fn leaf_coordinates(&self, v: &[f64], leaf: Leaf) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let (vs, vu) = self.spectral.split(v);
        let (cs, cu) = self.spectral.adapted_coordinates(v);
        let (transverse, coords) = match leaf {
            Leaf::Stable => (linalg::norm(&vu), cs),
            Leaf::Unstable => (linalg::norm(&vs), cu),
        };
        if transverse >= 1e-10 {
            return Err(Error::OffLeaf { transverse });
        }
        Ok(coords)
    }

    pub fn frame(&self, leaf: Leaf) -> &Mat {
        match leaf {
            Leaf::Stable => &self.spectral.stable_basis,
            Leaf::Unstable => &self.spectral.unstable_basis,
        }
    }

    /// `A_u^{-1}` in the unstable frame.
    pub fn inverse_unstable_restriction(&self) -> &Mat {
        &self.inv_unstable_restriction
    }

    pub fn inverse_stable_restriction(&self) -> &Mat {
        &self.inv_stable_restriction
    }

    /// Visits the terms of the stable (`k >= 0`, forward) or unstable (`k >= 1`,
    /// backward) series: the base point `L^{+-k} x` and the displacement
    /// `L^{+-k} v` for `v = Q c`. Stops once the certified geometric tail of the
    /// remaining terms falls below `threshold`.
    pub(crate) fn for_each_series_term(
        &self,
        x: &TorusPoint,
        c: &[f64],
        leaf: Leaf,
        threshold: f64,
        mut visit: impl FnMut(&TorusPoint, &[f64]),
    ) -> Result<()> {
        let (rate, constant, step_mat, frame) = match leaf {
            Leaf::Stable => {
                (self.spectral.stable_rate(), self.stable_growth, &self.spectral.stable_restriction, self.frame(leaf))
            }
            Leaf::Unstable => {
                (1.0 / self.spectral.xi_min(), self.unstable_decay, &self.inv_unstable_restriction, self.frame(leaf))
            }
        };
        let cnorm = linalg::norm(c);
        if cnorm == 0.0 {
            return Ok(());
        }
        let tail_factor = self.lipschitz.max(1.0) * constant / (1.0 - rate);
        let mut p = *x;
        let mut ck = c.to_vec();
        if leaf == Leaf::Unstable {
            p = self.apply_base_inverse(&p);
            ck = step_mat.mul_vec(&ck);
        }
        let mut rk = match leaf {
            Leaf::Stable => 1.0,
            Leaf::Unstable => rate,
        };
        for _ in 0..MAX_TERMS {
            if tail_factor * rk * cnorm < threshold {
                return Ok(());
            }
            let disp = frame.mul_vec(&ck);
            visit(&p, &disp);
            p = match leaf {
                Leaf::Stable => self.apply_base(&p),
                Leaf::Unstable => self.apply_base_inverse(&p),
            };
            ck = step_mat.mul_vec(&ck);
            rk *= rate;
        }
        Err(Error::NoConvergence { terms: MAX_TERMS })
    }

    /// Time adjustment `Delta` making `(x, 0)` and `(x + v, Delta)` lie on a common
    /// strong leaf. Stable: `sum_{k>=0} r(L^k(x+v)) - r(L^k x)`. Unstable:
    /// `sum_{k>=1} r(L^-k x) - r(L^-k (x+v))`.
    pub fn time_adjustment(&self, x: &TorusPoint, v: &[f64], leaf: Leaf) -> Result<f64> {
        let c = self.leaf_coordinates(v, leaf)?;
        self.time_adjustment_frame(x, &c, leaf)
    }

    /// As [`Self::time_adjustment`] with `v` given by its frame coordinates.
    pub fn time_adjustment_frame(&self, x: &TorusPoint, c: &[f64], leaf: Leaf) -> Result<f64> {
        self.time_adjustment_with(x, c, leaf, SERIES_THRESHOLD)
    }

    pub fn time_adjustment_with(&self, x: &TorusPoint, c: &[f64], leaf: Leaf, threshold: f64) -> Result<f64> {
        if self.roof.is_constant() {
            return Ok(0.0);
        }
        let zero = alloc::vec![0.0; self.dim()];
        let poly = self.roof.poly();
        let mut sum = Compensated::default();
        self.for_each_series_term(x, c, leaf, threshold, |p, disp| {
            sum.add(poly.difference_at(p, &zero, disp));
        })?;
        Ok(match leaf {
            Leaf::Stable => sum.value(),
            Leaf::Unstable => -sum.value(),
        })
    }

    /// The point of the strong leaf through `p` over the base point `x + v`.
    pub fn strong_manifold_point(&self, p: &FlowPoint, v: &[f64], leaf: Leaf) -> Result<FlowPoint> {
        let n = linalg::norm(v);
        if n > self.chart_radius {
            return Err(Error::OutsideChart { norm: n, radius: self.chart_radius });
        }
        let c = self.leaf_coordinates(v, leaf)?;
        Ok(self.strong_point_frame(p, &c, leaf)?.0)
    }

    /// Strong-leaf point from frame coordinates, ignoring the chart radius.
    /// Also returns the time adjustment.
    pub fn strong_point_frame(&self, p: &FlowPoint, c: &[f64], leaf: Leaf) -> Result<(FlowPoint, f64)> {
        // Move the base point of p back to s = 0 so the series applies verbatim.
        let delta = self.time_adjustment_frame(&p.x, c, leaf)?;
        Ok((self.normalize(self.translate_along(&p.x, c, leaf), p.s + delta), delta))
    }

    /// `x + Q c` on the lattice. When the leaf or its complement is a line, the
    /// displacement is formed in double-double so the lattice point lies on the
    /// leaf to lattice precision.
    pub fn translate_along(&self, x: &TorusPoint, c: &[f64], leaf: Leaf) -> TorusPoint {
        use crate::dd::Dd;
        let sd = &self.spectral;
        let (line, other_line, other_dual) = match leaf {
            Leaf::Stable => (sd.stable_line.as_ref(), sd.unstable_line.as_ref(), sd.unstable_dual.as_ref()),
            Leaf::Unstable => (sd.unstable_line.as_ref(), sd.stable_line.as_ref(), sd.stable_dual.as_ref()),
        };
        if let (Some(q), 1) = (line, c.len()) {
            let disp: Vec<Dd> = q.iter().map(|qi| qi.mul(Dd::new(c[0]))).collect();
            return x.translate_dd(&disp);
        }
        if let (Some(e), Some(l)) = (other_line, other_dual) {
            let frame = self.frame(leaf);
            let v: Vec<Dd> = (0..frame.rows())
                .map(|i| {
                    let mut acc = Dd::default();
                    for (j, cj) in c.iter().enumerate() {
                        acc = acc.add(Dd::new(frame[(i, j)]).mul(Dd::new(*cj)));
                    }
                    acc
                })
                .collect();
            let mut along = Dd::default();
            for (li, vi) in l.iter().zip(&v) {
                along = along.add(li.mul(*vi));
            }
            let disp: Vec<Dd> = v.iter().zip(e).map(|(vi, ei)| vi.sub(along.mul(*ei))).collect();
            return x.translate_dd(&disp);
        }
        x.translate(&self.frame(leaf).mul_vec(c))
    }

    /// Samples `evolve(p, t)` at the given times.
    pub fn trajectory(&self, p: &FlowPoint, times: &[f64]) -> Vec<(f64, FlowPoint)> {
        times.iter().map(|&t| (t, self.evolve(p, t))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat_cos() -> SuspensionFlow {
        SuspensionFlow::new(IntegerMatrix::cat_map(), RoofFunction::cosine(2, 1.0, 0.1, 0).unwrap()).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let f = cat_cos();
        let p = FlowPoint::new(TorusPoint::from_f64(&[0.3, 0.6]), 0.2);
        assert_eq!(f.evolve(&p, 0.0), p);
    }

    #[test]
    fn constant_roof_one_crossing() {
        let f = SuspensionFlow::new(IntegerMatrix::cat_map(), RoofFunction::constant(2, 1.5).unwrap()).unwrap();
        let x = TorusPoint::from_f64(&[0.1, 0.7]);
        let q = f.evolve(&FlowPoint::new(x, 0.0), 1.5);
        assert_eq!(q.x, f.apply_base(&x));
        assert_eq!(q.s, 0.0);
    }

    #[test]
    fn round_trip_is_exact_on_base() {
        let f = cat_cos();
        let p = FlowPoint::new(TorusPoint::from_f64(&[0.3, 0.6]), 0.2);
        let q = f.evolve(&f.evolve(&p, -73.25), 73.25);
        assert!(f.distance(&p, &q) < 1e-12);
    }

    #[test]
    fn off_leaf_is_rejected() {
        let f = cat_cos();
        let x = TorusPoint::from_f64(&[0.3, 0.6]);
        assert!(matches!(f.time_adjustment(&x, &[0.01, 0.0], Leaf::Stable), Err(Error::OffLeaf { .. })));
        let far = f.spectral().stable_basis.mul_vec(&[0.2]);
        let p = FlowPoint::new(x, 0.0);
        assert!(matches!(f.strong_manifold_point(&p, &far, Leaf::Stable), Err(Error::OutsideChart { .. })));
    }
}
