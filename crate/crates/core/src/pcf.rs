//! Temporal distance functions around stable/unstable quadrilaterals.
//!
//! Given `a`, a point `b` on the strong stable leaf of `a` and a point `x` on the
//! local strong unstable leaf of `a`, let `Hol(x)` be the point where the strong
//! stable leaf of `x` meets the weak unstable leaf of `b`, and `y` the point
//! where the strong unstable leaf of `b` meets the weak stable leaf of `Hol(x)`.
//! The temporal distance `rho` is the flow time from `y` to `Hol(x)`: positive
//! when `Hol(x)` lies ahead of `y`.
//!
//! ```text
//!        y ----- rho -----> Hol(x)
//!        |  W^u               |  W^s
//!        b                    x
//!         \___ W^s ___ a ___ W^u __/
//! ```
//!
//! For a suspension over a linear base the quadrilateral closes in the base and
//! `rho = D^u(a, v_u) + D^s(a + v_u, v_s) - D^s(a, v_s) - D^u(a + v_s, v_u)`,
//! with `D` the time adjustments of [`SuspensionFlow`].

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::flow::{FlowPoint, Leaf, SuspensionFlow};
use crate::linalg::{self, Mat};
use crate::roof::RoofFunction;
use crate::sum::Compensated;
use crate::torus::TorusPoint;

/// Series are summed until the certified tail is below this.
const GRADIENT_THRESHOLD: f64 = 1e-14;
/// Relative singular-value cutoff for kernels of gradient families.
pub const KERNEL_RELATIVE_CUTOFF: f64 = 1e-9;
/// Absolute floor under which a singular value counts as zero regardless of scale.
pub const KERNEL_ABSOLUTE_FLOOR: f64 = 1e-12;
/// Largest base mismatch accepted between points meant to coincide after flowing.
const POSITION_MATCH: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct Quadrilateral {
    pub a: FlowPoint,
    /// Base displacement in `E^s` from `a` to `b`.
    pub s_disp: Vec<f64>,
    /// Base displacement in `E^u` from `a` to `x`.
    pub u_disp: Vec<f64>,
}

impl Quadrilateral {
    /// Builds from frame coordinates of the displacements.
    pub fn from_frame(flow: &SuspensionFlow, a: FlowPoint, cs: &[f64], cu: &[f64]) -> Self {
        Quadrilateral {
            a,
            s_disp: flow.frame(Leaf::Stable).mul_vec(cs),
            u_disp: flow.frame(Leaf::Unstable).mul_vec(cu),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TemporalDistanceSample {
    pub quad: Quadrilateral,
    pub value_series: f64,
    pub value_geometric: f64,
    pub discrepancy: f64,
}

fn check_chart(flow: &SuspensionFlow, v: &[f64]) -> Result<()> {
    let n = linalg::norm(v);
    if n > flow.chart_radius() {
        return Err(Error::OutsideChart { norm: n, radius: flow.chart_radius() });
    }
    Ok(())
}

fn frame_coordinates(flow: &SuspensionFlow, q: &Quadrilateral) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((flow.leaf_coordinates(&q.s_disp, Leaf::Stable)?, flow.leaf_coordinates(&q.u_disp, Leaf::Unstable)?))
}

/// Temporal distance from the closed-form combination of four time adjustments.
pub fn temporal_distance_series(flow: &SuspensionFlow, q: &Quadrilateral) -> Result<f64> {
    check_chart(flow, &q.s_disp)?;
    check_chart(flow, &q.u_disp)?;
    let (cs, cu) = frame_coordinates(flow, q)?;
    series_from_frame(flow, &q.a.x, &cs, &cu)
}

pub(crate) fn series_from_frame(flow: &SuspensionFlow, xa: &TorusPoint, cs: &[f64], cu: &[f64]) -> Result<f64> {
    if flow.roof().is_constant() || linalg::norm(cs) == 0.0 || linalg::norm(cu) == 0.0 {
        return Ok(0.0);
    }
    let xu = flow.translate_along(xa, cu, Leaf::Unstable);
    let xs = flow.translate_along(xa, cs, Leaf::Stable);
    let mut sum = Compensated::default();
    sum.add(flow.time_adjustment_frame(xa, cu, Leaf::Unstable)?);
    sum.add(flow.time_adjustment_frame(&xu, cs, Leaf::Stable)?);
    sum.add(-flow.time_adjustment_frame(xa, cs, Leaf::Stable)?);
    sum.add(-flow.time_adjustment_frame(&xs, cu, Leaf::Unstable)?);
    Ok(sum.value())
}

/// Time offset placing `(p.x + Q c, p.s + offset)` on the strong leaf of `p`.
/// The point `p` is flowed far forward (stable) or backward (unstable), its
/// companion is placed there using the linearly transported displacement, and
/// flowed back; only `evolve` measures time.
fn asymptotic_offset(flow: &SuspensionFlow, p: &FlowPoint, c: &[f64], leaf: Leaf, tol: f64) -> Result<f64> {
    let sd = flow.spectral();
    let (rate, constant) = match leaf {
        Leaf::Stable => (sd.stable_rate(), flow.growth_constants().0),
        Leaf::Unstable => (1.0 / sd.xi_min(), flow.growth_constants().1),
    };
    let lip = flow.roof().poly().lipschitz_bound();
    let size = linalg::norm(c);
    if lip == 0.0 || size == 0.0 {
        return Ok(0.0);
    }
    // Crossings needed for the neglected tail to drop below tol / 10.
    let tail = lip * constant * size / (1.0 - rate);
    let crossings = (libm::log(tol / (10.0 * tail)) / libm::log(rate)).max(1.0);
    let horizon = (libm::ceil(crossings) + 1.0) * flow.roof().upper_bound();
    let t = match leaf {
        Leaf::Stable => horizon,
        Leaf::Unstable => -horizon,
    };
    let (pt, n) = flow.evolve_counting(p, t);
    let (frame, step) = match leaf {
        Leaf::Stable => (&sd.stable_basis, &sd.stable_restriction),
        Leaf::Unstable => (&sd.unstable_basis, flow.inverse_unstable_restriction()),
    };
    let mut ck = c.to_vec();
    for _ in 0..n.unsigned_abs() {
        ck = step.mul_vec(&ck);
    }
    let far = FlowPoint::new(pt.x.translate(&frame.mul_vec(&ck)), pt.s);
    let back = flow.evolve(&far, -t);
    let target = FlowPoint::new(flow.translate_along(&p.x, c, leaf), p.s);
    let (dist, offset) = flow.aligned_offset(&target, &back);
    if dist > POSITION_MATCH {
        return Err(Error::NoIntersection);
    }
    Ok(-offset)
}

/// Solves `g(c) = 0` for a map between equal-dimensional frame coordinates by
/// Newton's method with a forward-difference Jacobian.
fn newton(mut g: impl FnMut(&[f64]) -> Vec<f64>, start: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = start.len();
    let mut c = start;
    for _ in 0..30 {
        let r = g(&c);
        if linalg::norm(&r) < tol {
            return Some(c);
        }
        let h = 1e-7;
        let mut jac = Mat::zeros(n, n);
        for j in 0..n {
            let mut cj = c.clone();
            cj[j] += h;
            let rj = g(&cj);
            for i in 0..n {
                jac[(i, j)] = (rj[i] - r[i]) / h;
            }
        }
        let step = jac.solve(&linalg::scaled(&r, -1.0))?;
        c = linalg::add(&c, &step);
        if !c.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    None
}

/// Temporal distance by constructing `Hol(x)` and `y` as leaf intersections and
/// measuring the flow time between them.
pub fn temporal_distance_geometric(flow: &SuspensionFlow, q: &Quadrilateral, tol: f64) -> Result<f64> {
    if !(tol >= 1e-10) {
        return Err(Error::invalid("tolerance must be at least 1e-10"));
    }
    let (cs, cu) = frame_coordinates(flow, q)?;
    let radius = flow.chart_radius();
    if linalg::norm(&cs) > radius || linalg::norm(&cu) > radius {
        return Err(Error::NoIntersection);
    }
    let sd = flow.spectral();
    let inner = tol / 8.0;
    let a = flow.normalize(q.a.x, q.a.s);

    let xb = flow.translate_along(&a.x, &cu, Leaf::Unstable);
    let x_pt = FlowPoint::new(xb, a.s + asymptotic_offset(flow, &a, &cu, Leaf::Unstable, inner)?);
    let bb = flow.translate_along(&a.x, &cs, Leaf::Stable);
    let b_pt = FlowPoint::new(bb, a.s + asymptotic_offset(flow, &a, &cs, Leaf::Stable, inner)?);

    // Hol(x): slide along E^s from x until the base difference to b lies in E^u.
    let w = newton(
        |c| sd.adapted_coordinates(&flow.translate_along(&xb, c, Leaf::Stable).diff(&bb)).0,
        vec![0.0; cs.len()],
        1e-15,
    )
    .ok_or(Error::NoIntersection)?;
    if linalg::norm(&w) > radius {
        return Err(Error::NoIntersection);
    }
    let hb = flow.translate_along(&xb, &w, Leaf::Stable);
    let hol = FlowPoint::new(hb, x_pt.s + asymptotic_offset(flow, &x_pt, &w, Leaf::Stable, inner)?);

    // y: slide along E^u from b until the base reaches Hol(x).
    let z = newton(
        |c| sd.adapted_coordinates(&flow.translate_along(&bb, c, Leaf::Unstable).diff(&hb)).1,
        vec![0.0; cu.len()],
        1e-15,
    )
    .ok_or(Error::NoIntersection)?;
    let yb = flow.translate_along(&bb, &z, Leaf::Unstable);
    if linalg::norm(&z) > radius || yb.distance(&hb) > 1e-12 {
        return Err(Error::NoIntersection);
    }
    let y_pt = FlowPoint::new(yb, b_pt.s + asymptotic_offset(flow, &b_pt, &z, Leaf::Unstable, inner)?);

    // Flow time from y to Hol(x), refined against evolve.
    let hol_n = flow.normalize(hol.x, hol.s);
    let y_n = flow.normalize(y_pt.x, y_pt.s);
    let mut tau = hol.s - y_pt.s;
    for _ in 0..4 {
        let (dist, offset) = flow.aligned_offset(&hol_n, &flow.evolve(&y_n, tau));
        if dist > POSITION_MATCH {
            return Err(Error::NoIntersection);
        }
        tau += offset;
        if offset.abs() <= inner {
            break;
        }
    }
    Ok(tau)
}

pub fn sample(flow: &SuspensionFlow, q: &Quadrilateral, tol: f64) -> Result<TemporalDistanceSample> {
    let value_series = temporal_distance_series(flow, q)?;
    let value_geometric = temporal_distance_geometric(flow, q, tol)?;
    Ok(TemporalDistanceSample {
        quad: q.clone(),
        value_series,
        value_geometric,
        discrepancy: (value_series - value_geometric).abs(),
    })
}

pub(crate) fn hessian_bound(roof: &RoofFunction) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    roof.poly()
        .terms()
        .map(|(k, c)| c.norm() * two_pi * two_pi * k.iter().map(|&v| (v * v) as f64).sum::<f64>())
        .sum()
}

/// Gradient of the unstable adjustment `c -> D^u(x, Q_u c)` at `c`.
fn unstable_adjustment_gradient(flow: &SuspensionFlow, x: &TorusPoint, c: &[f64]) -> Result<Vec<f64>> {
    let poly = flow.roof().poly();
    let sd = flow.spectral();
    let qu = &sd.unstable_basis;
    let inv = flow.inverse_unstable_restriction();
    let du = c.len();
    let rate = 1.0 / sd.xi_min();
    let tail_factor = poly.lipschitz_bound() * flow.growth_constants().1 / (1.0 - rate);
    let mut g = vec![Compensated::default(); du];
    let mut frame = qu.mul(inv); // Q_u A_u^{-k}
    let mut p = flow.apply_base_inverse(x);
    let mut rk = rate;
    for _ in 0..100_000 {
        if tail_factor * rk < GRADIENT_THRESHOLD {
            let out: Vec<f64> = g.iter().map(|s| -s.value()).collect();
            return Ok(out);
        }
        let disp = frame.mul_vec(c);
        let grad = poly.gradient_at(&p, &disp);
        let row = frame.tr_mul_vec(&grad);
        for (gi, ri) in g.iter_mut().zip(&row) {
            gi.add(*ri);
        }
        frame = frame.mul(inv);
        p = flow.apply_base_inverse(&p);
        rk *= rate;
    }
    Err(Error::NoConvergence { terms: 100_000 })
}

/// Gradient of `c -> D^s(x + Q_u c, Q_s cs)` at `c = 0`, `x` already displaced.
fn stable_adjustment_gradient(flow: &SuspensionFlow, x: &TorusPoint, cs: &[f64]) -> Result<Vec<f64>> {
    let poly = flow.roof().poly();
    let sd = flow.spectral();
    let ratio = sd.stable_rate() * sd.xi_max();
    if ratio >= 1.0 - 1e-12 {
        return Err(Error::NotBunched { ratio });
    }
    let du = sd.unstable_dim;
    let (cst, _) = flow.growth_constants();
    let cu_growth = crate::spectral::SpectralData::growth_constant(&sd.unstable_restriction, sd.xi_max(), 64);
    let tail_factor =
        hessian_bound(flow.roof()) * cst * cu_growth * linalg::norm(cs) / (1.0 - ratio);
    let zero = vec![0.0; flow.dim()];
    let mut g = vec![Compensated::default(); du];
    let mut frame = sd.unstable_basis.clone(); // Q_u A_u^k
    let mut ck = cs.to_vec();
    let mut p = *x;
    let mut rk = 1.0;
    for _ in 0..100_000 {
        if tail_factor * rk < GRADIENT_THRESHOLD {
            return Ok(g.iter().map(Compensated::value).collect());
        }
        let step = sd.stable_basis.mul_vec(&ck);
        let gd = poly.gradient_difference_at(&p, &zero, &step);
        let row = frame.tr_mul_vec(&gd);
        for (gi, ri) in g.iter_mut().zip(&row) {
            gi.add(*ri);
        }
        frame = frame.mul(&sd.unstable_restriction);
        ck = sd.stable_restriction.mul_vec(&ck);
        p = flow.apply_base(&p);
        rk *= ratio;
    }
    Err(Error::NoConvergence { terms: 100_000 })
}

/// Gradient of `c -> rho_{a,b}(x(c))` in unstable frame coordinates, where
/// `x(c)` is the point of `W^u(a)` over `a + Q_u c`, evaluated at the frame
/// coordinates of `u_disp`.
pub fn pcf_gradient(flow: &SuspensionFlow, a: &FlowPoint, s_disp: &[f64], u_disp: &[f64]) -> Result<Vec<f64>> {
    check_chart(flow, s_disp)?;
    check_chart(flow, u_disp)?;
    let cs = flow.leaf_coordinates(s_disp, Leaf::Stable)?;
    let cu = flow.leaf_coordinates(u_disp, Leaf::Unstable)?;
    gradient_from_frame(flow, &a.x, &cs, &cu)
}

pub(crate) fn gradient_from_frame(flow: &SuspensionFlow, xa: &TorusPoint, cs: &[f64], cu: &[f64]) -> Result<Vec<f64>> {
    let du = cu.len();
    if flow.roof().is_constant() || linalg::norm(cs) == 0.0 {
        return Ok(vec![0.0; du]);
    }
    let xu = flow.translate_along(xa, cu, Leaf::Unstable);
    let xs = flow.translate_along(xa, cs, Leaf::Stable);
    let g1 = unstable_adjustment_gradient(flow, xa, cu)?;
    let g2 = stable_adjustment_gradient(flow, &xu, cs)?;
    let g3 = unstable_adjustment_gradient(flow, &xs, cu)?;
    Ok((0..du).map(|i| g1[i] + g2[i] - g3[i]).collect())
}

/// A simple temporal distance function attached to a base point `p`: the
/// quadrilateral corner is `a = W^u(p)` at `a_offset` (unstable frame coordinates)
/// and `b = W^s(a)` at `s_coords` (stable frame coordinates). As a function on
/// `W^u(p)` in frame coordinates `c`, it is `rho_{a,b}` at `u_disp = c - a_offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct PcfPair {
    pub a_offset: Vec<f64>,
    pub s_coords: Vec<f64>,
}

impl PcfPair {
    pub fn corner(&self, flow: &SuspensionFlow, p: &FlowPoint) -> Result<FlowPoint> {
        Ok(flow.strong_point_frame(p, &self.a_offset, Leaf::Unstable)?.0)
    }

    pub fn value(&self, flow: &SuspensionFlow, p: &FlowPoint, c: &[f64]) -> Result<f64> {
        let a = self.corner(flow, p)?;
        series_from_frame(flow, &a.x, &self.s_coords, &linalg::sub(c, &self.a_offset))
    }

    pub fn gradient(&self, flow: &SuspensionFlow, p: &FlowPoint, c: &[f64]) -> Result<Vec<f64>> {
        let a = self.corner(flow, p)?;
        gradient_from_frame(flow, &a.x, &self.s_coords, &linalg::sub(c, &self.a_offset))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchingKernelReport {
    pub base_point: FlowPoint,
    /// Gradients in unstable frame coordinates.
    pub gradients: Vec<Vec<f64>>,
    pub kernel_dim: usize,
    /// Kernel basis in unstable frame coordinates.
    pub kernel_basis: Vec<Vec<f64>>,
    pub rank: usize,
}

/// Common kernel of a family of covectors on `R^n`.
pub fn common_kernel(gradients: &[Vec<f64>], n: usize) -> (usize, Vec<Vec<f64>>) {
    if gradients.is_empty() {
        let basis = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        return (0, basis);
    }
    let mut rows: Vec<Vec<f64>> = gradients.to_vec();
    while rows.len() < n {
        rows.push(vec![0.0; n]);
    }
    let svd = Mat::from_rows(&rows).svd();
    let rank = svd.rank(KERNEL_RELATIVE_CUTOFF, KERNEL_ABSOLUTE_FLOOR);
    (rank, svd.kernel(KERNEL_RELATIVE_CUTOFF, KERNEL_ABSOLUTE_FLOOR))
}

pub fn matching_kernel_dimension(
    flow: &SuspensionFlow,
    base_point: &FlowPoint,
    pairs: &[PcfPair],
) -> Result<MatchingKernelReport> {
    if pairs.is_empty() {
        return Err(Error::invalid("at least one pair is required"));
    }
    let du = flow.spectral().unstable_dim;
    let origin = vec![0.0; du];
    let gradients = pairs.iter().map(|pr| pr.gradient(flow, base_point, &origin)).collect::<Result<Vec<_>>>()?;
    let (rank, kernel_basis) = common_kernel(&gradients, du);
    Ok(MatchingKernelReport { base_point: *base_point, gradients, kernel_dim: kernel_basis.len(), kernel_basis, rank })
}

/// Uniform sample in `[0, 1)` with 53 random bits.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal sample by the Box-Muller transform.
pub fn normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Uniformly distributed vector in the ball of radius `r` in `R^n`.
pub fn random_in_ball<R: RngCore + ?Sized>(rng: &mut R, n: usize, r: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    let nv = linalg::norm(&v).max(1e-300);
    let rad = r * libm::pow(uniform(rng), 1.0 / n as f64);
    linalg::scaled(&v, rad / nv)
}

pub fn random_flow_point<R: RngCore + ?Sized>(flow: &SuspensionFlow, rng: &mut R) -> FlowPoint {
    let x: Vec<f64> = (0..flow.dim()).map(|_| uniform(rng)).collect();
    let tp = TorusPoint::from_f64(&x);
    let s = uniform(rng) * flow.roof().eval_point(&tp);
    flow.normalize(tp, s)
}

/// Random quadrilateral with both displacements of norm at most `max_disp`.
pub fn random_quadrilateral<R: RngCore + ?Sized>(flow: &SuspensionFlow, rng: &mut R, max_disp: f64) -> Quadrilateral {
    let a = random_flow_point(flow, rng);
    let sd = flow.spectral();
    let cs = random_in_ball(rng, sd.stable_dim, max_disp);
    let cu = random_in_ball(rng, sd.unstable_dim, max_disp);
    Quadrilateral::from_frame(flow, a, &cs, &cu)
}

/// Draws random pairs at `base_point` until `needed` independent gradients are
/// found or `budget` draws are spent. Returns the kept pairs and draws used.
pub fn search_independent_pairs<R: RngCore + ?Sized>(
    flow: &SuspensionFlow,
    base_point: &FlowPoint,
    rng: &mut R,
    needed: usize,
    budget: usize,
    max_disp: f64,
) -> Result<(Vec<PcfPair>, usize)> {
    let sd = flow.spectral();
    let du = sd.unstable_dim;
    let origin = vec![0.0; du];
    let mut kept: Vec<PcfPair> = Vec::new();
    let mut grads: Vec<Vec<f64>> = Vec::new();
    for draw in 1..=budget {
        let pair = PcfPair {
            a_offset: random_in_ball(rng, du, max_disp),
            s_coords: random_in_ball(rng, sd.stable_dim, max_disp),
        };
        let g = pair.gradient(flow, base_point, &origin)?;
        let mut trial = grads.clone();
        trial.push(g.clone());
        let (rank, _) = common_kernel(&trial, du);
        if rank > grads.len() {
            grads.push(g);
            kept.push(pair);
            if kept.len() >= needed {
                return Ok((kept, draw));
            }
        }
    }
    Ok((kept, budget))
}

/// Conjugacy `h(x, s) = phi^time_shift(x + v, s)` from `F1` to the pushed-forward flow `F2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedConjugacy {
    pub translation: TorusPoint,
    pub time_shift: f64,
}

/// Pushes `F1` forward by the torus translation `x -> x + v`: the base becomes
/// `x -> L x + (t1 + v - L v)` and the roof `x -> r(x - v)`.
pub fn planted_translation(flow: &SuspensionFlow, v: &TorusPoint) -> Result<(SuspensionFlow, PlantedConjugacy)> {
    let base = flow.base().clone();
    let lv = base.apply(v);
    let mut tau = v.sub(&lv);
    if let Some(t1) = flow.translation() {
        tau = tau.add(t1);
    }
    let roof = RoofFunction::new(flow.roof().poly().translate_lattice(v))?;
    let f2 = SuspensionFlow::from_parts(base, Some(tau), flow.spectral().clone(), roof)?
        .with_chart_radius(flow.chart_radius());
    Ok((f2, PlantedConjugacy { translation: *v, time_shift: 0.0 }))
}

impl PlantedConjugacy {
    pub fn with_time_shift(mut self, t: f64) -> Self {
        self.time_shift = t;
        self
    }

    /// Image of a point, together with the number of roof crossings of the time shift.
    pub fn map_point(&self, f2: &SuspensionFlow, p: &FlowPoint) -> (FlowPoint, i64) {
        let q = f2.normalize(p.x.add(&self.translation), p.s);
        f2.evolve_counting(&q, self.time_shift)
    }

    /// Image quadrilateral: the corner is mapped and the displacements are
    /// carried by the derivative `L^n` of the crossings made.
    pub fn map_quadrilateral(&self, f2: &SuspensionFlow, q: &Quadrilateral) -> Quadrilateral {
        let (a, n) = self.map_point(f2, &q.a);
        let base = f2.base();
        let power = |v: &[f64]| {
            let mut w = v.to_vec();
            if n >= 0 {
                for _ in 0..n {
                    w = base.apply_real(&w);
                }
            } else {
                let inv = base.inverse();
                for _ in 0..(-n) {
                    w = inv.apply_real(&w);
                }
            }
            w
        };
        Quadrilateral { a, s_disp: power(&q.s_disp), u_disp: power(&q.u_disp) }
    }
}

/// `max |rho^1(q) - rho^2(h(q))|` over the quadrilaterals.
pub fn conjugacy_invariance_check(
    f1: &SuspensionFlow,
    f2: &SuspensionFlow,
    h: &PlantedConjugacy,
    quads: &[Quadrilateral],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for q in quads {
        let v1 = temporal_distance_series(f1, q)?;
        let v2 = temporal_distance_series(f2, &h.map_quadrilateral(f2, q))?;
        worst = worst.max((v1 - v2).abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchReconstruction {
    /// Grid nodes in unstable frame coordinates around the base point of `F2`.
    pub grid: Vec<Vec<f64>>,
    /// Recovered preimages in unstable frame coordinates around the base point of `F1`.
    pub recovered: Vec<Vec<f64>>,
    /// Flow distance between the recovered point and the true preimage, per node.
    pub errors: Vec<f64>,
    pub sup_error: f64,
}

/// Recovers `h^{-1} = (P^1)^{-1} o P^2` on an unstable patch, where `P^i` collects
/// the temporal distances of matched pairs. `h` is used only to transport the
/// pairs and to score the result.
pub fn reconstruct_conjugacy_patch(
    f1: &SuspensionFlow,
    f2: &SuspensionFlow,
    h: &PlantedConjugacy,
    base_point: &FlowPoint,
    pairs: &[PcfPair],
    patch_radius: f64,
    grid_per_axis: usize,
) -> Result<PatchReconstruction> {
    let du = f1.spectral().unstable_dim;
    if pairs.len() != du {
        return Err(Error::invalid("need one pair per unstable dimension"));
    }
    let origin = vec![0.0; du];
    let grads = pairs.iter().map(|p| p.gradient(f1, base_point, &origin)).collect::<Result<Vec<_>>>()?;
    let (rank, _) = common_kernel(&grads, du);
    if rank < du {
        return Err(Error::DegenerateGradients { rank, needed: du });
    }
    if h.time_shift != 0.0 {
        return Err(Error::invalid("patch reconstruction expects a pure translation"));
    }
    let base2 = h.map_point(f2, base_point).0;
    let p1 = |c: &[f64]| pairs.iter().map(|pr| pr.value(f1, base_point, c)).collect::<Result<Vec<f64>>>();
    let p2 = |c: &[f64]| pairs.iter().map(|pr| pr.value(f2, &base2, c)).collect::<Result<Vec<f64>>>();
    let jac1 = |c: &[f64]| -> Result<Mat> {
        let rows = pairs.iter().map(|pr| pr.gradient(f1, base_point, c)).collect::<Result<Vec<_>>>()?;
        Ok(Mat::from_rows(&rows))
    };

    let n = grid_per_axis.max(2);
    let total = n.pow(du as u32);
    let mut grid = Vec::with_capacity(total);
    let mut recovered = Vec::with_capacity(total);
    let mut errors = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let c2: Vec<f64> = (0..du)
            .map(|_| {
                let i = rem % n;
                rem /= n;
                patch_radius * (2.0 * i as f64 / (n - 1) as f64 - 1.0)
            })
            .collect();
        let target = p2(&c2)?;
        let mut c = origin.clone();
        let mut converged = false;
        for _ in 0..50 {
            let r = linalg::sub(&p1(&c)?, &target);
            if linalg::norm(&r) < 1e-14 {
                converged = true;
                break;
            }
            let step = jac1(&c)?.solve(&linalg::scaled(&r, -1.0)).ok_or(Error::DegenerateGradients { rank: du - 1, needed: du })?;
            c = linalg::add(&c, &step);
            if linalg::norm(&c) > f1.chart_radius() {
                return Err(Error::NoIntersection);
            }
            if linalg::norm(&step) < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { terms: 50 });
        }
        let recovered_pt = f1.strong_point_frame(base_point, &c, Leaf::Unstable)?.0;
        let z = f2.strong_point_frame(&base2, &c2, Leaf::Unstable)?.0;
        let truth = f1.normalize(z.x.sub(&h.translation), z.s);
        errors.push(f1.distance(&recovered_pt, &truth));
        grid.push(c2);
        recovered.push(c);
    }
    let sup_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(PatchReconstruction { grid, recovered, errors, sup_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::IntegerMatrix;

    #[test]
    fn degenerate_corners_vanish() {
        let f = SuspensionFlow::new(IntegerMatrix::cat_map(), RoofFunction::cosine(2, 1.0, 0.1, 0).unwrap()).unwrap();
        let a = FlowPoint::new(TorusPoint::from_f64(&[0.2, 0.9]), 0.3);
        let q = Quadrilateral::from_frame(&f, a, &[0.02], &[0.0]);
        assert_eq!(temporal_distance_series(&f, &q).unwrap(), 0.0);
        let q = Quadrilateral::from_frame(&f, a, &[0.0], &[0.02]);
        assert_eq!(temporal_distance_series(&f, &q).unwrap(), 0.0);
    }

    #[test]
    fn cat_map_gradient_is_not_bunched() {
        let f = SuspensionFlow::new(IntegerMatrix::cat_map(), RoofFunction::cosine(2, 1.0, 0.1, 0).unwrap()).unwrap();
        let a = FlowPoint::new(TorusPoint::from_f64(&[0.2, 0.9]), 0.3);
        let s = f.frame(Leaf::Stable).mul_vec(&[0.02]);
        let u = f.frame(Leaf::Unstable).mul_vec(&[0.01]);
        assert!(matches!(pcf_gradient(&f, &a, &s, &u), Err(Error::NotBunched { .. })));
    }

    #[test]
    fn empty_family_has_full_kernel() {
        let (rank, k) = common_kernel(&[vec![0.0, 0.0]], 2);
        assert_eq!(rank, 0);
        assert_eq!(k.len(), 2);
        let (rank, k) = common_kernel(&[vec![1.0, 2.0]], 2);
        assert_eq!(rank, 1);
        assert!(linalg::dot(&k[0], &[1.0, 2.0]).abs() < 1e-15);
    }
}
