//! Local roof perturbations near a fixed point and the stable holonomy they induce.
//!
//! The chart sits at the fixed point `p = 0` of a codimension-one base. A point
//! has coordinates `(x, t, y)`: `x` in unstable frame coordinates, `y` the stable
//! frame coordinate and `t` the flow time above the section of height
//! `sigma(x, y) = D^u(0, Q_u x) + D^s(0, Q_s y)`, which contains both local
//! manifolds of `p`. The return map is `f(x, y) = (A_u x, lambda_s y)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::{Leaf, SuspensionFlow};
use crate::linalg::{self, Mat};
use crate::rational::Rational;
use crate::roof::{periodic_points, PeriodicOrbitRecord};
use crate::spectral::{InvariantSubspaceCatalog, SpectralData};
use crate::sum::Compensated;
use crate::torus::TorusPoint;

/// Default tail bound for the return series.
pub const RETURN_THRESHOLD: f64 = 1e-13;
/// Ratio between the return-detection ball and the bump support.
pub const ENLARGEMENT: f64 = 1.25;
pub const MAX_RETURNS: usize = 1000;
const MAX_ITERATIONS: usize = 100_000;
/// `max_{0<=t<=1} t (1 - t^2)^4`.
const PROFILE_PEAK: f64 = 0.208_098_358_989_483_3;

#[derive(Clone, Debug)]
pub struct SectionChart {
    flow: SuspensionFlow,
    radius: f64,
    lambda_s: f64,
}

impl SectionChart {
    pub fn new(flow: SuspensionFlow, radius: f64) -> Result<Self> {
        let sd = flow.spectral();
        if sd.stable_dim != 1 {
            return Err(Error::NotCodimensionOne { stable_dim: sd.stable_dim });
        }
        if flow.translation().is_some() {
            return Err(Error::invalid("section charts need a linear base fixing the origin"));
        }
        if !(radius > 0.0 && radius < 0.5) {
            return Err(Error::invalid("chart radius must lie in (0, 1/2)"));
        }
        let lambda_s = sd.stable_restriction[(0, 0)];
        Ok(SectionChart { flow, radius, lambda_s })
    }

    pub fn flow(&self) -> &SuspensionFlow {
        &self.flow
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spectral(&self) -> &SpectralData {
        self.flow.spectral()
    }

    pub fn unstable_dim(&self) -> usize {
        self.spectral().unstable_dim
    }

    /// Signed stable multiplier.
    pub fn lambda_s(&self) -> f64 {
        self.lambda_s
    }

    /// `D_x f`, the unstable block of the return map.
    pub fn unstable_matrix(&self) -> &Mat {
        &self.spectral().unstable_restriction
    }

    /// Base point with chart coordinates `(x, y)`.
    pub fn point(&self, x: &[f64], y: f64) -> TorusPoint {
        let o = TorusPoint::origin(self.flow.dim());
        let px = self.flow.translate_along(&o, x, Leaf::Unstable);
        self.flow.translate_along(&px, &[y], Leaf::Stable)
    }

    /// Chart coordinates of `z` relative to `center`, using the shortest lift.
    pub fn relative_coords(&self, z: &TorusPoint, center: &TorusPoint) -> (Vec<f64>, f64) {
        let (s, u) = self.spectral().adapted_coordinates(&z.diff(center));
        (u, s[0])
    }

    pub fn return_map(&self, x: &[f64], y: f64) -> (Vec<f64>, f64) {
        (self.unstable_matrix().mul_vec(x), self.lambda_s * y)
    }

    pub fn section_height(&self, x: &[f64], y: f64) -> Result<f64> {
        let o = TorusPoint::origin(self.flow.dim());
        Ok(self.flow.time_adjustment_frame(&o, x, Leaf::Unstable)?
            + self.flow.time_adjustment_frame(&o, &[y], Leaf::Stable)?)
    }

    /// `T(x, y)`: chart time of the strong stable leaf of `(x, 0, 0)` over `(x, y)`.
    pub fn stable_graph_time_base(&self, x: &[f64], y: f64) -> Result<f64> {
        let o = TorusPoint::origin(self.flow.dim());
        let px = self.flow.translate_along(&o, x, Leaf::Unstable);
        Ok(self.flow.time_adjustment_frame(&px, &[y], Leaf::Stable)?
            - self.flow.time_adjustment_frame(&o, &[y], Leaf::Stable)?)
    }

    /// `D_x T` at `(0, y)` as a covector in unstable frame coordinates.
    pub fn stable_graph_time_derivative(&self, y: f64) -> Result<Vec<f64>> {
        let poly = self.flow.roof().poly();
        let sd = self.spectral();
        let du = sd.unstable_dim;
        if self.flow.roof().is_constant() || y == 0.0 {
            return Ok(vec![0.0; du]);
        }
        let ratio = self.lambda_s.abs() * sd.xi_max();
        if ratio >= 1.0 - 1e-12 {
            return Err(Error::NotBunched { ratio });
        }
        let growth = SpectralData::growth_constant(&sd.unstable_restriction, sd.xi_max(), 64);
        let tail = crate::pcf::hessian_bound(self.flow.roof()) * growth * y.abs() / (1.0 - ratio);
        let o = TorusPoint::origin(self.flow.dim());
        let zero = vec![0.0; self.flow.dim()];
        let qs = sd.stable_basis.column(0);
        let mut frame = sd.unstable_basis.clone();
        let mut yk = y;
        let mut rk = 1.0;
        let mut g = vec![Compensated::default(); du];
        for _ in 0..MAX_ITERATIONS {
            if tail * rk < RETURN_THRESHOLD {
                return Ok(g.iter().map(Compensated::value).collect());
            }
            let gd = poly.gradient_difference_at(&o, &zero, &linalg::scaled(&qs, yk));
            for (gi, ri) in g.iter_mut().zip(frame.tr_mul_vec(&gd)) {
                gi.add(ri);
            }
            frame = frame.mul(&sd.unstable_restriction);
            yk *= self.lambda_s;
            rk *= ratio;
        }
        Err(Error::NoConvergence { terms: MAX_ITERATIONS })
    }

    /// Time slope of the strong unstable bundle at the stable-line point `(0, y)`.
    pub fn unstable_bundle_slope(&self, y: f64) -> Result<Vec<f64>> {
        let poly = self.flow.roof().poly();
        let sd = self.spectral();
        let du = sd.unstable_dim;
        if self.flow.roof().is_constant() {
            return Ok(vec![0.0; du]);
        }
        let rate = 1.0 / sd.xi_min();
        let tail = 2.0 * poly.lipschitz_bound() * self.flow.growth_constants().1 / (1.0 - rate);
        let inv = self.flow.inverse_unstable_restriction();
        let o = TorusPoint::origin(self.flow.dim());
        let zero = vec![0.0; self.flow.dim()];
        let g0 = poly.gradient_at(&o, &zero);
        let mut p = self.flow.apply_base_inverse(&self.point(&vec![0.0; du], y));
        let mut frame = sd.unstable_basis.mul(inv);
        let mut rk = rate;
        let mut g = vec![Compensated::default(); du];
        for _ in 0..MAX_ITERATIONS {
            if tail * rk < RETURN_THRESHOLD {
                return Ok(g.iter().map(|s| -s.value()).collect());
            }
            let diff = linalg::sub(&poly.gradient_at(&p, &zero), &g0);
            for (gi, ri) in g.iter_mut().zip(frame.tr_mul_vec(&diff)) {
                gi.add(ri);
            }
            frame = frame.mul(inv);
            p = self.flow.apply_base_inverse(&p);
            rk *= rate;
        }
        Err(Error::NoConvergence { terms: MAX_ITERATIONS })
    }
}

/// A point `r` on the local stable line of `p` lying on the weak unstable leaf
/// of a periodic orbit other than `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeteroclinicDatum {
    pub q: PeriodicOrbitRecord,
    /// Integer lift `n` with `q + n = Q_s y_r + Q_u w`.
    pub lift: Vec<i64>,
    pub r: TorusPoint,
    pub y_r: f64,
    /// `w` in unstable frame coordinates.
    pub unstable_offset: Vec<f64>,
    /// Unstable coordinate size of `r`: distance to the stable line of `p`.
    pub stable_residual: f64,
    /// `|L^-k r - L^-k q|` for `k = 0..=BACKWARD_STEPS`.
    pub backward_distances: Vec<f64>,
    /// Stable component of `L^-K r - L^-K q`, pulled back by `lambda_s^K`.
    pub weak_unstable_residual: f64,
}

pub const BACKWARD_STEPS: usize = 60;

fn rational_vec(p: &[Rational]) -> Vec<f64> {
    p.iter().map(|c| c.to_f64()).collect()
}

/// Searches periodic orbits of period up to `max_period` and integer lifts in
/// `[-box_size, box_size]^d` for `|y_r|` closest to `target` inside `(lo, hi)`.
/// Score, orbit, rational point, lift, `y_r` and unstable offset.
type Candidate = (f64, crate::roof::PeriodicOrbit, Vec<Rational>, Vec<i64>, f64, Vec<f64>);

pub fn find_heteroclinic(
    chart: &SectionChart,
    max_period: u32,
    box_size: i64,
    target: f64,
    lo: f64,
    hi: f64,
) -> Result<HeteroclinicDatum> {
    let sd = chart.spectral();
    let d = chart.flow().dim();
    let m = chart.flow().base();
    let mut best: Option<Candidate> = None;
    for n in 1..=max_period {
        for orbit in periodic_points(m, n)? {
            if orbit.period() != n as usize {
                continue;
            }
            for pt in &orbit.points {
                let qv = rational_vec(pt);
                if qv.iter().all(|&c| c == 0.0) {
                    continue;
                }
                let side = (2 * box_size + 1) as usize;
                for idx in 0..side.pow(d as u32) {
                    let mut rem = idx;
                    let lift: Vec<i64> = (0..d)
                        .map(|_| {
                            let v = (rem % side) as i64 - box_size;
                            rem /= side;
                            v
                        })
                        .collect();
                    let lifted: Vec<f64> = qv.iter().zip(&lift).map(|(a, b)| a + *b as f64).collect();
                    let (s, u) = sd.adapted_coordinates(&lifted);
                    let a = s[0];
                    if !(a.abs() > lo && a.abs() < hi) {
                        continue;
                    }
                    let score = (a.abs() - target).abs() + 1e-3 * linalg::norm(&u);
                    if best.as_ref().is_none_or(|b| score < b.0 - 1e-15) {
                        best = Some((score, orbit.clone(), pt.clone(), lift, a, u));
                    }
                }
            }
        }
    }
    let (_, orbit, qpt, lift, y_r, w) = best.ok_or(Error::NoIntersection)?;
    let rec = orbit.record(chart.flow().roof());
    heteroclinic_datum(chart, rec, &qpt, lift, y_r, w)
}

fn heteroclinic_datum(
    chart: &SectionChart,
    q: PeriodicOrbitRecord,
    qpt: &[Rational],
    lift: Vec<i64>,
    y_r: f64,
    w: Vec<f64>,
) -> Result<HeteroclinicDatum> {
    let du = chart.unstable_dim();
    let r = chart.point(&vec![0.0; du], y_r);
    let o = TorusPoint::origin(chart.flow().dim());
    let (_, u) = chart.spectral().adapted_coordinates(&r.diff(&o));
    let stable_residual = linalg::norm(&u);
    let qt = TorusPoint::from_rationals(qpt);
    let mut a = r;
    let mut b = qt;
    let mut backward_distances = vec![a.distance(&b)];
    for _ in 0..BACKWARD_STEPS {
        a = chart.flow().apply_base_inverse(&a);
        b = chart.flow().apply_base_inverse(&b);
        backward_distances.push(a.distance(&b));
    }
    let (s, _) = chart.spectral().adapted_coordinates(&a.diff(&b));
    let weak_unstable_residual = s[0].abs() * libm::pow(chart.lambda_s().abs(), BACKWARD_STEPS as f64);
    Ok(HeteroclinicDatum {
        q,
        lift,
        r,
        y_r,
        unstable_offset: w,
        stable_residual,
        backward_distances,
        weak_unstable_residual,
    })
}

/// `rho(z) = A <g, x> (1 - |z - c|^2 / R^2)^4` for `|z - c| < R`, with `z - c`
/// in chart coordinates `(x, y)` and `c = f(r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: TorusPoint,
    /// Stable coordinate of the center, `lambda_s y_r`.
    pub center_y: f64,
    pub radius: f64,
    pub amplitude: f64,
    pub gradient_direction: Vec<f64>,
}

impl Bump {
    pub fn new(
        chart: &SectionChart,
        datum: &HeteroclinicDatum,
        radius: f64,
        amplitude: f64,
        gradient_direction: Vec<f64>,
    ) -> Result<Self> {
        if gradient_direction.len() != chart.unstable_dim() {
            return Err(Error::DimensionMismatch { expected: chart.unstable_dim(), got: gradient_direction.len() });
        }
        if !(radius > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidBump("radius must be positive and amplitude finite".into()));
        }
        let lam = chart.lambda_s();
        let center_y = lam * datum.y_r;
        let big = ENLARGEMENT * radius;
        // Distances along the stable line from f(r) to r, f^2(r) and p.
        let gaps = [
            (center_y - datum.y_r).abs(),
            (center_y - lam * center_y).abs(),
            center_y.abs(),
        ];
        if gaps.iter().any(|&g| g <= big) {
            return Err(Error::InvalidBump("enlarged support meets r, f^2(r) or p".into()));
        }
        let peak = amplitude.abs() * linalg::norm(&gradient_direction) * radius * PROFILE_PEAK;
        let margin = chart.flow().roof().positivity_margin();
        if peak >= margin {
            return Err(Error::InvalidBump(alloc::format!(
                "bump height {peak} exceeds roof margin {margin}"
            )));
        }
        let du = chart.unstable_dim();
        Ok(Bump { center: chart.point(&vec![0.0; du], center_y), center_y, radius, amplitude, gradient_direction })
    }

    /// Radius `0.8 lambda_s (1 - lambda_s) |y_r| / 1.25`, amplitude `1/2`, unit direction.
    pub fn standard(chart: &SectionChart, datum: &HeteroclinicDatum, direction: &[f64]) -> Result<Self> {
        let lam = chart.lambda_s().abs();
        let radius = 0.8 * lam * (1.0 - lam) * datum.y_r.abs() / ENLARGEMENT;
        let n = linalg::norm(direction);
        if n == 0.0 {
            return Err(Error::InvalidBump("direction must be nonzero".into()));
        }
        Bump::new(chart, datum, radius, 0.5, linalg::scaled(direction, 1.0 / n))
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Bump { amplitude, ..self.clone() }
    }

    /// `D_x rho` at the center.
    pub fn center_gradient(&self) -> Vec<f64> {
        linalg::scaled(&self.gradient_direction, self.amplitude)
    }

    pub fn lipschitz_bound(&self) -> f64 {
        9.0 * self.amplitude.abs() * linalg::norm(&self.gradient_direction)
    }

    /// Value at relative chart coordinates.
    pub fn eval_relative(&self, x: &[f64], y: f64) -> f64 {
        let q = (linalg::dot(x, x) + y * y) / (self.radius * self.radius);
        if q >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - q;
        self.amplitude * linalg::dot(&self.gradient_direction, x) * w * w * w * w
    }

    pub fn eval(&self, chart: &SectionChart, z: &TorusPoint) -> f64 {
        let (x, y) = chart.relative_coords(z, &self.center);
        self.eval_relative(&x, y)
    }

    fn in_enlarged(&self, x: &[f64], y: f64) -> bool {
        let r = ENLARGEMENT * self.radius;
        linalg::dot(x, x) + y * y < r * r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReturnRecord {
    pub step: usize,
    /// `|y_n - ybar_n|`, the stable gap between the paired orbit points.
    pub gap: f64,
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableGraphTime {
    pub value: f64,
    pub base: f64,
    pub correction: f64,
    pub returns: Vec<ReturnRecord>,
    pub iterations: usize,
}

pub fn stable_graph_time(chart: &SectionChart, bump: Option<&Bump>, x: &[f64], y: f64) -> Result<StableGraphTime> {
    stable_graph_time_with(chart, bump, x, y, RETURN_THRESHOLD)
}

/// `T^rho(x, y) = T(x, y) + sum_k [rho(f^k(x, y)) - rho(f^k(x, 0))]`, the two orbits
/// sharing their unstable coordinate. Terms are nonzero only at returns to the
/// enlarged ball, and the sum stops once the certified tail is below `threshold`.
pub fn stable_graph_time_with(
    chart: &SectionChart,
    bump: Option<&Bump>,
    x: &[f64],
    y: f64,
    threshold: f64,
) -> Result<StableGraphTime> {
    if linalg::norm(x) > chart.radius() || y.abs() > chart.radius() {
        return Err(Error::OutsideChart { norm: linalg::norm(x).max(y.abs()), radius: chart.radius() });
    }
    let base = chart.stable_graph_time_base(x, y)?;
    let Some(bump) = bump.filter(|b| b.amplitude != 0.0 && y != 0.0) else {
        return Ok(StableGraphTime { value: base, base, correction: 0.0, returns: Vec::new(), iterations: 0 });
    };
    let lam = chart.lambda_s();
    let lip = bump.lipschitz_bound();
    let mut p = chart.point(x, 0.0);
    let mut yk = y;
    let mut sum = Compensated::default();
    let mut returns = Vec::new();
    for k in 0..MAX_ITERATIONS {
        if lip * yk.abs() / (1.0 - lam.abs()) < threshold {
            let correction = sum.value();
            return Ok(StableGraphTime { value: base + correction, base, correction, returns, iterations: k });
        }
        let (xr, yr) = chart.relative_coords(&p, &bump.center);
        let hit_p = bump.in_enlarged(&xr, yr);
        let hit_q = bump.in_enlarged(&xr, yr + yk);
        if hit_p || hit_q {
            let term = bump.eval_relative(&xr, yr + yk) - bump.eval_relative(&xr, yr);
            sum.add(term);
            returns.push(ReturnRecord { step: k, gap: yk.abs(), term });
            if returns.len() > MAX_RETURNS {
                return Err(Error::ChartExit);
            }
        }
        p = chart.flow().apply_base(&p);
        yk *= lam;
    }
    Err(Error::ChartExit)
}

/// `D_x T + D_x rho_{f(0, y_r)} D_x f`.
pub fn claim44_rhs(chart: &SectionChart, datum: &HeteroclinicDatum, bump: Option<&Bump>) -> Result<Vec<f64>> {
    let dt = chart.stable_graph_time_derivative(datum.y_r)?;
    Ok(match bump {
        None => dt,
        Some(b) => linalg::add(&dt, &chart.unstable_matrix().tr_mul_vec(&b.center_gradient())),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Claim44Report {
    pub x_steps: Vec<f64>,
    /// Per step, central differences along each unstable frame direction.
    pub lhs_fd: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Per step, max over directions of `|lhs - rhs|`.
    pub errors: Vec<f64>,
    pub fitted_order: f64,
    pub kappa: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (libm::log(*x), libm::log(*y)))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `kappa` with `lambda mu^kappa = 1`, `lambda` the stable modulus and `mu` the
/// largest unstable modulus.
pub fn kappa(sd: &SpectralData) -> f64 {
    -libm::log(sd.stable_rate()) / libm::log(sd.xi_max())
}

pub fn claim44_check(
    chart: &SectionChart,
    datum: &HeteroclinicDatum,
    bump: Option<&Bump>,
    steps: &[f64],
) -> Result<Claim44Report> {
    if steps.is_empty() {
        return Err(Error::invalid("at least one step is required"));
    }
    let du = chart.unstable_dim();
    let rhs = claim44_rhs(chart, datum, bump)?;
    let mut lhs_fd = Vec::with_capacity(steps.len());
    let mut errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let mut row = Vec::with_capacity(du);
        for j in 0..du {
            let mut e = vec![0.0; du];
            e[j] = h;
            let plus = stable_graph_time(chart, bump, &e, datum.y_r)?.value;
            e[j] = -h;
            let minus = stable_graph_time(chart, bump, &e, datum.y_r)?.value;
            row.push((plus - minus) / (2.0 * h));
        }
        errors.push(row.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        lhs_fd.push(row);
    }
    Ok(Claim44Report {
        x_steps: steps.to_vec(),
        lhs_fd,
        rhs,
        fitted_order: log_log_slope(steps, &errors),
        errors,
        kappa: kappa(chart.spectral()),
    })
}

/// The `(d_u + 1)`-square matrix `[[I, 0], [D_x T^rho, 1]]` acting on `(x, t)`.
pub fn holonomy_derivative(chart: &SectionChart, datum: &HeteroclinicDatum, bump: Option<&Bump>) -> Result<Mat> {
    let du = chart.unstable_dim();
    let corner = claim44_rhs(chart, datum, bump)?;
    let mut m = Mat::identity(du + 1);
    for (j, c) in corner.iter().enumerate() {
        m[(du, j)] = *c;
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemainderFit {
    pub norms: Vec<f64>,
    pub residuals: Vec<f64>,
    pub exponent: f64,
    /// `C` calibrated on the larger half of the norms.
    pub envelope_constant: f64,
    /// Whether every residual on the smaller half lies below `C |x|^1.8`.
    pub below_envelope: bool,
}

pub const ENVELOPE_EXPONENT: f64 = 1.8;
pub const RESIDUAL_NOISE: f64 = 1e-12;

/// Fits the decay of `T^rho(x, y_r) - T(x, y_r) - rho(f(x, y_r))` in `|x|`.
pub fn remainder_exponent(
    chart: &SectionChart,
    datum: &HeteroclinicDatum,
    bump: Option<&Bump>,
    xs: &[Vec<f64>],
) -> Result<RemainderFit> {
    let mut norms = Vec::with_capacity(xs.len());
    let mut residuals = Vec::with_capacity(xs.len());
    for x in xs {
        let st = stable_graph_time(chart, bump, x, datum.y_r)?;
        let first = match bump {
            Some(b) => {
                let (fx, fy) = chart.return_map(x, datum.y_r);
                b.eval_relative(&fx, fy - b.center_y)
            }
            None => 0.0,
        };
        norms.push(linalg::norm(x));
        residuals.push((st.correction - first).abs());
    }
    if residuals.iter().all(|r| *r < RESIDUAL_NOISE) {
        return Err(Error::ResidualBelowNoise { floor: RESIDUAL_NOISE });
    }
    let keep: Vec<usize> = (0..norms.len()).filter(|&i| residuals[i] >= RESIDUAL_NOISE).collect();
    let kn: Vec<f64> = keep.iter().map(|&i| norms[i]).collect();
    let kr: Vec<f64> = keep.iter().map(|&i| residuals[i]).collect();
    let exponent = log_log_slope(&kn, &kr);
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let half = order.len().div_ceil(2);
    let envelope_constant = order[..half]
        .iter()
        .map(|&i| residuals[i] / libm::pow(norms[i], ENVELOPE_EXPONENT))
        .fold(0.0, f64::max);
    let below_envelope = order[half..]
        .iter()
        .all(|&i| residuals[i] <= envelope_constant * libm::pow(norms[i], ENVELOPE_EXPONENT));
    Ok(RemainderFit { norms, residuals, exponent, envelope_constant, below_envelope })
}

/// Unstable displacements whose orbits return to the bump after `K` steps,
/// landing at chart offset `(0.3 R g/|g|, -a)` from its center, for the `K`
/// that keep `|x|` in `[min_norm, max_norm]`. The remainder at these points is
/// of order `lambda_s^K`, the largest the return series allows.
pub fn homoclinic_return_sequence(
    chart: &SectionChart,
    bump: &Bump,
    min_norm: f64,
    max_norm: f64,
    box_size: i64,
) -> Result<Vec<Vec<f64>>> {
    let sd = chart.spectral();
    let d = chart.flow().dim();
    let qs = sd.stable_basis.column(0);
    let center_lift = linalg::scaled(&qs, bump.center_y);
    let side = (2 * box_size + 1) as usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for idx in 0..side.pow(d as u32) {
        let mut rem = idx;
        let lifted: Vec<f64> = center_lift
            .iter()
            .map(|c| {
                let v = (rem % side) as i64 - box_size;
                rem /= side;
                c + v as f64
            })
            .collect();
        let (s, u) = sd.adapted_coordinates(&lifted);
        let a = s[0].abs();
        if a < 0.1 * bump.radius || a > 0.5 * bump.radius || linalg::norm(&u) < max_norm {
            continue;
        }
        if best.as_ref().is_none_or(|b| linalg::norm(&u) < b.0) {
            best = Some((linalg::norm(&u), u));
        }
    }
    let (_, w) = best.ok_or(Error::NoIntersection)?;
    let g = &bump.gradient_direction;
    let w1 = linalg::add(&w, &linalg::scaled(g, 0.3 * bump.radius / linalg::norm(g)));
    let inv = chart.flow().inverse_unstable_restriction();
    let mut out = Vec::new();
    let mut x = w1;
    for _ in 0..MAX_ITERATIONS {
        let n = linalg::norm(&x);
        if n < min_norm {
            break;
        }
        if n <= max_norm {
            out.push(x.clone());
        }
        x = inv.mul_vec(&x);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    /// Bump gradient at the center.
    pub gradient: Vec<f64>,
    pub corner: Vec<f64>,
    /// Orthonormal basis of the image of `E^u` in `(x, t)` coordinates adapted at `r`.
    pub image_basis: Vec<Vec<f64>>,
    pub contains: Vec<bool>,
    pub avoids_all: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// Largest principal angle between any two image subspaces.
    pub diameter: f64,
    pub vacuous: bool,
    pub any_avoids_all: bool,
}

pub const CONTAINMENT_TOLERANCE: f64 = 1e-8;

/// Images of `E^u` under the holonomy derivative for bumps with the given
/// center gradients, tested against each invariant subspace of the catalog.
pub fn grassmannian_sweep(
    chart: &SectionChart,
    datum: &HeteroclinicDatum,
    bump: &Bump,
    gradients: &[Vec<f64>],
    catalog: &InvariantSubspaceCatalog,
) -> Result<SweepReport> {
    if !catalog.finite {
        return Err(Error::invalid("the invariant subspace catalog must be finite"));
    }
    let du = chart.unstable_dim();
    let sd = chart.spectral();
    let slope = chart.unstable_bundle_slope(datum.y_r)?;
    let dt = chart.stable_graph_time_derivative(datum.y_r)?;
    let fs: Vec<Vec<Vec<f64>>> = catalog
        .subspaces
        .iter()
        .map(|basis| {
            basis
                .iter()
                .map(|v| {
                    let mut e = sd.unstable_basis.tr_mul_vec(v);
                    e.push(0.0);
                    e
                })
                .collect()
        })
        .collect();
    let mut entries = Vec::with_capacity(gradients.len());
    for g in gradients {
        if g.len() != du {
            return Err(Error::DimensionMismatch { expected: du, got: g.len() });
        }
        let n = linalg::norm(g);
        let b = if n == 0.0 { bump.with_amplitude(0.0) } else {
            Bump { amplitude: n, gradient_direction: linalg::scaled(g, 1.0 / n), ..bump.clone() }
        };
        let corner = linalg::add(&dt, &chart.unstable_matrix().tr_mul_vec(&b.center_gradient()));
        let tilt = linalg::sub(&corner, &slope);
        let vectors: Vec<Vec<f64>> = (0..du)
            .map(|j| {
                let mut e = vec![0.0; du + 1];
                e[j] = 1.0;
                e[du] = tilt[j];
                e
            })
            .collect();
        let image_basis = linalg::orthonormalize(&vectors);
        let contains: Vec<bool> = fs
            .iter()
            .map(|f| f.iter().all(|v| linalg::distance_to_span(v, &image_basis) <= CONTAINMENT_TOLERANCE))
            .collect();
        let avoids_all = contains.iter().all(|c| !c);
        entries.push(SweepEntry { gradient: g.clone(), corner, image_basis, contains, avoids_all });
    }
    let mut diameter: f64 = 0.0;
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let angles = linalg::principal_angles(&entries[i].image_basis, &entries[j].image_basis);
            if let Some(a) = angles.last() {
                diameter = diameter.max(*a);
            }
        }
    }
    let any_avoids_all = entries.iter().any(|e| e.avoids_all);
    Ok(SweepReport { entries, diameter, vacuous: catalog.subspaces.is_empty(), any_avoids_all })
}

/// `directions` unit covectors spread over the first two frame axes, each at the given amplitudes.
pub fn gradient_grid(du: usize, directions: usize, amplitudes: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(directions * amplitudes.len());
    for i in 0..directions {
        let th = core::f64::consts::PI * i as f64 / directions as f64;
        let mut g = vec![0.0; du];
        g[0] = libm::cos(th);
        if du > 1 {
            g[1] = libm::sin(th);
        }
        if du > 2 {
            for (k, gk) in g.iter_mut().enumerate().skip(2) {
                *gk = 0.5 * libm::sin(th * (k as f64 + 1.0));
            }
        }
        let n = linalg::norm(&g);
        for &a in amplitudes {
            out.push(linalg::scaled(&g, a / n));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roof::RoofFunction;
    use crate::spectral::IntegerMatrix;

    fn chart(roof: RoofFunction) -> SectionChart {
        let m = IntegerMatrix::companion(&[-1, 0, 1]).unwrap();
        SectionChart::new(SuspensionFlow::new(m, roof).unwrap(), 0.45).unwrap()
    }

    #[test]
    fn stable_line_is_fixed() {
        let c = chart(RoofFunction::cosine(3, 1.0, 0.1, 0).unwrap());
        let datum = find_heteroclinic(&c, 6, 2, 0.3, 0.15, 0.44).unwrap();
        let bump = Bump::standard(&c, &datum, &[1.0, 0.0]).unwrap();
        for y in [-0.2, 0.05, 0.3] {
            assert!(stable_graph_time(&c, Some(&bump), &[0.0, 0.0], y).unwrap().value.abs() < 1e-15);
        }
    }

    #[test]
    fn zero_bump_gives_base_time() {
        let c = chart(RoofFunction::cosine(3, 1.0, 0.1, 0).unwrap());
        let datum = find_heteroclinic(&c, 6, 2, 0.3, 0.15, 0.44).unwrap();
        let bump = Bump::standard(&c, &datum, &[0.0, 1.0]).unwrap().with_amplitude(0.0);
        let x = [0.01, -0.02];
        let a = stable_graph_time(&c, Some(&bump), &x, datum.y_r).unwrap().value;
        assert_eq!(a, c.stable_graph_time_base(&x, datum.y_r).unwrap());
    }

    #[test]
    fn holonomy_corner_matches_rhs() {
        let c = chart(RoofFunction::constant(3, 1.0).unwrap());
        let datum = find_heteroclinic(&c, 6, 2, 0.3, 0.15, 0.44).unwrap();
        let bump = Bump::standard(&c, &datum, &[1.0, 1.0]).unwrap();
        let h = holonomy_derivative(&c, &datum, Some(&bump)).unwrap();
        let rhs = claim44_rhs(&c, &datum, Some(&bump)).unwrap();
        assert_eq!(h.row(2)[..2], rhs[..]);
        assert_eq!(h[(0, 0)], 1.0);
        assert_eq!(h[(0, 2)], 0.0);
    }
}
