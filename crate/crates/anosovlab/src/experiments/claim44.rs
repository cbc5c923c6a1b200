use anosov_core::perturb::{claim44_check, homoclinic_return_sequence, remainder_exponent, Bump};
use serde::Serialize;

use super::{chart_and_datum, join, join_int};
use crate::config::{Claim44Params, ExperimentConfig};
use crate::report::{Report, ReportBuilder};
use crate::LabError;

#[derive(Serialize)]
struct StepRow {
    step: f64,
    lhs_fd: String,
    error: f64,
}

#[derive(Serialize)]
struct RemainderRow {
    norm: f64,
    residual: f64,
}

#[derive(Serialize)]
struct Summary {
    y_r: f64,
    orbit_period: usize,
    orbit_point: String,
    lift: String,
    bump_radius: f64,
    bump_amplitude: f64,
    rhs: Vec<f64>,
    fitted_order: f64,
    kappa: f64,
    remainder_points: Option<usize>,
    remainder_exponent: Option<f64>,
    below_envelope: Option<bool>,
}

pub fn run(cfg: &ExperimentConfig, p: &Claim44Params) -> Result<Report, LabError> {
    if p.steps.is_empty() || p.steps.iter().any(|h| !(*h > 0.0)) {
        return Err(LabError::ConfigInvalid("steps must be positive".into()));
    }
    let (chart, datum) = chart_and_datum(cfg, p.chart_radius, &p.heteroclinic)?;
    if p.direction.len() != chart.unstable_dim() {
        return Err(LabError::ConfigInvalid("direction must have one entry per unstable dimension".into()));
    }
    let mut bump = Bump::standard(&chart, &datum, &p.direction).map_err(LabError::config)?;
    if let Some(a) = p.amplitude {
        bump = Bump::new(&chart, &datum, bump.radius, a, p.direction.clone()).map_err(LabError::config)?;
    }
    let rep = claim44_check(&chart, &datum, Some(&bump), &p.steps).map_err(LabError::failed)?;
    let rows: Vec<StepRow> = rep
        .x_steps
        .iter()
        .zip(&rep.lhs_fd)
        .zip(&rep.errors)
        .map(|((h, l), e)| StepRow { step: *h, lhs_fd: join(l), error: *e })
        .collect();
    let mut out = ReportBuilder::new();
    out.csv("claim44.csv", &rows)?;
    let mut summary = Summary {
        y_r: datum.y_r,
        orbit_period: datum.q.period_n,
        orbit_point: anosov_core::roof::format_point(&datum.q.base_points[0]),
        lift: join_int(&datum.lift),
        bump_radius: bump.radius,
        bump_amplitude: bump.amplitude,
        rhs: rep.rhs.clone(),
        fitted_order: rep.fitted_order,
        kappa: rep.kappa,
        remainder_points: None,
        remainder_exponent: None,
        below_envelope: None,
    };
    if let Some(rs) = &p.remainder {
        let xs = homoclinic_return_sequence(&chart, &bump, rs.min_norm, rs.max_norm, rs.box_size)
            .map_err(LabError::failed)?;
        let fit = remainder_exponent(&chart, &datum, Some(&bump), &xs).map_err(LabError::failed)?;
        let rrows: Vec<RemainderRow> =
            fit.norms.iter().zip(&fit.residuals).map(|(n, r)| RemainderRow { norm: *n, residual: *r }).collect();
        out.csv("remainder.csv", &rrows)?;
        summary.remainder_points = Some(rrows.len());
        summary.remainder_exponent = Some(fit.exponent);
        summary.below_envelope = Some(fit.below_envelope);
    }
    out.finish(cfg, &summary)
}
