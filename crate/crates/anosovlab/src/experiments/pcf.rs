use anosov_core::pcf::{planted_translation, random_quadrilateral, sample, temporal_distance_series, Quadrilateral};
use anosov_core::TorusPoint;
use rayon::prelude::*;
use serde::Serialize;

use super::{flow, join, positive, rng};
use crate::config::{ExperimentConfig, PcfParams};
use crate::report::{Report, ReportBuilder};
use crate::LabError;

#[derive(Serialize)]
struct Row {
    index: usize,
    a_x: String,
    a_s: f64,
    s_disp: String,
    u_disp: String,
    series: f64,
    geometric: f64,
    discrepancy: f64,
    conjugate_series: Option<f64>,
    invariance_error: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    quadrilaterals: usize,
    max_disp: f64,
    tolerance: f64,
    max_abs_series: f64,
    max_abs_geometric: f64,
    mean_abs_series: f64,
    max_discrepancy: f64,
    max_invariance_error: Option<f64>,
}

pub fn run(cfg: &ExperimentConfig, p: &PcfParams) -> Result<Report, LabError> {
    positive("max_disp", p.max_disp)?;
    if !(p.tolerance >= 1e-10) {
        return Err(LabError::ConfigInvalid("tolerance must be at least 1e-10".into()));
    }
    let f1 = flow(cfg, p.chart_radius)?;
    if p.max_disp > f1.chart_radius() {
        return Err(LabError::ConfigInvalid(format!("max_disp exceeds the chart radius {}", f1.chart_radius())));
    }
    let conj = match &p.conjugacy {
        Some(c) => {
            if c.translation.len() != f1.dim() || !c.time_shift.is_finite() {
                return Err(LabError::ConfigInvalid("conjugacy translation has the wrong dimension".into()));
            }
            let (f2, h) = planted_translation(&f1, &TorusPoint::from_f64(&c.translation)).map_err(LabError::config)?;
            Some((f2, h.with_time_shift(c.time_shift)))
        }
        None => None,
    };
    let mut r = rng(cfg);
    let quads: Vec<Quadrilateral> = (0..p.quadrilaterals).map(|_| random_quadrilateral(&f1, &mut r, p.max_disp)).collect();
    let rows = quads
        .par_iter()
        .enumerate()
        .map(|(index, q)| {
            let s = sample(&f1, q, p.tolerance)?;
            let conjugate_series = match &conj {
                Some((f2, h)) => Some(temporal_distance_series(f2, &h.map_quadrilateral(f2, q))?),
                None => None,
            };
            Ok(Row {
                index,
                a_x: join(&q.a.x.to_vec()),
                a_s: q.a.s,
                s_disp: join(&q.s_disp),
                u_disp: join(&q.u_disp),
                series: s.value_series,
                geometric: s.value_geometric,
                discrepancy: s.discrepancy,
                conjugate_series,
                invariance_error: conjugate_series.map(|v| (v - s.value_series).abs()),
            })
        })
        .collect::<Result<Vec<Row>, anosov_core::Error>>()
        .map_err(LabError::failed)?;
    let mut out = ReportBuilder::new();
    out.csv("samples.csv", &rows)?;
    let max = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let summary = Summary {
        quadrilaterals: rows.len(),
        max_disp: p.max_disp,
        tolerance: p.tolerance,
        max_abs_series: max(&|r| r.series.abs()),
        max_abs_geometric: max(&|r| r.geometric.abs()),
        mean_abs_series: rows.iter().map(|r| r.series.abs()).sum::<f64>() / rows.len().max(1) as f64,
        max_discrepancy: max(&|r| r.discrepancy),
        max_invariance_error: conj.as_ref().map(|_| max(&|r| r.invariance_error.unwrap_or(0.0))),
    };
    out.finish(cfg, &summary)
}
