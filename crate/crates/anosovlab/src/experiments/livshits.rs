use anosov_core::roof::{periodic_obstructions, solve_coboundary_with, CoboundaryOptions};
use anosov_core::Error;
use serde::Serialize;

use super::positive;
use crate::config::{ExperimentConfig, LivshitsParams};
use crate::report::{Report, ReportBuilder};
use crate::LabError;

#[derive(Serialize)]
struct OrbitRow {
    period: usize,
    representative: String,
    flow_period: f64,
    average: f64,
}

#[derive(Serialize)]
struct TransferRow {
    k: String,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct Summary {
    n_max: u32,
    orbits: usize,
    spread: f64,
    tolerance: f64,
    /// `coboundary` or `obstructed`.
    status: &'static str,
    constant_c: Option<f64>,
    residual_sup: Option<f64>,
    truncation: Option<i64>,
}

pub fn run(cfg: &ExperimentConfig, p: &LivshitsParams) -> Result<Report, LabError> {
    positive("tolerance", p.tolerance)?;
    if p.n_max == 0 || p.n_max > 12 {
        return Err(LabError::ConfigInvalid("n_max must lie in 1..=12".into()));
    }
    let m = cfg.build_matrix()?;
    let roof = cfg.build_roof(&m)?;
    let obs = periodic_obstructions(&roof, &m, p.n_max).map_err(LabError::failed)?;
    let rows: Vec<OrbitRow> = obs
        .entries
        .iter()
        .map(|(rec, avg)| OrbitRow {
            period: rec.period_n,
            representative: anosov_core::roof::format_point(&rec.base_points[0]),
            flow_period: rec.flow_period,
            average: *avg,
        })
        .collect();
    let mut out = ReportBuilder::new();
    out.csv("obstructions.csv", &rows)?;
    let opts = CoboundaryOptions { n_max: p.n_max, tolerance: p.tolerance, ..CoboundaryOptions::default() };
    let mut summary = Summary {
        n_max: p.n_max,
        orbits: rows.len(),
        spread: obs.spread,
        tolerance: p.tolerance,
        status: "obstructed",
        constant_c: None,
        residual_sup: None,
        truncation: None,
    };
    match solve_coboundary_with(&roof, &m, p.truncation, &opts) {
        Ok(sol) => {
            let transfer: Vec<TransferRow> = sol
                .transfer_u
                .terms()
                .map(|(k, c)| TransferRow { k: super::join_int(k), re: c.re, im: c.im })
                .collect();
            out.csv("transfer.csv", &transfer)?;
            summary.status = "coboundary";
            summary.constant_c = Some(sol.constant_c);
            summary.residual_sup = Some(sol.residual_sup);
            summary.truncation = Some(sol.trunc);
        }
        Err(Error::ObstructionNonzero { .. }) => {}
        Err(e) => return Err(LabError::failed(e)),
    }
    out.finish(cfg, &summary)
}
