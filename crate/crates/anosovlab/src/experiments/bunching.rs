use anosov_core::regularity::{bunching_report, default_nu_grid, sampled_sups, volume_identity_holds};
use anosov_core::spectral::SpectralData;
use serde::Serialize;

use super::positive;
use crate::config::{BunchingParams, ExperimentConfig};
use crate::report::{Report, ReportBuilder};
use crate::LabError;

#[derive(Serialize)]
struct Row {
    nu: f64,
    weak_stable_sup: f64,
    stable_sup: f64,
}

#[derive(Serialize)]
struct Sampled {
    iterations: u32,
    samples: usize,
    weak_stable_sup: f64,
    stable_sup: f64,
}

#[derive(Serialize)]
struct Summary {
    t: f64,
    roof_mean: f64,
    iterations: f64,
    moduli: Vec<f64>,
    nu_max_weak: Option<f64>,
    nu_max_stable: Option<f64>,
    stable_sup_at_one: Option<f64>,
    weak_stable_sup_at_one: Option<f64>,
    jacobian_product: f64,
    volume_identity: bool,
    sampled_at_one: Option<Sampled>,
}

pub fn run(cfg: &ExperimentConfig, p: &BunchingParams) -> Result<Report, LabError> {
    let m = cfg.build_matrix()?;
    let sd = SpectralData::new(&m).map_err(LabError::config)?;
    let roof_mean = match (p.roof_mean, &cfg.roof) {
        (Some(v), _) => v,
        (None, Some(_)) => cfg.build_roof(&m)?.mean(),
        (None, None) => 1.0,
    };
    positive("roof_mean", roof_mean)?;
    positive("t", p.t)?;
    let grid = p.nu_grid.clone().unwrap_or_else(default_nu_grid);
    let rep = bunching_report(&sd, roof_mean, p.t, &grid).map_err(LabError::failed)?;
    let rows: Vec<Row> = rep
        .rows
        .iter()
        .map(|r| Row { nu: r.nu, weak_stable_sup: r.weak_stable_sup, stable_sup: r.stable_sup })
        .collect();
    let mut out = ReportBuilder::new();
    out.csv("bunching.csv", &rows)?;
    let sampled_at_one = p.samples.map(|samples| {
        let n = rep.iterations.round().max(1.0) as u32;
        let (weak, stable) = sampled_sups(&sd, n, 1.0, samples);
        Sampled { iterations: n, samples, weak_stable_sup: weak, stable_sup: stable }
    });
    let summary = Summary {
        t: rep.t,
        roof_mean,
        iterations: rep.iterations,
        moduli: sd.moduli.clone(),
        nu_max_weak: rep.nu_max_weak,
        nu_max_stable: rep.nu_max_stable,
        stable_sup_at_one: rep.at(1.0).map(|r| r.stable_sup),
        weak_stable_sup_at_one: rep.at(1.0).map(|r| r.weak_stable_sup),
        jacobian_product: rep.jacobian_product,
        volume_identity: volume_identity_holds(&rep),
        sampled_at_one,
    };
    out.finish(cfg, &summary)
}
