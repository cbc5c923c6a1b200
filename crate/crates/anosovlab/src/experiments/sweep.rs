use anosov_core::perturb::{gradient_grid, grassmannian_sweep, Bump};
use anosov_core::spectral::invariant_unstable_subspaces;
use serde::Serialize;

use super::{chart_and_datum, join};
use crate::config::{ExperimentConfig, SweepParams};
use crate::report::{Report, ReportBuilder};
use crate::LabError;

#[derive(Serialize)]
struct Row {
    gradient: String,
    corner: String,
    /// One character per invariant subspace: `1` when contained in the image.
    contains: String,
    avoids_all: bool,
}

#[derive(Serialize)]
struct Summary {
    y_r: f64,
    invariant_subspaces: usize,
    subspace_dims: Vec<usize>,
    gradients: usize,
    vacuous: bool,
    any_avoids_all: bool,
    avoiding: usize,
    diameter: f64,
}

pub fn run(cfg: &ExperimentConfig, p: &SweepParams) -> Result<Report, LabError> {
    if p.directions == 0 || p.amplitudes.is_empty() {
        return Err(LabError::ConfigInvalid("sweep needs at least one direction and amplitude".into()));
    }
    let (chart, datum) = chart_and_datum(cfg, p.chart_radius, &p.heteroclinic)?;
    let du = chart.unstable_dim();
    let catalog = invariant_unstable_subspaces(chart.spectral()).map_err(LabError::failed)?;
    if !catalog.finite {
        return Err(LabError::ExperimentFailed(format!(
            "infinitely many invariant subspaces: {}",
            catalog.cause_of_infinitude.clone().unwrap_or_default()
        )));
    }
    let mut e0 = vec![0.0; du];
    e0[0] = 1.0;
    let bump = Bump::standard(&chart, &datum, &e0).map_err(LabError::config)?;
    let grads = gradient_grid(du, p.directions, &p.amplitudes);
    let rep = grassmannian_sweep(&chart, &datum, &bump, &grads, &catalog).map_err(LabError::failed)?;
    let rows: Vec<Row> = rep
        .entries
        .iter()
        .map(|e| Row {
            gradient: join(&e.gradient),
            corner: join(&e.corner),
            contains: e.contains.iter().map(|c| if *c { '1' } else { '0' }).collect(),
            avoids_all: e.avoids_all,
        })
        .collect();
    let mut out = ReportBuilder::new();
    out.csv("sweep.csv", &rows)?;
    let summary = Summary {
        y_r: datum.y_r,
        invariant_subspaces: catalog.subspaces.len(),
        subspace_dims: catalog.subspaces.iter().map(Vec::len).collect(),
        gradients: rows.len(),
        vacuous: rep.vacuous,
        any_avoids_all: rep.any_avoids_all,
        avoiding: rows.iter().filter(|r| r.avoids_all).count(),
        diameter: rep.diameter,
    };
    out.finish(cfg, &summary)
}
