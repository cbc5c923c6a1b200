use anosov_core::flow::FlowPoint;
use anosov_core::pcf::{
    common_kernel, planted_translation, random_flow_point, reconstruct_conjugacy_patch, search_independent_pairs,
};
use anosov_core::TorusPoint;
use serde::Serialize;

use super::{flow, join, positive, rng};
use crate::config::{ExperimentConfig, SubbundleParams};
use crate::report::{Report, ReportBuilder};
use crate::LabError;

#[derive(Serialize)]
struct PairRow {
    index: usize,
    a_offset: String,
    s_coords: String,
    gradient: String,
}

#[derive(Serialize)]
struct PatchRow {
    grid: String,
    recovered: String,
    error: f64,
}

#[derive(Serialize)]
struct Summary {
    base_x: Vec<f64>,
    base_s: f64,
    unstable_dim: usize,
    budget: usize,
    draws: usize,
    independent_pairs: usize,
    rank: usize,
    kernel_dim: usize,
    kernel_basis: Vec<Vec<f64>>,
    patch_points: Option<usize>,
    patch_sup_error: Option<f64>,
}

pub fn run(cfg: &ExperimentConfig, p: &SubbundleParams) -> Result<Report, LabError> {
    positive("max_disp", p.max_disp)?;
    if p.budget == 0 {
        return Err(LabError::ConfigInvalid("budget must be positive".into()));
    }
    let f1 = flow(cfg, None)?;
    let du = f1.spectral().unstable_dim;
    let mut r = rng(cfg);
    let base: FlowPoint = random_flow_point(&f1, &mut r);
    let (pairs, draws) = search_independent_pairs(&f1, &base, &mut r, du, p.budget, p.max_disp).map_err(LabError::failed)?;
    let origin = vec![0.0; du];
    let grads = pairs
        .iter()
        .map(|pr| pr.gradient(&f1, &base, &origin))
        .collect::<Result<Vec<_>, _>>()
        .map_err(LabError::failed)?;
    let (rank, kernel_basis) = common_kernel(&grads, du);
    let rows: Vec<PairRow> = pairs
        .iter()
        .zip(&grads)
        .enumerate()
        .map(|(index, (pr, g))| PairRow {
            index,
            a_offset: join(&pr.a_offset),
            s_coords: join(&pr.s_coords),
            gradient: join(g),
        })
        .collect();
    let mut out = ReportBuilder::new();
    out.csv("pairs.csv", &rows)?;
    let mut summary = Summary {
        base_x: base.x.to_vec(),
        base_s: base.s,
        unstable_dim: du,
        budget: p.budget,
        draws,
        independent_pairs: pairs.len(),
        rank,
        kernel_dim: kernel_basis.len(),
        kernel_basis,
        patch_points: None,
        patch_sup_error: None,
    };
    if let Some(patch) = &p.patch {
        positive("patch radius", patch.radius)?;
        if patch.translation.len() != f1.dim() {
            return Err(LabError::ConfigInvalid("patch translation has the wrong dimension".into()));
        }
        let (f2, h) = planted_translation(&f1, &TorusPoint::from_f64(&patch.translation)).map_err(LabError::config)?;
        let rec = reconstruct_conjugacy_patch(&f1, &f2, &h, &base, &pairs, patch.radius, patch.grid_per_axis)
            .map_err(LabError::failed)?;
        let prow: Vec<PatchRow> = rec
            .grid
            .iter()
            .zip(&rec.recovered)
            .zip(&rec.errors)
            .map(|((g, c), e)| PatchRow { grid: join(g), recovered: join(c), error: *e })
            .collect();
        out.csv("patch.csv", &prow)?;
        summary.patch_points = Some(prow.len());
        summary.patch_sup_error = Some(rec.sup_error);
    }
    out.finish(cfg, &summary)
}
