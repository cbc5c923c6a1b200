//! One runner per experiment kind. Each returns a finished [`Report`].

mod bunching;
mod catalog;
mod claim44;
mod livshits;
mod pcf;
mod subbundle;
mod sweep;

use anosov_core::flow::SuspensionFlow;
use anosov_core::perturb::{find_heteroclinic, HeteroclinicDatum, SectionChart};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Experiment, ExperimentConfig, HeteroclinicSpec};
use crate::report::Report;
use crate::LabError;

pub fn run(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    match &cfg.experiment {
        Experiment::Catalog(p) => catalog::run(cfg, p),
        Experiment::Livshits(p) => livshits::run(cfg, p),
        Experiment::Pcf(p) => pcf::run(cfg, p),
        Experiment::Subbundle(p) => subbundle::run(cfg, p),
        Experiment::Claim44(p) => claim44::run(cfg, p),
        Experiment::Sweep(p) => sweep::run(cfg, p),
        Experiment::Bunching(p) => bunching::run(cfg, p),
    }
}

pub(crate) fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

pub(crate) fn flow(cfg: &ExperimentConfig, chart_radius: Option<f64>) -> Result<SuspensionFlow, LabError> {
    let m = cfg.build_matrix()?;
    let roof = cfg.build_roof(&m)?;
    let f = SuspensionFlow::new(m, roof).map_err(LabError::config)?;
    Ok(match chart_radius {
        Some(r) if r > 0.0 && r < 0.5 => f.with_chart_radius(r),
        Some(r) => return Err(LabError::ConfigInvalid(format!("chart radius {r} must lie in (0, 0.5)"))),
        None => f,
    })
}

pub(crate) fn chart_and_datum(
    cfg: &ExperimentConfig,
    radius: f64,
    h: &HeteroclinicSpec,
) -> Result<(SectionChart, HeteroclinicDatum), LabError> {
    let chart = SectionChart::new(flow(cfg, None)?, radius).map_err(LabError::config)?;
    let datum = find_heteroclinic(&chart, h.max_period, h.box_size, h.target, h.lo, h.hi).map_err(LabError::failed)?;
    Ok((chart, datum))
}

/// Space-separated shortest round-trip representations.
pub(crate) fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub(crate) fn join_int(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub(crate) fn positive(name: &str, v: f64) -> Result<(), LabError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::ConfigInvalid(format!("{name} must be positive, got {v}")))
    }
}
