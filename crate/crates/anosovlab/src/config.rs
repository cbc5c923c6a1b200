//! Experiment configuration. Every struct rejects unknown fields.

use std::path::{Path, PathBuf};

use anosov_core::{IntegerMatrix, RoofFunction, TrigPolynomial};
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roof: Option<RoofSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSpec {
    /// Row-major integer entries.
    Rows(Vec<Vec<i64>>),
    /// Coefficients of a monic polynomial, leading 1 first.
    Polynomial(Vec<i64>),
    CatMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoofTerm {
    pub k: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `constant + sum (cos cos(2 pi k.x) + sin sin(2 pi k.x)) + (u o M - u)`, with
/// `u` given by `coboundary_of`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoofSpec {
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<RoofTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coboundary_of: Vec<RoofTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Catalog(CatalogParams),
    Livshits(LivshitsParams),
    Pcf(PcfParams),
    Subbundle(SubbundleParams),
    Claim44(Claim44Params),
    Sweep(SweepParams),
    Bunching(BunchingParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Catalog(_) => "catalog",
            Experiment::Livshits(_) => "livshits",
            Experiment::Pcf(_) => "pcf",
            Experiment::Subbundle(_) => "subbundle",
            Experiment::Claim44(_) => "claim44",
            Experiment::Sweep(_) => "sweep",
            Experiment::Bunching(_) => "bunching",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogParams {
    pub degree: usize,
    pub bound: i64,
    #[serde(default)]
    pub invariant_subspaces: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LivshitsParams {
    pub n_max: u32,
    pub truncation: i64,
    #[serde(default = "default_livshits_tolerance")]
    pub tolerance: f64,
}

fn default_livshits_tolerance() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugacySpec {
    pub translation: Vec<f64>,
    #[serde(default)]
    pub time_shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcfParams {
    pub quadrilaterals: usize,
    pub max_disp: f64,
    #[serde(default = "default_geometric_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugacy: Option<ConjugacySpec>,
}

fn default_geometric_tolerance() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub translation: Vec<f64>,
    pub radius: f64,
    pub grid_per_axis: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubbundleParams {
    pub budget: usize,
    pub max_disp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<PatchSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeteroclinicSpec {
    pub max_period: u32,
    pub box_size: i64,
    pub target: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemainderSpec {
    pub min_norm: f64,
    pub max_norm: f64,
    pub box_size: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim44Params {
    pub chart_radius: f64,
    pub heteroclinic: HeteroclinicSpec,
    pub direction: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    pub steps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remainder: Option<RemainderSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub chart_radius: f64,
    pub heteroclinic: HeteroclinicSpec,
    pub directions: usize,
    pub amplitudes: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BunchingParams {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_grid: Option<Vec<f64>>,
    /// Defaults to the mean of the roof, or 1 without a roof.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roof_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::ConfigInvalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_matrix(&self) -> Result<IntegerMatrix, LabError> {
        let spec = self.matrix.as_ref().ok_or_else(|| LabError::ConfigInvalid("missing matrix".into()))?;
        spec.build()
    }

    pub fn build_roof(&self, m: &IntegerMatrix) -> Result<RoofFunction, LabError> {
        let spec = self.roof.as_ref().ok_or_else(|| LabError::ConfigInvalid("missing roof".into()))?;
        spec.build(m)
    }
}

impl MatrixSpec {
    pub fn build(&self) -> Result<IntegerMatrix, LabError> {
        let m = match self {
            MatrixSpec::CatMap => Ok(IntegerMatrix::cat_map()),
            MatrixSpec::Rows(rows) => {
                let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
                IntegerMatrix::from_rows(&refs)
            }
            MatrixSpec::Polynomial(coeffs) => {
                if coeffs.len() < 3 || coeffs[0] != 1 {
                    return Err(LabError::ConfigInvalid("polynomial must be monic of degree at least 2".into()));
                }
                let lower: Vec<i64> = coeffs[1..].iter().rev().copied().collect();
                IntegerMatrix::companion(&lower)
            }
        };
        m.map_err(LabError::config)
    }
}

fn add_terms(mut p: TrigPolynomial, terms: &[RoofTerm], dim: usize) -> Result<TrigPolynomial, LabError> {
    for t in terms {
        if t.k.len() != dim {
            return Err(LabError::ConfigInvalid(format!("roof frequency {:?} has the wrong dimension", t.k)));
        }
        if !(t.cos.is_finite() && t.sin.is_finite()) {
            return Err(LabError::ConfigInvalid("roof coefficients must be finite".into()));
        }
        p.add_real_mode(&t.k, t.cos, t.sin);
    }
    Ok(p)
}

impl RoofSpec {
    pub fn build(&self, m: &IntegerMatrix) -> Result<RoofFunction, LabError> {
        let d = m.dim();
        if !self.constant.is_finite() {
            return Err(LabError::ConfigInvalid("roof constant must be finite".into()));
        }
        let mut p = add_terms(TrigPolynomial::constant(d, self.constant), &self.terms, d)?;
        if !self.coboundary_of.is_empty() {
            let u = add_terms(TrigPolynomial::zero(d), &self.coboundary_of, d)?;
            p = p.add(&anosov_core::roof::coboundary(&u, m));
        }
        RoofFunction::new(p).map_err(LabError::config)
    }
}
