use anosov_core::spectral::{enumerate_catalog, invariant_unstable_subspaces, CatalogEntry};
use serde::Serialize;

use super::join_int;
use crate::config::{CatalogParams, ExperimentConfig};
use crate::report::{Report, ReportBuilder};
use crate::LabError;

#[derive(Serialize)]
struct Row {
    polynomial: String,
    coefficients: String,
    stable_dim: usize,
    unstable_dim: usize,
    complex_unstable_pair: bool,
    mu: f64,
    xi_1: f64,
    xi_l: f64,
    lhs: f64,
    rhs: f64,
    satisfied: bool,
    invariant_subspaces: String,
}

#[derive(Serialize)]
struct Summary {
    degree: usize,
    bound: i64,
    entries: usize,
    satisfied: usize,
    complex_unstable_pair: usize,
}

/// `x^3 + x^2 - 1` from `[1, 1, 0, -1]`.
pub fn format_polynomial(coeffs: &[i64]) -> String {
    let d = coeffs.len() - 1;
    let mut out = String::new();
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let p = d - i;
        let mag = c.unsigned_abs();
        if out.is_empty() {
            if c < 0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0 { " - " } else { " + " });
        }
        if mag != 1 || p == 0 {
            out.push_str(&mag.to_string());
        }
        match p {
            0 => {}
            1 => out.push('x'),
            _ => out.push_str(&format!("x^{p}")),
        }
    }
    out
}

fn row(e: &CatalogEntry, with_subspaces: bool) -> Row {
    let invariant_subspaces = if with_subspaces {
        match invariant_unstable_subspaces(&e.spectral) {
            Ok(c) if c.finite => c.subspaces.len().to_string(),
            Ok(_) => "infinite".to_string(),
            Err(err) => format!("error: {err}"),
        }
    } else {
        String::new()
    };
    Row {
        polynomial: format_polynomial(&e.poly_coeffs),
        coefficients: join_int(&e.poly_coeffs),
        stable_dim: e.spectral.stable_dim,
        unstable_dim: e.spectral.unstable_dim,
        complex_unstable_pair: e.spectral.complex_unstable_pair,
        mu: e.gap.mu,
        xi_1: e.gap.xi_1,
        xi_l: e.gap.xi_l,
        lhs: e.gap.lhs,
        rhs: e.gap.rhs,
        satisfied: e.gap.satisfied,
        invariant_subspaces,
    }
}

pub fn run(cfg: &ExperimentConfig, p: &CatalogParams) -> Result<Report, LabError> {
    if !(2..=5).contains(&p.degree) || p.bound < 0 {
        return Err(LabError::ConfigInvalid("catalog needs degree in 2..=5 and a nonnegative bound".into()));
    }
    let entries = enumerate_catalog(p.degree, p.bound).map_err(LabError::failed)?;
    let rows: Vec<Row> = entries.iter().map(|e| row(e, p.invariant_subspaces)).collect();
    let mut out = ReportBuilder::new();
    out.csv("catalog.csv", &rows)?;
    let summary = Summary {
        degree: p.degree,
        bound: p.bound,
        entries: rows.len(),
        satisfied: rows.iter().filter(|r| r.satisfied).count(),
        complex_unstable_pair: rows.iter().filter(|r| r.complex_unstable_pair).count(),
    };
    out.finish(cfg, &summary)
}

#[cfg(test)]
mod tests {
    use super::format_polynomial;

    #[test]
    fn polynomial_text() {
        assert_eq!(format_polynomial(&[1, 1, 0, -1]), "x^3 + x^2 - 1");
        assert_eq!(format_polynomial(&[1, -3, 1]), "x^2 - 3x + 1");
        assert_eq!(format_polynomial(&[1, -2, -2, 3, 1]), "x^4 - 2x^3 - 2x^2 + 3x + 1");
    }
}
