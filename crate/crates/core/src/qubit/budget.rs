//! Participation-ratio loss budget: `1/Q1 = p_j/Q_J + (1 − p_j)/Q_0`.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::fit::{fit, FitProblem, FitResult};
use crate::trace::Trace;

/// Losses are fitted in units of 1e-6.
const LOSS_UNIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetFit {
    pub q_junction: f64,
    pub q_junction_uncertainty: f64,
    pub q_other: f64,
    pub q_other_uncertainty: f64,
    /// Fit of the two loss rates in units of 1e-6.
    pub fit: FitResult,
}

impl BudgetFit {
    /// Model Q1 at participation `p_j`.
    pub fn q1(&self, p_j: f64) -> f64 {
        1.0 / (p_j / self.q_junction + (1.0 - p_j) / self.q_other)
    }
}

/// Fits the junction and non-junction quality factors to `(p_j, Q1)` points
/// with relative weights.
pub fn loss_budget_fit(points: &[(f64, f64)]) -> Result<BudgetFit> {
    for &(p, q) in points {
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::domain(format!("participation ratio must be in [0, 1], got {p}")));
        }
        require_positive("Q1", q)?;
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::RankDeficient(
            "loss budget needs at least two distinct participation ratios".into(),
        ));
    }
    if points.len() < 3 {
        return Err(Error::Domain(format!("loss budget needs at least 3 points, got {}", points.len())));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| 1.0 / (p.1 * LOSS_UNIT)).collect();
    let w: Vec<f64> = y.iter().map(|v| 1.0 / (v * v)).collect();
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let problem = FitProblem::real(|p, l| p * l[0] + (1.0 - p) * l[1], vec![y_mean, y_mean])
        .jacobian(|p, _l, out| {
            out[0] = p;
            out[1] = 1.0 - p;
        })
        .names(["loss_junction", "loss_other"])
        .bound(0, 0.0, f64::INFINITY)
        .bound(1, 0.0, f64::INFINITY)
        .weights(w);
    let result = fit(&problem, &Trace::real("loss_budget", x, y))?;
    let (lj, l0) = (result.params[0], result.params[1]);
    let (sj, s0) = (result.param_uncertainties[0], result.param_uncertainties[1]);
    Ok(BudgetFit {
        q_junction: 1.0 / (lj * LOSS_UNIT),
        q_junction_uncertainty: sj / (lj * lj * LOSS_UNIT),
        q_other: 1.0 / (l0 * LOSS_UNIT),
        q_other_uncertainty: s0 / (l0 * l0 * LOSS_UNIT),
        fit: result,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub p_j: f64,
    pub q1: f64,
    pub q1_low: f64,
    pub q1_high: f64,
}

/// Model curve with a one-sigma band propagated from the parameter
/// covariance of the loss rates.
pub fn budget_band(fit: &BudgetFit, p_j: &[f64]) -> Vec<BandPoint> {
    let cov = loss_covariance(fit);
    loss_band(fit.fit.params[0] * LOSS_UNIT, fit.fit.params[1] * LOSS_UNIT, &cov, p_j)
}

/// Loss-rate covariance `[[var 1/Q_J, cov], [cov, var 1/Q_0]]` of a budget fit.
pub fn loss_covariance(fit: &BudgetFit) -> [[f64; 2]; 2] {
    let c = &fit.fit.covariance;
    let s2 = LOSS_UNIT * LOSS_UNIT;
    [[c[0][0] * s2, c[0][1] * s2], [c[1][0] * s2, c[1][1] * s2]]
}

/// Band of `1/Q1 = p·l_J + (1 − p)·l_0` from the loss rates and their
/// covariance. An upper edge at zero loss is infinite.
pub fn loss_band(loss_junction: f64, loss_other: f64, covariance: &[[f64; 2]; 2], p_j: &[f64]) -> Vec<BandPoint> {
    let c = covariance;
    p_j.iter()
        .map(|&p| {
            let g = [p, 1.0 - p];
            let var = g[0] * g[0] * c[0][0] + 2.0 * g[0] * g[1] * c[0][1] + g[1] * g[1] * c[1][1];
            let loss = p * loss_junction + (1.0 - p) * loss_other;
            let s = var.max(0.0).sqrt();
            let q = |l: f64| if l > 0.0 { 1.0 / l } else { f64::INFINITY };
            BandPoint {
                p_j: p,
                q1: q(loss),
                q1_low: q(loss + s),
                q1_high: q(loss - s),
            }
        })
        .collect()
}
