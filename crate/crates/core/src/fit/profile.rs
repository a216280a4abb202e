//! Confidence intervals from the residual profile of one parameter.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::lm::fit;
use super::transform::Bound;
use super::{FitProblem, FitResult};
use crate::error::{Error, Result};
use crate::trace::Trace;

const MAX_DOUBLINGS: usize = 40;
const BISECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    /// The profile never crossed the threshold below the best fit; `lower`
    /// is the furthest value scanned.
    pub lower_open: bool,
    pub upper_open: bool,
}

impl ConfidenceInterval {
    pub fn is_open(&self) -> bool {
        self.lower_open || self.upper_open
    }
}

/// Scans the chi-square profile of `param_index`, re-minimizing the other
/// free parameters at each trial value, and returns where the increase over
/// the minimum reaches the `level` quantile of a one-degree chi-square
/// (scaled by the reduced chi-square unless the problem uses absolute
/// sigma).
pub fn profile_confidence(
    result: &FitResult,
    problem: &FitProblem,
    data: &Trace,
    param_index: usize,
    level: f64,
) -> Result<ConfidenceInterval> {
    if !result.converged {
        return Err(Error::Problem("profile requires a converged fit".into()));
    }
    if param_index >= problem.n_params() || problem.fixed[param_index] {
        return Err(Error::Problem(format!("parameter {param_index} is not a free parameter")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Problem(format!("confidence level must be in (0, 1), got {level}")));
    }
    let quantile = ChiSquared::new(1.0)
        .map_err(|e| Error::Problem(e.to_string()))?
        .inverse_cdf(level);
    let scale = if problem.absolute_sigma {
        1.0
    } else if result.dof > 0 {
        result.chi_square / result.dof as f64
    } else {
        0.0
    };
    let threshold = quantile * scale;
    let best = result.params[param_index];
    if threshold == 0.0 {
        return Ok(ConfidenceInterval {
            level,
            lower: best,
            upper: best,
            lower_open: false,
            upper_open: false,
        });
    }

    let bound = Bound::new(problem.lower[param_index], problem.upper[param_index]);
    let sigma = result.param_uncertainties[param_index];
    let step = if sigma.is_finite() && sigma > 0.0 {
        sigma
    } else {
        0.1 * best.abs().max(bound.scale() * 1e3)
    };

    let mut fixed_problem = problem.clone();
    fixed_problem.fixed[param_index] = true;
    let delta_chi = |value: f64| -> Result<f64> {
        let mut start = result.params.clone();
        start[param_index] = value;
        let r = fit(&fixed_problem.with_initial(start), data)?;
        Ok(r.chi_square - result.chi_square)
    };

    let side = |direction: f64| -> Result<(f64, bool)> {
        let mut inside = best;
        let mut k = 0;
        let mut offset = step;
        loop {
            let mut candidate = best + direction * offset;
            let clipped = !bound.contains(candidate);
            if clipped {
                candidate = bound.interior(if direction > 0.0 {
                    problem.upper[param_index]
                } else {
                    problem.lower[param_index]
                });
            }
            let d = delta_chi(candidate)?;
            if d >= threshold {
                // bisect between inside and candidate
                let (mut lo, mut hi) = (inside, candidate);
                for _ in 0..BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if delta_chi(mid)? >= threshold {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if (hi - lo).abs() <= 1e-9 * (best.abs() + step) {
                        break;
                    }
                }
                return Ok((0.5 * (lo + hi), false));
            }
            inside = candidate;
            k += 1;
            if clipped || k >= MAX_DOUBLINGS {
                return Ok((candidate, true));
            }
            offset *= 2.0;
        }
    };
    let (lower, lower_open) = side(-1.0)?;
    let (upper, upper_open) = side(1.0)?;
    Ok(ConfidenceInterval {
        level,
        lower,
        upper,
        lower_open,
        upper_open,
    })
}
