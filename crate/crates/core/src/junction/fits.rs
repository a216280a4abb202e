//! Junction calibration fits: resistance versus design area, critical current
//! density versus oxygen exposure, and annealing kinetics.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::fit::{fit, FitProblem, FitResult};
use crate::trace::Trace;

const UM: f64 = 1e-6;

/// One measured junction: design dimensions in metres, resistance in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaSample {
    pub design_width: f64,
    pub design_height: f64,
    pub resistance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaFit {
    /// Ω·m²
    pub specific_resistance: f64,
    pub specific_resistance_uncertainty: f64,
    /// m
    pub dimension_bias: f64,
    pub dimension_bias_uncertainty: f64,
    /// Underlying fit in Ω·µm² and µm.
    pub fit: FitResult,
}

fn distinct_count(values: impl Iterator<Item = f64>, rel: f64) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= rel * b.abs().max(a.abs()));
    v.len()
}

/// Fits `R = ρs / ((w − d)(h − d))` with relative weights. The bias `d` is
/// bounded to `[0, min dimension)`.
pub fn fit_area_scaling(samples: &[AreaSample]) -> Result<AreaFit> {
    for s in samples {
        require_positive("design width", s.design_width)?;
        require_positive("design height", s.design_height)?;
        require_positive("resistance", s.resistance)?;
    }
    if distinct_count(samples.iter().map(|s| s.design_width * s.design_height), 1e-9) < 2 {
        return Err(Error::RankDeficient(
            "area scaling needs junctions of at least two distinct areas".into(),
        ));
    }
    if samples.len() < 4 {
        return Err(Error::Domain(format!(
            "area scaling needs at least 4 junctions, got {}",
            samples.len()
        )));
    }
    let dims: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.design_width / UM, s.design_height / UM))
        .collect();
    let r: Vec<f64> = samples.iter().map(|s| s.resistance).collect();
    let d_max = dims.iter().map(|(w, h)| w.min(*h)).fold(f64::INFINITY, f64::min);

    // Coarse scan over the bias with the closed-form ρs at each value.
    let rho_at = |d: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for ((w, h), ri) in dims.iter().zip(&r) {
            let g = 1.0 / ((w - d) * (h - d));
            num += g / ri;
            den += g * g / (ri * ri);
        }
        num / den
    };
    let cost = |d: f64| {
        let rho = rho_at(d);
        dims.iter()
            .zip(&r)
            .map(|((w, h), ri)| {
                let e = 1.0 - rho / ((w - d) * (h - d)) / ri;
                e * e
            })
            .sum::<f64>()
    };
    let d0 = (0..200)
        .map(|k| 0.95 * d_max * k as f64 / 200.0)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .expect("non-empty scan");
    let rho0 = rho_at(d0);

    let model_dims = dims.clone();
    let problem = FitProblem::real(
        move |x, p| {
            let (w, h) = model_dims[x as usize];
            p[0] / ((w - p[1]) * (h - p[1]))
        },
        vec![rho0, d0.max(1e-6 * d_max)],
    )
    .names(["specific_resistance", "dimension_bias"])
    .bound(0, 0.0, f64::INFINITY)
    .bound(1, 0.0, d_max)
    .weights(r.iter().map(|ri| 1.0 / (ri * ri)).collect());
    let data = Trace::real("area_scaling", (0..r.len()).map(|i| i as f64).collect(), r);
    let result = fit(&problem, &data)?;
    Ok(AreaFit {
        specific_resistance: result.params[0] * UM * UM,
        specific_resistance_uncertainty: result.param_uncertainties[0] * UM * UM,
        dimension_bias: result.params[1] * UM,
        dimension_bias_uncertainty: result.param_uncertainties[1] * UM,
        fit: result,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureFit {
    /// SI units of J_c / E^p
    pub prefactor: f64,
    pub prefactor_uncertainty: f64,
    pub exponent: f64,
    pub exponent_uncertainty: f64,
    /// Underlying fit of ln J_c = ln K + p ln E.
    pub fit: FitResult,
}

fn check_exposure_points(points: &[(f64, f64)]) -> Result<()> {
    for &(e, j) in points {
        require_positive("oxidation exposure", e)?;
        require_positive("critical current density", j)?;
    }
    Ok(())
}

/// Fits `J_c = K·E^p` in log-log space. With `fix_exponent` only K is free.
pub fn fit_exposure_law(points: &[(f64, f64)], fix_exponent: Option<f64>) -> Result<ExposureFit> {
    check_exposure_points(points)?;
    let groups = [("all".to_string(), points.to_vec())];
    let g = fit_exposure_groups(&groups, fix_exponent)?;
    let (_, prefactor, prefactor_uncertainty) = g.prefactors[0].clone();
    Ok(ExposureFit {
        prefactor,
        prefactor_uncertainty,
        exponent: g.exponent,
        exponent_uncertainty: g.exponent_uncertainty,
        fit: g.fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureGroupFit {
    pub exponent: f64,
    pub exponent_uncertainty: f64,
    /// (label, K, σ_K) per group
    pub prefactors: Vec<(String, f64, f64)>,
    pub fit: FitResult,
}

impl ExposureGroupFit {
    /// Ratio of two group prefactors, i.e. the constant J_c ratio between the
    /// processes at equal exposure.
    pub fn prefactor_ratio(&self, numerator: &str, denominator: &str) -> Option<f64> {
        let get = |l: &str| self.prefactors.iter().find(|p| p.0 == l).map(|p| p.1);
        Some(get(numerator)? / get(denominator)?)
    }
}

/// Fits `J_c = K_g·E^p` with one prefactor per labelled group and a shared
/// exponent.
pub fn fit_exposure_groups(
    groups: &[(String, Vec<(f64, f64)>)],
    fix_exponent: Option<f64>,
) -> Result<ExposureGroupFit> {
    if groups.is_empty() {
        return Err(Error::Domain("no exposure groups".into()));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut group_of = Vec::new();
    for (gi, (label, pts)) in groups.iter().enumerate() {
        check_exposure_points(pts)?;
        if pts.is_empty() {
            return Err(Error::Domain(format!("exposure group `{label}` is empty")));
        }
        for &(e, j) in pts {
            x.push(e.ln());
            y.push(j.ln());
            group_of.push(gi);
        }
    }
    if fix_exponent.is_none() {
        let distinct = groups
            .iter()
            .map(|(_, pts)| distinct_count(pts.iter().map(|p| p.0), 1e-12))
            .max()
            .unwrap_or(0);
        if distinct < 2 {
            return Err(Error::RankDeficient(
                "a free exponent needs at least two distinct exposures in one group".into(),
            ));
        }
    }
    let n_points: usize = groups.iter().map(|g| g.1.len()).sum();
    if n_points < 3 {
        return Err(Error::Domain(format!("exposure law needs at least 3 points, got {n_points}")));
    }

    // Ordinary least squares start: shared slope from within-group centring.
    let slope = fix_exponent.unwrap_or_else(|| {
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for gi in 0..groups.len() {
            let idx: Vec<usize> = (0..x.len()).filter(|&i| group_of[i] == gi).collect();
            let mx = idx.iter().map(|&i| x[i]).sum::<f64>() / idx.len() as f64;
            let my = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
            for &i in &idx {
                sxy += (x[i] - mx) * (y[i] - my);
                sxx += (x[i] - mx) * (x[i] - mx);
            }
        }
        sxy / sxx
    });
    let mut initial = vec![slope];
    for gi in 0..groups.len() {
        let idx: Vec<usize> = (0..x.len()).filter(|&i| group_of[i] == gi).collect();
        initial.push(idx.iter().map(|&i| y[i] - slope * x[i]).sum::<f64>() / idx.len() as f64);
    }

    // The model sees the point index so each point can find its group.
    let (mx, mg) = (x.clone(), group_of.clone());
    let model = move |i: f64, p: &[f64]| {
        let i = i as usize;
        p[1 + mg[i]] + p[0] * mx[i]
    };
    let (jx, jg) = (x.clone(), group_of.clone());
    let jacobian = move |i: f64, _p: &[f64], out: &mut [f64]| {
        let i = i as usize;
        out.fill(0.0);
        out[0] = jx[i];
        out[1 + jg[i]] = 1.0;
    };
    let mut names = vec!["exponent".to_string()];
    names.extend(groups.iter().map(|(l, _)| format!("ln_prefactor_{l}")));
    let mut problem = FitProblem::real(model, initial).jacobian(jacobian).names(names);
    if fix_exponent.is_some() {
        problem = problem.fix(0);
    }
    let data = Trace::real("exposure_law", (0..x.len()).map(|i| i as f64).collect(), y);
    let result = fit(&problem, &data)?;
    let prefactors = groups
        .iter()
        .enumerate()
        .map(|(gi, (l, _))| {
            let k = result.params[1 + gi].exp();
            (l.clone(), k, k * result.param_uncertainties[1 + gi])
        })
        .collect();
    Ok(ExposureGroupFit {
        exponent: result.params[0],
        exponent_uncertainty: result.param_uncertainties[0],
        prefactors,
        fit: result,
    })
}

/// `J_c/J_c⁰ = (1 − α)·e^(−t/τ) + α`.
pub fn annealing_ratio(t: f64, alpha: f64, tau: f64) -> f64 {
    (1.0 - alpha) * (-t / tau).exp() + alpha
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealFit {
    pub alpha: f64,
    pub alpha_uncertainty: f64,
    /// s
    pub tau: f64,
    pub tau_uncertainty: f64,
    pub fit: FitResult,
}

/// Fits the saturating exponential to `(time s, J_c ratio)` points.
pub fn fit_annealing(points: &[(f64, f64)]) -> Result<AnnealFit> {
    if points.len() < 3 {
        return Err(Error::Domain(format!("annealing fit needs at least 3 points, got {}", points.len())));
    }
    for &(t, r) in points {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!("annealing time must be non-negative, got {t}")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::domain(format!("J_c ratio must be positive, got {r}")));
        }
        if r > 1.0 {
            return Err(Error::domain(format!(
                "J_c ratio {r} at t = {t} s exceeds 1; annealing only reduces J_c"
            )));
        }
    }
    let t_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if !(t_max > 0.0) {
        return Err(Error::RankDeficient("all annealing times are zero".into()));
    }
    let t_min = points
        .iter()
        .map(|p| p.0)
        .filter(|t| *t > 0.0)
        .fold(f64::INFINITY, f64::min);

    // Scan τ on a log grid; α is linear given τ.
    let best_alpha = |tau: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for &(t, r) in points {
            let e = (-t / tau).exp();
            num += (r - e) * (1.0 - e);
            den += (1.0 - e) * (1.0 - e);
        }
        if den > 0.0 {
            (num / den).clamp(1e-6, 1.0 - 1e-6)
        } else {
            0.5
        }
    };
    let sse = |tau: f64| {
        let a = best_alpha(tau);
        points
            .iter()
            .map(|&(t, r)| (r - annealing_ratio(t, a, tau)).powi(2))
            .sum::<f64>()
    };
    let (lo, hi) = ((t_min / 10.0).ln(), (t_max * 10.0).ln());
    let tau0 = (0..=200)
        .map(|k| (lo + (hi - lo) * k as f64 / 200.0).exp())
        .min_by(|a, b| sse(*a).total_cmp(&sse(*b)))
        .expect("non-empty scan");
    let alpha0 = best_alpha(tau0);

    let problem = FitProblem::real(|t, p| annealing_ratio(t, p[0], p[1]), vec![alpha0, tau0])
        .jacobian(|t, p, out| {
            let e = (-t / p[1]).exp();
            out[0] = 1.0 - e;
            out[1] = (1.0 - p[0]) * e * t / (p[1] * p[1]);
        })
        .names(["alpha", "tau"])
        .bound(0, 0.0, 1.0)
        .bound(1, 0.0, f64::INFINITY);
    let data = Trace::real(
        "annealing",
        points.iter().map(|p| p.0).collect(),
        points.iter().map(|p| p.1).collect(),
    );
    let result = fit(&problem, &data)?;
    Ok(AnnealFit {
        alpha: result.params[0],
        alpha_uncertainty: result.param_uncertainties[0],
        tau: result.params[1],
        tau_uncertainty: result.param_uncertainties[1],
        fit: result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area_samples(rho: f64, bias: f64) -> Vec<AreaSample> {
        (0..10)
            .map(|k| {
                let w = (0.8 + 2.2 * k as f64 / 9.0) * UM;
                let h = w * if k % 2 == 0 { 1.0 } else { 1.25 };
                AreaSample {
                    design_width: w,
                    design_height: h,
                    resistance: rho / ((w - bias) * (h - bias)),
                }
            })
            .collect()
    }

    #[test]
    fn area_recovery_noiseless() {
        let f = fit_area_scaling(&area_samples(1.5e-12, 160e-9)).unwrap();
        assert!((f.specific_resistance / 1.5e-12 - 1.0).abs() < 1e-3);
        assert!((f.dimension_bias / 160e-9 - 1.0).abs() < 1e-3);
        assert!(f.fit.converged);
    }

    #[test]
    fn area_unbiased() {
        let f = fit_area_scaling(&area_samples(1.5e-12, 0.0)).unwrap();
        assert!(f.dimension_bias < 1e-12 + f.dimension_bias_uncertainty.max(1e-12));
        assert!((f.specific_resistance / 1.5e-12 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn area_single_size_rank_deficient() {
        let s = AreaSample {
            design_width: 1e-6,
            design_height: 1e-6,
            resistance: 10.0,
        };
        assert!(matches!(fit_area_scaling(&[s; 6]), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn area_swap_invariant() {
        let a = area_samples(2e-12, 120e-9);
        let b: Vec<_> = a
            .iter()
            .map(|s| AreaSample {
                design_width: s.design_height,
                design_height: s.design_width,
                resistance: s.resistance * (1.0 + 0.01 * (s.design_width * 1e7).sin()),
            })
            .collect();
        let a2: Vec<_> = b
            .iter()
            .map(|s| AreaSample {
                design_width: s.design_height,
                design_height: s.design_width,
                resistance: s.resistance,
            })
            .collect();
        let fb = fit_area_scaling(&b).unwrap();
        let fa = fit_area_scaling(&a2).unwrap();
        assert!((fa.dimension_bias - fb.dimension_bias).abs() < 1e-9 * 1e-6);
        assert!((fa.specific_resistance / fb.specific_resistance - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exposure_recovery() {
        let pts: Vec<_> = (0..8)
            .map(|k| {
                let e = 10f64.powf(1.0 + k as f64 * 3.0 / 7.0);
                (e, 1e7 * e.powf(-0.5))
            })
            .collect();
        let f = fit_exposure_law(&pts, None).unwrap();
        assert!((f.exponent + 0.5).abs() < 1e-6);
        assert!((f.prefactor / 1e7 - 1.0).abs() < 1e-6);
        let g = fit_exposure_law(&pts, Some(-0.5)).unwrap();
        assert_eq!(g.exponent, -0.5);
        assert!((g.prefactor / 1e7 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exposure_errors() {
        assert!(matches!(
            fit_exposure_law(&[(10.0, 1e6), (10.0, 1e6)], None),
            Err(Error::RankDeficient(_))
        ));
        assert!(matches!(
            fit_exposure_law(&[(10.0, 1e6), (0.0, 1e6), (20.0, 1e6)], None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exposure_groups_share_exponent() {
        let make = |k: f64| (0..5).map(|i| {
            let e = 10f64.powi(i + 1);
            (e, k * e.powf(-0.5))
        }).collect::<Vec<_>>();
        let groups = vec![("HDPCVD".to_string(), make(5e7)), ("PECVD".to_string(), make(1e6))];
        let g = fit_exposure_groups(&groups, None).unwrap();
        assert!((g.exponent + 0.5).abs() < 1e-9);
        assert!((g.prefactor_ratio("HDPCVD", "PECVD").unwrap() - 50.0).abs() < 1e-6);
    }

    #[test]
    fn annealing_identities() {
        assert_eq!(annealing_ratio(0.0, 0.023, 240.0), 1.0);
        let r = annealing_ratio(240.0, 0.023, 240.0);
        assert!((r - (0.023 + 0.977 / std::f64::consts::E)).abs() < 1e-15);
    }

    #[test]
    fn annealing_noiseless() {
        let pts: Vec<_> = (1..=10).map(|k| {
            let t = 180.0 * k as f64;
            (t, annealing_ratio(t, 0.023, 240.0))
        }).collect();
        let f = fit_annealing(&pts).unwrap();
        assert!((f.tau / 240.0 - 1.0).abs() < 1e-6);
        assert!((f.alpha / 0.023 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn annealing_rejects_ratio_above_one() {
        let pts = [(0.0, 1.0), (60.0, 1.02), (120.0, 0.5)];
        assert!(matches!(fit_annealing(&pts), Err(Error::Domain(_))));
    }
}
