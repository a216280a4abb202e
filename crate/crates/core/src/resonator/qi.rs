//! Internal quality factor versus photon number and temperature.

use serde::{Deserialize, Serialize};

use super::{thermal_saturation, TlsParams};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::fit::{fit, FitProblem, FitResult};
use crate::physics::{delta0_from_tc, gap_vs_temperature, mattis_bardeen_with, MbTolerance};
use crate::trace::Trace;

/// Losses are fitted in units of 1e-6.
const LOSS_UNIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerModel {
    /// TLS saturation plus a constant loss.
    Full,
    /// Constant loss only; the data show no power dependence.
    ConstantOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub selected: PowerModel,
    pub f_delta0: f64,
    pub f_delta0_uncertainty: f64,
    pub n_c: f64,
    pub n_c_uncertainty: f64,
    pub beta: f64,
    pub beta_uncertainty: f64,
    pub q_other: f64,
    pub q_other_uncertainty: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// The TLS-plus-constant fit, in units of 1e-6 loss with ln n_c.
    pub fit: FitResult,
}

impl PowerFit {
    pub fn tls(&self) -> TlsParams {
        TlsParams {
            f_delta0: self.f_delta0,
            n_c: self.n_c,
            beta: self.beta,
        }
    }
}

fn aicc(chi2: f64, n: usize, k: usize) -> f64 {
    let n_f = n as f64;
    let k_f = k as f64;
    let base = n_f * (chi2.max(f64::MIN_POSITIVE) / n_f).ln() + 2.0 * k_f;
    if n > k + 1 {
        base + 2.0 * k_f * (k_f + 1.0) / (n_f - k_f - 1.0)
    } else {
        f64::INFINITY
    }
}

/// Fits `1/Q_i = Fδ0·tanh(ħω/2k_BT)/(1 + n/n_c)^β + 1/Q_other` to
/// `(n_ph, Q_i)` points with relative weights, then selects between this
/// model and a constant loss by the corrected Akaike criterion.
pub fn fit_qi_vs_power(points: &[(f64, f64)], t: f64, f: f64) -> Result<PowerFit> {
    require_non_negative("temperature", t)?;
    require_positive("frequency", f)?;
    if points.len() < 5 {
        return Err(Error::Domain(format!(
            "power dependence needs at least 5 points, got {}",
            points.len()
        )));
    }
    for &(n, q) in points {
        require_positive("photon number", n)?;
        require_positive("internal Q", q)?;
    }
    let mut warnings = Vec::new();
    let n_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let n_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let decades = (n_max / n_min).log10();
    if decades < 2.0 {
        warnings.push(format!(
            "rank deficiency likely: photon numbers span only {decades:.2} decades (at least 2 needed)"
        ));
    }
    let sat = thermal_saturation(f, t);
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| 1.0 / (p.1 * LOSS_UNIT)).collect();
    let w: Vec<f64> = y.iter().map(|v| 1.0 / (v * v)).collect();

    // Scan (n_c, β) and solve the linear amplitudes at each grid point.
    let linear = |nc: f64, beta: f64| -> (f64, f64, f64) {
        let s: Vec<f64> = x.iter().map(|n| sat / (1.0 + n / nc).powf(beta)).collect();
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..x.len() {
            a11 += w[i] * s[i] * s[i];
            a12 += w[i] * s[i];
            a22 += w[i];
            b1 += w[i] * s[i] * y[i];
            b2 += w[i] * y[i];
        }
        let det = a11 * a22 - a12 * a12;
        let (mut a, mut l) = if det.abs() > 1e-300 {
            ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det)
        } else {
            (0.0, b2 / a22)
        };
        a = a.max(0.0);
        l = l.max(0.0);
        let sse = (0..x.len()).map(|i| w[i] * (y[i] - a * s[i] - l).powi(2)).sum();
        (a, l, sse)
    };
    let mut best = (f64::INFINITY, 0.0, 0.0, 1.0, 0.5);
    for k in 0..=40 {
        let nc = (n_min.ln() - 2.3 + (n_max.ln() - n_min.ln() + 4.6) * k as f64 / 40.0).exp();
        for beta in [0.2, 0.35, 0.5, 0.65, 0.8, 1.0] {
            let (a, l, sse) = linear(nc, beta);
            if sse < best.0 {
                best = (sse, a, l, nc, beta);
            }
        }
    }
    let (_, a0, l0, nc0, beta0) = best;
    let y_max = y.iter().cloned().fold(0.0, f64::max);
    let problem = FitProblem::real(
        move |n, p| p[0] * sat / (1.0 + n / p[1].exp()).powf(p[2]) + p[3],
        vec![a0.max(1e-6 * y_max), nc0.ln(), beta0, l0.max(1e-6 * y_max)],
    )
    .names(["f_delta0", "ln_n_c", "beta", "loss_other"])
    .bound(0, 0.0, f64::INFINITY)
    .bound(2, 0.0, 2.0)
    .bound(3, 0.0, f64::INFINITY)
    .weights(w.clone());
    let data = Trace::real("qi_power", x.clone(), y.clone());
    let full = fit(&problem, &data)?;

    let wsum: f64 = w.iter().sum();
    let l_const = w.iter().zip(&y).map(|(wi, yi)| wi * yi).sum::<f64>() / wsum;
    let chi_const: f64 = w.iter().zip(&y).map(|(wi, yi)| wi * (yi - l_const).powi(2)).sum();
    let n = y.len();
    let selected = if chi_const <= full.chi_square * (1.0 + 1e-9) || aicc(chi_const, n, 1) <= aicc(full.chi_square, n, 4) {
        PowerModel::ConstantOnly
    } else {
        PowerModel::Full
    };

    let p = &full.params;
    let s = &full.param_uncertainties;
    let (q_other, q_other_uncertainty) = match selected {
        PowerModel::Full => {
            let l = p[3];
            (1.0 / (l * LOSS_UNIT), s[3] / (l * l * LOSS_UNIT))
        }
        PowerModel::ConstantOnly => {
            let dof = (n - 1).max(1) as f64;
            let sigma_l = (chi_const / dof / wsum).sqrt();
            (1.0 / (l_const * LOSS_UNIT), sigma_l / (l_const * l_const * LOSS_UNIT))
        }
    };
    Ok(PowerFit {
        selected,
        f_delta0: p[0] * LOSS_UNIT,
        f_delta0_uncertainty: s[0] * LOSS_UNIT,
        n_c: p[1].exp(),
        n_c_uncertainty: p[1].exp() * s[1],
        beta: p[2],
        beta_uncertainty: s[2],
        q_other,
        q_other_uncertainty,
        warnings,
        fit: full,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QiTempOptions {
    /// Starting TLS parameters; n_c and β are always held fixed.
    pub tls: TlsParams,
    /// Fit F·δ0; otherwise it is held at `tls.f_delta0`.
    pub fit_tls: bool,
    /// Hold the kinetic-inductance fraction at this value.
    pub fix_alpha: Option<f64>,
    /// eV; defaults to the BCS value from T_c.
    pub delta0: Option<f64>,
    pub mb_tolerance: MbTolerance,
}

impl Default for QiTempOptions {
    fn default() -> Self {
        QiTempOptions {
            tls: TlsParams::default(),
            fit_tls: true,
            fix_alpha: None,
            delta0: None,
            mb_tolerance: MbTolerance::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureFit {
    pub q_other: f64,
    pub q_other_uncertainty: f64,
    pub tls: TlsParams,
    pub f_delta0_uncertainty: f64,
    pub alpha_kin: f64,
    pub alpha_kin_uncertainty: f64,
    /// Fit in units of 1e-6 loss.
    pub fit: FitResult,
}

/// σ1/σ2 at temperature `t` with the gap following the BCS interpolation.
fn conductivity_ratio(f: f64, t: f64, tc: f64, delta0: f64, tol: MbTolerance) -> Result<f64> {
    let gap = gap_vs_temperature(delta0, tc, t)?;
    if gap.normal_state {
        return Err(Error::domain(format!("temperature {t} K is not below T_c = {tc} K")));
    }
    Ok(mattis_bardeen_with(f, t, gap.delta, tol)?.sigma1_over_sigma2())
}

/// `1/Q_i(T) = 1/Q_other + Fδ0·tanh(ħω/2k_BT)/(1 + n/n_c)^β + α·σ1/σ2`,
/// returned as Q_i.
#[allow(clippy::too_many_arguments)]
pub fn qi_temperature_model(
    t: f64,
    f: f64,
    tc: f64,
    n_ph: f64,
    q_other: f64,
    tls: &TlsParams,
    alpha: f64,
    tol: MbTolerance,
) -> Result<f64> {
    require_positive("q_other", q_other)?;
    require_non_negative("alpha", alpha)?;
    let delta0 = delta0_from_tc(tc)?;
    let loss = 1.0 / q_other + super::tls_loss(n_ph, t, f, tls)? + alpha * conductivity_ratio(f, t, tc, delta0, tol)?;
    Ok(1.0 / loss)
}

/// Fits Q_other, F·δ0 and the kinetic fraction α to `(T, Q_i)` points with
/// relative weights. Mattis-Bardeen σ1/σ2 is evaluated once per data
/// temperature.
pub fn fit_qi_vs_temperature(
    points: &[(f64, f64)],
    f: f64,
    tc: f64,
    n_ph: f64,
    opts: &QiTempOptions,
) -> Result<TemperatureFit> {
    require_positive("frequency", f)?;
    require_positive("tc", tc)?;
    require_non_negative("photon number", n_ph)?;
    if points.len() < 3 {
        return Err(Error::Domain(format!(
            "temperature dependence needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(t, q) in points {
        require_positive("temperature", t)?;
        require_positive("internal Q", q)?;
        if t >= tc {
            return Err(Error::domain(format!("temperature {t} K is not below T_c = {tc} K")));
        }
    }
    let t_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if t_max < 4.0 * t_min {
        return Err(Error::Domain(format!(
            "temperatures must span at least a factor 4, got {t_min} K to {t_max} K"
        )));
    }
    let delta0 = match opts.delta0 {
        Some(d) => require_positive("delta0", d)?,
        None => delta0_from_tc(tc)?,
    };
    let tls_shape = |t: f64| {
        thermal_saturation(f, t) / (1.0 + n_ph / opts.tls.n_c).powf(opts.tls.beta)
    };
    // Per-point basis functions: [1, TLS shape, σ1/σ2], all in 1e-6 loss units.
    let basis: Vec<[f64; 3]> = points
        .iter()
        .map(|&(t, _)| Ok([1.0, tls_shape(t), conductivity_ratio(f, t, tc, delta0, opts.mb_tolerance)? / LOSS_UNIT]))
        .collect::<Result<_>>()?;
    let y: Vec<f64> = points.iter().map(|p| 1.0 / (p.1 * LOSS_UNIT)).collect();
    let w: Vec<f64> = y.iter().map(|v| 1.0 / (v * v)).collect();

    let alpha0 = opts.fix_alpha.unwrap_or(0.01);
    let y_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let model_basis = basis.clone();
    let jac_basis = basis.clone();
    let mut problem = FitProblem::real(
        move |i, p| {
            let b = &model_basis[i as usize];
            p[0] * b[0] + p[1] * b[1] + p[2] * b[2]
        },
        vec![0.5 * y_min, opts.tls.f_delta0 / LOSS_UNIT, alpha0],
    )
    .jacobian(move |i, _p, out| out.copy_from_slice(&jac_basis[i as usize]))
    .names(["loss_other", "f_delta0", "alpha_kin"])
    .bound(0, 0.0, f64::INFINITY)
    .bound(1, 0.0, f64::INFINITY)
    .bound(2, 0.0, 1.0)
    .weights(w);
    if !opts.fit_tls {
        problem = problem.fix(1);
    }
    if opts.fix_alpha.is_some() {
        problem = problem.fix(2);
    }
    let data = Trace::real("qi_temperature", (0..y.len()).map(|i| i as f64).collect(), y);
    let result = fit(&problem, &data)?;
    let p = &result.params;
    let s = &result.param_uncertainties;
    Ok(TemperatureFit {
        q_other: 1.0 / (p[0] * LOSS_UNIT),
        q_other_uncertainty: s[0] / (p[0] * p[0] * LOSS_UNIT),
        tls: TlsParams {
            f_delta0: p[1] * LOSS_UNIT,
            ..opts.tls
        },
        f_delta0_uncertainty: s[1] * LOSS_UNIT,
        alpha_kin: p[2],
        alpha_kin_uncertainty: s[2],
        fit: result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonator::tls_loss;

    fn power_points(tls: &TlsParams, q_other: f64, t: f64, f: f64) -> Vec<(f64, f64)> {
        (0..16)
            .map(|k| {
                let n = 10f64.powf(-1.0 + 3.0 * k as f64 / 15.0);
                (n, 1.0 / (tls_loss(n, t, f, tls).unwrap() + 1.0 / q_other))
            })
            .collect()
    }

    #[test]
    fn power_recovery() {
        let tls = TlsParams {
            f_delta0: 1.1e-6,
            n_c: 10.0,
            beta: 0.5,
        };
        let r = fit_qi_vs_power(&power_points(&tls, 2e6, 0.02, 6e9), 0.02, 6e9).unwrap();
        assert_eq!(r.selected, PowerModel::Full);
        assert!((r.f_delta0 / 1.1e-6 - 1.0).abs() < 0.01, "{}", r.f_delta0);
        assert!((r.n_c / 10.0 - 1.0).abs() < 0.01);
        assert!((r.beta / 0.5 - 1.0).abs() < 0.01);
        assert!((r.q_other / 2e6 - 1.0).abs() < 0.01);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn flat_power_selects_constant() {
        let pts: Vec<_> = (0..10)
            .map(|k| (10f64.powf(k as f64 / 3.0), 1e6 * (1.0 + 0.002 * ((k * 7 % 5) as f64 - 2.0))))
            .collect();
        let r = fit_qi_vs_power(&pts, 0.02, 6e9).unwrap();
        assert_eq!(r.selected, PowerModel::ConstantOnly);
        assert!(r.f_delta0 - r.f_delta0_uncertainty <= 0.0);
        assert!((r.q_other / 1e6 - 1.0).abs() < 0.01);
    }

    #[test]
    fn narrow_power_range_warns() {
        let tls = TlsParams::default();
        let pts: Vec<_> = (0..6)
            .map(|k| {
                let n = 1.0 + k as f64;
                (n, 1.0 / (tls_loss(n, 0.02, 6e9, &tls).unwrap() + 1e-6))
            })
            .collect();
        let r = fit_qi_vs_power(&pts, 0.02, 6e9).unwrap();
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn temperature_constant_data() {
        let pts: Vec<_> = [0.5, 1.0, 2.0, 3.0, 4.0].iter().map(|&t| (t, 2e6)).collect();
        let opts = QiTempOptions {
            tls: TlsParams {
                f_delta0: 0.0,
                ..TlsParams::default()
            },
            fit_tls: false,
            fix_alpha: Some(0.0),
            ..QiTempOptions::default()
        };
        let r = fit_qi_vs_temperature(&pts, 6e9, 9.2, 1.0, &opts).unwrap();
        assert!((r.q_other / 2e6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn temperature_domain() {
        let pts = [(1.0, 1e6), (5.0, 1e6), (9.5, 1e6)];
        assert!(matches!(
            fit_qi_vs_temperature(&pts, 6e9, 9.2, 1.0, &QiTempOptions::default()),
            Err(Error::Domain(_))
        ));
        let pts = [(1.0, 1e6), (2.0, 1e6), (3.0, 1e6)];
        assert!(fit_qi_vs_temperature(&pts, 6e9, 9.2, 1.0, &QiTempOptions::default()).is_err());
    }
}
