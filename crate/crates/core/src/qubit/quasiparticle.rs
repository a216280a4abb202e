//! Quasiparticle-limited qubit Q and its combination with a thermal bath.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::physics::constants::photon_energy_ev;
use crate::physics::quasiparticle_density;
use crate::resonator::thermal_saturation;

/// `Q_qp = (π/x_qp)·√(ħω/2Δ)`; infinite at T = 0.
pub fn quasiparticle_q(f_q: f64, t: f64, delta: f64) -> Result<f64> {
    require_positive("qubit frequency", f_q)?;
    require_non_negative("temperature", t)?;
    require_positive("delta", delta)?;
    if t == 0.0 {
        return Ok(f64::INFINITY);
    }
    let x = quasiparticle_density(t, delta)?;
    if x == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(std::f64::consts::PI / x * (photon_energy_ev(f_q) / (2.0 * delta)).sqrt())
}

/// Temperature at which Q_qp falls to `q_target`, by bisection in ln T.
pub fn qp_onset_temperature(f_q: f64, delta: f64, q_target: f64) -> Result<f64> {
    require_positive("target Q", q_target)?;
    let f = |t: f64| quasiparticle_q(f_q, t, delta).map(|q| q.ln() - q_target.ln());
    // Q_qp decreases monotonically with T; bracket between 1 mK and k_BT = Δ.
    let (mut lo, mut hi) = (1e-3f64.ln(), (delta / crate::physics::constants::K_B_EV).ln());
    if f(lo.exp())? < 0.0 {
        return Err(Error::domain(format!("Q_qp is already below {q_target} at 1 mK")));
    }
    if f(hi.exp())? > 0.0 {
        return Err(Error::domain(format!("Q_qp stays above {q_target} up to k_BT = Δ")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid.exp())? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QTemperatureParams {
    /// Q1 at zero temperature
    pub q1_zero: f64,
    /// Hz
    pub f_q: f64,
    /// eV
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QCurvePoint {
    pub temperature: f64,
    pub q_bath: f64,
    pub q_qp: f64,
    pub q_total: f64,
}

/// Model curves `1/Q1(T) = 1/Q_bath(T) + 1/Q_qp(T)` with
/// `Q_bath = Q1(0)·tanh(hf/2k_BT)`.
pub fn q_vs_temperature_model(temperatures: &[f64], params: &QTemperatureParams) -> Result<Vec<QCurvePoint>> {
    require_positive("Q1(0)", params.q1_zero)?;
    temperatures
        .iter()
        .map(|&t| {
            require_non_negative("temperature", t)?;
            let q_bath = params.q1_zero * thermal_saturation(params.f_q, t);
            let q_qp = quasiparticle_q(params.f_q, t, params.delta)?;
            Ok(QCurvePoint {
                temperature: t,
                q_bath,
                q_qp,
                q_total: if q_qp.is_infinite() { q_bath } else { 1.0 / (1.0 / q_bath + 1.0 / q_qp) },
            })
        })
        .collect()
}
