//! Notch-type resonator analysis: complex S21 fitting, photon number, and
//! power- and temperature-dependent internal loss.

mod qi;
mod s21;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::physics::constants::{HBAR, K_B};

pub use qi::{
    fit_qi_vs_power, fit_qi_vs_temperature, qi_temperature_model, PowerFit, PowerModel, QiTempOptions,
    TemperatureFit,
};
pub use s21::{fit_s21, normalize_s21};

/// Transmission versus frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S21Trace {
    /// Hz, strictly increasing
    pub frequency: Vec<f64>,
    pub s21: Vec<Complex64>,
    /// W at the chip
    pub stimulus_power: Option<f64>,
    /// K
    pub temperature: Option<f64>,
}

impl S21Trace {
    pub fn new(frequency: Vec<f64>, s21: Vec<Complex64>) -> Result<Self> {
        if frequency.len() != s21.len() {
            return Err(Error::domain(format!(
                "{} frequencies but {} S21 values",
                frequency.len(),
                s21.len()
            )));
        }
        if let Some(w) = frequency.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!(
                "frequencies must be strictly increasing ({} Hz then {} Hz)",
                w[0], w[1]
            )));
        }
        if frequency.iter().any(|f| !(f.is_finite() && *f > 0.0)) || s21.iter().any(|z| !z.is_finite()) {
            return Err(Error::domain("S21 trace contains non-finite or non-positive values"));
        }
        Ok(S21Trace {
            frequency,
            s21,
            stimulus_power: None,
            temperature: None,
        })
    }

    pub fn len(&self) -> usize {
        self.frequency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequency.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorFit {
    /// Hz
    pub f0: f64,
    pub q_total: f64,
    pub q_internal: f64,
    /// |Q_e|
    pub q_external_mag: f64,
    /// rad
    pub phi: f64,
    pub photon_number: Option<f64>,
    pub f0_uncertainty: Option<f64>,
    pub q_total_uncertainty: Option<f64>,
    pub q_internal_uncertainty: Option<f64>,
    pub q_external_uncertainty: Option<f64>,
    pub phi_uncertainty: Option<f64>,
    /// A fitted parameter sits on its bound.
    #[serde(default)]
    pub at_bound: bool,
    pub reduced_chi_square: f64,
}

impl ResonatorFit {
    /// 1/Q_i + cos φ/|Q_e|, which must equal 1/Q.
    pub fn loaded_inverse_q(&self) -> f64 {
        1.0 / self.q_internal + self.phi.cos() / self.q_external_mag
    }
}

/// Loaded Q from internal Q, coupling magnitude and asymmetry angle.
pub fn loaded_q(q_internal: f64, q_external_mag: f64, phi: f64) -> f64 {
    1.0 / (1.0 / q_internal + phi.cos() / q_external_mag)
}

/// `S21 = 1 − (Q/|Q_e|)·e^{iφ} / (1 + 2iQ(f − f0)/f0)`.
pub fn s21_model(f: f64, f0: f64, q_internal: f64, q_external_mag: f64, phi: f64) -> Complex64 {
    let q = loaded_q(q_internal, q_external_mag, phi);
    let x = 2.0 * q * (f - f0) / f0;
    Complex64::new(1.0, 0.0) - Complex64::from_polar(q / q_external_mag, phi) / Complex64::new(1.0, x)
}

/// Mean photon number `2Q²P/(ħω0²|Q_e|)` of a side-coupled resonator.
pub fn photon_number(fit: &ResonatorFit, power_at_chip: f64) -> Result<f64> {
    require_positive("power at chip", power_at_chip)?;
    require_positive("f0", fit.f0)?;
    require_positive("q_total", fit.q_total)?;
    require_positive("q_external_mag", fit.q_external_mag)?;
    let w0 = 2.0 * std::f64::consts::PI * fit.f0;
    Ok(2.0 * fit.q_total * fit.q_total * power_at_chip / (HBAR * w0 * w0 * fit.q_external_mag))
}

/// Two-level-system loss parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    /// Filling factor times intrinsic loss tangent.
    pub f_delta0: f64,
    /// Critical photon number.
    pub n_c: f64,
    pub beta: f64,
}

impl Default for TlsParams {
    fn default() -> Self {
        TlsParams {
            f_delta0: 1e-6,
            n_c: 10.0,
            beta: 0.5,
        }
    }
}

/// tanh(hf/2k_BT), equal to 1 at T = 0.
pub(crate) fn thermal_saturation(f: f64, t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (HBAR * 2.0 * std::f64::consts::PI * f / (2.0 * K_B * t)).tanh()
    }
}

/// `1/Q_TLS = Fδ0·tanh(ħω/2k_BT)/(1 + n/n_c)^β`.
pub fn tls_loss(n_ph: f64, t: f64, f: f64, params: &TlsParams) -> Result<f64> {
    require_non_negative("photon number", n_ph)?;
    require_non_negative("temperature", t)?;
    require_positive("frequency", f)?;
    require_non_negative("F·δ0", params.f_delta0)?;
    require_positive("n_c", params.n_c)?;
    require_non_negative("beta", params.beta)?;
    Ok(params.f_delta0 * thermal_saturation(f, t) / (1.0 + n_ph / params.n_c).powf(params.beta))
}
