//! Transmon qubits: spectrum from E_J and E_C, parameters from a junction
//! design, coherence-trace fits, participation-ratio loss budgets and the
//! quasiparticle-limited quality factor.

mod budget;
mod coherence;
mod quasiparticle;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::junction::{predict_junction, JunctionGeometry, WaferCalibration};
use crate::physics::constants::{E_CHARGE, H};

pub use budget::{budget_band, loss_band, loss_budget_fit, loss_covariance, BandPoint, BudgetFit};
pub use coherence::{
    fit_echo, fit_ramsey, fit_t1, mean_q1, mean_q2_echo, mean_q2_star, CoherenceRecord, DecayFit, RamseyFit,
};
pub use quasiparticle::{
    q_vs_temperature_model, qp_onset_temperature, quasiparticle_q, QCurvePoint, QTemperatureParams,
};

/// Minimum E_J/E_C accepted by the asymptotic expansion.
const ASYMPTOTIC_MIN_RATIO: f64 = 5.0;
/// E_J/E_C at and above which a design counts as a transmon.
const TRANSMON_RATIO: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SpectrumMode {
    /// f01 = √(8E_JE_C) − E_C, anharmonicity −E_C.
    Asymptotic,
    /// Cooper-pair-box Hamiltonian diagonalized in the charge basis
    /// |n| ≤ `cutoff` at offset charge `n_g`.
    Exact { cutoff: usize, n_g: f64 },
}

impl SpectrumMode {
    pub fn exact() -> Self {
        SpectrumMode::Exact { cutoff: 20, n_g: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Hz
    pub f01: f64,
    /// Hz, f12 − f01
    pub anharmonicity: f64,
}

/// Lowest three levels of H = 4E_C(n − n_g)² − (E_J/2)Σ(|n⟩⟨n+1| + h.c.),
/// in the same units as the inputs.
fn charge_basis_levels(ej: f64, ec: f64, cutoff: usize, n_g: f64) -> Result<[f64; 3]> {
    if cutoff < 2 {
        return Err(Error::domain("charge cutoff must be at least 2"));
    }
    let dim = 2 * cutoff + 1;
    let mut h = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let n = k as f64 - cutoff as f64;
        h[(k, k)] = 4.0 * ec * (n - n_g).powi(2);
        if k + 1 < dim {
            h[(k, k + 1)] = -0.5 * ej;
            h[(k + 1, k)] = -0.5 * ej;
        }
    }
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok([e[0], e[1], e[2]])
}

/// Transition frequency and anharmonicity from E_J/h and E_C/h (Hz).
pub fn transmon_spectrum(ej_over_h: f64, ec_over_h: f64, mode: SpectrumMode) -> Result<Spectrum> {
    require_positive("E_J/h", ej_over_h)?;
    require_positive("E_C/h", ec_over_h)?;
    match mode {
        SpectrumMode::Asymptotic => {
            let ratio = ej_over_h / ec_over_h;
            if ratio < ASYMPTOTIC_MIN_RATIO {
                return Err(Error::Unsupported(format!(
                    "E_J/E_C = {ratio:.3} is below {ASYMPTOTIC_MIN_RATIO}; use the exact charge-basis mode"
                )));
            }
            Ok(Spectrum {
                f01: (8.0 * ej_over_h * ec_over_h).sqrt() - ec_over_h,
                anharmonicity: -ec_over_h,
            })
        }
        SpectrumMode::Exact { cutoff, n_g } => {
            if !n_g.is_finite() {
                return Err(Error::domain("offset charge must be finite"));
            }
            let [e0, e1, e2] = charge_basis_levels(ej_over_h, ec_over_h, cutoff, n_g)?;
            Ok(Spectrum {
                f01: e1 - e0,
                anharmonicity: (e2 - e1) - (e1 - e0),
            })
        }
    }
}

/// E_C/h = e²/(2C_Σh) in Hz.
pub fn charging_energy_hz(c_sigma: f64) -> Result<f64> {
    require_positive("C_sigma", c_sigma)?;
    Ok(E_CHARGE * E_CHARGE / (2.0 * c_sigma * H))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub ej_over_h: f64,
    pub ec_over_h: f64,
    pub f01: f64,
    pub anharmonicity: f64,
    /// F
    pub c_sigma: f64,
    /// F
    pub junction_capacitance: f64,
    /// c_j / C_Σ
    pub participation_pj: f64,
    /// E_J/E_C ≥ 20.
    pub transmon_regime: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    /// F/m²; 50 fF/µm² by default
    pub specific_capacitance: f64,
    pub mode: SpectrumMode,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            specific_capacitance: 50e-15 / 1e-12,
            mode: SpectrumMode::Asymptotic,
        }
    }
}

/// Transmon parameters for a junction of the given design on a calibrated
/// wafer, shunted to a total capacitance `c_sigma`.
pub fn transmon_from_design(
    c_sigma: f64,
    geometry: &JunctionGeometry,
    cal: &WaferCalibration,
    opts: &DesignOptions,
) -> Result<TransmonParams> {
    let ec = charging_energy_hz(c_sigma)?;
    let junction = predict_junction(geometry, cal)?;
    let cj = require_positive("specific capacitance", opts.specific_capacitance)? * junction.effective_area;
    if cj >= c_sigma {
        return Err(Error::Domain(format!(
            "junction capacitance {cj:.4e} F is not below the total capacitance {c_sigma:.4e} F"
        )));
    }
    let ej = junction.ej_over_h;
    let ratio = ej / ec;
    let mut warnings = Vec::new();
    let mode = match opts.mode {
        SpectrumMode::Asymptotic if ratio < ASYMPTOTIC_MIN_RATIO => {
            warnings.push(format!("E_J/E_C = {ratio:.2}; spectrum from exact diagonalization"));
            SpectrumMode::exact()
        }
        m => m,
    };
    let transmon_regime = ratio >= TRANSMON_RATIO;
    if !transmon_regime {
        warnings.push(format!("E_J/E_C = {ratio:.2} is outside the transmon regime (≥ {TRANSMON_RATIO})"));
    }
    let s = transmon_spectrum(ej, ec, mode)?;
    Ok(TransmonParams {
        ej_over_h: ej,
        ec_over_h: ec,
        f01: s.f01,
        anharmonicity: s.anharmonicity,
        c_sigma,
        junction_capacitance: cj,
        participation_pj: cj / c_sigma,
        transmon_regime,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::junction::SpacerProcess;

    #[test]
    fn asymptotic_values() {
        let s = transmon_spectrum(8.8e9, 140e6, SpectrumMode::Asymptotic).unwrap();
        assert!((s.f01 / 1e9 - 3.00).abs() < 0.01, "{}", s.f01);
        assert_eq!(s.anharmonicity, -140e6);
        assert!(transmon_spectrum(4e8, 1e8, SpectrumMode::Asymptotic).is_err());
        assert!(transmon_spectrum(4e8, 1e8, SpectrumMode::exact()).is_ok());
    }

    #[test]
    fn small_ec_limit() {
        let ej = 10e9;
        for ec in [1e6, 1e4, 1e2] {
            let s = transmon_spectrum(ej, ec, SpectrumMode::Asymptotic).unwrap();
            assert!((s.f01 - (8.0 * ej * ec).sqrt()).abs() <= ec);
        }
    }

    #[test]
    fn charge_dispersion_small() {
        let ec = 200e6;
        let a = transmon_spectrum(50.0 * ec, ec, SpectrumMode::Exact { cutoff: 20, n_g: 0.0 }).unwrap();
        let b = transmon_spectrum(50.0 * ec, ec, SpectrumMode::Exact { cutoff: 20, n_g: 0.5 }).unwrap();
        assert!((a.f01 / b.f01 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn cooper_pair_box_limit() {
        // E_J → 0 at n_g = 0: levels 4E_C·n², f01 = 4E_C.
        let s = transmon_spectrum(1e-3, 1e9, SpectrumMode::Exact { cutoff: 5, n_g: 0.0 }).unwrap();
        assert!((s.f01 / 4e9 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn design_charging_energy() {
        assert!((charging_energy_hz(138e-15).unwrap() / 1e6 - 140.0).abs() < 0.5);
    }

    #[test]
    fn design_chain() {
        let cal = WaferCalibration::new(1.5e-10, 160e-9, 1.5e-3, 100.0, SpacerProcess::Hdpcvd, 9.2).unwrap();
        let opts = DesignOptions::default();
        let small = JunctionGeometry::design(0.5e-6, 0.5e-6, &cal).unwrap();
        let large = JunctionGeometry::design(0.6e-6, 0.6e-6, &cal).unwrap();
        let a = transmon_from_design(138e-15, &small, &cal, &opts).unwrap();
        let b = transmon_from_design(138e-15, &large, &cal, &opts).unwrap();
        assert!(b.f01 > a.f01);
        assert!(a.participation_pj > 0.0 && a.participation_pj < 1.0);
        assert!((a.participation_pj - a.junction_capacitance / 138e-15).abs() < 1e-15);
    }
}
