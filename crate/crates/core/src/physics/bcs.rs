//! BCS gap relations and the thermal quasiparticle density.

use serde::{Deserialize, Serialize};

use super::constants::{BCS_RATIO, K_B_EV, MU0, HBAR, E_CHARGE};
use crate::error::{require_positive, require_non_negative, Error, Result};

/// Zero-temperature gap Δ0 = 1.76·k_B·T_c, in eV.
pub fn delta0_from_tc(tc: f64) -> Result<f64> {
    require_positive("tc", tc)?;
    Ok(BCS_RATIO * K_B_EV * tc)
}

/// Inverse of [`delta0_from_tc`].
pub fn tc_from_delta0(delta0: f64) -> Result<f64> {
    require_positive("delta0", delta0)?;
    Ok(delta0 / (BCS_RATIO * K_B_EV))
}

/// Sum-gap voltage (Δ1 + Δ2)/e of an SIS junction, in volts.
pub fn sum_gap_voltage(delta1: f64, delta2: f64) -> f64 {
    delta1 + delta2
}

/// Gap at finite temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    /// eV; zero in the normal state.
    pub delta: f64,
    pub normal_state: bool,
}

/// Δ(T) = Δ0·tanh(1.74·sqrt(T_c/T − 1)). At or above T_c the gap is zero and
/// the result is marked as normal state.
pub fn gap_vs_temperature(delta0: f64, tc: f64, t: f64) -> Result<Gap> {
    require_positive("delta0", delta0)?;
    require_positive("tc", tc)?;
    require_non_negative("t", t)?;
    if t >= tc {
        return Ok(Gap {
            delta: 0.0,
            normal_state: true,
        });
    }
    if t == 0.0 {
        return Ok(Gap {
            delta: delta0,
            normal_state: false,
        });
    }
    let delta = delta0 * (1.74 * (tc / t - 1.0).sqrt()).tanh();
    Ok(Gap {
        delta,
        normal_state: false,
    })
}

/// Thermal-equilibrium quasiparticle fraction
/// x_qp = sqrt(2π·k_B·T/Δ)·exp(−Δ/k_B·T).
pub fn quasiparticle_density(t: f64, delta: f64) -> Result<f64> {
    require_positive("t", t)?;
    require_positive("delta", delta)?;
    let kt = K_B_EV * t;
    Ok((2.0 * std::f64::consts::PI * kt / delta).sqrt() * (-delta / kt).exp())
}

/// Material parameters of a superconducting film.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperconductorParams {
    /// K
    pub tc: f64,
    /// eV
    pub delta0: f64,
    /// Ω·m
    pub rho0: f64,
    /// Ω per square
    pub sheet_resistance: f64,
    /// m
    pub thickness: f64,
    /// H per square
    pub kinetic_inductance: f64,
    /// m
    pub london_depth: f64,
}

impl SuperconductorParams {
    /// Derives gap, sheet resistance, kinetic inductance and London depth from
    /// T_c, the residual resistivity and the film thickness.
    pub fn from_film(tc: f64, rho0: f64, thickness: f64) -> Result<Self> {
        let delta0 = delta0_from_tc(tc)?;
        let k = kinetic_parameters(rho0, thickness, delta0)?;
        Ok(SuperconductorParams {
            tc,
            delta0,
            rho0,
            sheet_resistance: k.sheet_resistance,
            thickness,
            kinetic_inductance: k.kinetic_inductance,
            london_depth: k.london_depth,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParameters {
    /// Ω/□
    pub sheet_resistance: f64,
    /// H/□
    pub kinetic_inductance: f64,
    /// m
    pub london_depth: f64,
}

/// R_□ = ρ0/t, L_K = ħ·R_□/(π·Δ0), λ_L = sqrt(t·L_K/μ0).
pub fn kinetic_parameters(rho0: f64, thickness: f64, delta0: f64) -> Result<KineticParameters> {
    require_positive("rho0", rho0)?;
    require_positive("thickness", thickness)?;
    require_positive("delta0", delta0)?;
    let sheet_resistance = rho0 / thickness;
    let kinetic_inductance = HBAR * sheet_resistance / (std::f64::consts::PI * delta0 * E_CHARGE);
    let london_depth = (thickness * kinetic_inductance / MU0).sqrt();
    if !london_depth.is_finite() {
        return Err(Error::domain("kinetic parameters overflowed"));
    }
    Ok(KineticParameters {
        sheet_resistance,
        kinetic_inductance,
        london_depth,
    })
}
