//! Josephson junction parameters: Ambegaokar-Baratoff conversion, junction
//! size calibration, critical current density scaling with oxidation and
//! annealing, RCSJ current-voltage simulation, and design prediction.

mod fits;
mod iv;
mod rcsj;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::physics::constants::{H, K_B_EV, PHI0};
use crate::physics::delta0_from_tc;

pub use fits::{
    fit_annealing, fit_area_scaling, fit_exposure_groups, fit_exposure_law, annealing_ratio, AnnealFit,
    AreaFit, AreaSample, ExposureFit, ExposureGroupFit,
};
pub use iv::{analyze_iv, hysteresis_area, retrapping_current, switching_current, IvAnalysis};
pub use rcsj::{simulate_rcsj_iv, stewart_mccumber, IvRamp, IvSweep, IvTrace, Subgap, SweepDirection};

/// Ambegaokar-Baratoff I_cR_n in volts for a symmetric junction with gap
/// `delta` (eV) at temperature `t` (K).
pub fn ab_icrn(delta: f64, t: f64) -> Result<f64> {
    require_positive("delta", delta)?;
    require_non_negative("temperature", t)?;
    let zero_t = std::f64::consts::PI * delta / 2.0;
    if t == 0.0 {
        return Ok(zero_t);
    }
    Ok(zero_t * (delta / (2.0 * K_B_EV * t)).tanh())
}

pub fn ic_from_rn(rn: f64, icrn_product: f64) -> Result<f64> {
    require_positive("normal resistance", rn)?;
    require_positive("IcRn product", icrn_product)?;
    Ok(icrn_product / rn)
}

/// L_J = Φ0 / (2π I_c).
pub fn josephson_inductance(ic: f64) -> Result<f64> {
    require_positive("critical current", ic)?;
    Ok(PHI0 / (2.0 * std::f64::consts::PI * ic))
}

pub fn jc_from_calibration(specific_resistance: f64, icrn_product: f64) -> Result<f64> {
    require_positive("specific resistance", specific_resistance)?;
    require_positive("IcRn product", icrn_product)?;
    Ok(icrn_product / specific_resistance)
}

/// Design dimensions of a rectangular junction and the per-dimension
/// reduction between design and electrically effective size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionGeometry {
    /// m
    pub design_width: f64,
    /// m
    pub design_height: f64,
    /// m, subtracted from both width and height
    pub dimension_bias: f64,
}

impl JunctionGeometry {
    pub fn new(design_width: f64, design_height: f64, dimension_bias: f64) -> Result<Self> {
        let g = JunctionGeometry {
            design_width,
            design_height,
            dimension_bias,
        };
        g.effective_area()?;
        Ok(g)
    }

    /// Geometry using the bias stored in a wafer calibration.
    pub fn design(design_width: f64, design_height: f64, cal: &WaferCalibration) -> Result<Self> {
        Self::new(design_width, design_height, cal.dimension_bias)
    }

    pub fn effective_width(&self) -> Result<f64> {
        effective("width", self.design_width, self.dimension_bias)
    }

    pub fn effective_height(&self) -> Result<f64> {
        effective("height", self.design_height, self.dimension_bias)
    }

    pub fn effective_area(&self) -> Result<f64> {
        Ok(self.effective_width()? * self.effective_height()?)
    }
}

fn effective(name: &str, design: f64, bias: f64) -> Result<f64> {
    if !bias.is_finite() || bias < 0.0 {
        return Err(Error::Geometry(format!("dimension bias must be non-negative, got {bias} m")));
    }
    let e = design - bias;
    if !(design.is_finite() && e > 0.0) {
        return Err(Error::Geometry(format!(
            "effective {name} {e:.4e} m is not positive (design {design:.4e} m, bias {bias:.4e} m)"
        )));
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SpacerProcess {
    Pecvd,
    Hdpcvd,
}

impl std::str::FromStr for SpacerProcess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PECVD" => Ok(SpacerProcess::Pecvd),
            "HDPCVD" => Ok(SpacerProcess::Hdpcvd),
            other => Err(Error::Config(format!("unknown spacer process `{other}`"))),
        }
    }
}

impl std::fmt::Display for SpacerProcess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpacerProcess::Pecvd => "PECVD",
            SpacerProcess::Hdpcvd => "HDPCVD",
        })
    }
}

/// Junction process parameters for one wafer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaferCalibration {
    /// Ω·m², resistance times effective area
    pub specific_resistance: f64,
    /// m
    pub dimension_bias: f64,
    /// V, measured low-temperature I_cR_n
    pub icrn_product: f64,
    /// A/m²
    pub jc: f64,
    /// Pa·s
    pub oxidation_exposure: f64,
    pub spacer_process: SpacerProcess,
    /// K, electrode T_c
    pub tc: f64,
    /// Measured product over the zero-temperature Ambegaokar-Baratoff value.
    pub ab_suppression: f64,
}

impl WaferCalibration {
    /// Builds a calibration, deriving J_c and the suppression factor.
    pub fn new(
        specific_resistance: f64,
        dimension_bias: f64,
        icrn_product: f64,
        oxidation_exposure: f64,
        spacer_process: SpacerProcess,
        tc: f64,
    ) -> Result<Self> {
        let jc = jc_from_calibration(specific_resistance, icrn_product)?;
        require_non_negative("dimension bias", dimension_bias)?;
        require_non_negative("oxidation exposure", oxidation_exposure)?;
        let ab = ab_icrn(delta0_from_tc(tc)?, 0.0)?;
        Ok(WaferCalibration {
            specific_resistance,
            dimension_bias,
            icrn_product,
            jc,
            oxidation_exposure,
            spacer_process,
            tc,
            ab_suppression: icrn_product / ab,
        })
    }

    /// Checks `jc == icrn_product / specific_resistance`, e.g. after
    /// deserialization.
    pub fn validate(&self) -> Result<()> {
        let jc = jc_from_calibration(self.specific_resistance, self.icrn_product)?;
        if (self.jc - jc).abs() > 1e-9 * jc {
            return Err(Error::Domain(format!(
                "inconsistent calibration: jc {} A/m² but IcRn/ρs = {} A/m²",
                self.jc, jc
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionPrediction {
    /// m²
    pub effective_area: f64,
    /// Ω
    pub rn: f64,
    /// A
    pub ic: f64,
    /// H
    pub l_j: f64,
    /// Hz
    pub ej_over_h: f64,
}

pub fn predict_junction(geometry: &JunctionGeometry, cal: &WaferCalibration) -> Result<JunctionPrediction> {
    let area = geometry.effective_area()?;
    let rn = require_positive("specific resistance", cal.specific_resistance)? / area;
    let ic = ic_from_rn(rn, cal.icrn_product)?;
    let l_j = josephson_inductance(ic)?;
    Ok(JunctionPrediction {
        effective_area: area,
        rn,
        ic,
        l_j,
        ej_over_h: ic * PHI0 / (2.0 * std::f64::consts::PI * H),
    })
}

/// E_J in joules for a critical current.
pub fn josephson_energy(ic: f64) -> f64 {
    ic * PHI0 / (2.0 * std::f64::consts::PI)
}
