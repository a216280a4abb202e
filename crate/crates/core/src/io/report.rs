//! The analysis report document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::error::{Error, Result};
use crate::film::FilmReport;
use crate::junction::{IvAnalysis, JunctionPrediction, WaferCalibration};
use crate::qubit::{CoherenceRecord, TransmonParams};
use crate::resonator::{PowerModel, ResonatorFit, TlsParams};

pub const SCHEMA_VERSION: u32 = 1;

/// `Some(v)` for finite values. Reports store uncertainties this way so that
/// unconstrained parameters survive a JSON round trip.
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilmRow {
    pub wafer_id: String,
    pub source: String,
    pub digest: String,
    pub film: FilmReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvRow {
    pub wafer_id: String,
    pub source: String,
    pub digest: String,
    pub analysis: IvAnalysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub wafer_id: String,
    /// The junction-area file.
    pub source: String,
    pub digest: String,
    pub calibration: WaferCalibration,
    pub specific_resistance_uncertainty: Option<f64>,
    pub dimension_bias_uncertainty: Option<f64>,
    /// `config` or `iv`.
    pub icrn_source: String,
    /// Digests of IV files that set the product.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iv_digests: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionRow {
    pub wafer_id: String,
    pub name: String,
    /// Digest of the calibration's area file.
    pub digest: String,
    /// m
    pub design_width: f64,
    pub design_height: f64,
    pub prediction: JunctionPrediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealRow {
    pub wafer_id: String,
    pub source: String,
    pub digest: String,
    pub alpha: f64,
    pub alpha_uncertainty: Option<f64>,
    /// s
    pub tau: f64,
    pub tau_uncertainty: Option<f64>,
    /// (s, J_c ratio)
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureRow {
    pub wafer_id: String,
    pub source: String,
    pub digest: String,
    /// Spacer process label from the file header.
    pub process: String,
    pub prefactor: f64,
    pub prefactor_uncertainty: Option<f64>,
    pub exponent: f64,
    /// None when the exponent was held fixed.
    pub exponent_uncertainty: Option<f64>,
    /// (Pa·s, A/m²)
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorRow {
    pub wafer_id: String,
    pub source: String,
    pub digest: String,
    pub fit: ResonatorFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiPowerRow {
    pub wafer_id: String,
    pub source: String,
    pub digest: String,
    /// K
    pub temperature: f64,
    /// Hz
    pub frequency: f64,
    pub selected: PowerModel,
    pub tls: TlsParams,
    pub f_delta0_uncertainty: Option<f64>,
    pub n_c_uncertainty: Option<f64>,
    pub beta_uncertainty: Option<f64>,
    pub q_other: f64,
    pub q_other_uncertainty: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// (photon number, Q_i)
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiTempRow {
    pub wafer_id: String,
    pub source: String,
    pub digest: String,
    /// Hz
    pub frequency: f64,
    /// K
    pub tc: f64,
    pub photon_number: f64,
    pub q_other: f64,
    pub q_other_uncertainty: Option<f64>,
    pub tls: TlsParams,
    pub f_delta0_uncertainty: Option<f64>,
    pub alpha_kin: f64,
    pub alpha_kin_uncertainty: Option<f64>,
    /// (K, Q_i)
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitRow {
    pub wafer_id: String,
    pub name: String,
    /// Digest of the T1 file.
    pub digest: String,
    pub t1_source: String,
    pub ramsey_digest: String,
    pub echo_digest: String,
    pub record: CoherenceRecord,
    pub t1_uncertainty: Option<f64>,
    pub t2_star_uncertainty: Option<f64>,
    pub t2_echo_uncertainty: Option<f64>,
    /// Hz
    pub ramsey_detuning: f64,
    pub transmon: Option<TransmonParams>,
}

/// Participation-ratio loss budget over the qubits with design parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub wafer_id: String,
    pub q_junction: f64,
    pub q_junction_uncertainty: Option<f64>,
    pub q_other: f64,
    pub q_other_uncertainty: Option<f64>,
    /// Covariance of (1/Q_J, 1/Q_0); None when not finite.
    pub loss_covariance: Option<[[f64; 2]; 2]>,
    /// (p_j, Q1) used in the fit
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ErrorRow {
    pub wafer_id: String,
    pub step: String,
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub toolkit_version: String,
    /// RFC 3339, UTC
    pub created_at: String,
    pub wafer_id: String,
    pub status: ReportStatus,
    pub film: Vec<FilmRow>,
    pub iv: Vec<IvRow>,
    pub calibrations: Vec<CalibrationRow>,
    pub junctions: Vec<JunctionRow>,
    pub anneal: Vec<AnnealRow>,
    pub exposure: Vec<ExposureRow>,
    pub resonators: Vec<ResonatorRow>,
    pub qi_power: Vec<QiPowerRow>,
    pub qi_temperature: Vec<QiTempRow>,
    pub qubits: Vec<QubitRow>,
    pub budget: Option<BudgetRow>,
    pub errors: Vec<ErrorRow>,
}

impl AnalysisReport {
    pub fn empty(wafer_id: impl Into<String>) -> Self {
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            toolkit_version: crate::TOOLKIT_VERSION.to_string(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            wafer_id: wafer_id.into(),
            status: ReportStatus::Complete,
            film: Vec::new(),
            iv: Vec::new(),
            calibrations: Vec::new(),
            junctions: Vec::new(),
            anneal: Vec::new(),
            exposure: Vec::new(),
            resonators: Vec::new(),
            qi_power: Vec::new(),
            qi_temperature: Vec::new(),
            qubits: Vec::new(),
            budget: None,
            errors: Vec::new(),
        }
    }

    /// Orders every row list by (wafer_id, digest) and sets the status from
    /// the error rows.
    pub fn normalize(&mut self) {
        fn by<T>(rows: &mut [T], key: impl Fn(&T) -> (&str, &str, &str)) {
            rows.sort_by(|a, b| key(a).cmp(&key(b)));
        }
        by(&mut self.film, |r| (&r.wafer_id, &r.digest, &r.source));
        by(&mut self.iv, |r| (&r.wafer_id, &r.digest, &r.source));
        by(&mut self.calibrations, |r| (&r.wafer_id, &r.digest, &r.source));
        by(&mut self.junctions, |r| (&r.wafer_id, &r.digest, &r.name));
        by(&mut self.anneal, |r| (&r.wafer_id, &r.digest, &r.source));
        by(&mut self.exposure, |r| (&r.wafer_id, &r.digest, &r.source));
        by(&mut self.resonators, |r| (&r.wafer_id, &r.digest, &r.source));
        by(&mut self.qi_power, |r| (&r.wafer_id, &r.digest, &r.source));
        by(&mut self.qi_temperature, |r| (&r.wafer_id, &r.digest, &r.source));
        by(&mut self.qubits, |r| (&r.wafer_id, &r.digest, &r.name));
        self.errors.sort();
        self.status = if self.errors.is_empty() {
            ReportStatus::Complete
        } else {
            ReportStatus::Partial
        };
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: AnalysisReport = serde_json::from_str(text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "report schema version {} is not supported (expected {SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Number of result rows, errors excluded.
    pub fn result_count(&self) -> usize {
        self.film.len()
            + self.iv.len()
            + self.calibrations.len()
            + self.junctions.len()
            + self.anneal.len()
            + self.exposure.len()
            + self.resonators.len()
            + self.qi_power.len()
            + self.qi_temperature.len()
            + self.qubits.len()
            + usize::from(self.budget.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let mut r = AnalysisReport::empty("W1");
        r.exposure.push(ExposureRow {
            wafer_id: "W1".into(),
            source: "e.csv".into(),
            digest: "ab".into(),
            process: "HDPCVD".into(),
            prefactor: 0.1 + 0.2,
            prefactor_uncertainty: finite(f64::INFINITY),
            exponent: -0.5,
            exponent_uncertainty: None,
            points: vec![(1.0 / 3.0, 2.0f64.sqrt() * 1e9)],
        });
        let a = r.to_json().unwrap();
        let back = AnalysisReport::from_json(&a).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json().unwrap(), a);
    }

    #[test]
    fn status_follows_errors() {
        let mut r = AnalysisReport::empty("W1");
        r.normalize();
        assert_eq!(r.status, ReportStatus::Complete);
        r.errors.push(ErrorRow {
            wafer_id: "W1".into(),
            step: "film".into(),
            source: "x".into(),
            message: "m".into(),
        });
        r.normalize();
        assert_eq!(r.status, ReportStatus::Partial);
    }

    #[test]
    fn schema_version_checked() {
        let mut r = AnalysisReport::empty("W1");
        r.schema_version = 99;
        let s = serde_json::to_string(&r).unwrap();
        assert!(matches!(AnalysisReport::from_json(&s), Err(Error::Schema(_))));
    }
}
