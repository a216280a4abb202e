//! Pipeline configuration, read from TOML.
//!
//! ```toml
//! wafer_id = "W1"
//! workers = 4
//!
//! [film]
//! files = ["rt.csv"]
//!
//! [junction]
//! areas = ["areas.csv"]
//! iv = ["iv.csv"]
//! oxidation_exposure = 100.0
//! spacer_process = "HDPCVD"
//!
//! [[junction.designs]]
//! name = "Q1"
//! width = 1.0e-6
//! height = 1.0e-6
//!
//! [resonator]
//! s21 = ["res1.csv"]
//!
//! [[qubits]]
//! name = "Q1"
//! design = "Q1"
//! c_sigma = 80e-15
//! t1 = "q1_t1.csv"
//! ramsey = "q1_ramsey.csv"
//! echo = "q1_echo.csv"
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::junction::SpacerProcess;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilmSection {
    pub files: Vec<PathBuf>,
    /// K
    pub bulk_tc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub name: String,
    /// m
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionSection {
    #[serde(default)]
    pub areas: Vec<PathBuf>,
    #[serde(default)]
    pub iv: Vec<PathBuf>,
    /// V; overrides the IV-derived product.
    pub icrn_product: Option<f64>,
    /// Pa·s
    pub oxidation_exposure: f64,
    pub spacer_process: SpacerProcess,
    /// K; defaults to the film T_c.
    pub tc: Option<f64>,
    #[serde(default)]
    pub anneal: Vec<PathBuf>,
    #[serde(default)]
    pub exposure: Vec<PathBuf>,
    /// Hold the exposure-law exponent at this value.
    pub exposure_fix_exponent: Option<f64>,
    #[serde(default)]
    pub designs: Vec<DesignConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSection {
    #[serde(default)]
    pub s21: Vec<PathBuf>,
    #[serde(default)]
    pub qi_power: Vec<PathBuf>,
    #[serde(default)]
    pub qi_temp: Vec<PathBuf>,
    /// Hz; used when a Q_i file header has no frequency.
    pub frequency: Option<f64>,
    /// K; used when a qi_power header has no temperature.
    pub temperature: Option<f64>,
    /// Used when a qi_temp header has no photon number.
    pub photon_number: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub name: String,
    /// Junction design name, for transmon parameters.
    pub design: Option<String>,
    /// F
    pub c_sigma: Option<f64>,
    pub t1: PathBuf,
    pub ramsey: PathBuf,
    pub echo: PathBuf,
    /// Hz; else the `qubit_frequency` header, else the predicted f01.
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub wafer_id: String,
    pub workers: Option<usize>,
    pub film: Option<FilmSection>,
    pub junction: Option<JunctionSection>,
    pub resonator: Option<ResonatorSection>,
    #[serde(default)]
    pub qubits: Vec<QubitConfig>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.base_dir = base_dir.to_path_buf();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.wafer_id.trim().is_empty() {
            return Err(Error::Config("wafer_id is empty".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if let Some(j) = &self.junction {
            let mut names: Vec<&str> = j.designs.iter().map(|d| d.name.as_str()).collect();
            names.sort_unstable();
            if names.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config("junction design names must be unique".into()));
            }
        }
        let mut names: Vec<&str> = self.qubits.iter().map(|q| q.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("qubit names must be unique".into()));
        }
        for q in &self.qubits {
            if let Some(d) = &q.design {
                let known = self
                    .junction
                    .as_ref()
                    .is_some_and(|j| j.designs.iter().any(|x| &x.name == d));
                if !known {
                    return Err(Error::Config(format!("qubit {} refers to unknown design `{d}`", q.name)));
                }
                if q.c_sigma.is_none() {
                    return Err(Error::Config(format!("qubit {} has a design but no c_sigma", q.name)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let c = PipelineConfig::from_toml(
            r#"
wafer_id = "W1"
[film]
files = ["rt.csv"]
[junction]
areas = ["a.csv"]
oxidation_exposure = 100.0
spacer_process = "HDPCVD"
[[junction.designs]]
name = "J1"
width = 1e-6
height = 1e-6
[[qubits]]
name = "Q1"
design = "J1"
c_sigma = 8e-14
t1 = "t1.csv"
ramsey = "r.csv"
echo = "e.csv"
"#,
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(c.resolve(Path::new("rt.csv")), PathBuf::from("/data/rt.csv"));
        assert_eq!(c.junction.unwrap().spacer_process, SpacerProcess::Hdpcvd);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = Path::new(".");
        assert!(matches!(PipelineConfig::from_toml("wafer_id = 3", base), Err(Error::Config(_))));
        assert!(matches!(
            PipelineConfig::from_toml("wafer_id = \"W\"\nbogus = 1", base),
            Err(Error::Config(_))
        ));
        let unknown_design = "wafer_id = \"W\"\n[[qubits]]\nname = \"Q\"\ndesign = \"X\"\nc_sigma = 1e-13\nt1 = \"a\"\nramsey = \"b\"\necho = \"c\"\n";
        assert!(matches!(PipelineConfig::from_toml(unknown_design, base), Err(Error::Config(_))));
    }
}
