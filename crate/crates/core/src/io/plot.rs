//! Column-oriented series files for external plotting.
//!
//! Each file holds one series with a `#` header (figure, series, role, axis
//! labels, units and scales) followed by a column row and the data.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::report::AnalysisReport;
use super::write_atomic;
use crate::error::{Error, Result};
use crate::qubit::loss_band;
use crate::resonator::{qi_temperature_model, tls_loss};
use crate::physics::MbTolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// J_c against oxygen exposure per spacer process, with E^-1/2 guides.
    JcVsExposure,
    /// Q1 against qubit frequency.
    Q1VsFrequency,
    /// Q1 against junction participation, with the budget-model band.
    Q1VsPj,
    /// Resonator Q_i against temperature with the composite model.
    QiVsTemperature,
    /// Resonator Q_i against photon number with the TLS model.
    QiVsPower,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::JcVsExposure,
        FigureId::Q1VsFrequency,
        FigureId::Q1VsPj,
        FigureId::QiVsTemperature,
        FigureId::QiVsPower,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::JcVsExposure => "jc_vs_exposure",
            FigureId::Q1VsFrequency => "q1_vs_frequency",
            FigureId::Q1VsPj => "q1_vs_pj",
            FigureId::QiVsTemperature => "qi_vs_temperature",
            FigureId::QiVsPower => "qi_vs_power",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = FigureId::ALL.iter().map(|f| f.as_str()).collect();
                Error::Config(format!("unknown figure `{s}` (known: {})", known.join(", ")))
            })
    }
}

struct Axis {
    label: &'static str,
    column: &'static str,
    unit: &'static str,
    log: bool,
}

struct Series {
    name: String,
    role: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Series {
    fn xy(name: impl Into<String>, role: &'static str, x: &Axis, y: &Axis, points: &[(f64, f64)]) -> Self {
        Series {
            name: name.into(),
            role,
            columns: vec![x.column, y.column],
            rows: points.iter().map(|&(a, b)| vec![a, b]).collect(),
        }
    }
}

fn slug(s: &str) -> String {
    let stem = Path::new(s).file_stem().map_or(s.into(), |x| x.to_string_lossy().into_owned());
    stem.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

fn unmet(figure: FigureId, what: &str) -> Error {
    Error::UnmetDependency(format!("figure {figure} needs {what} in the report"))
}

const GRID: usize = 60;

fn build(report: &AnalysisReport, figure: FigureId) -> Result<(Axis, Axis, Vec<Series>)> {
    let mut series = Vec::new();
    let axes = match figure {
        FigureId::JcVsExposure => {
            if report.exposure.is_empty() {
                return Err(unmet(figure, "exposure fits"));
            }
            let x = Axis { label: "oxygen exposure", column: "exposure", unit: "Pa_s", log: true };
            let y = Axis { label: "critical current density", column: "jc", unit: "A_m2", log: true };
            for row in &report.exposure {
                series.push(Series::xy(row.process.clone(), "data", &x, &y, &row.points));
                // Least-squares prefactor of J = K·E^-1/2 in log space.
                let n = row.points.len() as f64;
                let ln_k = row.points.iter().map(|&(e, j)| j.ln() + 0.5 * e.ln()).sum::<f64>() / n;
                let (lo, hi) = range(row.points.iter().map(|p| p.0));
                let guide: Vec<(f64, f64)> = log_grid(lo, hi, GRID)
                    .into_iter()
                    .map(|e| (e, (ln_k - 0.5 * e.ln()).exp()))
                    .collect();
                series.push(Series::xy(format!("{}_guide", row.process), "guide", &x, &y, &guide));
            }
            (x, y)
        }
        FigureId::Q1VsFrequency => {
            if report.qubits.is_empty() {
                return Err(unmet(figure, "qubit records"));
            }
            let x = Axis { label: "qubit frequency", column: "f_q", unit: "Hz", log: false };
            let y = Axis { label: "qubit quality factor Q1", column: "q1", unit: "", log: true };
            let pts: Vec<(f64, f64)> = report.qubits.iter().map(|q| (q.record.f_q, q.record.q1)).collect();
            series.push(Series::xy("qubits", "data", &x, &y, &pts));
            (x, y)
        }
        FigureId::Q1VsPj => {
            let budget = report.budget.as_ref().ok_or_else(|| unmet(figure, "a loss-budget fit"))?;
            let x = Axis { label: "junction participation ratio", column: "p_j", unit: "", log: true };
            let y = Axis { label: "qubit quality factor Q1", column: "q1", unit: "", log: true };
            series.push(Series::xy("qubits", "data", &x, &y, &budget.points));
            let (lo, hi) = range(budget.points.iter().map(|p| p.0));
            let grid = log_grid(lo / 2.0, (hi * 2.0).min(1.0), GRID);
            let zero = [[0.0; 2]; 2];
            let cov = budget.loss_covariance.unwrap_or(zero);
            let band = loss_band(1.0 / budget.q_junction, 1.0 / budget.q_other, &cov, &grid);
            series.push(Series {
                name: "budget_model".into(),
                role: "model_band",
                columns: vec!["p_j", "q1", "q1_low", "q1_high"],
                rows: band
                    .iter()
                    .map(|b| vec![b.p_j, b.q1, b.q1_low, b.q1_high])
                    .collect(),
            });
            (x, y)
        }
        FigureId::QiVsTemperature => {
            if report.qi_temperature.is_empty() {
                return Err(unmet(figure, "Q_i(T) fits"));
            }
            let x = Axis { label: "temperature", column: "temperature", unit: "K", log: false };
            let y = Axis { label: "internal quality factor", column: "qi", unit: "", log: true };
            for row in &report.qi_temperature {
                let name = slug(&row.source);
                series.push(Series::xy(name.clone(), "data", &x, &y, &row.points));
                let (lo, hi) = range(row.points.iter().map(|p| p.0));
                let model = lin_grid(lo, hi.min(0.99 * row.tc), GRID)
                    .into_iter()
                    .map(|t| {
                        let q = qi_temperature_model(
                            t,
                            row.frequency,
                            row.tc,
                            row.photon_number,
                            row.q_other,
                            &row.tls,
                            row.alpha_kin,
                            MbTolerance::default(),
                        )?;
                        Ok((t, q))
                    })
                    .collect::<Result<Vec<_>>>()?;
                series.push(Series::xy(format!("{name}_model"), "model", &x, &y, &model));
            }
            (x, y)
        }
        FigureId::QiVsPower => {
            if report.qi_power.is_empty() {
                return Err(unmet(figure, "Q_i(n) fits"));
            }
            let x = Axis { label: "photon number", column: "photon_number", unit: "", log: true };
            let y = Axis { label: "internal quality factor", column: "qi", unit: "", log: true };
            for row in &report.qi_power {
                let name = slug(&row.source);
                series.push(Series::xy(name.clone(), "data", &x, &y, &row.points));
                let (lo, hi) = range(row.points.iter().map(|p| p.0));
                let model = log_grid(lo, hi, GRID)
                    .into_iter()
                    .map(|n| {
                        let loss = tls_loss(n, row.temperature, row.frequency, &row.tls)? + 1.0 / row.q_other;
                        Ok((n, 1.0 / loss))
                    })
                    .collect::<Result<Vec<_>>>()?;
                series.push(Series::xy(format!("{name}_model"), "model", &x, &y, &model));
            }
            (x, y)
        }
    };
    Ok((axes.0, axes.1, series))
}

fn render(figure: FigureId, x: &Axis, y: &Axis, s: &Series) -> String {
    let mut out = String::new();
    let scale = |log: bool| if log { "log" } else { "linear" };
    let _ = writeln!(out, "# figure: {figure}");
    let _ = writeln!(out, "# series: {}", s.name);
    let _ = writeln!(out, "# role: {}", s.role);
    let _ = writeln!(out, "# x_label: {}", x.label);
    let _ = writeln!(out, "# x_unit: {}", x.unit);
    let _ = writeln!(out, "# x_scale: {}", scale(x.log));
    let _ = writeln!(out, "# y_label: {}", y.label);
    let _ = writeln!(out, "# y_unit: {}", y.unit);
    let _ = writeln!(out, "# y_scale: {}", scale(y.log));
    let _ = writeln!(out, "{}", s.columns.join(","));
    for r in &s.rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Writes one file per series of `figure` into `out_dir`, returning the
/// paths in write order.
pub fn emit_plot_data(report: &AnalysisReport, figure: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (x, y, series) = build(report, figure)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut paths = Vec::new();
    for s in &series {
        let path = out_dir.join(format!("{figure}__{}.csv", slug(&s.name)));
        write_atomic(&path, render(figure, &x, &y, s).as_bytes())?;
        paths.push(path);
    }
    Ok(paths)
}
