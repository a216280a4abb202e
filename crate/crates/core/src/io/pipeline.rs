//! Batch analysis of one wafer's trace files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{PipelineConfig, QubitConfig};
use super::report::*;
use super::tracefile::{parse_trace, TraceFile, TraceKind};
use crate::error::{Error, Result};
use crate::film::{analyze_film, FilmConfig};
use crate::junction::{
    analyze_iv, fit_annealing, fit_area_scaling, fit_exposure_law, predict_junction, AreaFit, JunctionGeometry,
    WaferCalibration,
};
use crate::qubit::{
    fit_echo, fit_ramsey, fit_t1, loss_budget_fit, loss_covariance, transmon_from_design, CoherenceRecord, DecayFit, DesignOptions,
    RamseyFit,
};
use crate::resonator::{fit_qi_vs_power, fit_qi_vs_temperature, fit_s21, photon_number, QiTempOptions};

/// A loaded input file.
struct Source {
    label: String,
    digest: String,
    file: TraceFile,
}

fn load(config: &PipelineConfig, path: &Path, kind: TraceKind) -> Result<Source> {
    let full = config.resolve(path);
    let bytes = std::fs::read(&full).map_err(|e| Error::io(&full, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Schema(format!("{} is not UTF-8 text", full.display())))?;
    Ok(Source {
        label: path.display().to_string(),
        digest: super::digest(&bytes),
        file: parse_trace(&text, Some(kind))?,
    })
}

impl Source {
    fn wafer(&self, config: &PipelineConfig) -> String {
        self.file.wafer_id().unwrap_or(&config.wafer_id).to_string()
    }
}

fn error_row(config: &PipelineConfig, step: &str, source: impl Into<String>, e: &Error) -> ErrorRow {
    ErrorRow {
        wafer_id: config.wafer_id.clone(),
        step: step.to_string(),
        source: source.into(),
        message: e.to_string(),
    }
}

struct QubitFits {
    index: usize,
    wafer_id: String,
    t1: (Source, DecayFit),
    ramsey: (Source, RamseyFit),
    echo: (Source, DecayFit),
}

enum Outcome {
    Area { wafer_id: String, source: String, digest: String, fit: AreaFit },
    Iv(IvRow),
    Anneal(AnnealRow),
    Exposure(ExposureRow),
    Resonator(ResonatorRow),
    QiPower(QiPowerRow),
    QiTemp(QiTempRow),
    Qubit(Box<QubitFits>),
    Failed(ErrorRow),
}

enum Task<'a> {
    Areas(&'a PathBuf),
    Iv(&'a PathBuf),
    Anneal(&'a PathBuf),
    Exposure(&'a PathBuf),
    S21(&'a PathBuf),
    QiPower(&'a PathBuf),
    QiTemp(&'a PathBuf),
    Qubit(usize, &'a QubitConfig),
}

impl Task<'_> {
    fn step(&self) -> &'static str {
        match self {
            Task::Areas(_) => "areas",
            Task::Iv(_) => "iv",
            Task::Anneal(_) => "anneal",
            Task::Exposure(_) => "exposure",
            Task::S21(_) => "s21",
            Task::QiPower(_) => "qi_power",
            Task::QiTemp(_) => "qi_temp",
            Task::Qubit(..) => "qubit",
        }
    }

    fn label(&self) -> String {
        match self {
            Task::Areas(p)
            | Task::Iv(p)
            | Task::Anneal(p)
            | Task::Exposure(p)
            | Task::S21(p)
            | Task::QiPower(p)
            | Task::QiTemp(p) => p.display().to_string(),
            Task::Qubit(_, q) => q.name.clone(),
        }
    }
}

fn require(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::UnmetDependency(format!("{what} is not available")))
}

fn run_task(config: &PipelineConfig, task: &Task, film_tc: Option<f64>) -> Result<Outcome> {
    let res = config.resonator.clone().unwrap_or_default();
    Ok(match *task {
        Task::Areas(p) => {
            let s = load(config, p, TraceKind::Areas)?;
            let fit = fit_area_scaling(&s.file.to_areas()?)?;
            Outcome::Area {
                wafer_id: s.wafer(config),
                source: s.label,
                digest: s.digest,
                fit,
            }
        }
        Task::Iv(p) => {
            let s = load(config, p, TraceKind::Iv)?;
            let (up, down) = s.file.to_iv()?;
            Outcome::Iv(IvRow {
                wafer_id: s.wafer(config),
                analysis: analyze_iv(&up, down.as_ref())?,
                source: s.label,
                digest: s.digest,
            })
        }
        Task::Anneal(p) => {
            let s = load(config, p, TraceKind::Anneal)?;
            let points = s.file.points()?;
            let f = fit_annealing(&points)?;
            Outcome::Anneal(AnnealRow {
                wafer_id: s.wafer(config),
                source: s.label,
                digest: s.digest,
                alpha: f.alpha,
                alpha_uncertainty: finite(f.alpha_uncertainty),
                tau: f.tau,
                tau_uncertainty: finite(f.tau_uncertainty),
                points,
            })
        }
        Task::Exposure(p) => {
            let s = load(config, p, TraceKind::Exposure)?;
            let points = s.file.points()?;
            let fix = config.junction.as_ref().and_then(|j| j.exposure_fix_exponent);
            let f = fit_exposure_law(&points, fix)?;
            Outcome::Exposure(ExposureRow {
                wafer_id: s.wafer(config),
                process: s.file.text.get("process").cloned().unwrap_or_else(|| "unspecified".into()),
                source: s.label,
                digest: s.digest,
                prefactor: f.prefactor,
                prefactor_uncertainty: finite(f.prefactor_uncertainty),
                exponent: f.exponent,
                exponent_uncertainty: if fix.is_some() { None } else { finite(f.exponent_uncertainty) },
                points,
            })
        }
        Task::S21(p) => {
            let s = load(config, p, TraceKind::S21)?;
            let trace = s.file.to_s21()?;
            let mut fit = fit_s21(&trace)?;
            if let Some(power) = trace.stimulus_power {
                fit.photon_number = Some(photon_number(&fit, power)?);
            }
            Outcome::Resonator(ResonatorRow {
                wafer_id: s.wafer(config),
                source: s.label,
                digest: s.digest,
                fit,
            })
        }
        Task::QiPower(p) => {
            let s = load(config, p, TraceKind::QiPower)?;
            let points = s.file.points()?;
            let t = require(s.file.value("temperature").or(res.temperature), "qi_power temperature")?;
            let f = require(s.file.value("frequency").or(res.frequency), "qi_power frequency")?;
            let pf = fit_qi_vs_power(&points, t, f)?;
            Outcome::QiPower(QiPowerRow {
                wafer_id: s.wafer(config),
                source: s.label,
                digest: s.digest,
                temperature: t,
                frequency: f,
                selected: pf.selected,
                tls: pf.tls(),
                f_delta0_uncertainty: finite(pf.f_delta0_uncertainty),
                n_c_uncertainty: finite(pf.n_c_uncertainty),
                beta_uncertainty: finite(pf.beta_uncertainty),
                q_other: pf.q_other,
                q_other_uncertainty: finite(pf.q_other_uncertainty),
                warnings: pf.warnings,
                points,
            })
        }
        Task::QiTemp(p) => {
            let s = load(config, p, TraceKind::QiTemp)?;
            let points = s.file.points()?;
            let f = require(s.file.value("frequency").or(res.frequency), "qi_temp frequency")?;
            let n_ph = require(s.file.value("photon_number").or(res.photon_number), "qi_temp photon number")?;
            let junction_tc = config.junction.as_ref().and_then(|j| j.tc);
            let tc = require(s.file.value("tc").or(film_tc).or(junction_tc), "T_c for qi_temp")?;
            let tf = fit_qi_vs_temperature(&points, f, tc, n_ph, &QiTempOptions::default())?;
            Outcome::QiTemp(QiTempRow {
                wafer_id: s.wafer(config),
                source: s.label,
                digest: s.digest,
                frequency: f,
                tc,
                photon_number: n_ph,
                q_other: tf.q_other,
                q_other_uncertainty: finite(tf.q_other_uncertainty),
                tls: tf.tls,
                f_delta0_uncertainty: finite(tf.f_delta0_uncertainty),
                alpha_kin: tf.alpha_kin,
                alpha_kin_uncertainty: finite(tf.alpha_kin_uncertainty),
                points,
            })
        }
        Task::Qubit(index, q) => {
            let t1 = load(config, &q.t1, TraceKind::Decay)?;
            let ramsey = load(config, &q.ramsey, TraceKind::Ramsey)?;
            let echo = load(config, &q.echo, TraceKind::Decay)?;
            let t1_fit = fit_t1(&t1.file.to_trace()?)?;
            let ramsey_fit = fit_ramsey(&ramsey.file.to_trace()?)?;
            let echo_fit = fit_echo(&echo.file.to_trace()?)?;
            Outcome::Qubit(Box::new(QubitFits {
                index,
                wafer_id: t1.wafer(config),
                t1: (t1, t1_fit),
                ramsey: (ramsey, ramsey_fit),
                echo: (echo, echo_fit),
            }))
        }
    })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Runs every configured analysis on a pool of `workers` threads
/// (the config value, else the number of CPUs).
///
/// Order: film, then the independent fits concurrently, then calibration,
/// junction predictions and qubit records. Step failures become error rows
/// and mark the report partial; only pool construction fails the call.
pub fn run_pipeline(config: &PipelineConfig, workers: Option<usize>) -> Result<AnalysisReport> {
    let n = workers
        .or(config.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| execute(config))
}

fn execute(config: &PipelineConfig) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::empty(config.wafer_id.clone());

    // Film.
    if let Some(film) = &config.film {
        let mut fc = FilmConfig::default();
        if let Some(b) = film.bulk_tc {
            fc.bulk_tc = b;
        }
        let rows: Vec<std::result::Result<FilmRow, ErrorRow>> = film
            .files
            .par_iter()
            .map(|p| {
                let run = || -> Result<FilmRow> {
                    let s = load(config, p, TraceKind::Rt)?;
                    Ok(FilmRow {
                        wafer_id: s.wafer(config),
                        film: analyze_film(&s.file.to_rt()?, &fc)?,
                        source: s.label,
                        digest: s.digest,
                    })
                };
                run().map_err(|e| error_row(config, "film", p.display().to_string(), &e))
            })
            .collect();
        for r in rows {
            match r {
                Ok(row) => report.film.push(row),
                Err(e) => report.errors.push(e),
            }
        }
    }
    report.film.sort_by(|a, b| (&a.wafer_id, &a.digest).cmp(&(&b.wafer_id, &b.digest)));
    let film_tc = mean(&report.film.iter().map(|r| r.film.tc).collect::<Vec<_>>());

    // Independent fits.
    let mut tasks = Vec::new();
    if let Some(j) = &config.junction {
        tasks.extend(j.areas.iter().map(Task::Areas));
        tasks.extend(j.iv.iter().map(Task::Iv));
        tasks.extend(j.anneal.iter().map(Task::Anneal));
        tasks.extend(j.exposure.iter().map(Task::Exposure));
    }
    if let Some(r) = &config.resonator {
        tasks.extend(r.s21.iter().map(Task::S21));
        tasks.extend(r.qi_power.iter().map(Task::QiPower));
        tasks.extend(r.qi_temp.iter().map(Task::QiTemp));
    }
    tasks.extend(config.qubits.iter().enumerate().map(|(i, q)| Task::Qubit(i, q)));
    let outcomes: Vec<Outcome> = tasks
        .par_iter()
        .map(|t| run_task(config, t, film_tc).unwrap_or_else(|e| Outcome::Failed(error_row(config, t.step(), t.label(), &e))))
        .collect();

    let mut areas = Vec::new();
    let mut qubit_fits = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Area {
                wafer_id,
                source,
                digest,
                fit,
            } => areas.push((wafer_id, source, digest, fit)),
            Outcome::Iv(r) => report.iv.push(r),
            Outcome::Anneal(r) => report.anneal.push(r),
            Outcome::Exposure(r) => report.exposure.push(r),
            Outcome::Resonator(r) => report.resonators.push(r),
            Outcome::QiPower(r) => report.qi_power.push(r),
            Outcome::QiTemp(r) => report.qi_temperature.push(r),
            Outcome::Qubit(q) => qubit_fits.push(*q),
            Outcome::Failed(e) => report.errors.push(e),
        }
    }
    report.iv.sort_by(|a, b| (&a.wafer_id, &a.digest).cmp(&(&b.wafer_id, &b.digest)));
    areas.sort_by(|a, b| (&a.0, &a.2).cmp(&(&b.0, &b.2)));

    // Calibration.
    if let Some(j) = &config.junction {
        let (icrn, icrn_source, iv_digests) = match j.icrn_product {
            Some(v) => (Some(v), "config", Vec::new()),
            None => (
                mean(&report.iv.iter().map(|r| r.analysis.icrn_product).collect::<Vec<_>>()),
                "iv",
                report.iv.iter().map(|r| r.digest.clone()).collect(),
            ),
        };
        let tc = j.tc.or(film_tc);
        for (wafer_id, source, digest, fit) in &areas {
            let build = || -> Result<WaferCalibration> {
                let icrn = require(icrn, "I_cR_n product (set icrn_product or provide IV files)")?;
                let tc = require(tc, "electrode T_c (set junction.tc or provide R(T) files)")?;
                WaferCalibration::new(
                    fit.specific_resistance,
                    fit.dimension_bias,
                    icrn,
                    j.oxidation_exposure,
                    j.spacer_process,
                    tc,
                )
            };
            match build() {
                Ok(calibration) => report.calibrations.push(CalibrationRow {
                    wafer_id: wafer_id.clone(),
                    source: source.clone(),
                    digest: digest.clone(),
                    calibration,
                    specific_resistance_uncertainty: finite(fit.specific_resistance_uncertainty),
                    dimension_bias_uncertainty: finite(fit.dimension_bias_uncertainty),
                    icrn_source: icrn_source.to_string(),
                    iv_digests: iv_digests.clone(),
                }),
                Err(e) => report.errors.push(error_row(config, "calibration", source.clone(), &e)),
            }
        }

        // Junction predictions.
        for cal in &report.calibrations {
            for d in &j.designs {
                let geom = JunctionGeometry::design(d.width, d.height, &cal.calibration);
                match geom.and_then(|g| predict_junction(&g, &cal.calibration)) {
                    Ok(prediction) => report.junctions.push(JunctionRow {
                        wafer_id: cal.wafer_id.clone(),
                        name: d.name.clone(),
                        digest: cal.digest.clone(),
                        design_width: d.width,
                        design_height: d.height,
                        prediction,
                    }),
                    Err(e) => report.errors.push(error_row(config, "junction", d.name.clone(), &e)),
                }
            }
        }
    }

    // Qubit records.
    let calibration = report.calibrations.first().map(|c| c.calibration);
    for q in qubit_fits {
        let qc = &config.qubits[q.index];
        match qubit_row(config, qc, &q, calibration.as_ref()) {
            Ok(row) => report.qubits.push(row),
            Err(e) => report.errors.push(error_row(config, "qubit", qc.name.clone(), &e)),
        }
    }
    report.qubits.sort_by(|a, b| (&a.wafer_id, &a.digest, &a.name).cmp(&(&b.wafer_id, &b.digest, &b.name)));
    let budget_points: Vec<(f64, f64)> = report
        .qubits
        .iter()
        .filter_map(|r| r.transmon.as_ref().map(|t| (t.participation_pj, r.record.q1)))
        .collect();
    let mut distinct: Vec<f64> = budget_points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() >= 2 {
        match loss_budget_fit(&budget_points) {
            Ok(b) => {
                report.budget = Some(BudgetRow {
                    wafer_id: config.wafer_id.clone(),
                    q_junction: b.q_junction,
                    q_junction_uncertainty: finite(b.q_junction_uncertainty),
                    q_other: b.q_other,
                    q_other_uncertainty: finite(b.q_other_uncertainty),
                    loss_covariance: Some(loss_covariance(&b)).filter(|c| c.iter().flatten().all(|v| v.is_finite())),
                    points: budget_points,
                })
            }
            Err(e) => report.errors.push(error_row(config, "budget", "qubits", &e)),
        }
    }

    report.normalize();
    Ok(report)
}

fn qubit_row(
    config: &PipelineConfig,
    qc: &QubitConfig,
    q: &QubitFits,
    calibration: Option<&WaferCalibration>,
) -> Result<QubitRow> {
    let transmon = match (&qc.design, qc.c_sigma) {
        (Some(name), Some(c_sigma)) => {
            let cal = calibration.ok_or_else(|| {
                Error::UnmetDependency(format!("qubit {} needs a wafer calibration for its design", qc.name))
            })?;
            let d = config
                .junction
                .as_ref()
                .and_then(|j| j.designs.iter().find(|d| &d.name == name))
                .ok_or_else(|| Error::Config(format!("unknown design `{name}`")))?;
            let geom = JunctionGeometry::design(d.width, d.height, cal)?;
            Some(transmon_from_design(c_sigma, &geom, cal, &DesignOptions::default())?)
        }
        _ => None,
    };
    let f_q = qc
        .frequency
        .or(q.t1.0.file.value("qubit_frequency"))
        .or(transmon.as_ref().map(|t| t.f01))
        .ok_or_else(|| Error::UnmetDependency(format!("no frequency for qubit {}", qc.name)))?;
    let (t1, ramsey, echo) = (&q.t1.1, &q.ramsey.1, &q.echo.1);
    let record = CoherenceRecord::new(
        f_q,
        t1.tau,
        ramsey.t2_star,
        echo.tau,
        q.t1.0.file.value("temperature"),
    )?;
    Ok(QubitRow {
        wafer_id: q.wafer_id.clone(),
        name: qc.name.clone(),
        digest: q.t1.0.digest.clone(),
        t1_source: q.t1.0.label.clone(),
        ramsey_digest: q.ramsey.0.digest.clone(),
        echo_digest: q.echo.0.digest.clone(),
        record,
        t1_uncertainty: finite(t1.tau_uncertainty),
        t2_star_uncertainty: finite(ramsey.t2_star_uncertainty),
        t2_echo_uncertainty: finite(echo.tau_uncertainty),
        ramsey_detuning: ramsey.detuning,
        transmon,
    })
}
