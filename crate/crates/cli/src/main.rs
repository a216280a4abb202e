//! `scqkit` command-line front end.
//!
//! Single-file verbs print a JSON result to stdout, or write it to `--out`.
//! `pipeline run` exits 0 on a complete report, 2 on a partial one and 1 on
//! a configuration error.

// `!(x > y)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use scqkit::film::{analyze_film, FilmConfig};
use scqkit::io::{self, emit_plot_data, ingest, run_pipeline, AnalysisReport, FigureId, PipelineConfig, ReportStatus, TraceKind};
use scqkit::junction::{
    analyze_iv, fit_annealing, fit_area_scaling, fit_exposure_groups, fit_exposure_law, jc_from_calibration,
    simulate_rcsj_iv, stewart_mccumber, IvRamp, JunctionGeometry, Subgap,
};
use scqkit::physics::delta0_from_tc;
use scqkit::qubit::{
    budget_band, fit_echo, fit_ramsey, fit_t1, loss_budget_fit, q_vs_temperature_model, transmon_from_design,
    transmon_spectrum, DesignOptions, QTemperatureParams, SpectrumMode,
};
use scqkit::resonator::{fit_qi_vs_power, fit_qi_vs_temperature, fit_s21, photon_number, QiTempOptions};
use scqkit::synth::write_bundle;

#[derive(Parser, Debug)]
#[command(name = "scqkit", version, about = "Superconducting junction, film, resonator and qubit analysis")]
struct Cli {
    /// Input file(s)
    #[arg(long = "in", global = true, value_name = "PATH")]
    inputs: Vec<PathBuf>,
    /// Output file or directory
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Pipeline configuration (TOML)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for synthetic data
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the pipeline
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// T_c, RRR, resistivity and kinetic inductance from an R(T) trace
    Film {
        /// K
        #[arg(long)]
        bulk_tc: Option<f64>,
    },
    /// Junction calibration, prediction and IV simulation
    #[command(subcommand)]
    Junction(JunctionCmd),
    /// S21 and internal quality factor fits
    #[command(subcommand)]
    Resonator(ResonatorCmd),
    /// Transmon parameters, coherence fits and loss budget
    #[command(subcommand)]
    Qubit(QubitCmd),
    /// Batch analysis of a wafer configuration
    #[command(subcommand)]
    Pipeline(PipelineCmd),
    /// Figure data from a report
    #[command(subcommand)]
    Plot(PlotCmd),
    /// Seeded synthetic data
    #[command(subcommand)]
    Synth(SynthCmd),
}

#[derive(Subcommand, Debug)]
enum JunctionCmd {
    /// Specific resistance and dimension bias from resistance versus area
    FitArea,
    /// Critical current density from specific resistance and I_cR_n
    Jc {
        /// Ω·m²
        #[arg(long)]
        specific_resistance: f64,
        /// V
        #[arg(long)]
        icrn: f64,
    },
    /// Saturating-exponential annealing fit
    AnnealFit,
    /// J_c = K·E^p fit; several files share one exponent
    ExposureFit {
        #[arg(long, allow_hyphen_values = true)]
        fix_exponent: Option<f64>,
    },
    /// RCSJ IV simulation; writes the sweep as an iv trace to --out
    IvSim(IvSimArgs),
}

#[derive(Args, Debug)]
struct IvSimArgs {
    /// A
    #[arg(long)]
    ic: f64,
    /// Ω
    #[arg(long)]
    rn: f64,
    /// F
    #[arg(long, conflicts_with = "beta_c")]
    capacitance: Option<f64>,
    /// Stewart-McCumber parameter, instead of a capacitance
    #[arg(long)]
    beta_c: Option<f64>,
    /// Largest bias in units of I_c
    #[arg(long, default_value_t = 3.0)]
    i_max: f64,
    #[arg(long, default_value_t = 300)]
    steps: usize,
    /// Up sweep only
    #[arg(long)]
    up_only: bool,
    /// Drop the subgap branch (pure RCSJ)
    #[arg(long)]
    no_subgap: bool,
    /// Ω, subgap resistance
    #[arg(long)]
    subgap_resistance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum ResonatorCmd {
    /// Notch S21 fit
    Fit,
    /// Q_i versus photon number: TLS plus constant loss
    QiPower {
        /// K; else the file header
        #[arg(long)]
        temperature: Option<f64>,
        /// Hz; else the file header
        #[arg(long)]
        frequency: Option<f64>,
    },
    /// Q_i versus temperature: constant, TLS and conduction loss
    QiTemp {
        #[arg(long)]
        frequency: Option<f64>,
        /// K; else the file header
        #[arg(long)]
        tc: Option<f64>,
        #[arg(long)]
        photon_number: Option<f64>,
        /// Hold α_kin at this value
        #[arg(long)]
        fix_alpha: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum QubitCmd {
    /// Transmon parameters from E_J and E_C, or from a design and a report
    Params(ParamsArgs),
    /// Energy relaxation fit
    FitT1,
    /// Ramsey fringe fit
    FitRamsey,
    /// Echo decay fit
    FitEcho,
    /// Participation-ratio loss budget over the qubits of a report
    Budget,
    /// Quasiparticle-limited Q1 versus temperature
    QpCurve(QpCurveArgs),
}

#[derive(Args, Debug)]
struct ParamsArgs {
    /// Hz
    #[arg(long, requires = "ec_over_h")]
    ej_over_h: Option<f64>,
    /// Hz
    #[arg(long)]
    ec_over_h: Option<f64>,
    /// F; with --width/--height and a report given by --in
    #[arg(long)]
    c_sigma: Option<f64>,
    /// m
    #[arg(long)]
    width: Option<f64>,
    /// m
    #[arg(long)]
    height: Option<f64>,
    /// Charge-basis diagonalization instead of the asymptotic formulas
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct QpCurveArgs {
    /// Low-temperature Q1
    #[arg(long)]
    q1_zero: f64,
    /// Hz
    #[arg(long)]
    f_q: f64,
    /// K, gap from the BCS ratio
    #[arg(long, default_value_t = 1.2)]
    tc: f64,
    /// K
    #[arg(long, default_value_t = 0.01)]
    t_min: f64,
    /// K
    #[arg(long, default_value_t = 0.3)]
    t_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
}

#[derive(Subcommand, Debug)]
enum PipelineCmd {
    /// Run every analysis in --config and write the report to --out
    Run,
}

#[derive(Subcommand, Debug)]
enum PlotCmd {
    /// Write the series files of one figure into the --out directory
    Emit {
        /// jc_vs_exposure, q1_vs_frequency, q1_vs_pj, qi_vs_temperature or qi_vs_power
        #[arg(long)]
        figure: String,
    },
}

#[derive(Subcommand, Debug)]
enum SynthCmd {
    /// Write a synthetic wafer bundle with config.toml and truth.json into --out
    Bundle,
}

fn single_input(cli: &Cli) -> Result<&Path> {
    match cli.inputs.as_slice() {
        [one] => Ok(one),
        [] => bail!("this command needs one --in file"),
        _ => bail!("this command takes exactly one --in file"),
    }
}

fn emit(cli: &Cli, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match &cli.out {
        Some(p) => io::write_atomic(p, text.as_bytes()).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(cli: &Cli, kind: TraceKind) -> Result<io::TraceFile> {
    let p = single_input(cli)?;
    ingest(p, Some(kind)).with_context(|| format!("reading {}", p.display()))
}

fn load_report(cli: &Cli) -> Result<AnalysisReport> {
    let p = single_input(cli)?;
    AnalysisReport::load(p).with_context(|| format!("reading report {}", p.display()))
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    cli.out.as_deref().ok_or_else(|| anyhow!("this command needs --out"))
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Film { bulk_tc } => {
            let t = load(cli, TraceKind::Rt)?;
            let mut fc = FilmConfig::default();
            if let Some(b) = bulk_tc {
                fc.bulk_tc = *b;
            }
            emit(cli, &serde_json::to_value(analyze_film(&t.to_rt()?, &fc)?)?)?;
        }
        Command::Junction(j) => junction(cli, j)?,
        Command::Resonator(r) => resonator(cli, r)?,
        Command::Qubit(q) => qubit(cli, q)?,
        Command::Pipeline(PipelineCmd::Run) => return pipeline(cli),
        Command::Plot(PlotCmd::Emit { figure }) => {
            let figure: FigureId = figure.parse()?;
            let report = load_report(cli)?;
            let paths = emit_plot_data(&report, figure, out_dir(cli)?)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::Synth(SynthCmd::Bundle) => {
            let dir = out_dir(cli)?;
            let truth = write_bundle(dir, cli.seed)?;
            println!("wrote bundle {} to {}", truth.wafer_id, dir.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn pipeline(cli: &Cli) -> Result<ExitCode> {
    let Some(cfg_path) = &cli.config else {
        eprintln!("error: pipeline run needs --config");
        return Ok(ExitCode::from(1));
    };
    let config = match PipelineConfig::load(cfg_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let report = match run_pipeline(&config, cli.workers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    match &cli.out {
        Some(p) => report.save(p).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", report.to_json()?),
    }
    for e in &report.errors {
        eprintln!("{} [{}] {}: {}", e.wafer_id, e.step, e.source, e.message);
    }
    Ok(match report.status {
        ReportStatus::Complete => ExitCode::SUCCESS,
        ReportStatus::Partial => ExitCode::from(2),
    })
}

fn junction(cli: &Cli, cmd: &JunctionCmd) -> Result<()> {
    match cmd {
        JunctionCmd::FitArea => {
            let f = fit_area_scaling(&load(cli, TraceKind::Areas)?.to_areas()?)?;
            emit(
                cli,
                &json!({
                    "specific_resistance": f.specific_resistance,
                    "specific_resistance_uncertainty": f.specific_resistance_uncertainty,
                    "dimension_bias": f.dimension_bias,
                    "dimension_bias_uncertainty": f.dimension_bias_uncertainty,
                    "at_bound": f.fit.any_at_bound(),
                    "reduced_chi_square": f.fit.reduced_chi_square(),
                }),
            )
        }
        JunctionCmd::Jc {
            specific_resistance,
            icrn,
        } => emit(cli, &json!({ "jc": jc_from_calibration(*specific_resistance, *icrn)? })),
        JunctionCmd::AnnealFit => {
            let f = fit_annealing(&load(cli, TraceKind::Anneal)?.points()?)?;
            emit(
                cli,
                &json!({
                    "alpha": f.alpha,
                    "alpha_uncertainty": f.alpha_uncertainty,
                    "tau": f.tau,
                    "tau_uncertainty": f.tau_uncertainty,
                }),
            )
        }
        JunctionCmd::ExposureFit { fix_exponent } => {
            if cli.inputs.is_empty() {
                bail!("exposure-fit needs at least one --in file");
            }
            let mut groups = Vec::new();
            for (k, p) in cli.inputs.iter().enumerate() {
                let t = ingest(p, Some(TraceKind::Exposure)).with_context(|| format!("reading {}", p.display()))?;
                let label = t.text.get("process").cloned().unwrap_or_else(|| format!("group{k}"));
                groups.push((label, t.points()?));
            }
            if groups.len() == 1 {
                let f = fit_exposure_law(&groups[0].1, *fix_exponent)?;
                emit(
                    cli,
                    &json!({
                        "prefactor": f.prefactor,
                        "prefactor_uncertainty": f.prefactor_uncertainty,
                        "exponent": f.exponent,
                        "exponent_uncertainty": f.exponent_uncertainty,
                    }),
                )
            } else {
                let f = fit_exposure_groups(&groups, *fix_exponent)?;
                let prefactors: Vec<Value> = f
                    .prefactors
                    .iter()
                    .map(|(l, k, s)| json!({ "group": l, "prefactor": k, "prefactor_uncertainty": s }))
                    .collect();
                emit(
                    cli,
                    &json!({
                        "exponent": f.exponent,
                        "exponent_uncertainty": f.exponent_uncertainty,
                        "prefactors": prefactors,
                    }),
                )
            }
        }
        JunctionCmd::IvSim(a) => {
            let c = match (a.capacitance, a.beta_c) {
                (Some(c), _) => c,
                (None, Some(b)) => b * scqkit::physics::constants::PHI0 / (std::f64::consts::TAU * a.ic * a.rn * a.rn),
                (None, None) => bail!("iv-sim needs --capacitance or --beta-c"),
            };
            let subgap = (!a.no_subgap).then(|| {
                let mut s = Subgap::default();
                if let Some(r) = a.subgap_resistance {
                    s.resistance = r;
                }
                s
            });
            let ramp = IvRamp {
                i_max: a.i_max * a.ic,
                n_steps: a.steps,
                both_directions: !a.up_only,
            };
            let sweep = simulate_rcsj_iv(a.ic, a.rn, c, &ramp, subgap.as_ref())?;
            if let Some(p) = &cli.out {
                scqkit::synth::iv_file(&sweep)?.write(p)?;
            }
            let analysis = analyze_iv(&sweep.up, sweep.down.as_ref())?;
            let summary = json!({
                "beta_c": stewart_mccumber(a.ic, a.rn, c),
                "switching_current": analysis.switching_current,
                "retrapping_current": analysis.retrapping_current,
                "normal_resistance": analysis.normal_resistance,
                "under_resolved": sweep.up.under_resolved,
                "warnings": sweep.warnings,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
    }
}

fn resonator(cli: &Cli, cmd: &ResonatorCmd) -> Result<()> {
    match cmd {
        ResonatorCmd::Fit => {
            let t = load(cli, TraceKind::S21)?.to_s21()?;
            let mut f = fit_s21(&t)?;
            if let Some(p) = t.stimulus_power {
                f.photon_number = Some(photon_number(&f, p)?);
            }
            emit(cli, &serde_json::to_value(f)?)
        }
        ResonatorCmd::QiPower { temperature, frequency } => {
            let file = load(cli, TraceKind::QiPower)?;
            let t = temperature
                .or(file.value("temperature"))
                .ok_or_else(|| anyhow!("no temperature: pass --temperature or set it in the header"))?;
            let f = frequency
                .or(file.value("frequency"))
                .ok_or_else(|| anyhow!("no frequency: pass --frequency or set it in the header"))?;
            let p = fit_qi_vs_power(&file.points()?, t, f)?;
            emit(
                cli,
                &json!({
                    "selected": p.selected,
                    "f_delta0": p.f_delta0,
                    "f_delta0_uncertainty": p.f_delta0_uncertainty,
                    "n_c": p.n_c,
                    "n_c_uncertainty": p.n_c_uncertainty,
                    "beta": p.beta,
                    "beta_uncertainty": p.beta_uncertainty,
                    "q_other": p.q_other,
                    "q_other_uncertainty": p.q_other_uncertainty,
                    "warnings": p.warnings,
                }),
            )
        }
        ResonatorCmd::QiTemp {
            frequency,
            tc,
            photon_number,
            fix_alpha,
        } => {
            let file = load(cli, TraceKind::QiTemp)?;
            let f = frequency
                .or(file.value("frequency"))
                .ok_or_else(|| anyhow!("no frequency: pass --frequency or set it in the header"))?;
            let tc = tc
                .or(file.value("tc"))
                .ok_or_else(|| anyhow!("no T_c: pass --tc or set it in the header"))?;
            let n = photon_number
                .or(file.value("photon_number"))
                .ok_or_else(|| anyhow!("no photon number: pass --photon-number or set it in the header"))?;
            let opts = QiTempOptions {
                fix_alpha: *fix_alpha,
                ..QiTempOptions::default()
            };
            let r = fit_qi_vs_temperature(&file.points()?, f, tc, n, &opts)?;
            emit(
                cli,
                &json!({
                    "q_other": r.q_other,
                    "q_other_uncertainty": r.q_other_uncertainty,
                    "tls": r.tls,
                    "f_delta0_uncertainty": r.f_delta0_uncertainty,
                    "alpha_kin": r.alpha_kin,
                    "alpha_kin_uncertainty": r.alpha_kin_uncertainty,
                }),
            )
        }
    }
}

fn qubit(cli: &Cli, cmd: &QubitCmd) -> Result<()> {
    match cmd {
        QubitCmd::Params(a) => {
            let mode = if a.exact { SpectrumMode::exact() } else { SpectrumMode::Asymptotic };
            if let (Some(ej), Some(ec)) = (a.ej_over_h, a.ec_over_h) {
                let s = transmon_spectrum(ej, ec, mode)?;
                return emit(cli, &json!({ "f01": s.f01, "anharmonicity": s.anharmonicity, "ej_over_ec": ej / ec }));
            }
            let (Some(c_sigma), Some(w), Some(h)) = (a.c_sigma, a.width, a.height) else {
                bail!("give --ej-over-h and --ec-over-h, or --c-sigma, --width, --height and a report via --in");
            };
            let report = load_report(cli)?;
            let cal = report
                .calibrations
                .first()
                .map(|c| c.calibration)
                .ok_or_else(|| anyhow!("report has no wafer calibration"))?;
            let geom = JunctionGeometry::design(w, h, &cal)?;
            let opts = DesignOptions {
                mode,
                ..DesignOptions::default()
            };
            emit(cli, &serde_json::to_value(transmon_from_design(c_sigma, &geom, &cal, &opts)?)?)
        }
        QubitCmd::FitT1 | QubitCmd::FitEcho => {
            let t = load(cli, TraceKind::Decay)?.to_trace()?;
            let f = if matches!(cmd, QubitCmd::FitT1) { fit_t1(&t)? } else { fit_echo(&t)? };
            emit(
                cli,
                &json!({
                    "tau": f.tau,
                    "tau_uncertainty": f.tau_uncertainty,
                    "amplitude": f.amplitude,
                    "offset": f.offset,
                    "unbounded": f.unbounded,
                }),
            )
        }
        QubitCmd::FitRamsey => {
            let f = fit_ramsey(&load(cli, TraceKind::Ramsey)?.to_trace()?)?;
            emit(
                cli,
                &json!({
                    "t2_star": f.t2_star,
                    "t2_star_uncertainty": f.t2_star_uncertainty,
                    "detuning": f.detuning,
                    "detuning_uncertainty": f.detuning_uncertainty,
                    "phase": f.phase,
                    "amplitude": f.amplitude,
                    "offset": f.offset,
                    "no_fringe": f.no_fringe,
                }),
            )
        }
        QubitCmd::Budget => {
            let report = load_report(cli)?;
            let points: Vec<(f64, f64)> = report
                .qubits
                .iter()
                .filter_map(|q| q.transmon.as_ref().map(|t| (t.participation_pj, q.record.q1)))
                .collect();
            let f = loss_budget_fit(&points)?;
            let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
            let grid: Vec<f64> = (0..20).map(|k| lo + (hi - lo) * k as f64 / 19.0).collect();
            emit(
                cli,
                &json!({
                    "q_junction": f.q_junction,
                    "q_junction_uncertainty": f.q_junction_uncertainty,
                    "q_other": f.q_other,
                    "q_other_uncertainty": f.q_other_uncertainty,
                    "points": points,
                    "band": budget_band(&f, &grid),
                }),
            )
        }
        QubitCmd::QpCurve(a) => {
            if a.points < 2 || !(a.t_max > a.t_min) {
                bail!("qp-curve needs at least 2 points and t_max > t_min");
            }
            let params = QTemperatureParams {
                q1_zero: a.q1_zero,
                f_q: a.f_q,
                delta: delta0_from_tc(a.tc)?,
            };
            let temps: Vec<f64> = (0..a.points)
                .map(|k| a.t_min + (a.t_max - a.t_min) * k as f64 / (a.points - 1) as f64)
                .collect();
            let curve = q_vs_temperature_model(&temps, &params)?;
            emit(cli, &serde_json::to_value(curve)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
