//! Seeded synthetic data for every trace kind and a complete wafer bundle
//! with its generating parameters.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::film::FilmGeometry;
use crate::io::{
    DesignConfig, FilmSection, JunctionSection, PipelineConfig, QubitConfig, ResonatorSection, TraceFile, TraceKind,
};
use crate::junction::{
    annealing_ratio, simulate_rcsj_iv, AreaSample, IvRamp, IvSweep, JunctionGeometry, SpacerProcess, WaferCalibration,
};
use crate::physics::constants::PHI0;
use crate::physics::MbTolerance;
use crate::qubit::{transmon_from_design, DesignOptions};
use crate::resonator::{loaded_q, qi_temperature_model, s21_model, tls_loss, S21Trace, TlsParams};
use crate::trace::Trace;

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, sigma: f64) -> f64 {
    sigma * rng.sample::<f64, _>(StandardNormal)
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn lin_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Two-column file of `(x, y)` points.
pub fn points_file(kind: TraceKind, points: &[(f64, f64)]) -> Result<TraceFile> {
    TraceFile::new(kind, vec![points.iter().map(|p| p.0).collect(), points.iter().map(|p| p.1).collect()])
}

/// Film R(T): a logistic transition onto a normal state that is flat at
/// `r_residual` up to T_c and rises linearly to `r_room` at 300 K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtSpec {
    /// K
    pub tc: f64,
    /// K, 10–90% width
    pub width: f64,
    /// Ω
    pub r_residual: f64,
    pub r_room: f64,
    pub geometry: FilmGeometry,
}

impl RtSpec {
    fn normal(&self, t: f64) -> f64 {
        self.r_residual + (self.r_room - self.r_residual) * ((t - self.tc) / (300.0 - self.tc)).max(0.0)
    }

    pub fn resistance(&self, t: f64) -> f64 {
        // 10–90% of a logistic spans 2·ln 9 scale lengths.
        let s = self.width / (2.0 * 9f64.ln());
        self.normal(t) / (1.0 + (-(t - self.tc) / s).exp())
    }

    /// R(300 K) / R(T_c + 0.5 K).
    pub fn rrr(&self) -> f64 {
        self.resistance(300.0) / self.resistance(self.tc + 0.5)
    }

    /// Residual resistivity from R(T_c + 0.5 K).
    pub fn rho0(&self) -> f64 {
        let g = self.geometry;
        self.resistance(self.tc + 0.5) * g.width * g.thickness / g.length
    }
}

/// Dense points through the transition plus a sparse sweep to 300 K, with
/// additive noise of `noise` ohms.
pub fn rt_trace(spec: &RtSpec, noise: f64, rng: &mut impl Rng) -> Result<TraceFile> {
    let mut t: Vec<f64> = lin_spaced(2.0, spec.tc - 1.0, 20);
    t.extend(lin_spaced(spec.tc - 1.0, spec.tc + 1.0, 201).into_iter().skip(1));
    t.extend(lin_spaced(spec.tc + 1.0, 300.0, 120).into_iter().skip(1));
    let pts: Vec<(f64, f64)> = t.iter().map(|&t| (t, spec.resistance(t) + gaussian(rng, noise))).collect();
    let g = spec.geometry;
    Ok(points_file(TraceKind::Rt, &pts)?
        .with_value("length", g.length)
        .with_value("width", g.width)
        .with_value("thickness", g.thickness))
}

/// `R = ρs/((w − d)(h − d))` for square designs, each repeated, with
/// relative Gaussian noise.
pub fn area_samples(
    specific_resistance: f64,
    bias: f64,
    designs: &[f64],
    repeats: usize,
    rel_noise: f64,
    rng: &mut impl Rng,
) -> Vec<AreaSample> {
    let mut out = Vec::new();
    for &w in designs {
        for _ in 0..repeats {
            let r = specific_resistance / ((w - bias) * (w - bias));
            out.push(AreaSample {
                design_width: w,
                design_height: w,
                resistance: r * (1.0 + gaussian(rng, rel_noise)),
            });
        }
    }
    out
}

pub fn areas_file(samples: &[AreaSample]) -> Result<TraceFile> {
    TraceFile::new(
        TraceKind::Areas,
        vec![
            samples.iter().map(|s| s.design_width).collect(),
            samples.iter().map(|s| s.design_height).collect(),
            samples.iter().map(|s| s.resistance).collect(),
        ],
    )
}

/// Up sweep followed by the down sweep, if any.
pub fn iv_file(sweep: &IvSweep) -> Result<TraceFile> {
    let mut pts = sweep.up.points.clone();
    if let Some(d) = &sweep.down {
        pts.extend(&d.points);
    }
    points_file(TraceKind::Iv, &pts)
}

/// Notch-resonator parameters with a complex linear baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S21Spec {
    /// Hz
    pub f0: f64,
    pub q_internal: f64,
    pub q_external_mag: f64,
    pub phi: f64,
    /// Baseline magnitude and phase at f0.
    pub baseline_gain: f64,
    pub baseline_phase: f64,
    /// Relative baseline change across the span.
    pub baseline_tilt: f64,
}

impl S21Spec {
    pub fn new(f0: f64, q_internal: f64, q_external_mag: f64, phi: f64) -> Self {
        S21Spec {
            f0,
            q_internal,
            q_external_mag,
            phi,
            baseline_gain: 1.0,
            baseline_phase: 0.0,
            baseline_tilt: 0.0,
        }
    }

    pub fn q_total(&self) -> f64 {
        loaded_q(self.q_internal, self.q_external_mag, self.phi)
    }
}

/// `n` points spanning `span` loaded linewidths on each side of f0, with
/// independent Gaussian noise of `noise` on each quadrature.
pub fn s21_trace(spec: &S21Spec, n: usize, span: f64, noise: f64, rng: &mut impl Rng) -> Result<S21Trace> {
    let half = span * spec.f0 / spec.q_total();
    let f = lin_spaced(spec.f0 - half, spec.f0 + half, n);
    let z = f
        .iter()
        .map(|&x| {
            let base = Complex64::from_polar(spec.baseline_gain, spec.baseline_phase)
                * (1.0 + spec.baseline_tilt * (x - spec.f0) / (2.0 * half));
            let s = s21_model(x, spec.f0, spec.q_internal, spec.q_external_mag, spec.phi);
            base * s + Complex64::new(gaussian(rng, noise), gaussian(rng, noise))
        })
        .collect();
    S21Trace::new(f, z)
}

pub fn s21_file(trace: &S21Trace) -> Result<TraceFile> {
    let mut t = TraceFile::new(
        TraceKind::S21,
        vec![
            trace.frequency.clone(),
            trace.s21.iter().map(|z| z.re).collect(),
            trace.s21.iter().map(|z| z.im).collect(),
        ],
    )?;
    if let Some(p) = trace.stimulus_power {
        t = t.with_value("power", p);
    }
    if let Some(x) = trace.temperature {
        t = t.with_value("temperature", x);
    }
    Ok(t)
}

/// `A·e^(−t/τ) + B` with additive noise.
pub fn decay_trace(tau: f64, amplitude: f64, offset: f64, delays: &[f64], noise: f64, rng: &mut impl Rng) -> Trace {
    let y = delays
        .iter()
        .map(|&t| amplitude * (-t / tau).exp() + offset + gaussian(rng, noise))
        .collect();
    Trace::real("decay", delays.to_vec(), y).with_units("s", "")
}

/// `A·e^(−t/T2*)·cos(2π·δ·t + φ) + B` with additive noise.
#[allow(clippy::too_many_arguments)]
pub fn ramsey_trace(
    t2_star: f64,
    detuning: f64,
    phase: f64,
    amplitude: f64,
    offset: f64,
    delays: &[f64],
    noise: f64,
    rng: &mut impl Rng,
) -> Trace {
    let y = delays
        .iter()
        .map(|&t| {
            amplitude * (-t / t2_star).exp() * (std::f64::consts::TAU * detuning * t + phase).cos()
                + offset
                + gaussian(rng, noise)
        })
        .collect();
    Trace::real("ramsey", delays.to_vec(), y).with_units("s", "")
}

/// Decay or Ramsey trace as a file.
pub fn coherence_file(kind: TraceKind, trace: &Trace) -> Result<TraceFile> {
    let y = trace
        .real_values()
        .ok_or_else(|| Error::domain("coherence traces are real-valued"))?;
    TraceFile::new(kind, vec![trace.x.clone(), y.to_vec()])
}

/// `(n, Q_i)` with `1/Q_i = 1/Q_TLS(n) + 1/Q_other` and relative noise.
pub fn qi_power_points(
    tls: &TlsParams,
    q_other: f64,
    t: f64,
    f: f64,
    photon_numbers: &[f64],
    rel_noise: f64,
    rng: &mut impl Rng,
) -> Result<Vec<(f64, f64)>> {
    photon_numbers
        .iter()
        .map(|&n| {
            let q = 1.0 / (tls_loss(n, t, f, tls)? + 1.0 / q_other);
            Ok((n, q * (1.0 + gaussian(rng, rel_noise))))
        })
        .collect()
}

/// `(T, Q_i)` from the composite temperature model evaluated at a tenth of
/// the default quadrature tolerance.
#[allow(clippy::too_many_arguments)]
pub fn qi_temperature_points(
    f: f64,
    tc: f64,
    n_ph: f64,
    q_other: f64,
    tls: &TlsParams,
    alpha: f64,
    temperatures: &[f64],
    rel_noise: f64,
    rng: &mut impl Rng,
) -> Result<Vec<(f64, f64)>> {
    let tol = MbTolerance::default().scaled(0.1);
    temperatures
        .iter()
        .map(|&t| {
            let q = qi_temperature_model(t, f, tc, n_ph, q_other, tls, alpha, tol)?;
            Ok((t, q * (1.0 + gaussian(rng, rel_noise))))
        })
        .collect()
}

/// Annealing ratios with relative noise, capped at 1.
pub fn anneal_points(alpha: f64, tau: f64, times: &[f64], rel_noise: f64, rng: &mut impl Rng) -> Vec<(f64, f64)> {
    times
        .iter()
        .map(|&t| (t, (annealing_ratio(t, alpha, tau) * (1.0 + gaussian(rng, rel_noise))).min(1.0)))
        .collect()
}

/// `J_c = K·E^p` with relative noise.
pub fn exposure_points(
    prefactor: f64,
    exponent: f64,
    exposures: &[f64],
    rel_noise: f64,
    rng: &mut impl Rng,
) -> Vec<(f64, f64)> {
    exposures
        .iter()
        .map(|&e| (e, prefactor * e.powf(exponent) * (1.0 + gaussian(rng, rel_noise))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorTruth {
    pub file: PathBuf,
    pub spec: S21Spec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitTruth {
    pub name: String,
    /// Hz
    pub f_q: f64,
    pub participation_pj: f64,
    pub q1: f64,
    /// s
    pub t1: f64,
    pub t2_star: f64,
    pub t2_echo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureTruth {
    pub process: String,
    pub prefactor: f64,
    pub exponent: f64,
}

/// Parameters used to generate a wafer bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleTruth {
    pub seed: u64,
    pub wafer_id: String,
    pub film: RtSpec,
    pub calibration: WaferCalibration,
    /// IV test junction
    pub iv_ic: f64,
    pub iv_rn: f64,
    pub iv_beta_c: f64,
    pub resonators: Vec<ResonatorTruth>,
    pub qi_power_tls: TlsParams,
    pub qi_power_q_other: f64,
    pub qi_temp_q_other: f64,
    pub qi_temp_alpha: f64,
    pub qi_temp_tls: TlsParams,
    pub anneal_alpha: f64,
    pub anneal_tau: f64,
    pub exposure: Vec<ExposureTruth>,
    pub q_junction: f64,
    pub q_other: f64,
    pub qubits: Vec<QubitTruth>,
}

/// Relative noise levels used by [`write_bundle`].
pub mod bundle_noise {
    /// Ω, additive
    pub const RT: f64 = 2e-3;
    pub const AREAS: f64 = 0.01;
    pub const S21: f64 = 0.002;
    pub const QI: f64 = 0.005;
    pub const ANNEAL: f64 = 0.01;
    pub const EXPOSURE: f64 = 0.02;
    /// Population units, additive
    pub const COHERENCE: f64 = 0.002;
}

fn write(dir: &Path, name: &str, file: TraceFile, wafer_id: &str) -> Result<PathBuf> {
    file.with_text("wafer_id", wafer_id).write(&dir.join(name))?;
    Ok(PathBuf::from(name))
}

/// Writes a complete synthetic wafer (R(T), junction areas, an IV sweep,
/// exposure and annealing series, S21 traces, Q_i series and three qubits)
/// plus `config.toml` and `truth.json` into `dir`.
pub fn write_bundle(dir: &Path, seed: u64) -> Result<BundleTruth> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = rng(seed);
    let wafer_id = format!("SYN-{seed}");
    let w = wafer_id.as_str();

    let film = RtSpec {
        tc: 9.2,
        width: 0.05,
        r_residual: 2.0,
        r_room: 8.0,
        geometry: FilmGeometry {
            length: 1e-3,
            width: 10e-6,
            thickness: 200e-9,
        },
    };
    let rt = write(dir, "rt.csv", rt_trace(&film, bundle_noise::RT, &mut rng)?, w)?;

    // 20 A/cm² at 1.5 mV: ρs = 7.5e-9 Ω·m².
    let calibration = WaferCalibration::new(7.5e-9, 160e-9, 1.5e-3, 100.0, SpacerProcess::Pecvd, film.tc)?;
    let sizes: Vec<f64> = lin_spaced(0.8e-6, 3e-6, 10);
    let samples = area_samples(
        calibration.specific_resistance,
        calibration.dimension_bias,
        &sizes,
        2,
        bundle_noise::AREAS,
        &mut rng,
    );
    let areas = write(dir, "areas.csv", areas_file(&samples)?, w)?;

    // IV test junction, shunted to β_c = 25.
    let geom = JunctionGeometry::design(2e-6, 2e-6, &calibration)?;
    let a = geom.effective_area()?;
    let (iv_rn, iv_ic) = (calibration.specific_resistance / a, calibration.jc * a);
    let iv_beta_c = 25.0;
    let c = iv_beta_c * PHI0 / (std::f64::consts::TAU * iv_ic * iv_rn * iv_rn);
    let sweep = simulate_rcsj_iv(
        iv_ic,
        iv_rn,
        c,
        &IvRamp {
            i_max: 4.0 * iv_ic,
            n_steps: 401,
            both_directions: true,
        },
        None,
    )?;
    let iv = write(dir, "iv.csv", iv_file(&sweep)?, w)?;

    let exposures = log_spaced(10.0, 1e4, 8);
    let exposure_truth = vec![
        ExposureTruth {
            process: "HDPCVD".into(),
            prefactor: 3e8,
            exponent: -0.5,
        },
        ExposureTruth {
            process: "PECVD".into(),
            prefactor: 6e6,
            exponent: -0.5,
        },
    ];
    let mut exposure_files = Vec::new();
    for e in &exposure_truth {
        let pts = exposure_points(e.prefactor, e.exponent, &exposures, bundle_noise::EXPOSURE, &mut rng);
        let file = points_file(TraceKind::Exposure, &pts)?.with_text("process", e.process.clone());
        exposure_files.push(write(dir, &format!("exposure_{}.csv", e.process.to_lowercase()), file, w)?);
    }

    let (anneal_alpha, anneal_tau) = (0.023, 240.0);
    let times = lin_spaced(0.0, 1800.0, 10);
    let anneal = write(
        dir,
        "anneal.csv",
        points_file(
            TraceKind::Anneal,
            &anneal_points(anneal_alpha, anneal_tau, &times, bundle_noise::ANNEAL, &mut rng),
        )?,
        w,
    )?;

    let resonator_specs = [
        S21Spec {
            baseline_gain: 0.8,
            baseline_phase: 0.7,
            baseline_tilt: 0.02,
            ..S21Spec::new(6.0e9, 9e5, 2.6e5, 0.1)
        },
        S21Spec {
            baseline_gain: 1.1,
            baseline_phase: -1.2,
            baseline_tilt: -0.01,
            ..S21Spec::new(6.2e9, 5e5, 3e5, -0.05)
        },
    ];
    let mut resonators = Vec::new();
    for (k, spec) in resonator_specs.iter().enumerate() {
        let mut t = s21_trace(spec, 801, 8.0, bundle_noise::S21, &mut rng)?;
        t.stimulus_power = Some(1e-17);
        t.temperature = Some(0.02);
        let file = write(dir, &format!("s21_{k}.csv"), s21_file(&t)?, w)?;
        resonators.push(ResonatorTruth { file, spec: *spec });
    }

    let f_res = 6e9;
    let qi_power_tls = TlsParams {
        f_delta0: 1.1e-6,
        n_c: 10.0,
        beta: 0.5,
    };
    let qi_power_q_other = 2e6;
    let n_ph = log_spaced(0.1, 1e4, 21);
    let qp = qi_power_points(&qi_power_tls, qi_power_q_other, 0.02, f_res, &n_ph, bundle_noise::QI, &mut rng)?;
    let qi_power = write(
        dir,
        "qi_power.csv",
        points_file(TraceKind::QiPower, &qp)?
            .with_value("temperature", 0.02)
            .with_value("frequency", f_res),
        w,
    )?;

    let qi_temp_tls = TlsParams::default();
    let (qi_temp_q_other, qi_temp_alpha) = (2e6, 0.02);
    let temps = lin_spaced(0.3, 4.5, 15);
    let qt = qi_temperature_points(
        f_res,
        film.tc,
        1.0,
        qi_temp_q_other,
        &qi_temp_tls,
        qi_temp_alpha,
        &temps,
        bundle_noise::QI,
        &mut rng,
    )?;
    let qi_temp = write(
        dir,
        "qi_temp.csv",
        points_file(TraceKind::QiTemp, &qt)?
            .with_value("frequency", f_res)
            .with_value("photon_number", 1.0),
        w,
    )?;

    let (q_junction, q_other) = (3e4, 4e5);
    let designs = [("Q1", 0.5e-6, 80e-15), ("Q2", 0.45e-6, 65e-15), ("Q3", 0.6e-6, 100e-15)];
    let mut qubits = Vec::new();
    let mut qubit_configs = Vec::new();
    for &(name, size, c_sigma) in &designs {
        let g = JunctionGeometry::design(size, size, &calibration)?;
        let tp = transmon_from_design(c_sigma, &g, &calibration, &DesignOptions::default())?;
        let p = tp.participation_pj;
        let q1 = 1.0 / (p / q_junction + (1.0 - p) / q_other);
        let f_q = tp.f01;
        let t1 = q1 / (std::f64::consts::TAU * f_q);
        let (t2_star, t2_echo) = (0.8 * t1, 1.3 * t1);
        let lower = name.to_lowercase();
        let t1_delays = lin_spaced(0.0, 5.0 * t1, 101);
        let t1_trace = decay_trace(t1, 0.95, 0.03, &t1_delays, bundle_noise::COHERENCE, &mut rng);
        let r_delays = lin_spaced(0.0, 3.0 * t2_star, 201);
        let detuning = 20.0 / (3.0 * t2_star);
        let r_trace = ramsey_trace(t2_star, detuning, 0.0, 0.45, 0.5, &r_delays, bundle_noise::COHERENCE, &mut rng);
        let e_delays = lin_spaced(0.0, 4.0 * t2_echo, 101);
        let e_trace = decay_trace(t2_echo, 0.45, 0.5, &e_delays, bundle_noise::COHERENCE, &mut rng);
        let with_meta = |f: TraceFile| f.with_value("qubit_frequency", f_q).with_value("temperature", 0.02);
        let t1_file = write(dir, &format!("{lower}_t1.csv"), with_meta(coherence_file(TraceKind::Decay, &t1_trace)?), w)?;
        let r_file = write(dir, &format!("{lower}_ramsey.csv"), with_meta(coherence_file(TraceKind::Ramsey, &r_trace)?), w)?;
        let e_file = write(dir, &format!("{lower}_echo.csv"), with_meta(coherence_file(TraceKind::Decay, &e_trace)?), w)?;
        qubits.push(QubitTruth {
            name: name.into(),
            f_q,
            participation_pj: p,
            q1,
            t1,
            t2_star,
            t2_echo,
        });
        qubit_configs.push(QubitConfig {
            name: name.into(),
            design: Some(name.into()),
            c_sigma: Some(c_sigma),
            t1: t1_file,
            ramsey: r_file,
            echo: e_file,
            frequency: None,
        });
    }

    let config = PipelineConfig {
        wafer_id: wafer_id.clone(),
        workers: None,
        film: Some(FilmSection {
            files: vec![rt],
            bulk_tc: None,
        }),
        junction: Some(JunctionSection {
            areas: vec![areas],
            iv: vec![iv],
            icrn_product: None,
            oxidation_exposure: calibration.oxidation_exposure,
            spacer_process: calibration.spacer_process,
            tc: None,
            anneal: vec![anneal],
            exposure: exposure_files,
            exposure_fix_exponent: None,
            designs: designs
                .iter()
                .map(|&(name, size, _)| DesignConfig {
                    name: name.into(),
                    width: size,
                    height: size,
                })
                .collect(),
        }),
        resonator: Some(ResonatorSection {
            s21: resonators.iter().map(|r| r.file.clone()).collect(),
            qi_power: vec![qi_power],
            qi_temp: vec![qi_temp],
            frequency: None,
            temperature: None,
            photon_number: None,
        }),
        qubits: qubit_configs,
        base_dir: dir.to_path_buf(),
    };
    crate::io::write_atomic(&dir.join("config.toml"), config.to_toml()?.as_bytes())?;

    let truth = BundleTruth {
        seed,
        wafer_id,
        film,
        calibration,
        iv_ic,
        iv_rn,
        iv_beta_c,
        resonators,
        qi_power_tls,
        qi_power_q_other,
        qi_temp_q_other,
        qi_temp_alpha,
        qi_temp_tls,
        anneal_alpha,
        anneal_tau,
        exposure: exposure_truth,
        q_junction,
        q_other,
        qubits,
    };
    let mut json = serde_json::to_string_pretty(&truth)?;
    json.push('\n');
    crate::io::write_atomic(&dir.join("truth.json"), json.as_bytes())?;
    Ok(truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_repeat() {
        let a = decay_trace(1e-5, 1.0, 0.0, &[0.0, 1e-6], 0.1, &mut rng(7));
        let b = decay_trace(1e-5, 1.0, 0.0, &[0.0, 1e-6], 0.1, &mut rng(7));
        assert_eq!(a, b);
        let c = decay_trace(1e-5, 1.0, 0.0, &[0.0, 1e-6], 0.1, &mut rng(8));
        assert_ne!(a, c);
    }

    #[test]
    fn rt_spec_identities() {
        let s = RtSpec {
            tc: 9.2,
            width: 0.05,
            r_residual: 2.0,
            r_room: 8.0,
            geometry: FilmGeometry {
                length: 1e-3,
                width: 1e-5,
                thickness: 2e-7,
            },
        };
        assert!((s.resistance(9.2) - 1.0).abs() < 1e-12);
        // 10% and 90% points straddle T_c by half the width.
        assert!((s.resistance(9.2 + 0.025) / s.normal(9.225) - 0.9).abs() < 1e-9);
        // R(T_c + 0.5 K) is on the linear normal-state slope.
        let r_res = 2.0 + 6.0 * 0.5 / (300.0 - 9.2);
        assert!((s.rrr() / (8.0 / r_res) - 1.0).abs() < 1e-12);
    }
}
