//! Energy relaxation, Ramsey and echo decay fits and coherence records.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::fit::{fit, FitProblem, FitResult};
use crate::trace::Trace;

use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// s
    pub tau: f64,
    pub tau_uncertainty: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// The data do not constrain the decay time.
    pub unbounded: bool,
    /// Fit with time in units of the longest delay.
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyFit {
    /// s
    pub t2_star: f64,
    pub t2_star_uncertainty: f64,
    /// Hz
    pub detuning: f64,
    pub detuning_uncertainty: f64,
    /// rad
    pub phase: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// No fringe was found; the decay is a pure exponential.
    pub no_fringe: bool,
    pub fit: FitResult,
}

fn real_series(trace: &Trace, min_points: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let y = trace
        .real_values()
        .ok_or_else(|| Error::domain("coherence traces must be real-valued"))?
        .to_vec();
    if trace.len() < min_points {
        return Err(Error::Domain(format!(
            "coherence fit needs at least {min_points} points, got {}",
            trace.len()
        )));
    }
    if let Some(t) = trace.x.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::domain(format!("delays must be non-negative, got {t}")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("trace contains non-finite values"));
    }
    let scale = trace.x.iter().cloned().fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::domain("all delays are zero"));
    }
    Ok((trace.x.iter().map(|t| t / scale).collect(), y, scale))
}

/// Least-squares coefficients of `y ≈ Σ c_k·b_k(x)`, via normal equations.
fn linear_solve(basis: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = basis.len();
    let a = nalgebra::DMatrix::from_fn(y.len(), k, |i, j| basis[j][i]);
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-12).ok()?;
    let r = &a * &c - &b;
    Some((c.iter().copied().collect(), r.norm_squared()))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / n as f64).exp())
}

fn exponential_fit(x: &[f64], y: &[f64], scale: f64, name: &str) -> Result<DecayFit> {
    let dx = x
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    let (mut best, mut start) = (f64::INFINITY, vec![1.0, 0.3, 0.0]);
    for tau in log_grid(dx / 10.0, 100.0, 240) {
        let e: Vec<f64> = x.iter().map(|t| (-t / tau).exp()).collect();
        if let Some((c, sse)) = linear_solve(&[e, vec![1.0; x.len()]], y) {
            if sse < best {
                best = sse;
                start = vec![c[0], tau, c[1]];
            }
        }
    }
    if start[0] == 0.0 {
        start[0] = 1e-12;
    }
    let problem = FitProblem::real(|t, p| p[0] * (-t / p[1]).exp() + p[2], start)
        .jacobian(|t, p, out| {
            let e = (-t / p[1]).exp();
            out[0] = e;
            out[1] = p[0] * e * t / (p[1] * p[1]);
            out[2] = 1.0;
        })
        .names(["amplitude", name, "offset"])
        .bound(1, 0.0, f64::INFINITY);
    let data = Trace::real(name, x.to_vec(), y.to_vec());
    let result = fit(&problem, &data)?;
    let (a, tau, b) = (result.params[0], result.params[1], result.params[2]);
    let sigma = result.param_uncertainties[1];
    let spread = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - y.iter().cloned().fold(f64::INFINITY, f64::min);
    let unbounded = !sigma.is_finite()
        || sigma > tau
        || tau > 50.0
        || a.abs() <= 1e-9 * spread.max(b.abs()).max(f64::MIN_POSITIVE);
    Ok(DecayFit {
        tau: tau * scale,
        tau_uncertainty: sigma * scale,
        amplitude: a,
        offset: b,
        unbounded,
        fit: result,
    })
}

/// Fits `P(t) = A·e^(−t/T1) + B` to an excited-state population trace.
pub fn fit_t1(trace: &Trace) -> Result<DecayFit> {
    let (x, y, scale) = real_series(trace, 10)?;
    exponential_fit(&x, &y, scale, "t1")
}

/// Fits the Hahn-echo decay `A·e^(−t/T2) + B`.
pub fn fit_echo(trace: &Trace) -> Result<DecayFit> {
    let (x, y, scale) = real_series(trace, 10)?;
    exponential_fit(&x, &y, scale, "t2_echo")
}

/// Fits `P(t) = A·e^(−t/T2*)·cos(2πΔf·t + φ) + B`. The detuning starts at
/// the largest peak of the discrete spectrum; without a peak three times
/// above the spectral median the fit falls back to a pure exponential.
pub fn fit_ramsey(trace: &Trace) -> Result<RamseyFit> {
    let (x, y, scale) = real_series(trace, 20)?;
    let n = x.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    // Oversampled discrete spectrum of the mean-removed signal.
    const OVERSAMPLE: usize = 4;
    let spectrum: Vec<(f64, Complex64)> = (1..=(n / 2) * OVERSAMPLE)
        .map(|k| {
            let f = k as f64 / OVERSAMPLE as f64;
            let s: Complex64 = x
                .iter()
                .zip(&y)
                .map(|(t, v)| Complex64::from_polar(v - mean, -TAU * f * t))
                .sum();
            (f, s)
        })
        .collect();
    let mut mags: Vec<f64> = spectrum.iter().map(|s| s.1.norm()).collect();
    let (k_peak, &(f_peak, _)) = spectrum
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.norm().total_cmp(&b.1 .1.norm()))
        .expect("spectrum has at least one bin");
    let peak = mags[k_peak];
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    // Below two cycles over the record a decay and a fringe are not
    // distinguishable.
    let fringe = f_peak >= 1.5 && peak >= 3.0 * median && peak > 0.0;

    if !fringe {
        let d = exponential_fit(&x, &y, scale, "t2_star")?;
        return Ok(RamseyFit {
            t2_star: d.tau,
            t2_star_uncertainty: d.tau_uncertainty,
            detuning: 0.0,
            detuning_uncertainty: 0.0,
            phase: 0.0,
            amplitude: d.amplitude,
            offset: d.offset,
            no_fringe: true,
            fit: d.fit,
        });
    }

    // Scan decay time at the spectral detuning; amplitudes are linear.
    let (mut best, mut start) = (f64::INFINITY, None);
    for tau in log_grid(0.02, 50.0, 120) {
        let env: Vec<f64> = x.iter().map(|t| (-t / tau).exp()).collect();
        let c: Vec<f64> = x.iter().zip(&env).map(|(t, e)| e * (TAU * f_peak * t).cos()).collect();
        let s: Vec<f64> = x.iter().zip(&env).map(|(t, e)| e * (TAU * f_peak * t).sin()).collect();
        if let Some((k, sse)) = linear_solve(&[c, s, vec![1.0; n]], &y) {
            if sse < best {
                best = sse;
                // A·cos(ωt + φ) = A cos φ·cos ωt − A sin φ·sin ωt
                let amp = k[0].hypot(k[1]);
                let phase = (-k[1]).atan2(k[0]);
                start = Some(vec![amp, tau, f_peak, phase, k[2]]);
            }
        }
    }
    let start = start.ok_or_else(|| Error::Analysis("Ramsey initialization failed".into()))?;
    let nyquist = (n / 2) as f64 + 1.0;
    let problem = FitProblem::real(
        |t, p| p[0] * (-t / p[1]).exp() * (TAU * p[2] * t + p[3]).cos() + p[4],
        start,
    )
    .jacobian(|t, p, out| {
        let e = (-t / p[1]).exp();
        let arg = TAU * p[2] * t + p[3];
        let (s, c) = arg.sin_cos();
        out[0] = e * c;
        out[1] = p[0] * e * c * t / (p[1] * p[1]);
        out[2] = -p[0] * e * s * TAU * t;
        out[3] = -p[0] * e * s;
        out[4] = 1.0;
    })
    .names(["amplitude", "t2_star", "detuning", "phase", "offset"])
    .bound(1, 0.0, f64::INFINITY)
    .bound(2, 0.0, nyquist);
    let data = Trace::real("ramsey", x, y);
    let result = fit(&problem, &data)?;
    let p = &result.params;
    let s = &result.param_uncertainties;
    let (mut amp, mut phase) = (p[0], p[3]);
    if amp < 0.0 {
        amp = -amp;
        phase += std::f64::consts::PI;
    }
    phase = (phase + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
    Ok(RamseyFit {
        t2_star: p[1] * scale,
        t2_star_uncertainty: s[1] * scale,
        detuning: p[2] / scale,
        detuning_uncertainty: s[2] / scale,
        phase,
        amplitude: amp,
        offset: p[4],
        no_fringe: false,
        fit: result,
    })
}

/// Coherence times of one qubit and the corresponding quality factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRecord {
    /// Hz
    pub f_q: f64,
    /// s
    pub t1: f64,
    pub t2_star: f64,
    pub t2_echo: f64,
    /// 2π·f_q·T1
    pub q1: f64,
    pub q2_star: f64,
    pub q2_echo: f64,
    /// K
    pub temperature: Option<f64>,
    /// T2* exceeds 2·T1.
    #[serde(default)]
    pub t2_star_above_limit: bool,
    /// Echo time below T2*; reported, never enforced.
    #[serde(default)]
    pub echo_below_ramsey: bool,
}

impl CoherenceRecord {
    pub fn new(f_q: f64, t1: f64, t2_star: f64, t2_echo: f64, temperature: Option<f64>) -> Result<Self> {
        require_positive("qubit frequency", f_q)?;
        require_positive("T1", t1)?;
        require_positive("T2*", t2_star)?;
        require_positive("T2 echo", t2_echo)?;
        let w = TAU * f_q;
        Ok(CoherenceRecord {
            f_q,
            t1,
            t2_star,
            t2_echo,
            q1: w * t1,
            q2_star: w * t2_star,
            q2_echo: w * t2_echo,
            temperature,
            t2_star_above_limit: t2_star > 2.0 * t1,
            echo_below_ramsey: t2_echo < t2_star,
        })
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Result<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return Err(Error::domain("no coherence records"));
    }
    Ok(sum / n as f64)
}

/// Arithmetic mean of Q1 over records.
pub fn mean_q1(records: &[CoherenceRecord]) -> Result<f64> {
    mean(records.iter().map(|r| r.q1))
}

pub fn mean_q2_star(records: &[CoherenceRecord]) -> Result<f64> {
    mean(records.iter().map(|r| r.q2_star))
}

pub fn mean_q2_echo(records: &[CoherenceRecord]) -> Result<f64> {
    mean(records.iter().map(|r| r.q2_echo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(t1: f64, a: f64, b: f64, n: usize, span: f64) -> Trace {
        let x: Vec<f64> = (0..n).map(|k| span * k as f64 / (n - 1) as f64).collect();
        let y = x.iter().map(|t| a * (-t / t1).exp() + b).collect();
        Trace::real("decay", x, y)
    }

    #[test]
    fn t1_noiseless() {
        let f = fit_t1(&decay(62.4e-6, 1.0, 0.0, 50, 3.0 * 62.4e-6)).unwrap();
        assert!((f.tau / 62.4e-6 - 1.0).abs() < 1e-8, "{}", f.tau);
        assert!((f.amplitude - 1.0).abs() < 1e-8);
        assert!(f.offset.abs() < 1e-8);
        assert!(!f.unbounded);
    }

    #[test]
    fn constant_trace_unbounded() {
        let f = fit_t1(&decay(1e-5, 0.0, 0.3, 40, 1e-4)).unwrap();
        assert!(f.unbounded);
    }

    #[test]
    fn echo_noiseless() {
        let f = fit_echo(&decay(30e-6, 0.5, 0.5, 60, 100e-6)).unwrap();
        assert!((f.tau / 30e-6 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ramsey_noiseless() {
        let x: Vec<f64> = (0..200).map(|k| 40e-6 * k as f64 / 199.0).collect();
        let y = x
            .iter()
            .map(|t| 0.5 * (-t / 10e-6).exp() * (TAU * 250e3 * t + 0.3).cos() + 0.5)
            .collect();
        let f = fit_ramsey(&Trace::real("ramsey", x, y)).unwrap();
        assert!(!f.no_fringe);
        assert!((f.t2_star / 10e-6 - 1.0).abs() < 1e-6);
        assert!((f.detuning / 250e3 - 1.0).abs() < 1e-6);
        assert!((f.phase - 0.3).abs() < 1e-6);
    }

    #[test]
    fn ramsey_without_fringe() {
        let x: Vec<f64> = (0..100).map(|k| 40e-6 * k as f64 / 99.0).collect();
        let y = x.iter().map(|t| 0.5 * (-t / 10e-6).exp() + 0.5).collect();
        let f = fit_ramsey(&Trace::real("ramsey", x, y)).unwrap();
        assert!(f.no_fringe);
        assert!((f.t2_star / 10e-6 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn record_identities() {
        let r = CoherenceRecord::new(4.5e9, 62.4e-6, 20e-6, 30e-6, None).unwrap();
        assert_eq!(r.q1, TAU * 4.5e9 * 62.4e-6);
        assert!(!r.t2_star_above_limit);
        assert!(!r.echo_below_ramsey);
        let r = CoherenceRecord::new(4.5e9, 10e-6, 25e-6, 20e-6, None).unwrap();
        assert!(r.t2_star_above_limit);
        assert!(r.echo_below_ramsey);
    }
}
