//! Complex S21 fitting with baseline normalization.

use num_complex::Complex64;

use super::{loaded_q, s21_model, ResonatorFit, S21Trace};
use crate::error::{Error, Result};
use crate::fit::{fit, FitProblem};
use crate::trace::Trace;

/// Fraction of points on each side used for the baseline.
const EDGE_FRACTION: f64 = 0.1;
/// Baseline refinement stops when no parameter moves by more than this.
const BASELINE_CONVERGENCE: f64 = 1e-10;
const MAX_BASELINE_ITERATIONS: usize = 30;
/// Minimum span on each side of the resonance, in linewidths.
const MIN_SPAN_LINEWIDTHS: f64 = 3.0;

fn edge_indices(n: usize) -> Vec<usize> {
    let k = ((n as f64 * EDGE_FRACTION).round() as usize).max(2);
    (0..k).chain(n - k..n).collect()
}

/// Complex straight line through `(x, z)` by least squares.
fn linear_baseline(x: &[f64], z: &[Complex64]) -> (Complex64, Complex64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let zm = z.iter().sum::<Complex64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - xm).powi(2)).sum();
    let sxz: Complex64 = x.iter().zip(z).map(|(xi, zi)| (zi - zm) * (xi - xm)).sum();
    let slope = if sxx > 0.0 { sxz / sxx } else { Complex64::new(0.0, 0.0) };
    (zm, slope, xm)
}

/// Divides the trace by the complex line through its outer points, each
/// first divided by `resonance` at that frequency.
fn normalize_with(trace: &S21Trace, resonance: &dyn Fn(f64) -> Complex64) -> Vec<Complex64> {
    let idx = edge_indices(trace.len());
    let x: Vec<f64> = idx.iter().map(|&i| trace.frequency[i]).collect();
    let z: Vec<Complex64> = idx.iter().map(|&i| trace.s21[i] / resonance(trace.frequency[i])).collect();
    let (c0, c1, xm) = linear_baseline(&x, &z);
    trace
        .frequency
        .iter()
        .zip(&trace.s21)
        .map(|(f, s)| s / (c0 + c1 * (f - xm)))
        .collect()
}

/// Divides out the complex linear baseline through the outer 20% of points.
pub fn normalize_s21(trace: &S21Trace) -> Result<S21Trace> {
    if trace.len() < 20 {
        return Err(Error::Analysis(format!("S21 trace has only {} points", trace.len())));
    }
    let s21 = normalize_with(trace, &|_| Complex64::new(1.0, 0.0));
    Ok(S21Trace { s21, ..trace.clone() })
}

struct Guess {
    f_ref: f64,
    width: f64,
    q_internal: f64,
    q_external: f64,
    phi: f64,
}

fn initial_guess(f: &[f64], z: &[Complex64]) -> Result<Guess> {
    let n = f.len();
    let mag: Vec<f64> = z.iter().map(|v| v.norm()).collect();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            mag[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let imin = (0..n).min_by(|&a, &b| smooth[a].total_cmp(&smooth[b])).expect("non-empty");

    let edges = edge_indices(n);
    let diffs: Vec<f64> = edges
        .windows(2)
        .filter(|w| w[1] == w[0] + 1)
        .map(|w| mag[w[1]] - mag[w[0]])
        .collect();
    let noise = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len().max(1) as f64 / 2.0).sqrt();
    let depth = 1.0 - smooth[imin];
    if !(depth > 3.0 * noise) || depth <= 0.0 {
        return Err(Error::NoResonance(format!(
            "dip depth {depth:.3e} is not above three times the noise floor {noise:.3e}"
        )));
    }

    let c = Complex64::new(1.0, 0.0) - z[imin];
    let dip: Vec<f64> = z.iter().map(|v| (Complex64::new(1.0, 0.0) - v).norm_sqr()).collect();
    let half = 0.5 * dip[imin];
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imin;
        for i in range {
            if dip[i] < half {
                let t = (dip[prev] - half) / (dip[prev] - dip[i]);
                return Some(f[prev] + t * (f[i] - f[prev]));
            }
            prev = i;
        }
        None
    };
    let left = crossing(&mut (0..imin).rev());
    let right = crossing(&mut (imin + 1..n));
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (f[imin] - l),
        (None, Some(r)) => 2.0 * (r - f[imin]),
        (None, None) => {
            return Err(Error::Analysis("resonance linewidth is not resolved by the trace".into()));
        }
    };
    if !(width > 0.0) {
        return Err(Error::Analysis("resonance linewidth is not resolved by the trace".into()));
    }
    let f_ref = f[imin];
    if f_ref - f[0] < MIN_SPAN_LINEWIDTHS * width || f[n - 1] - f_ref < MIN_SPAN_LINEWIDTHS * width {
        return Err(Error::Analysis(format!(
            "trace must span {MIN_SPAN_LINEWIDTHS} linewidths ({width:.4e} Hz each) on both sides of the resonance"
        )));
    }
    let q = f_ref / width;
    let phi = c.arg().clamp(-1.4, 1.4);
    let q_external = q / c.norm().max(1e-6);
    let inv_qi = 1.0 / q - phi.cos() / q_external;
    let q_internal = if inv_qi > 1e-3 / q { 1.0 / inv_qi } else { 100.0 * q };
    Ok(Guess {
        f_ref,
        width,
        q_internal,
        q_external,
        phi,
    })
}

/// Fits `S21 = 1 − (Q/|Q_e|)e^{iφ}/(1 + 2iQ(f − f0)/f0)` in the complex
/// plane after normalizing by the off-resonant baseline.
///
/// The baseline is refined by dividing the outer points by the current
/// resonance model, which removes the bias from the resonance tails.
pub fn fit_s21(trace: &S21Trace) -> Result<ResonatorFit> {
    if trace.len() < 20 {
        return Err(Error::Analysis(format!("S21 trace has only {} points", trace.len())));
    }
    let f = &trace.frequency;
    let mut z = normalize_with(trace, &|_| Complex64::new(1.0, 0.0));
    let g = initial_guess(f, &z)?;
    let (f_ref, w0) = (g.f_ref, g.width);
    let (f_first, f_last) = (f[0], f[f.len() - 1]);

    let mut params = vec![0.0, g.q_internal.ln(), g.q_external.ln(), g.phi];
    let mut last = None;
    for iteration in 0..MAX_BASELINE_ITERATIONS {
        if iteration > 0 {
            let p = params.clone();
            z = normalize_with(trace, &|fr| s21_model(fr, f_ref + p[0] * w0, p[1].exp(), p[2].exp(), p[3]));
        }
        let problem = FitProblem::complex(
            move |fr, p| s21_model(fr, f_ref + p[0] * w0, p[1].exp(), p[2].exp(), p[3]),
            params.clone(),
        )
        .names(["f0_offset", "ln_qi", "ln_qe", "phi"])
        .bound(0, (f_first - f_ref) / w0, (f_last - f_ref) / w0)
        .bound(3, -std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        let data = Trace::complex("s21", f.clone(), z.clone());
        let result = fit(&problem, &data)?;
        let moved = result
            .params
            .iter()
            .zip(&params)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        params = result.params.clone();
        last = Some(result);
        if iteration > 0 && moved < BASELINE_CONVERGENCE {
            break;
        }
    }
    let result = last.expect("at least one iteration");
    let p = &result.params;
    let (qi, qe, phi) = (p[1].exp(), p[2].exp(), p[3]);
    let q = loaded_q(qi, qe, phi);
    let cov = &result.covariance;
    let finite = |v: f64| v.is_finite().then_some(v);
    // Q depends on (ln Q_i, ln Q_e, φ) through 1/Q = 1/Q_i + cos φ/Q_e.
    let grad = [q * q / qi, q * q * phi.cos() / qe, q * q * phi.sin() / qe];
    let mut var_q = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            var_q += grad[a] * cov[a + 1][b + 1] * grad[b];
        }
    }
    let sigma = &result.param_uncertainties;
    Ok(ResonatorFit {
        f0: f_ref + p[0] * w0,
        q_total: q,
        q_internal: qi,
        q_external_mag: qe,
        phi,
        photon_number: None,
        f0_uncertainty: finite(sigma[0] * w0),
        q_total_uncertainty: finite(var_q.max(0.0).sqrt()),
        q_internal_uncertainty: finite(sigma[1] * qi),
        q_external_uncertainty: finite(sigma[2] * qe),
        phi_uncertainty: finite(sigma[3]),
        at_bound: result.any_at_bound() || !result.converged,
        reduced_chi_square: result.reduced_chi_square(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f0: f64, qi: f64, qe: f64, phi: f64, n: usize, span: f64) -> S21Trace {
        let q = loaded_q(qi, qe, phi);
        let half = span * f0 / q;
        let f: Vec<f64> = (0..n).map(|k| f0 - half + 2.0 * half * k as f64 / (n - 1) as f64).collect();
        let z = f.iter().map(|&x| s21_model(x, f0, qi, qe, phi)).collect();
        S21Trace::new(f, z).unwrap()
    }

    #[test]
    fn noiseless_recovery() {
        let t = synthetic(6e9, 9e5, 2.6e5, 0.1, 801, 10.0);
        let r = fit_s21(&t).unwrap();
        assert!((r.f0 / 6e9 - 1.0).abs() < 1e-9);
        assert!((r.q_internal / 9e5 - 1.0).abs() < 1e-4, "{}", r.q_internal);
        assert!((r.q_external_mag / 2.6e5 - 1.0).abs() < 1e-4);
        assert!((r.phi - 0.1).abs() < 1e-4);
        assert!((r.loaded_inverse_q() * r.q_total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phase_rotation_invariance() {
        let t = synthetic(5e9, 4e5, 1e5, -0.3, 601, 8.0);
        let mut rotated = t.clone();
        let rot = Complex64::from_polar(1.0, 1.1);
        rotated.s21.iter_mut().for_each(|z| *z *= rot);
        let a = fit_s21(&t).unwrap();
        let b = fit_s21(&rotated).unwrap();
        for (x, y) in [
            (a.f0, b.f0),
            (a.q_internal, b.q_internal),
            (a.q_external_mag, b.q_external_mag),
            (a.phi, b.phi),
        ] {
            assert!((x - y).abs() <= 1e-3 * x.abs().max(1e-3));
        }
    }

    #[test]
    fn flat_trace_has_no_resonance() {
        let f: Vec<f64> = (0..200).map(|k| 6e9 + 1e3 * k as f64).collect();
        let z = vec![Complex64::new(1.0, 0.0); 200];
        let t = S21Trace::new(f, z).unwrap();
        assert!(matches!(fit_s21(&t), Err(Error::NoResonance(_))));
    }

    #[test]
    fn narrow_span_rejected() {
        let t = synthetic(6e9, 9e5, 2.6e5, 0.0, 201, 1.5);
        assert!(matches!(fit_s21(&t), Err(Error::Analysis(_))));
    }
}
