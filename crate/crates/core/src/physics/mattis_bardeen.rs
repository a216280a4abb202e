//! Mattis-Bardeen complex conductivity in the sub-gap regime (ħω < 2Δ).
//!
//! Energies are normalized to the gap: ε = E/Δ, w = ħω/Δ, θ = k_B·T/Δ.
//!
//! ```text
//! σ1/σn = (2/w) ∫_1^∞ [f(ε) − f(ε+w)] (ε² + 1 + wε) / (√(ε²−1) √((ε+w)²−1)) dε
//! σ2/σn = (1/w) ∫_{1−w}^1 tanh((ε+w)/2θ) (ε² + 1 + wε) / (√(1−ε²) √((ε+w)²−1)) dε
//! ```
//!
//! The inverse-square-root band-edge singularities are removed with the
//! substitutions ε = 1 + u² (σ1) and ε = 1 − w + v², ε = 1 − s² on the two
//! halves of the σ2 interval.

use serde::{Deserialize, Serialize};

use super::constants::{photon_energy_ev, thermal_energy_ev};
use super::quad::{integrate, QuadOptions};
use crate::error::{require_non_negative, require_positive, Error, Result};

/// Exponent range kept in the thermal tail of the σ1 integrand.
const TAIL_EXPONENT: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexConductivityRatio {
    pub sigma1_over_sigman: f64,
    pub sigma2_over_sigman: f64,
    /// Hz
    pub frequency: f64,
    /// K
    pub temperature: f64,
    /// eV
    pub delta: f64,
}

impl ComplexConductivityRatio {
    /// σ2/σ1, the conduction-limited quality factor for unit kinetic fraction.
    pub fn sigma2_over_sigma1(&self) -> f64 {
        self.sigma2_over_sigman / self.sigma1_over_sigman
    }

    /// σ1/σ2; zero when no quasiparticles are present.
    pub fn sigma1_over_sigma2(&self) -> f64 {
        self.sigma1_over_sigman / self.sigma2_over_sigman
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbTolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for MbTolerance {
    fn default() -> Self {
        MbTolerance {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
        }
    }
}

impl MbTolerance {
    pub fn scaled(self, factor: f64) -> Self {
        MbTolerance {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
        }
    }

    fn quad(self) -> QuadOptions {
        QuadOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_intervals: 20_000,
            require_both: true,
        }
    }
}

/// Fermi function 1/(e^x + 1) without overflow for either sign of x.
fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// f(a) − f(b) for b > a, written to avoid cancellation.
fn fermi_difference(a: f64, b: f64) -> f64 {
    fermi(a) * fermi(-b) * -(a - b).exp_m1()
}

/// Mattis-Bardeen σ1/σn and σ2/σn with the default tolerance.
pub fn mattis_bardeen(freq: f64, t: f64, delta: f64) -> Result<ComplexConductivityRatio> {
    mattis_bardeen_with(freq, t, delta, MbTolerance::default())
}

pub fn mattis_bardeen_with(
    freq: f64,
    t: f64,
    delta: f64,
    tol: MbTolerance,
) -> Result<ComplexConductivityRatio> {
    require_positive("frequency", freq)?;
    require_non_negative("temperature", t)?;
    require_positive("delta", delta)?;
    let w = photon_energy_ev(freq) / delta;
    if w >= 2.0 {
        return Err(Error::Unsupported(format!(
            "photon energy {:.4e} eV is above the pair-breaking threshold 2Δ = {:.4e} eV",
            w * delta,
            2.0 * delta
        )));
    }
    let theta = thermal_energy_ev(t) / delta;
    let sigma1 = sigma1_normalized(w, theta, tol)?;
    let sigma2 = sigma2_normalized(w, theta, tol)?;
    Ok(ComplexConductivityRatio {
        sigma1_over_sigman: sigma1,
        sigma2_over_sigman: sigma2,
        frequency: freq,
        temperature: t,
        delta,
    })
}

fn sigma1_normalized(w: f64, theta: f64, tol: MbTolerance) -> Result<f64> {
    if theta == 0.0 {
        return Ok(0.0);
    }
    let u_max = (TAIL_EXPONENT * theta).sqrt();
    let integrand = |u: f64| {
        let u2 = u * u;
        let e = 1.0 + u2;
        let thermal = fermi_difference(e / theta, (e + w) / theta);
        if thermal == 0.0 {
            return 0.0;
        }
        let num = e * e + 1.0 + w * e;
        // √(ε+1)·√((ε+w)²−1) with (ε+w)²−1 = (u²+w)(u²+w+2)
        let den = (e + 1.0).sqrt() * ((u2 + w) * (u2 + w + 2.0)).sqrt();
        2.0 * thermal * num / den
    };
    let r = integrate(integrand, 0.0, u_max, tol.quad())?;
    Ok(2.0 / w * r.value)
}

fn sigma2_normalized(w: f64, theta: f64, tol: MbTolerance) -> Result<f64> {
    let occupation = |e: f64| {
        if theta == 0.0 {
            1.0
        } else {
            ((e + w) / (2.0 * theta)).tanh()
        }
    };
    let edge = (0.5 * w).sqrt();
    // ε = 1 − w + v²: lower band edge of the shifted density of states.
    let lower = |v: f64| {
        let v2 = v * v;
        let e = 1.0 - w + v2;
        let one_minus_e = w - v2;
        let num = e * e + 1.0 + w * e;
        let den = (one_minus_e * (1.0 + e)).sqrt() * (e + w + 1.0).sqrt();
        2.0 * occupation(e) * num / den
    };
    // ε = 1 − s²: upper band edge.
    let upper = |s: f64| {
        let s2 = s * s;
        let e = 1.0 - s2;
        let num = e * e + 1.0 + w * e;
        let den = (1.0 + e).sqrt() * ((e + w - 1.0) * (e + w + 1.0)).sqrt();
        2.0 * occupation(e) * num / den
    };
    let a = integrate(lower, 0.0, edge, tol.quad())?;
    let b = integrate(upper, 0.0, edge, tol.quad())?;
    Ok((a.value + b.value) / w)
}
