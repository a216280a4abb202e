//! Mattis-Bardeen conductivity against an independent composite Simpson
//! evaluation with singularity-removing substitutions.

use scqkit::physics::mattis_bardeen;

/// eV/K
const KB: f64 = 8.617_333_262e-5;
/// eV·s
const H_EV: f64 = 4.135_667_696e-15;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

fn fermi(e: f64, kt: f64) -> f64 {
    1.0 / ((e / kt).exp() + 1.0)
}

/// σ1/σn with E = Δ + u², which cancels the 1/√(E − Δ) edge.
fn sigma1(freq: f64, t: f64, delta: f64) -> f64 {
    let (hw, kt) = (H_EV * freq, KB * t);
    let u_max = (60.0 * kt + 20.0 * hw).sqrt();
    let g = |u: f64| {
        let e = delta + u * u;
        let num = (fermi(e, kt) - fermi(e + hw, kt)) * (e * e + delta * delta + hw * e);
        2.0 * num / ((2.0 * delta + u * u).sqrt() * ((e + hw).powi(2) - delta * delta).sqrt())
    };
    2.0 / hw * simpson(g, 0.0, u_max, 200_000)
}

/// σ2/σn over E ∈ [Δ − ħω, Δ] with E = Δ − ħω·sin²φ, which cancels both
/// square-root edges.
fn sigma2(freq: f64, t: f64, delta: f64) -> f64 {
    let (hw, kt) = (H_EV * freq, KB * t);
    let g = |phi: f64| {
        let e = delta - hw * phi.sin().powi(2);
        let num = (1.0 - 2.0 * fermi(e + hw, kt)) * (e * e + delta * delta + hw * e);
        2.0 * num / ((delta + e).sqrt() * (e + hw + delta).sqrt())
    };
    simpson(g, 0.0, std::f64::consts::FRAC_PI_2, 20_000) / hw
}

#[test]
fn matches_independent_quadrature() {
    let delta = 1.76 * KB * 9.2;
    for &(f, t) in &[(6e9, 2.0), (6e9, 4.6), (20e9, 3.0), (5e9, 1.5), (100e9, 4.0)] {
        let r = mattis_bardeen(f, t, delta).unwrap();
        let (s1, s2) = (sigma1(f, t, delta), sigma2(f, t, delta));
        assert!((r.sigma1_over_sigman / s1 - 1.0).abs() < 1e-7, "σ1 at {f} Hz, {t} K: {} vs {s1}", r.sigma1_over_sigman);
        assert!((r.sigma2_over_sigman / s2 - 1.0).abs() < 1e-7, "σ2 at {f} Hz, {t} K: {} vs {s2}", r.sigma2_over_sigman);
    }
}
