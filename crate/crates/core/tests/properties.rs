//! Property tests for the invariants of each module.

use proptest::prelude::*;

use scqkit::film::{extract_tc, FilmConfig, FilmGeometry, RtTrace};
use scqkit::fit::{fit, FitProblem};
use scqkit::io::{parse_trace, TraceFile, TraceKind};
use scqkit::junction::{
    annealing_ratio, fit_annealing, fit_area_scaling, jc_from_calibration, predict_junction, AreaSample,
    JunctionGeometry, SpacerProcess, WaferCalibration,
};
use scqkit::physics::constants::K_B_EV;
use scqkit::physics::{delta0_from_tc, kinetic_parameters, mattis_bardeen, quasiparticle_density, tc_from_delta0};
use scqkit::qubit::{loss_budget_fit, transmon_spectrum, CoherenceRecord, SpectrumMode};
use scqkit::resonator::{
    fit_qi_vs_temperature, fit_s21, loaded_q, s21_model, tls_loss, QiTempOptions, S21Trace, TlsParams,
};
use scqkit::Trace;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

fn costly() -> ProptestConfig {
    ProptestConfig::with_cases(12)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn gap_linear_and_round_trips(tc in 0.05f64..50.0, k in 0.1f64..10.0) {
        let d = delta0_from_tc(tc).unwrap();
        prop_assert!(rel(d, 1.76 * K_B_EV * tc) < 1e-15);
        prop_assert!(rel(delta0_from_tc(k * tc).unwrap(), k * d) < 1e-14);
        prop_assert!(rel(tc_from_delta0(d).unwrap(), tc) < 1e-15);
    }

    #[test]
    fn qp_density_monotone(t in 0.2f64..5.0, dt in 0.01f64..0.5, delta in 1e-4f64..2e-3, dd in 1e-6f64..1e-4) {
        let x = quasiparticle_density(t, delta).unwrap();
        prop_assume!(x > 0.0);
        prop_assert!(quasiparticle_density(t + dt, delta).unwrap() > x);
        prop_assert!(quasiparticle_density(t, delta + dd).unwrap() < x);
    }

    #[test]
    fn kinetic_scaling(rho in 1e-9f64..1e-6, thick in 20e-9f64..500e-9, tc in 1.0f64..12.0, k in 1.5f64..20.0) {
        let d = delta0_from_tc(tc).unwrap();
        let a = kinetic_parameters(rho, thick, d).unwrap();
        let b = kinetic_parameters(k * rho, thick, d).unwrap();
        prop_assert!(rel(b.london_depth / a.london_depth, k.sqrt()) < 1e-12);
        // L_K·Δ0 depends on R_□ only: scale ρ and t together, and Δ0 alone.
        let c = kinetic_parameters(k * rho, k * thick, d / k).unwrap();
        prop_assert!(rel(c.kinetic_inductance * d / k, a.kinetic_inductance * d) < 1e-12);
    }

    #[test]
    fn area_fit_symmetric_in_labels(rho in 5e-13f64..5e-11, bias in 0.0f64..300e-9, seed in 0u64..1000) {
        let mut rng = scqkit::synth::rng(seed);
        let mut samples = Vec::new();
        for (k, w) in [0.8e-6, 1.1e-6, 1.5e-6, 2.2e-6, 3.0e-6].into_iter().enumerate() {
            let h = w * (1.0 + 0.2 * k as f64);
            let r = rho / ((w - bias) * (h - bias)) * (1.0 + scqkit::synth::gaussian(&mut rng, 0.01));
            samples.push(AreaSample { design_width: w, design_height: h, resistance: r });
        }
        let swapped: Vec<AreaSample> = samples
            .iter()
            .map(|s| AreaSample { design_width: s.design_height, design_height: s.design_width, ..*s })
            .collect();
        let a = fit_area_scaling(&samples).unwrap();
        let b = fit_area_scaling(&swapped).unwrap();
        prop_assert!(rel(a.specific_resistance, b.specific_resistance) < 1e-9);
        prop_assert!((a.dimension_bias - b.dimension_bias).abs() < 1e-9 * 1e-6);
    }

    #[test]
    fn prediction_composes(rho in 1e-13f64..1e-9, icrn in 1e-4f64..3e-3, w in 0.3e-6f64..5e-6, h in 0.3e-6f64..5e-6, bias in 0.0f64..200e-9) {
        let cal = WaferCalibration::new(rho, bias, icrn, 100.0, SpacerProcess::Hdpcvd, 9.2).unwrap();
        let geom = JunctionGeometry::new(w, h, bias).unwrap();
        let p = predict_junction(&geom, &cal).unwrap();
        let jc = jc_from_calibration(rho, icrn).unwrap();
        prop_assert!(rel(p.ic, jc * p.effective_area) < 1e-12);
    }

    #[test]
    fn anneal_fit_no_worse_than_truth(alpha in 0.005f64..0.3, tau in 60.0f64..900.0) {
        let times: Vec<f64> = (0..12).map(|k| 2000.0 * k as f64 / 11.0).collect();
        let pts: Vec<(f64, f64)> = times.iter().map(|&t| (t, annealing_ratio(t, alpha, tau))).collect();
        let f = fit_annealing(&pts).unwrap();
        let ssr = |a: f64, tt: f64| pts.iter().map(|&(t, r)| ((annealing_ratio(t, a, tt) - r) / r).powi(2)).sum::<f64>();
        prop_assert!(ssr(f.alpha, f.tau) <= ssr(alpha, tau) + 1e-20);
    }

    #[test]
    fn tls_loss_monotone(n in 0.0f64..1e5, dn in 0.1f64..100.0, t in 0.02f64..2.0, dt in 0.001f64..0.5,
                         f in 3e9f64..8e9, fd in 1e-7f64..1e-5, nc in 0.5f64..1e3, beta in 0.1f64..1.0) {
        let p = TlsParams { f_delta0: fd, n_c: nc, beta };
        let base = tls_loss(n, t, f, &p).unwrap();
        prop_assert!(tls_loss(n + dn, t, f, &p).unwrap() < base);
        prop_assert!(tls_loss(n, t + dt, f, &p).unwrap() < base);
    }

    #[test]
    fn q1_construction_identity(f in 1e9f64..10e9, t1 in 1e-6f64..1e-3) {
        let r = CoherenceRecord::new(f, t1, t1, t1, None).unwrap();
        prop_assert_eq!(r.q1, std::f64::consts::TAU * f * t1);
    }

    #[test]
    fn charge_basis_converged(ej in 4e9f64..40e9, ratio in 20.0f64..200.0, ng in 0.0f64..1.0) {
        let ec = ej / ratio;
        let a = transmon_spectrum(ej, ec, SpectrumMode::Exact { cutoff: 20, n_g: ng }).unwrap();
        let b = transmon_spectrum(ej, ec, SpectrumMode::Exact { cutoff: 40, n_g: ng }).unwrap();
        prop_assert!(rel(a.f01, b.f01) < 1e-9);
    }

    #[test]
    fn budget_noiseless(qj in 1e4f64..1e6, q0 in 1e5f64..1e7) {
        let pts: Vec<(f64, f64)> = [0.02, 0.05, 0.1, 0.2, 0.3]
            .iter()
            .map(|&p| (p, 1.0 / (p / qj + (1.0 - p) / q0)))
            .collect();
        let fit = loss_budget_fit(&pts).unwrap();
        prop_assert!(rel(fit.q_junction, qj) < 1e-6);
        prop_assert!(rel(fit.q_other, q0) < 1e-6);
        for &(p, q) in &pts {
            prop_assert!(rel(fit.q1(p), q) < 1e-10);
        }
    }

    #[test]
    fn trace_file_round_trip(values in prop::collection::vec((any::<f64>(), any::<f64>()), 1..40)) {
        let values: Vec<(f64, f64)> = values.into_iter().filter(|(a, b)| a.is_finite() && b.is_finite()).collect();
        prop_assume!(!values.is_empty());
        let cols = vec![values.iter().map(|p| p.0).collect(), values.iter().map(|p| p.1).collect()];
        let file = TraceFile::new(TraceKind::Iv, cols).unwrap().with_text("wafer_id", "W1");
        let text = file.serialize();
        let back = parse_trace(&text, Some(TraceKind::Iv)).unwrap();
        for name in ["current", "voltage"] {
            let (a, b) = (file.column(name).unwrap(), back.column(name).unwrap());
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn fit_invariant_to_order_and_weight_scale(a in 0.5f64..5.0, b in -2.0f64..2.0, shift in 1usize..29, c in 0.01f64..100.0) {
        let x: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(k, &t)| a * (-t).exp() + b * t + 0.01 * ((k * 7) % 5) as f64).collect();
        let model = |t: f64, p: &[f64]| p[0] * (-p[2] * t).exp() + p[1] * t;
        let base = fit(&FitProblem::real(model, vec![1.0, 0.0, 1.0]), &Trace::real("d", x.clone(), y.clone())).unwrap();

        let mut xr = x.clone();
        let mut yr = y.clone();
        xr.rotate_left(shift);
        yr.rotate_left(shift);
        let rotated = fit(&FitProblem::real(model, vec![1.0, 0.0, 1.0]), &Trace::real("d", xr, yr)).unwrap();
        for (p, q) in base.params.iter().zip(&rotated.params) {
            prop_assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
        }

        let scaled = fit(
            &FitProblem::real(model, vec![1.0, 0.0, 1.0]).weights(vec![c; 30]),
            &Trace::real("d", x, y),
        )
        .unwrap();
        for (p, q) in base.params.iter().zip(&scaled.params) {
            prop_assert!((p - q).abs() <= 1e-8 * p.abs().max(1.0));
        }
    }

    #[test]
    fn linear_fit_matches_normal_equations(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
        let x: Vec<f64> = (0..25).map(|k| -1.0 + k as f64 / 12.0).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(k, &t)| a + b * t + c * t * t + 0.05 * (k as f64 * 1.3).sin()).collect();
        let f = fit(&FitProblem::real(|t, p| p[0] + p[1] * t + p[2] * t * t, vec![0.0; 3]), &Trace::real("q", x.clone(), y.clone())).unwrap();
        // Normal equations solved independently by Cramer's rule.
        let mut m = [[0.0f64; 3]; 3];
        let mut v = [0.0f64; 3];
        for (&t, &yy) in x.iter().zip(&y) {
            let phi = [1.0, t, t * t];
            for i in 0..3 {
                v[i] += phi[i] * yy;
                for j in 0..3 {
                    m[i][j] += phi[i] * phi[j];
                }
            }
        }
        let det = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(&m);
        let expect: Vec<f64> = (0..3)
            .map(|i| {
                let mut mi = m;
                for r in 0..3 {
                    mi[r][i] = v[r];
                }
                det(&mi) / d
            })
            .collect();
        // Relative to the parameter vector norm.
        let norm = expect.iter().map(|e| e * e).sum::<f64>().sqrt().max(1e-12);
        let err = f.params.iter().zip(&expect).map(|(p, e)| (p - e).powi(2)).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-8 * norm, "{:?} vs {:?}", f.params, expect);
    }
}

proptest! {
    #![proptest_config(costly())]

    #[test]
    fn mattis_bardeen_signs_and_monotone(f in 2e9f64..12e9, frac in 0.05f64..0.85, step in 0.02f64..0.1) {
        let tc = 9.2;
        let d = delta0_from_tc(tc).unwrap();
        let a = mattis_bardeen(f, frac * tc, d).unwrap();
        let b = mattis_bardeen(f, (frac + step) * tc, d).unwrap();
        prop_assert!(a.sigma1_over_sigman >= 0.0 && a.sigma2_over_sigman >= 0.0);
        prop_assert!(b.sigma2_over_sigman < a.sigma2_over_sigman);
    }

    #[test]
    fn tc_invariant_to_rescaling(tc in 5.0f64..12.0, width in 0.02f64..0.3, c in 0.01f64..100.0) {
        let spec = scqkit::synth::RtSpec {
            tc,
            width,
            r_residual: 5.0,
            r_room: 20.0,
            geometry: FilmGeometry { length: 1e-3, width: 1e-5, thickness: 2e-7 },
        };
        let pts: Vec<(f64, f64)> = (0..200).map(|k| {
            let t = 2.0 + 0.1 * k as f64;
            (t, spec.resistance(t))
        }).collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(t, r)| (t, c * r)).collect();
        let cfg = FilmConfig::default();
        let a = extract_tc(&RtTrace::new(pts, None).unwrap(), &cfg).unwrap();
        let b = extract_tc(&RtTrace::new(scaled, None).unwrap(), &cfg).unwrap();
        prop_assert!((a.tc - b.tc).abs() < 1e-9);
        prop_assert!((a.width - b.width).abs() < 1e-9);
    }

    #[test]
    fn s21_fit_consistent(qi in 1e5f64..2e6, qe in 5e4f64..1e6, phi in -0.5f64..0.5, rot in -3.0f64..3.0) {
        let f0 = 6e9;
        let half = 8.0 * f0 / loaded_q(qi, qe, phi);
        let f: Vec<f64> = (0..601).map(|k| f0 - half + 2.0 * half * k as f64 / 600.0).collect();
        let z: Vec<_> = f.iter().map(|&x| s21_model(x, f0, qi, qe, phi)).collect();
        let rz: Vec<_> = z.iter().map(|v| v * num_complex::Complex64::from_polar(1.0, rot)).collect();
        let a = fit_s21(&S21Trace::new(f.clone(), z).unwrap()).unwrap();
        let b = fit_s21(&S21Trace::new(f, rz).unwrap()).unwrap();
        let inv = 1.0 / a.q_internal + a.phi.cos() / a.q_external_mag;
        prop_assert!((inv * a.q_total - 1.0).abs() < 1e-9);
        prop_assert!(a.q_internal > 0.0 && a.q_external_mag > 0.0 && a.phi.abs() < std::f64::consts::FRAC_PI_2);
        for (x, y) in [(a.q_internal, b.q_internal), (a.q_external_mag, b.q_external_mag), (a.f0, b.f0)] {
            prop_assert!(rel(x, y) < 1e-3);
        }
        prop_assert!((a.phi - b.phi).abs() < 1e-3);
    }

    #[test]
    fn qi_temperature_constant_data(q in 1e4f64..1e7) {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| (0.3 + 0.5 * k as f64, q)).collect();
        let opts = QiTempOptions {
            tls: TlsParams { f_delta0: 0.0, ..TlsParams::default() },
            fit_tls: false,
            fix_alpha: Some(0.0),
            ..QiTempOptions::default()
        };
        let f = fit_qi_vs_temperature(&pts, 6e9, 9.2, 1.0, &opts).unwrap();
        prop_assert!(rel(f.q_other, q) < 1e-12, "{} vs {}", f.q_other, q);
    }
}
