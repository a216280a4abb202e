//! Helpers shared by the integration test targets.

use std::path::Path;

use scqkit::io::{AnalysisReport, ReportStatus};
use scqkit::synth::BundleTruth;

pub fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

pub fn without_timestamp(json: &str) -> String {
    json.lines()
        .filter(|l| !l.trim_start().starts_with("\"created_at\""))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn check_against_truth(report: &AnalysisReport, truth: &BundleTruth) {
    assert_eq!(report.status, ReportStatus::Complete, "{:#?}", report.errors);

    let film = &report.film[0].film;
    assert!((film.tc - truth.film.tc).abs() < 0.01, "tc {}", film.tc);
    assert!(rel(film.rrr, truth.film.rrr()) < 0.01, "rrr {}", film.rrr);
    assert!(rel(film.rho0, truth.film.rho0()) < 0.01, "rho0 {}", film.rho0);

    let iv = &report.iv[0].analysis;
    assert!(rel(iv.switching_current, truth.iv_ic) < 0.02, "Isw {}", iv.switching_current);
    assert!(rel(iv.normal_resistance, truth.iv_rn) < 0.02, "Rn {}", iv.normal_resistance);

    let cal = &report.calibrations[0].calibration;
    assert!(rel(cal.specific_resistance, truth.calibration.specific_resistance) < 0.05);
    assert!(rel(cal.dimension_bias, truth.calibration.dimension_bias) < 0.05, "bias {}", cal.dimension_bias);
    assert!(rel(cal.jc, truth.calibration.jc) < 0.05, "jc {}", cal.jc);
    cal.validate().unwrap();

    let anneal = &report.anneal[0];
    assert!(rel(anneal.tau, truth.anneal_tau) < 0.15, "tau {}", anneal.tau);
    assert!(rel(anneal.alpha, truth.anneal_alpha) < 0.15, "alpha {}", anneal.alpha);

    for e in &truth.exposure {
        let row = report.exposure.iter().find(|r| r.process == e.process).unwrap();
        assert!((row.exponent - e.exponent).abs() < 0.02, "{} exponent {}", e.process, row.exponent);
        assert!(rel(row.prefactor, e.prefactor) < 0.1, "{} prefactor {}", e.process, row.prefactor);
    }

    for r in &truth.resonators {
        let row = report
            .resonators
            .iter()
            .find(|x| Path::new(&x.source) == r.file)
            .unwrap();
        let f = &row.fit;
        assert!(rel(f.f0, r.spec.f0) < 1e-6);
        assert!(rel(f.q_internal, r.spec.q_internal) < 0.02, "qi {}", f.q_internal);
        assert!(rel(f.q_external_mag, r.spec.q_external_mag) < 0.02, "qe {}", f.q_external_mag);
        assert!((f.phi - r.spec.phi).abs() < 0.01, "phi {}", f.phi);
        assert!(f.photon_number.unwrap() > 0.0);
    }

    let qp = &report.qi_power[0];
    assert!(rel(qp.tls.f_delta0, truth.qi_power_tls.f_delta0) < 0.1, "F delta0 {}", qp.tls.f_delta0);
    assert!(rel(qp.tls.n_c, truth.qi_power_tls.n_c) < 0.1, "n_c {}", qp.tls.n_c);
    assert!(rel(qp.q_other, truth.qi_power_q_other) < 0.1, "q_other {}", qp.q_other);

    let qt = &report.qi_temperature[0];
    assert!(rel(qt.q_other, truth.qi_temp_q_other) < 0.15, "q_other {}", qt.q_other);
    assert!(rel(qt.alpha_kin, truth.qi_temp_alpha) < 0.15, "alpha {}", qt.alpha_kin);

    assert_eq!(report.qubits.len(), truth.qubits.len());
    for q in &truth.qubits {
        let row = report.qubits.iter().find(|r| r.name == q.name).unwrap();
        assert_eq!(row.record.f_q, q.f_q);
        assert!(rel(row.record.q1, q.q1) < 0.02, "{} q1 {}", q.name, row.record.q1);
        assert!(rel(row.record.t2_star, q.t2_star) < 0.03, "{} t2* {}", q.name, row.record.t2_star);
        assert!(rel(row.record.t2_echo, q.t2_echo) < 0.03, "{} t2e {}", q.name, row.record.t2_echo);
        let t = row.transmon.as_ref().unwrap();
        assert!(rel(t.participation_pj, q.participation_pj) < 0.1);
    }
    let b = report.budget.as_ref().unwrap();
    assert!(rel(b.q_junction, truth.q_junction) < 0.25, "Q_J {}", b.q_junction);
    assert!(rel(b.q_other, truth.q_other) < 0.25, "Q_0 {}", b.q_other);
}
