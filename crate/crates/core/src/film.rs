//! Superconducting film parameters from resistance-vs-temperature traces:
//! transition temperature and width, residual resistivity ratio, residual
//! resistivity, sheet kinetic inductance and London depth.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::physics::{delta0_from_tc, kinetic_parameters};

/// Sample geometry of a four-terminal resistance bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilmGeometry {
    /// m, between voltage taps
    pub length: f64,
    /// m
    pub width: f64,
    /// m
    pub thickness: f64,
}

/// R(T) measurement, sorted by ascending temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct RtTrace {
    points: Vec<(f64, f64)>,
    pub geometry: Option<FilmGeometry>,
}

impl RtTrace {
    pub fn new(mut points: Vec<(f64, f64)>, geometry: Option<FilmGeometry>) -> Result<Self> {
        if let Some(&(t, r)) = points.iter().find(|(t, r)| !(t.is_finite() && *t > 0.0) || !r.is_finite()) {
            return Err(Error::domain(format!("invalid R(T) point ({t} K, {r} Ω)")));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(RtTrace { points, geometry })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Linear interpolation; linear extrapolation from the last two points is
    /// allowed up to `extrapolate` kelvin past either end.
    fn resistance_at(&self, t: f64, extrapolate: f64) -> Option<f64> {
        let pts = &self.points;
        if pts.len() < 2 {
            return None;
        }
        let (first, last) = (pts[0].0, pts[pts.len() - 1].0);
        if t < first - extrapolate || t > last + extrapolate {
            return None;
        }
        let j = match pts.iter().position(|p| p.0 >= t) {
            Some(0) => 1,
            Some(j) => j,
            None => pts.len() - 1,
        };
        let (t0, r0) = pts[j - 1];
        let (t1, r1) = pts[j];
        if t1 == t0 {
            return Some(r1);
        }
        Some(r0 + (r1 - r0) * (t - t0) / (t1 - t0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilmConfig {
    /// K, reference for the T_c shift
    pub bulk_tc: f64,
    /// K, allowed excess of T_c over the bulk reference before a warning
    pub bulk_tc_tolerance: f64,
    /// K above the transition used to estimate the normal-state plateau
    pub plateau_window: f64,
    /// K
    pub room_temperature: f64,
    /// K above T_c where the residual resistance is read
    pub residual_offset: f64,
}

impl Default for FilmConfig {
    fn default() -> Self {
        FilmConfig {
            bulk_tc: 9.3,
            bulk_tc_tolerance: 0.05,
            plateau_window: 2.0,
            room_temperature: 300.0,
            residual_offset: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcEstimate {
    /// K, 50% crossing
    pub tc: f64,
    /// K, T(90%) − T(10%)
    pub width: f64,
    /// Ω, normal-state plateau
    pub plateau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilmReport {
    pub tc: f64,
    pub tc_width: f64,
    pub rrr: f64,
    pub rho0: f64,
    pub sheet_resistance: f64,
    pub kinetic_inductance: f64,
    pub london_depth: f64,
    pub delta_tc_from_bulk: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Rising crossing of `level` closest to `near`, by linear interpolation.
fn crossing(points: &[(f64, f64)], level: f64, near: f64) -> Option<f64> {
    points
        .windows(2)
        .filter(|w| w[0].1 < level && w[1].1 >= level)
        .map(|w| {
            let (t0, r0) = w[0];
            let (t1, r1) = w[1];
            t0 + (level - r0) * (t1 - t0) / (r1 - r0)
        })
        .min_by(|a, b| (a - near).abs().total_cmp(&(b - near).abs()))
}

/// T_c at the 50% crossing of the normal-state plateau, with the 10–90% width.
///
/// The plateau is the median resistance within `plateau_window` kelvin above
/// the transition; the transition is first located at the steepest rise.
pub fn extract_tc(trace: &RtTrace, config: &FilmConfig) -> Result<TcEstimate> {
    let pts = trace.points();
    if pts.len() < 4 {
        return Err(Error::Analysis(format!("R(T) trace has only {} points", pts.len())));
    }
    let steepest = pts
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].0 > w[0].0)
        .max_by(|(_, a), (_, b)| {
            let sa = (a[1].1 - a[0].1) / (a[1].0 - a[0].0);
            let sb = (b[1].1 - b[0].1) / (b[1].0 - b[0].0);
            sa.total_cmp(&sb)
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Analysis("no resistance rise in trace".into()))?;
    let mut center = 0.5 * (pts[steepest].0 + pts[steepest + 1].0);
    let mut top = pts[steepest + 1].0;
    let r_min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);

    let mut estimate = None;
    for _ in 0..3 {
        let window: Vec<f64> = pts
            .iter()
            .filter(|p| p.0 > top && p.0 <= top + config.plateau_window)
            .map(|p| p.1)
            .collect();
        let plateau = if window.is_empty() {
            match pts.iter().find(|p| p.0 > top) {
                Some(p) => p.1,
                None => return Err(Error::Analysis("trace ends inside the transition".into())),
            }
        } else {
            median(window)
        };
        if !(plateau > 0.0) || r_min >= 0.05 * plateau {
            return Err(Error::Analysis(format!(
                "no superconducting transition: minimum resistance {r_min:.4e} Ω is not below 5% of the plateau {plateau:.4e} Ω"
            )));
        }
        let no_crossing = || Error::Analysis("resistance never crosses 50% of the normal-state plateau".into());
        let tc = crossing(pts, 0.5 * plateau, center).ok_or_else(no_crossing)?;
        let t10 = crossing(pts, 0.1 * plateau, tc).ok_or_else(no_crossing)?;
        let t90 = crossing(pts, 0.9 * plateau, tc).ok_or_else(no_crossing)?;
        estimate = Some(TcEstimate {
            tc,
            width: (t90 - t10).max(0.0),
            plateau,
        });
        center = tc;
        top = t90;
    }
    Ok(estimate.expect("loop runs at least once"))
}

/// RRR = R(room temperature) / R(T_c + offset).
pub fn residual_ratio(trace: &RtTrace, tc: f64, config: &FilmConfig) -> Result<f64> {
    require_positive("tc", tc)?;
    let room = config.room_temperature;
    let r_room = trace.resistance_at(room, 5.0).ok_or_else(|| {
        let last = trace.points().last().map_or(0.0, |p| p.0);
        Error::Analysis(format!(
            "missing room-temperature region: need data within 5 K of {room} K, trace ends at {last} K"
        ))
    })?;
    let t_res = tc + config.residual_offset;
    let r_res = trace.resistance_at(t_res, 0.0).ok_or_else(|| {
        Error::Analysis(format!("missing data just above the transition at {t_res} K"))
    })?;
    if !(r_res > 0.0) {
        return Err(Error::Analysis(format!("non-positive resistance {r_res} Ω above T_c")));
    }
    Ok(r_room / r_res)
}

/// Full film analysis. Requires the sample geometry.
pub fn analyze_film(trace: &RtTrace, config: &FilmConfig) -> Result<FilmReport> {
    if trace.len() < 20 {
        return Err(Error::Analysis(format!(
            "film analysis needs at least 20 R(T) points, got {}",
            trace.len()
        )));
    }
    let geometry = trace
        .geometry
        .ok_or_else(|| Error::Analysis("film analysis needs sample length, width and thickness".into()))?;
    require_positive("length", geometry.length)?;
    require_positive("width", geometry.width)?;
    require_positive("thickness", geometry.thickness)?;

    let est = extract_tc(trace, config)?;
    let rrr = residual_ratio(trace, est.tc, config)?;
    let r_res = trace
        .resistance_at(est.tc + config.residual_offset, 0.0)
        .expect("checked by residual_ratio");
    let rho0 = r_res * geometry.width * geometry.thickness / geometry.length;
    let delta0 = delta0_from_tc(est.tc)?;
    let k = kinetic_parameters(rho0, geometry.thickness, delta0)?;
    let delta_tc_from_bulk = config.bulk_tc - est.tc;

    let mut warnings = Vec::new();
    if delta_tc_from_bulk < -config.bulk_tc_tolerance {
        warnings.push(format!(
            "T_c {:.3} K exceeds the bulk reference {:.3} K by more than {} K",
            est.tc, config.bulk_tc, config.bulk_tc_tolerance
        ));
    }
    if rrr < 1.0 {
        warnings.push(format!("RRR {rrr:.3} below 1 is unusual for a metallic film"));
    }
    Ok(FilmReport {
        tc: est.tc,
        tc_width: est.width,
        rrr,
        rho0,
        sheet_resistance: k.sheet_resistance,
        kinetic_inductance: k.kinetic_inductance,
        london_depth: k.london_depth,
        delta_tc_from_bulk,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic_trace(tc: f64, width: f64, rn: f64, scale: f64) -> RtTrace {
        let mut pts = Vec::new();
        let mut t = 2.0;
        while t <= 300.0 {
            let r = rn * (1.0 + 0.004 * (t - tc).max(0.0)) / (1.0 + (-(t - tc) / width).exp());
            pts.push((t, scale * r));
            t += if (tc - 1.0..tc + 1.0).contains(&t) { 0.01 } else { 0.5 };
        }
        RtTrace::new(pts, None).unwrap()
    }

    #[test]
    fn logistic_midpoint() {
        let est = extract_tc(&logistic_trace(9.2, 0.05, 4.0, 1.0), &FilmConfig::default()).unwrap();
        assert!((est.tc - 9.2).abs() < 0.01, "{}", est.tc);
        // 10-90% of a logistic: 2·ln(9)·w
        assert!((est.width - 2.0 * 9f64.ln() * 0.05).abs() < 0.02);
    }

    #[test]
    fn rescaling_invariance() {
        let a = extract_tc(&logistic_trace(9.0, 0.08, 4.0, 1.0), &FilmConfig::default()).unwrap();
        let b = extract_tc(&logistic_trace(9.0, 0.08, 4.0, 37.5), &FilmConfig::default()).unwrap();
        assert!((a.tc - b.tc).abs() < 1e-12);
        assert!((a.width - b.width).abs() < 1e-12);
    }

    #[test]
    fn normal_metal_has_no_transition() {
        let pts: Vec<_> = (1..=60).map(|i| (5.0 * i as f64, 1.0 + 0.01 * i as f64)).collect();
        let trace = RtTrace::new(pts, None).unwrap();
        assert!(matches!(extract_tc(&trace, &FilmConfig::default()), Err(Error::Analysis(_))));
    }

    #[test]
    fn sharp_step_width_bounded_by_spacing() {
        let spacing = 0.1;
        let pts: Vec<_> = (0..200)
            .map(|i| {
                let t = 5.0 + spacing * i as f64;
                (t, if t < 9.23 { 0.0 } else { 2.0 })
            })
            .collect();
        let est = extract_tc(&RtTrace::new(pts, None).unwrap(), &FilmConfig::default()).unwrap();
        assert!(est.width <= spacing + 1e-12);
        assert!(est.width > 0.0);
        assert!((est.tc - 9.25).abs() < spacing);
    }

    #[test]
    fn flat_normal_state_gives_unit_rrr() {
        let mut pts: Vec<_> = (0..40).map(|i| (2.0 + 0.2 * i as f64, if i < 20 { 0.0 } else { 3.0 })).collect();
        pts.extend((1..=30).map(|i| (10.0 + 10.0 * i as f64, 3.0)));
        let trace = RtTrace::new(pts, None).unwrap();
        let est = extract_tc(&trace, &FilmConfig::default()).unwrap();
        let rrr = residual_ratio(&trace, est.tc, &FilmConfig::default()).unwrap();
        assert!((rrr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn direct_ratio() {
        let pts = vec![(9.0, 0.0), (9.5, 0.0), (9.6, 4.0), (10.0, 4.0), (300.0, 20.0)];
        let trace = RtTrace::new(pts, None).unwrap();
        let rrr = residual_ratio(&trace, 9.5, &FilmConfig::default()).unwrap();
        assert!((rrr - 5.0).abs() < 1e-12);
    }

    #[test]
    fn missing_room_temperature() {
        let pts: Vec<_> = (0..40).map(|i| (2.0 + 0.5 * i as f64, if i < 15 { 0.0 } else { 3.0 })).collect();
        let trace = RtTrace::new(pts, None).unwrap();
        match residual_ratio(&trace, 9.0, &FilmConfig::default()) {
            Err(Error::Analysis(msg)) => assert!(msg.contains("300")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn analysis_requires_geometry() {
        let trace = logistic_trace(9.2, 0.05, 4.0, 1.0);
        assert!(analyze_film(&trace, &FilmConfig::default()).is_err());
    }

    #[test]
    fn full_report() {
        let mut trace = logistic_trace(9.2, 0.05, 4.0, 1.0);
        trace.geometry = Some(FilmGeometry {
            length: 1e-3,
            width: 20e-6,
            thickness: 80e-9,
        });
        let rep = analyze_film(&trace, &FilmConfig::default()).unwrap();
        assert!((rep.delta_tc_from_bulk - 0.1).abs() < 0.01);
        let r_res = 4.0 * (1.0 + 0.004 * 0.5);
        let rho0 = r_res * 20e-6 * 80e-9 / 1e-3;
        assert!((rep.rho0 / rho0 - 1.0).abs() < 1e-3);
        assert!((rep.sheet_resistance - rho0 / 80e-9).abs() < 1e-3 * rep.sheet_resistance);
        assert!(rep.rrr > 1.0);
        assert!(rep.warnings.is_empty());
    }
}
