//! Characteristic currents and resistance from current-voltage sweeps.

use serde::{Deserialize, Serialize};

use super::rcsj::{IvTrace, SweepDirection};
use crate::error::{Error, Result};

/// Voltages below this fraction of the largest |V| count as zero.
const ZERO_FRACTION: f64 = 1e-3;
/// V, the normal-branch region used for the resistance fit
const NORMAL_BRANCH_VOLTAGE: f64 = 4e-3;

fn zero_threshold(trace: &IvTrace) -> f64 {
    ZERO_FRACTION * trace.points.iter().map(|p| p.1.abs()).fold(0.0, f64::max)
}

/// Bias at the first finite-voltage point of an up sweep.
pub fn switching_current(up: &IvTrace) -> Option<f64> {
    let thr = zero_threshold(up);
    up.points.iter().find(|p| p.1.abs() > thr).map(|p| p.0)
}

/// Smallest |bias| still on the running branch of a down sweep.
pub fn retrapping_current(down: &IvTrace) -> Option<f64> {
    let thr = zero_threshold(down);
    down.points
        .iter()
        .filter(|p| p.1.abs() > thr)
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
        .map(|p| p.0)
}

/// ∫ (|V_down| − |V_up|) d|I| over the shared bias grid, in A·V.
pub fn hysteresis_area(up: &IvTrace, down: &IvTrace) -> Result<f64> {
    if up.direction != SweepDirection::Up || down.direction != SweepDirection::Down {
        return Err(Error::domain("hysteresis area needs an up sweep and a down sweep"));
    }
    let mut d: Vec<(f64, f64)> = down.points.clone();
    d.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let mut u: Vec<(f64, f64)> = up.points.clone();
    u.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    if u.len() != d.len() || u.iter().zip(&d).any(|(a, b)| (a.0 - b.0).abs() > 1e-9 * a.0.abs().max(1e-30)) {
        return Err(Error::domain("up and down sweeps use different bias grids"));
    }
    let gap: Vec<(f64, f64)> = u.iter().zip(&d).map(|(a, b)| (a.0.abs(), b.1.abs() - a.1.abs())).collect();
    Ok(gap.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvAnalysis {
    /// A
    pub switching_current: f64,
    pub retrapping_current: Option<f64>,
    /// Ω
    pub normal_resistance: f64,
    /// V, switching current times normal resistance
    pub icrn_product: f64,
}

/// Slope of V against I on the normal branch: points above 4 mV, or the top
/// quarter by voltage when fewer than three reach that.
fn normal_resistance(trace: &IvTrace) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = trace
        .points
        .iter()
        .copied()
        .filter(|p| p.1.abs() > NORMAL_BRANCH_VOLTAGE)
        .collect();
    if pts.len() < 3 {
        let mut all = trace.points.clone();
        all.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        let take = (all.len() / 4).max(3).min(all.len());
        pts = all.into_iter().take(take).collect();
    }
    if pts.len() < 2 {
        return Err(Error::Analysis("too few points on the normal branch".into()));
    }
    let n = pts.len() as f64;
    let mi = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mi) * (p.1 - mv)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mi).powi(2)).sum();
    let r = sxy / sxx;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Analysis(format!("normal-branch slope {r} Ω is not positive")));
    }
    Ok(r)
}

pub fn analyze_iv(up: &IvTrace, down: Option<&IvTrace>) -> Result<IvAnalysis> {
    if up.points.len() < 10 {
        return Err(Error::Analysis(format!("IV sweep has only {} points", up.points.len())));
    }
    let isw = switching_current(up)
        .ok_or_else(|| Error::Analysis("up sweep never leaves the zero-voltage branch".into()))?;
    let rn = normal_resistance(up)?;
    Ok(IvAnalysis {
        switching_current: isw,
        retrapping_current: down.and_then(retrapping_current),
        normal_resistance: rn,
        icrn_product: isw.abs() * rn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal(direction: SweepDirection, ic: f64, rn: f64, on: f64) -> IvTrace {
        let mut points: Vec<(f64, f64)> = (0..200)
            .map(|k| {
                let i = 3.0 * ic * k as f64 / 199.0;
                (i, if i > on { rn * i } else { 0.0 })
            })
            .collect();
        if direction == SweepDirection::Down {
            points.reverse();
        }
        IvTrace {
            points,
            direction,
            under_resolved: false,
        }
    }

    #[test]
    fn characteristic_currents() {
        let up = ideal(SweepDirection::Up, 10e-6, 100.0, 10e-6);
        let down = ideal(SweepDirection::Down, 10e-6, 100.0, 4e-6);
        let a = analyze_iv(&up, Some(&down)).unwrap();
        assert!((a.switching_current - 10e-6).abs() < 0.02 * 10e-6);
        assert!((a.normal_resistance - 100.0).abs() < 1e-9);
        assert!((a.retrapping_current.unwrap() - 4e-6).abs() < 0.02 * 10e-6);
        assert!((a.icrn_product - a.switching_current * 100.0).abs() < 1e-15);
        // Loop area between the branches: ∫ R·I dI from 4 µA to 10 µA.
        let area = hysteresis_area(&up, &down).unwrap();
        assert!((area - 50.0 * (1e-10 - 16e-12)).abs() < 0.05 * area);
    }

    #[test]
    fn grid_mismatch() {
        let up = ideal(SweepDirection::Up, 10e-6, 100.0, 10e-6);
        let mut down = ideal(SweepDirection::Down, 10e-6, 100.0, 10e-6);
        down.points.pop();
        assert!(hysteresis_area(&up, &down).is_err());
    }
}
