//! RCSJ current-voltage simulation.
//!
//! The phase obeys `β_c φ'' + g(V)·φ' + sin φ = i` in units where current is
//! scaled by I_c, voltage by I_c·R_n and time by Φ0/(2π I_c R_n). `g` is 1
//! above the gap voltage and R_n/R_s below it when a subgap resistance is
//! configured. Each bias point is held until the average voltage over
//! successive windows of whole 2π phase slips stops changing.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::physics::{delta0_from_tc, sum_gap_voltage};
use crate::physics::constants::PHI0;

use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Up,
    Down,
}

/// Bias current (A) and time-averaged voltage (V) pairs in sweep order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvTrace {
    pub points: Vec<(f64, f64)>,
    pub direction: SweepDirection,
    /// The bias step is too coarse to resolve the hysteresis loop.
    #[serde(default)]
    pub under_resolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvRamp {
    /// A; may be negative to sweep the opposite polarity
    pub i_max: f64,
    pub n_steps: usize,
    /// Also sweep back from `i_max` to zero, continuing from the final state.
    pub both_directions: bool,
}

/// Piecewise-constant subgap resistance below the gap voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subgap {
    /// Ω
    pub resistance: f64,
    /// V
    pub gap_voltage: f64,
}

impl Default for Subgap {
    /// 8 kΩ below the Nb/Nb sum-gap voltage.
    fn default() -> Self {
        let d = delta0_from_tc(9.2).expect("positive tc");
        Subgap {
            resistance: 8e3,
            gap_voltage: sum_gap_voltage(d, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvSweep {
    pub up: IvTrace,
    pub down: Option<IvTrace>,
    pub beta_c: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// β_c = 2π I_c R² C / Φ0.
pub fn stewart_mccumber(ic: f64, rn: f64, capacitance: f64) -> f64 {
    TAU * ic * rn * rn * capacitance / PHI0
}

const RTOL: f64 = 1e-8;
const ATOL: f64 = 1e-9;
const H_MAX: f64 = 1.0;
const WINDOW_SLIPS: usize = 4;
const TRANSIENT_SLIPS: usize = 2;
const CONVERGENCE: f64 = 1e-4;
const MAX_WINDOWS: usize = 2000;
/// Relative width of the smoothed subgap step.
const GAP_EDGE: f64 = 0.01;

#[derive(Debug, Clone, Copy)]
struct Junction {
    beta: f64,
    /// (R_n/R_s, gap voltage / I_c R_n)
    subgap: Option<(f64, f64)>,
}

impl Junction {
    fn conductance(&self, v: f64) -> f64 {
        match self.subgap {
            None => 1.0,
            Some((g_sub, v_gap)) => {
                let s = 0.5 * (1.0 + ((v.abs() - v_gap) / (GAP_EDGE * v_gap)).tanh());
                g_sub + (1.0 - g_sub) * s
            }
        }
    }

    fn rhs(&self, i: f64, y: [f64; 2]) -> [f64; 2] {
        let [phi, v] = y;
        [v, (i - self.conductance(v) * v - phi.sin()) / self.beta]
    }

    /// Dissipation makes the washboard energy non-increasing, so once it is
    /// below the downhill barrier of the current well the phase is trapped.
    /// Returns the equilibrium the trapped phase relaxes to.
    fn trapped(&self, i: f64, y: [f64; 2]) -> Option<[f64; 2]> {
        let s = if i < 0.0 { -1.0 } else { 1.0 };
        let (psi, w, j) = (s * y[0], s * y[1], i.abs());
        if j >= 1.0 {
            // At the saddle-node the phase creeps towards π/2 and never slips.
            let stalled = w.abs() < 1e-9 && (j - psi.sin()).abs() < 1e-9;
            return stalled.then_some(y);
        }
        let a = j.asin();
        let k = ((psi - (PI - a)) / TAU).ceil();
        let psi_max = PI - a + TAU * k;
        let u = |x: f64| -x.cos() - j * x;
        (0.5 * self.beta * w * w + u(psi) < u(psi_max)).then_some([s * (a + TAU * k), 0.0])
    }
}

struct Stepper {
    h: f64,
    k1: Option<[f64; 2]>,
}

/// Accepted step size, new state, and the derivative at both ends.
type StepOutput = (f64, [f64; 2], [f64; 2], [f64; 2]);

/// One adaptive Dormand-Prince 5(4) step, with end derivatives for dense
/// output.
fn dopri_step(jn: &Junction, i: f64, y: [f64; 2], st: &mut Stepper) -> Result<StepOutput> {
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let k1 = st.k1.unwrap_or_else(|| jn.rhs(i, y));
    let mut h = st.h;
    for _ in 0..200 {
        let mut k = [[0.0; 2]; 7];
        k[0] = k1;
        for s in 0..6 {
            let mut ys = y;
            for (c, kj) in C[s].iter().zip(&k).take(s + 1) {
                ys[0] += h * c * kj[0];
                ys[1] += h * c * kj[1];
            }
            if s == 5 {
                // Row 6 is the fifth-order solution.
                k[6] = jn.rhs(i, ys);
                let mut err = 0.0;
                for d in 0..2 {
                    let e: f64 = (0..7).map(|j| E[j] * k[j][d]).sum::<f64>() * h;
                    let scale = if d == 0 {
                        ATOL + RTOL * TAU
                    } else {
                        ATOL + RTOL * y[d].abs().max(ys[d].abs())
                    };
                    err += (e / scale).powi(2);
                }
                let err = (err / 2.0).sqrt();
                if !err.is_finite() {
                    h *= 0.1;
                    break;
                }
                if err <= 1.0 {
                    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    st.h = (h * factor).min(H_MAX);
                    st.k1 = Some(k[6]);
                    return Ok((h, ys, k1, k[6]));
                }
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            } else {
                k[s + 1] = jn.rhs(i, ys);
            }
        }
        if h < 1e-14 {
            break;
        }
    }
    Err(Error::Analysis("RCSJ integrator step size underflow".into()))
}

/// Cubic Hermite interpolation of the phase inside a step.
fn hermite_phase(h: f64, y0: [f64; 2], y1: [f64; 2], f0: [f64; 2], f1: [f64; 2], s: f64) -> f64 {
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    h00 * y0[0] + h10 * h * f0[0] + h01 * y1[0] + h11 * h * f1[0]
}

/// Outcome of holding one bias point.
struct Settled {
    voltage: f64,
    converged: bool,
}

/// Integrates at fixed bias until trapped (voltage exactly 0) or until the
/// mean voltage over consecutive windows of phase slips agrees.
fn settle(jn: &Junction, i: f64, y: &mut [f64; 2], st: &mut Stepper) -> Result<Settled> {
    st.k1 = None;
    y[0] = y[0].rem_euclid(TAU);
    let s = if i < 0.0 { -1.0 } else { 1.0 };
    let phi_ref = y[0];
    let mut t = 0.0;
    let mut crossings: Vec<f64> = Vec::new();
    let mut last_window: Option<f64> = None;
    // Generous wall on integration time at a single bias.
    let t_limit = 1e7 * (1.0 + jn.beta);
    loop {
        if let Some(rest) = jn.trapped(i, *y) {
            *y = rest;
            return Ok(Settled {
                voltage: 0.0,
                converged: true,
            });
        }
        let (h, y1, f0, f1) = dopri_step(jn, i, *y, st)?;
        // Record every new 2π level crossed in the running direction.
        loop {
            let level = phi_ref + s * TAU * (crossings.len() + 1) as f64;
            if s * (y1[0] - level) < 0.0 {
                break;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if s * (hermite_phase(h, *y, y1, f0, f1, mid) - level) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push(t + h * 0.5 * (lo + hi));
            let n = crossings.len();
            if n >= TRANSIENT_SLIPS + WINDOW_SLIPS && (n - TRANSIENT_SLIPS).is_multiple_of(WINDOW_SLIPS) {
                let mean = s * TAU * WINDOW_SLIPS as f64 / (crossings[n - 1] - crossings[n - 1 - WINDOW_SLIPS]);
                if let Some(prev) = last_window {
                    if (mean - prev).abs() <= CONVERGENCE * mean.abs() {
                        *y = y1;
                        return Ok(Settled {
                            voltage: mean,
                            converged: true,
                        });
                    }
                }
                last_window = Some(mean);
                if (n - TRANSIENT_SLIPS) / WINDOW_SLIPS >= MAX_WINDOWS {
                    *y = y1;
                    return Ok(Settled {
                        voltage: mean,
                        converged: false,
                    });
                }
            }
        }
        *y = y1;
        t += h;
        if t > t_limit {
            return Ok(Settled {
                voltage: last_window.unwrap_or(0.0),
                converged: false,
            });
        }
    }
}

/// Simulates the up sweep from rest and, optionally, the down sweep that
/// continues from the state at `i_max`. `subgap: None` gives the pure RCSJ
/// model with R_n at all voltages.
pub fn simulate_rcsj_iv(
    ic: f64,
    rn: f64,
    capacitance: f64,
    ramp: &IvRamp,
    subgap: Option<&Subgap>,
) -> Result<IvSweep> {
    require_positive("critical current", ic)?;
    require_positive("normal resistance", rn)?;
    require_positive("capacitance", capacitance)?;
    if !(ramp.i_max.is_finite() && ramp.i_max != 0.0) {
        return Err(Error::domain(format!("ramp i_max must be finite and non-zero, got {}", ramp.i_max)));
    }
    if ramp.n_steps < 100 {
        return Err(Error::domain(format!("ramp needs at least 100 steps, got {}", ramp.n_steps)));
    }
    let beta = stewart_mccumber(ic, rn, capacitance);
    let scale_v = ic * rn;
    let sub = match subgap {
        Some(sg) => {
            require_positive("subgap resistance", sg.resistance)?;
            require_positive("gap voltage", sg.gap_voltage)?;
            Some((rn / sg.resistance, sg.gap_voltage / scale_v))
        }
        None => None,
    };
    let jn = Junction { beta, subgap: sub };
    let i_max = ramp.i_max / ic;
    let n = ramp.n_steps;
    let bias = |k: usize| i_max * k as f64 / (n - 1) as f64;

    let mut warnings = Vec::new();
    let mut y = [0.0, 0.0];
    let mut st = Stepper {
        h: 1e-3 * beta.min(1.0),
        k1: None,
    };
    let mut unconverged = 0usize;
    let mut run = |order: &mut dyn Iterator<Item = usize>, y: &mut [f64; 2]| -> Result<Vec<(f64, f64)>> {
        let mut pts = Vec::with_capacity(n);
        for k in order {
            let i = bias(k);
            let r = settle(&jn, i, y, &mut st)?;
            if !r.converged {
                unconverged += 1;
            }
            pts.push((i * ic, r.voltage * scale_v));
        }
        Ok(pts)
    };
    let up_pts = run(&mut (0..n), &mut y)?;
    let down_pts = if ramp.both_directions {
        Some(run(&mut (0..n).rev(), &mut y)?)
    } else {
        None
    };

    let step = i_max.abs() / (n - 1) as f64;
    let mut under_resolved = false;
    if i_max.abs() <= 1.0 {
        warnings.push("ramp never exceeds the critical current".to_string());
    }
    if beta > 1.0 {
        let retrap = 4.0 / (PI * beta.sqrt());
        if retrap < 1.0 && step > 0.1 * (1.0 - retrap) {
            under_resolved = true;
            warnings.push(format!(
                "bias step {step:.3e} Ic is too coarse to resolve the hysteresis loop"
            ));
        }
    }
    if unconverged > 0 {
        warnings.push(format!("{unconverged} bias points did not reach a converged average voltage"));
    }
    Ok(IvSweep {
        up: IvTrace {
            points: up_pts,
            direction: SweepDirection::Up,
            under_resolved,
        },
        down: down_pts.map(|points| IvTrace {
            points,
            direction: SweepDirection::Down,
            under_resolved,
        }),
        beta_c: beta,
        warnings,
    })
}
