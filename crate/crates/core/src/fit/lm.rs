use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::transform::Bound;
use super::{FitProblem, FitResult, Model};
use crate::error::{Error, Result};
use crate::trace::{Trace, TraceValues};

/// Relative finite-difference step.
const FD_STEP: f64 = 1e-6;
const LAMBDA_START: f64 = 1e-3;
const LAMBDA_FACTOR: f64 = 10.0;
const LAMBDA_MAX: f64 = 1e20;

pub(crate) struct Prepared<'a> {
    problem: &'a FitProblem,
    /// Points in canonical order, so sums do not depend on input order.
    x: Vec<f64>,
    y: TraceValues,
    sqrt_w: Vec<f64>,
    free: Vec<usize>,
    bounds: Vec<Bound>,
    m: usize,
}

/// Sorts points by x, then value, then weight.
fn canonical_order(data: &Trace, sqrt_w: Vec<f64>) -> (Vec<f64>, TraceValues, Vec<f64>) {
    let key = |i: usize| match &data.y {
        TraceValues::Real(v) => (v[i], 0.0),
        TraceValues::Complex(v) => (v[i].re, v[i].im),
    };
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        data.x[a]
            .total_cmp(&data.x[b])
            .then(ka.0.total_cmp(&kb.0))
            .then(ka.1.total_cmp(&kb.1))
            .then(sqrt_w[a].total_cmp(&sqrt_w[b]))
    });
    let x = idx.iter().map(|&i| data.x[i]).collect();
    let y = match &data.y {
        TraceValues::Real(v) => TraceValues::Real(idx.iter().map(|&i| v[i]).collect()),
        TraceValues::Complex(v) => TraceValues::Complex(idx.iter().map(|&i| v[i]).collect()),
    };
    let w = idx.iter().map(|&i| sqrt_w[i]).collect();
    (x, y, w)
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(problem: &'a FitProblem, data: &'a Trace) -> Result<Self> {
        let n = problem.n_params();
        if problem.lower.len() != n || problem.upper.len() != n || problem.fixed.len() != n {
            return Err(Error::Problem("bounds or fixed mask length differs from parameter count".into()));
        }
        if problem.names.len() != n {
            return Err(Error::Problem("parameter name count differs from parameter count".into()));
        }
        if !(problem.tolerance > 0.0) {
            return Err(Error::Problem(format!("tolerance must be positive, got {}", problem.tolerance)));
        }
        match (&problem.model, &data.y) {
            (Model::Real(_), TraceValues::Real(_)) | (Model::Complex(_), TraceValues::Complex(_)) => {}
            _ => return Err(Error::Problem("model and data disagree on real/complex values".into())),
        }
        let npts = data.len();
        let sqrt_w = match &problem.weights {
            Some(w) => {
                if w.len() != npts {
                    return Err(Error::Problem(format!("{} weights for {npts} points", w.len())));
                }
                if let Some(bad) = w.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                    return Err(Error::Problem(format!("weights must be positive, found {bad}")));
                }
                w.iter().map(|w| w.sqrt()).collect()
            }
            None => vec![1.0; npts],
        };
        let mut bounds = Vec::with_capacity(n);
        for i in 0..n {
            let (l, u) = (problem.lower[i], problem.upper[i]);
            if l.is_nan() || u.is_nan() || l >= u {
                return Err(Error::Problem(format!("invalid bounds [{l}, {u}] for {}", problem.names[i])));
            }
            let b = Bound::new(l, u);
            if !b.contains(problem.initial[i]) {
                return Err(Error::Problem(format!(
                    "initial {} = {} outside [{l}, {u}]",
                    problem.names[i], problem.initial[i]
                )));
            }
            bounds.push(b);
        }
        let free: Vec<usize> = (0..n).filter(|i| !problem.fixed[*i]).collect();
        let m = data.residual_count();
        let (x, y, sqrt_w) = canonical_order(data, sqrt_w);
        if m < free.len() {
            return Err(Error::Problem(format!(
                "{m} residuals cannot determine {} free parameters",
                free.len()
            )));
        }
        Ok(Prepared {
            problem,
            x,
            y,
            sqrt_w,
            free,
            bounds,
            m,
        })
    }

    fn initial_internal(&self) -> Vec<f64> {
        self.free
            .iter()
            .map(|&i| {
                let b = self.bounds[i];
                b.to_internal(b.interior(self.problem.initial[i]))
            })
            .collect()
    }

    fn external(&self, theta: &[f64]) -> Vec<f64> {
        let mut p = self.problem.initial.clone();
        for (k, &i) in self.free.iter().enumerate() {
            p[i] = self.bounds[i].to_external(theta[k]);
        }
        p
    }

    /// Weighted residuals; `false` if any entry is not finite.
    fn residuals(&self, p: &[f64], out: &mut [f64]) -> bool {
        match (&self.problem.model, &self.y) {
            (Model::Real(f), TraceValues::Real(y)) => {
                for (i, (&x, &yi)) in self.x.iter().zip(y).enumerate() {
                    out[i] = self.sqrt_w[i] * (yi - f(x, p));
                }
            }
            (Model::Complex(f), TraceValues::Complex(y)) => {
                for (i, (&x, &yi)) in self.x.iter().zip(y).enumerate() {
                    let d = (yi - f(x, p)) * self.sqrt_w[i];
                    out[2 * i] = d.re;
                    out[2 * i + 1] = d.im;
                }
            }
            _ => unreachable!("checked in Prepared::new"),
        }
        out.iter().all(|r| r.is_finite())
    }

    fn cost(&self, p: &[f64], buf: &mut [f64]) -> Option<f64> {
        if self.residuals(p, buf) {
            Some(buf.iter().map(|r| r * r).sum())
        } else {
            None
        }
    }

    /// Jacobian of the residuals with respect to the internal parameters.
    fn internal_jacobian(&self, theta: &[f64]) -> DMatrix<f64> {
        let nf = self.free.len();
        let mut jac = DMatrix::zeros(self.m, nf);
        if let (Some(dm), Model::Real(_)) = (&self.problem.jacobian, &self.problem.model) {
            let p = self.external(theta);
            let mut grad = vec![0.0; p.len()];
            for (row, &x) in self.x.iter().enumerate() {
                dm(x, &p, &mut grad);
                for (k, &i) in self.free.iter().enumerate() {
                    jac[(row, k)] = -self.sqrt_w[row] * grad[i] * self.bounds[i].derivative(theta[k]);
                }
            }
            return jac;
        }
        let mut plus = vec![0.0; self.m];
        let mut minus = vec![0.0; self.m];
        let mut t = theta.to_vec();
        for k in 0..nf {
            let h = FD_STEP * theta[k].abs().max(1e-3);
            t[k] = theta[k] + h;
            self.residuals(&self.external(&t), &mut plus);
            t[k] = theta[k] - h;
            self.residuals(&self.external(&t), &mut minus);
            t[k] = theta[k];
            for row in 0..self.m {
                jac[(row, k)] = (plus[row] - minus[row]) / (2.0 * h);
            }
        }
        jac
    }

    /// Jacobian of the residuals with respect to the external free
    /// parameters; steps stay inside the bounds.
    fn external_jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let nf = self.free.len();
        let mut jac = DMatrix::zeros(self.m, nf);
        if let (Some(dm), Model::Real(_)) = (&self.problem.jacobian, &self.problem.model) {
            let mut grad = vec![0.0; p.len()];
            for (row, &x) in self.x.iter().enumerate() {
                dm(x, p, &mut grad);
                for (k, &i) in self.free.iter().enumerate() {
                    jac[(row, k)] = -self.sqrt_w[row] * grad[i];
                }
            }
            return jac;
        }
        let mut plus = vec![0.0; self.m];
        let mut minus = vec![0.0; self.m];
        let mut q = p.to_vec();
        for (k, &i) in self.free.iter().enumerate() {
            let b = self.bounds[i];
            let h = FD_STEP * p[i].abs().max(b.scale());
            let (hi, lo) = match (b.contains(p[i] + h), b.contains(p[i] - h)) {
                (true, true) => (p[i] + h, p[i] - h),
                (true, false) => (p[i] + h, p[i]),
                (false, true) => (p[i], p[i] - h),
                (false, false) => (p[i], p[i]),
            };
            if hi == lo {
                continue;
            }
            q[i] = hi;
            self.residuals(&q, &mut plus);
            q[i] = lo;
            self.residuals(&q, &mut minus);
            q[i] = p[i];
            for row in 0..self.m {
                jac[(row, k)] = (plus[row] - minus[row]) / (hi - lo);
            }
        }
        jac
    }
}

/// Minimizes Σ wᵢ (yᵢ − m(xᵢ; p))² over the free parameters of `problem`.
///
/// A non-finite model output at the starting point is an error. During the
/// iteration a trial step with non-finite output is treated as a rejected
/// step. Running out of iterations yields `converged == false`.
pub fn fit(problem: &FitProblem, data: &Trace) -> Result<FitResult> {
    let prep = Prepared::new(problem, data)?;
    let mut buf = vec![0.0; prep.m];
    let mut theta = prep.initial_internal();
    let p0 = prep.external(&theta);
    let mut cost = prep.cost(&p0, &mut buf).ok_or_else(|| Error::Evaluation {
        params: p0.clone(),
        reason: "model output is not finite at the initial parameters".into(),
    })?;

    let nf = prep.free.len();
    let mut lambda = LAMBDA_START;
    let mut iterations = 0;
    let mut converged = nf == 0;
    while !converged && iterations < problem.max_iterations {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jac = prep.internal_jacobian(&theta);
        prep.residuals(&prep.external(&theta), &mut buf);
        let r = DVector::from_column_slice(&buf);
        let g = jac.transpose() * &r;
        let a = jac.transpose() * &jac;
        if g.amax() == 0.0 {
            converged = true;
            break;
        }
        let max_diag = (0..nf).map(|k| a[(k, k)]).fold(0.0, f64::max);
        let diag: Vec<f64> = (0..nf)
            .map(|k| a[(k, k)].max(1e-12 * max_diag).max(f64::MIN_POSITIVE))
            .collect();

        let mut accepted = None;
        while lambda <= LAMBDA_MAX {
            let mut damped = a.clone();
            for k in 0..nf {
                damped[(k, k)] += lambda * diag[k];
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= LAMBDA_FACTOR;
                    continue;
                }
            };
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            match prep.cost(&prep.external(&trial), &mut buf) {
                Some(c) if c < cost => {
                    accepted = Some((trial, step, c));
                    lambda = (lambda / LAMBDA_FACTOR).max(1e-12);
                    break;
                }
                _ => lambda *= LAMBDA_FACTOR,
            }
        }
        match accepted {
            None => {
                // No downhill step exists at any damping: numerically at a minimum.
                converged = true;
            }
            Some((trial, step, new_cost)) => {
                let theta_scale = theta.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                let small_step = step.amax() <= problem.tolerance * (theta_scale + problem.tolerance);
                let small_gain = cost - new_cost <= problem.tolerance * cost;
                theta = trial;
                cost = new_cost;
                if small_step || small_gain {
                    converged = true;
                }
            }
        }
    }

    let params = prep.external(&theta);
    Ok(finish(&prep, params, cost, iterations, converged))
}

fn finish(prep: &Prepared<'_>, params: Vec<f64>, cost: f64, iterations: usize, converged: bool) -> FitResult {
    let n = params.len();
    let nf = prep.free.len();
    let dof = prep.m - nf;
    let mut covariance = vec![vec![0.0; n]; n];
    if nf > 0 {
        let jac = prep.external_jacobian(&params);
        let a = jac.transpose() * &jac;
        let scale = if prep.problem.absolute_sigma {
            1.0
        } else if dof > 0 {
            cost / dof as f64
        } else {
            f64::INFINITY
        };
        let inv = pseudo_inverse(&a);
        for (ka, &ia) in prep.free.iter().enumerate() {
            for (kb, &ib) in prep.free.iter().enumerate() {
                let v = inv[(ka, kb)];
                covariance[ia][ib] = if v == 0.0 { 0.0 } else { v * scale };
            }
        }
        // exact symmetry
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (covariance[i][j] + covariance[j][i]);
                if s.is_finite() {
                    covariance[i][j] = s;
                    covariance[j][i] = s;
                }
            }
        }
    }
    let param_uncertainties = (0..n).map(|i| covariance[i][i].max(0.0).sqrt()).collect();
    let at_bound = params
        .iter()
        .enumerate()
        .map(|(i, &p)| !prep.problem.fixed[i] && prep.bounds[i].touches(p))
        .collect();
    FitResult {
        names: prep.problem.names.clone(),
        params,
        covariance,
        param_uncertainties,
        residual_norm: cost.sqrt(),
        chi_square: cost,
        dof,
        iterations,
        converged,
        at_bound,
    }
}

/// Inverse of a symmetric PSD matrix after diagonal equilibration. Directions
/// with no curvature give infinite variance to every parameter they touch.
fn pseudo_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].max(0.0).sqrt()).collect();
    let live: Vec<usize> = (0..n).filter(|&i| d[i] > 0.0 && d[i].is_finite()).collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        if !live.contains(&i) {
            out[(i, i)] = f64::INFINITY;
        }
    }
    if live.is_empty() {
        return out;
    }
    let k = live.len();
    let scaled = DMatrix::from_fn(k, k, |r, c| a[(live[r], live[c])] / (d[live[r]] * d[live[c]]));
    let eig = SymmetricEigen::new(scaled);
    let max_ev = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = 1e-13 * max_ev.max(f64::MIN_POSITIVE);
    let mut unconstrained = vec![false; k];
    let mut inv = DMatrix::zeros(k, k);
    for (j, &ev) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(j);
        if ev <= cutoff {
            for r in 0..k {
                if v[r].abs() > 1e-8 {
                    unconstrained[r] = true;
                }
            }
        } else {
            inv += (v * v.transpose()) / ev;
        }
    }
    for r in 0..k {
        for c in 0..k {
            let (i, j) = (live[r], live[c]);
            out[(i, j)] = if unconstrained[r] || unconstrained[c] {
                if r == c {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                inv[(r, c)] / (d[i] * d[j])
            };
        }
    }
    out
}
