//! Weighted nonlinear least squares with bounds and covariance estimates.
//!
//! A [`FitProblem`] pairs a model `y = m(x; p)` with starting values, optional
//! bounds, weights and fixed-parameter masks. [`fit`] runs a damped
//! Gauss-Newton (Levenberg-Marquardt) iteration against a [`Trace`] and
//! returns a [`FitResult`]. Complex traces contribute their real and
//! imaginary parts as separate residuals.
//!
//! Fits are pure: the same problem and data always give the same result, and
//! a problem can be shared across threads.

mod lm;
mod profile;
mod transform;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use lm::fit;
pub use profile::{profile_confidence, ConfidenceInterval};

pub type RealModelFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
pub type ComplexModelFn = dyn Fn(f64, &[f64]) -> Complex64 + Send + Sync;
/// Writes `∂m(x; p)/∂p_j` into the output slice.
pub type RealJacobianFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

#[derive(Clone)]
pub enum Model {
    Real(Arc<RealModelFn>),
    Complex(Arc<ComplexModelFn>),
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Real(_) => f.write_str("Model::Real"),
            Model::Complex(_) => f.write_str("Model::Complex"),
        }
    }
}

#[derive(Clone)]
pub struct FitProblem {
    pub(crate) model: Model,
    pub(crate) jacobian: Option<Arc<RealJacobianFn>>,
    pub(crate) initial: Vec<f64>,
    pub(crate) lower: Vec<f64>,
    pub(crate) upper: Vec<f64>,
    pub(crate) fixed: Vec<bool>,
    pub(crate) weights: Option<Vec<f64>>,
    pub(crate) max_iterations: usize,
    pub(crate) tolerance: f64,
    pub(crate) absolute_sigma: bool,
    pub(crate) names: Vec<String>,
}

impl std::fmt::Debug for FitProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FitProblem")
            .field("model", &self.model)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("initial", &self.initial)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("fixed", &self.fixed)
            .field("max_iterations", &self.max_iterations)
            .field("tolerance", &self.tolerance)
            .field("absolute_sigma", &self.absolute_sigma)
            .field("names", &self.names)
            .finish()
    }
}

impl FitProblem {
    pub fn real<F>(model: F, initial: Vec<f64>) -> Self
    where
        F: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::with_model(Model::Real(Arc::new(model)), initial)
    }

    pub fn complex<F>(model: F, initial: Vec<f64>) -> Self
    where
        F: Fn(f64, &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::with_model(Model::Complex(Arc::new(model)), initial)
    }

    pub fn with_model(model: Model, initial: Vec<f64>) -> Self {
        let n = initial.len();
        FitProblem {
            model,
            jacobian: None,
            initial,
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            fixed: vec![false; n],
            weights: None,
            max_iterations: 200,
            tolerance: 1e-10,
            absolute_sigma: false,
            names: (0..n).map(|i| format!("p{i}")).collect(),
        }
    }

    /// Analytic model derivative, used instead of finite differences during
    /// the iteration. Only meaningful for real models.
    pub fn jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// Per-parameter bounds; use infinities for unbounded sides.
    pub fn bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn bound(mut self, index: usize, lower: f64, upper: f64) -> Self {
        self.lower[index] = lower;
        self.upper[index] = upper;
        self
    }

    pub fn fix(mut self, index: usize) -> Self {
        self.fixed[index] = true;
        self
    }

    pub fn fixed_mask(mut self, mask: Vec<bool>) -> Self {
        self.fixed = mask;
        self
    }

    pub fn weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    /// Treat weights as inverse variances: the covariance is not rescaled by
    /// the reduced chi-square.
    pub fn absolute_sigma(mut self, on: bool) -> Self {
        self.absolute_sigma = on;
        self
    }

    pub fn names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.names = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn n_params(&self) -> usize {
        self.initial.len()
    }

    pub fn n_free(&self) -> usize {
        self.fixed.iter().filter(|f| !**f).count()
    }

    pub fn initial_params(&self) -> &[f64] {
        &self.initial
    }

    pub(crate) fn with_initial(&self, initial: Vec<f64>) -> Self {
        let mut p = self.clone();
        p.initial = initial;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    /// Row-major, `n_params × n_params`. Fixed parameters have zero rows;
    /// parameters the data cannot constrain have infinite variance.
    pub covariance: Vec<Vec<f64>>,
    pub param_uncertainties: Vec<f64>,
    /// sqrt(Σ wᵢ rᵢ²)
    pub residual_norm: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub iterations: usize,
    pub converged: bool,
    pub at_bound: Vec<bool>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.params[i])
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.param_uncertainties[i])
    }

    pub fn reduced_chi_square(&self) -> f64 {
        if self.dof == 0 {
            0.0
        } else {
            self.chi_square / self.dof as f64
        }
    }

    pub fn any_at_bound(&self) -> bool {
        self.at_bound.iter().any(|b| *b)
    }
}
