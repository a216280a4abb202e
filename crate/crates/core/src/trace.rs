//! Labeled measurement series shared by every analysis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum TraceValues {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl TraceValues {
    pub fn len(&self) -> usize {
        match self {
            TraceValues::Real(v) => v.len(),
            TraceValues::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A series of `(x, y)` points where `y` is real or complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub label: String,
    pub x_unit: String,
    pub y_unit: String,
    pub x: Vec<f64>,
    pub y: TraceValues,
}

impl Trace {
    pub fn real(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y lengths differ");
        Trace {
            label: label.into(),
            x_unit: String::new(),
            y_unit: String::new(),
            x,
            y: TraceValues::Real(y),
        }
    }

    pub fn complex(label: impl Into<String>, x: Vec<f64>, y: Vec<Complex64>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y lengths differ");
        Trace {
            label: label.into(),
            x_unit: String::new(),
            y_unit: String::new(),
            x,
            y: TraceValues::Complex(y),
        }
    }

    pub fn with_units(mut self, x_unit: impl Into<String>, y_unit: impl Into<String>) -> Self {
        self.x_unit = x_unit.into();
        self.y_unit = y_unit.into();
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Number of scalar residuals a fit against this trace produces.
    pub fn residual_count(&self) -> usize {
        match self.y {
            TraceValues::Real(_) => self.len(),
            TraceValues::Complex(_) => 2 * self.len(),
        }
    }

    pub fn real_values(&self) -> Option<&[f64]> {
        match &self.y {
            TraceValues::Real(v) => Some(v),
            TraceValues::Complex(_) => None,
        }
    }

    pub fn complex_values(&self) -> Option<&[Complex64]> {
        match &self.y {
            TraceValues::Complex(v) => Some(v),
            TraceValues::Real(_) => None,
        }
    }

    /// Copy with points sorted by ascending x.
    pub fn sorted(&self) -> Trace {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.x[a].total_cmp(&self.x[b]));
        let x = idx.iter().map(|&i| self.x[i]).collect();
        let y = match &self.y {
            TraceValues::Real(v) => TraceValues::Real(idx.iter().map(|&i| v[i]).collect()),
            TraceValues::Complex(v) => TraceValues::Complex(idx.iter().map(|&i| v[i]).collect()),
        };
        Trace {
            label: self.label.clone(),
            x_unit: self.x_unit.clone(),
            y_unit: self.y_unit.clone(),
            x,
            y,
        }
    }
}
