//! Maps between bounded external parameters and unconstrained internal ones.
//!
//! Two-sided bounds use a logistic map; one-sided bounds use the
//! `sqrt(θ² + 1)` map. Both are smooth, so Jacobians stay well defined.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Bound {
    Free,
    Lower(f64),
    Upper(f64),
    Both(f64, f64),
}

impl Bound {
    pub(crate) fn new(lower: f64, upper: f64) -> Bound {
        match (lower.is_finite(), upper.is_finite()) {
            (false, false) => Bound::Free,
            (true, false) => Bound::Lower(lower),
            (false, true) => Bound::Upper(upper),
            (true, true) => Bound::Both(lower, upper),
        }
    }

    pub(crate) fn contains(&self, p: f64) -> bool {
        match *self {
            Bound::Free => true,
            Bound::Lower(l) => p >= l,
            Bound::Upper(u) => p <= u,
            Bound::Both(l, u) => p >= l && p <= u,
        }
    }

    /// Pulls a value sitting exactly on a logistic bound slightly inside.
    pub(crate) fn interior(&self, p: f64) -> f64 {
        match *self {
            Bound::Both(l, u) => {
                let eps = 1e-9 * (u - l);
                p.clamp(l + eps, u - eps)
            }
            _ => p,
        }
    }

    pub(crate) fn to_external(self, t: f64) -> f64 {
        match self {
            Bound::Free => t,
            Bound::Lower(l) => l - 1.0 + (t * t + 1.0).sqrt(),
            Bound::Upper(u) => u + 1.0 - (t * t + 1.0).sqrt(),
            Bound::Both(l, u) => {
                let s = if t >= 0.0 {
                    1.0 / (1.0 + (-t).exp())
                } else {
                    let e = t.exp();
                    e / (1.0 + e)
                };
                l + (u - l) * s
            }
        }
    }

    pub(crate) fn to_internal(self, p: f64) -> f64 {
        match self {
            Bound::Free => p,
            Bound::Lower(l) => ((p - l + 1.0).powi(2) - 1.0).max(0.0).sqrt(),
            Bound::Upper(u) => ((u - p + 1.0).powi(2) - 1.0).max(0.0).sqrt(),
            Bound::Both(l, u) => ((p - l) / (u - p)).ln(),
        }
    }

    /// dp/dθ at internal value `t`.
    pub(crate) fn derivative(&self, t: f64) -> f64 {
        match *self {
            Bound::Free => 1.0,
            Bound::Lower(_) => t / (t * t + 1.0).sqrt(),
            Bound::Upper(_) => -t / (t * t + 1.0).sqrt(),
            Bound::Both(l, u) => {
                let s = 1.0 / (1.0 + (-t.abs()).exp());
                (u - l) * s * (1.0 - s)
            }
        }
    }

    /// Typical magnitude used to floor finite-difference steps.
    pub(crate) fn scale(&self) -> f64 {
        match *self {
            Bound::Both(l, u) => 1e-3 * (u - l),
            _ => 1e-3,
        }
    }

    /// Whether `p` sits within a relative `1e-6` of an active bound.
    pub(crate) fn touches(&self, p: f64) -> bool {
        let near = |edge: f64, span: f64| (p - edge).abs() <= 1e-6 * span.max(p.abs()).max(1e-300);
        match *self {
            Bound::Free => false,
            Bound::Lower(l) => near(l, 1.0),
            Bound::Upper(u) => near(u, 1.0),
            Bound::Both(l, u) => near(l, u - l) || near(u, u - l),
        }
    }
}
