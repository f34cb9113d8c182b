//! The Filippov pair `Z = (X, Y)` split by `Σ = f⁻¹(0)`.

use std::sync::Arc;

use crate::families::{BumpFunction, FoldCuspParams, StandardFormParams};
use crate::planefield::{
    lie_derivatives, Point2, SmoothField, SwitchingFunction, Vec2, Window,
};

/// Which constructor produced a system, with its parameters.
#[derive(Debug, Clone)]
pub enum Family {
    /// `X = (1, λ - x)`, `Y = (-1, -x² + β - B'(x))`.
    Invisible {
        params: FoldCuspParams,
        bump: Arc<BumpFunction>,
    },
    /// `X = (1, x - λ)`, `Y = (1, -x² + β)`.
    Visible { lambda: f64, beta: f64 },
    Standard(StandardFormParams),
    /// `X = (1, x - μ)`, `Y = (-1, -x² + ε)`.
    TwoParameter { mu: f64, eps: f64 },
    Custom,
}

/// `X` governs `f ≥ 0`, `Y` governs `f ≤ 0`.
///
/// The analyses on `Σ` parametrize it by the abscissa `x` and assume
/// `f(x, y) = y`; every built-in family uses that switching line.
#[derive(Debug, Clone)]
pub struct FilippovSystem {
    pub x: Arc<dyn SmoothField>,
    pub y: Arc<dyn SmoothField>,
    pub f: Arc<dyn SwitchingFunction>,
    pub family: Family,
}

impl FilippovSystem {
    pub fn new(
        x: Arc<dyn SmoothField>,
        y: Arc<dyn SmoothField>,
        f: Arc<dyn SwitchingFunction>,
        family: Family,
    ) -> Self {
        Self { x, y, f, family }
    }

    /// Default analysis window for the family parameters.
    pub fn default_window(&self) -> Window {
        match &self.family {
            Family::Invisible { params, .. } => {
                Window::for_params(params.lambda, params.beta, params.mu)
            }
            Family::Visible { lambda, beta } => Window::for_params(*lambda, *beta, 0.0),
            Family::TwoParameter { mu, eps } => Window::for_params(*mu, *eps, 0.0),
            Family::Standard(_) | Family::Custom => Window::new(1.0),
        }
    }

    pub fn invisible_params(&self) -> Option<(FoldCuspParams, &BumpFunction)> {
        match &self.family {
            Family::Invisible { params, bump } => Some((*params, bump.as_ref())),
            _ => None,
        }
    }

    /// Field governing the open half-plane containing `p` (`X` on `f = 0`).
    pub fn field_at(&self, p: Point2) -> &dyn SmoothField {
        if self.f.value(p) >= 0.0 {
            self.x.as_ref()
        } else {
            self.y.as_ref()
        }
    }

    /// `(X.f, Y.f)` at `(x, 0)`.
    pub fn lie_pair(&self, x: f64) -> (f64, f64) {
        let p = Point2::new(x, 0.0);
        let g = self.f.grad(p);
        (g.dot(self.x.eval(p)), g.dot(self.y.eval(p)))
    }

    pub fn lie_x(&self, x: f64) -> [f64; 3] {
        lie_derivatives(self.x.as_ref(), self.f.as_ref(), Point2::new(x, 0.0))
    }

    pub fn lie_y(&self, x: f64) -> [f64; 3] {
        lie_derivatives(self.y.as_ref(), self.f.as_ref(), Point2::new(x, 0.0))
    }

    /// `(X(q), Y(q))` at `q = (x, 0)`.
    pub fn fields_on_sigma(&self, x: f64) -> (Vec2, Vec2) {
        let p = Point2::new(x, 0.0);
        (self.x.eval(p), self.y.eval(p))
    }
}
