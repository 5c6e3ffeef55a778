//! Coefficient fields `a(x,y)`, `b(x,y)` of the convection-diffusion operator
//!
//! ```text
//! L u = -eps (u_xx + u_yy) - (a u)_x + b u
//! a >= alpha > 0,   b >= 0,   b - a_x >= 0
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coefficient pair with analytic partial derivatives of `a`.
pub trait Coefficients: Send + Sync {
    fn a(&self, x: f64, y: f64) -> f64;
    fn a_x(&self, x: f64, y: f64) -> f64;
    fn a_y(&self, x: f64, y: f64) -> f64;
    fn b(&self, x: f64, y: f64) -> f64;
}

/// Built-in coefficient families, usable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Preset {
    /// `a = a0`, `b = b0`.
    Constant { a: f64, b: f64 },
    /// `a = a0 + ax x + ay y`, `b = b0 + ax` (so `b - a_x = b0`).
    Linear { a0: f64, ax: f64, ay: f64, b0: f64 },
    /// `a = a0 + amp sin(pi x / 2) cos(pi y)`, `b = b0 + amp pi / 2`.
    Smooth { a0: f64, amp: f64, b0: f64 },
}

impl Coefficients for Preset {
    fn a(&self, x: f64, y: f64) -> f64 {
        match *self {
            Preset::Constant { a, .. } => a,
            Preset::Linear { a0, ax, ay, .. } => a0 + ax * x + ay * y,
            Preset::Smooth { a0, amp, .. } => {
                a0 + amp * (0.5 * std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).cos()
            }
        }
    }

    fn a_x(&self, x: f64, y: f64) -> f64 {
        match *self {
            Preset::Constant { .. } => 0.0,
            Preset::Linear { ax, .. } => ax,
            Preset::Smooth { amp, .. } => {
                let h = 0.5 * std::f64::consts::PI;
                amp * h * (h * x).cos() * (std::f64::consts::PI * y).cos()
            }
        }
    }

    fn a_y(&self, x: f64, y: f64) -> f64 {
        match *self {
            Preset::Constant { .. } => 0.0,
            Preset::Linear { ay, .. } => ay,
            Preset::Smooth { amp, .. } => {
                let pi = std::f64::consts::PI;
                -amp * pi * (0.5 * pi * x).sin() * (pi * y).sin()
            }
        }
    }

    fn b(&self, _x: f64, _y: f64) -> f64 {
        match *self {
            Preset::Constant { b, .. } => b,
            Preset::Linear { ax, b0, .. } => b0 + ax.max(0.0),
            Preset::Smooth { amp, b0, .. } => b0 + amp.abs() * 0.5 * std::f64::consts::PI,
        }
    }
}

/// A validated coefficient field with a certified lower bound `alpha` for `a`.
#[derive(Clone)]
pub struct CoefficientField {
    inner: Arc<dyn Coefficients>,
    alpha: f64,
    constant: Option<(f64, f64)>,
    label: String,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("label", &self.label)
            .field("alpha", &self.alpha)
            .finish()
    }
}

const VALIDATION_GRID: usize = 64;

impl CoefficientField {
    /// Wraps `coeffs`, checking the sign conditions on a 64x64 grid.
    pub fn new(coeffs: impl Coefficients + 'static, alpha: f64, label: impl Into<String>) -> Result<Self> {
        Self::from_arc(Arc::new(coeffs), alpha, label.into(), None)
    }

    pub fn constant(a: f64, b: f64) -> Result<Self> {
        Self::from_arc(
            Arc::new(Preset::Constant { a, b }),
            a,
            format!("constant(a={a}, b={b})"),
            Some((a, b)),
        )
    }

    pub fn from_preset(preset: &Preset) -> Result<Self> {
        match *preset {
            Preset::Constant { a, b } => Self::constant(a, b),
            Preset::Linear { a0, ax, ay, .. } => {
                let alpha = a0 + ax.min(0.0) + ay.min(0.0);
                Self::from_arc(Arc::new(preset.clone()), alpha, format!("{preset:?}"), None)
            }
            Preset::Smooth { a0, amp, .. } => {
                Self::from_arc(Arc::new(preset.clone()), a0 - amp.abs(), format!("{preset:?}"), None)
            }
        }
    }

    fn from_arc(
        inner: Arc<dyn Coefficients>,
        alpha: f64,
        label: String,
        constant: Option<(f64, f64)>,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Coefficients(format!("alpha={alpha} must be positive")));
        }
        let n = VALIDATION_GRID;
        for i in 0..n {
            for j in 0..n {
                let x = i as f64 / (n - 1) as f64;
                let y = j as f64 / (n - 1) as f64;
                let (a, b, ax) = (inner.a(x, y), inner.b(x, y), inner.a_x(x, y));
                if !(a >= alpha) {
                    return Err(Error::Coefficients(format!("a({x},{y})={a} < alpha={alpha}")));
                }
                if !(b >= 0.0) {
                    return Err(Error::Coefficients(format!("b({x},{y})={b} < 0")));
                }
                if !(b - ax >= -1e-12) {
                    return Err(Error::Coefficients(format!("b - a_x = {} < 0 at ({x},{y})", b - ax)));
                }
            }
        }
        Ok(Self { inner, alpha, constant, label })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `(a, b)` when the field was built as a constant.
    pub fn as_constant(&self) -> Option<(f64, f64)> {
        self.constant
    }

    #[inline]
    pub fn a(&self, x: f64, y: f64) -> f64 {
        match self.constant {
            Some((a, _)) => a,
            None => self.inner.a(x, y),
        }
    }

    #[inline]
    pub fn a_x(&self, x: f64, y: f64) -> f64 {
        match self.constant {
            Some(_) => 0.0,
            None => self.inner.a_x(x, y),
        }
    }

    #[inline]
    pub fn a_y(&self, x: f64, y: f64) -> f64 {
        match self.constant {
            Some(_) => 0.0,
            None => self.inner.a_y(x, y),
        }
    }

    #[inline]
    pub fn b(&self, x: f64, y: f64) -> f64 {
        match self.constant {
            Some((_, b)) => b,
            None => self.inner.b(x, y),
        }
    }
}
