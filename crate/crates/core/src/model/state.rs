use crate::error::{IfflError, Result};
use crate::scalar::Scalar;

/// Phase point of the three-dimensional system.
///
/// Both `x` and `u` are stored as natural logarithms so that exponential growth
/// or decay over long horizons neither overflows nor underflows; `y` is stored
/// directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState<T> {
    pub ln_x: T,
    pub y: T,
    /// `ln u`.
    pub w: T,
}

impl<T: Scalar> FullState<T> {
    /// Builds a state from positive concentrations `x`, `y`, `u`.
    pub fn from_concentrations(x: T, y: T, u: T) -> Result<Self> {
        for (name, value) in [("x", x), ("y", y), ("u", u)] {
            if !value.is_finite() {
                return Err(IfflError::NonFiniteState {
                    component: name,
                    value: value.as_f64(),
                });
            }
            if value <= T::zero() {
                return Err(IfflError::InvalidState(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        Ok(FullState {
            ln_x: x.ln(),
            y,
            w: u.ln(),
        })
    }

    /// The canonical initial state `x = y = u = 1`.
    pub fn unit() -> Self {
        FullState {
            ln_x: T::zero(),
            y: T::one(),
            w: T::zero(),
        }
    }

    pub fn x(&self) -> T {
        self.ln_x.exp()
    }

    pub fn u(&self) -> T {
        self.w.exp()
    }

    /// `p = u / x`, computed in log space.
    pub fn p(&self) -> T {
        (self.w - self.ln_x).exp()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("ln_x", self.ln_x), ("y", self.y), ("w", self.w)] {
            if !value.is_finite() {
                return Err(IfflError::NonFiniteState {
                    component: name,
                    value: value.as_f64(),
                });
            }
        }
        if self.y <= T::zero() {
            return Err(IfflError::InvalidState(format!(
                "y must be positive, got {}",
                self.y
            )));
        }
        Ok(())
    }
}

/// Time derivative of the full system in natural coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullDerivative<T> {
    pub dx: T,
    pub dy: T,
    pub dw: T,
}

/// Phase point `(p, y)` of the planar closed-loop reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState<T> {
    pub p: T,
    pub y: T,
}

impl<T: Scalar> ReducedState<T> {
    pub fn new(p: T, y: T) -> Result<Self> {
        let s = ReducedState { p, y };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("p", self.p), ("y", self.y)] {
            if !value.is_finite() {
                return Err(IfflError::NonFiniteState {
                    component: name,
                    value: value.as_f64(),
                });
            }
            if value <= T::zero() {
                return Err(IfflError::InvalidState(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDerivative<T> {
    pub dp: T,
    pub dy: T,
}
