use crate::error::{IfflError, Result};
use crate::scalar::Scalar;

use super::params::{ModelParams, Variant};
use super::state::FullState;

/// Linear change of variables `x = x_scale x*`, `y = y_scale y*`, `t = time_scale t*`.
/// `u` is left unscaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling<T> {
    pub x_scale: T,
    pub y_scale: T,
    pub time_scale: T,
}

impl<T: Scalar> Scaling<T> {
    pub fn identity() -> Self {
        Scaling {
            x_scale: T::one(),
            y_scale: T::one(),
            time_scale: T::one(),
        }
    }

    pub fn to_normalized_time(&self, t: T) -> T {
        t / self.time_scale
    }

    pub fn from_normalized_time(&self, t_star: T) -> T {
        t_star * self.time_scale
    }

    pub fn to_normalized_state(&self, s: &FullState<T>) -> FullState<T> {
        FullState {
            ln_x: s.ln_x - self.x_scale.ln(),
            y: s.y / self.y_scale,
            w: s.w,
        }
    }

    pub fn from_normalized_state(&self, s: &FullState<T>) -> FullState<T> {
        FullState {
            ln_x: s.ln_x + self.x_scale.ln(),
            y: s.y * self.y_scale,
            w: s.w,
        }
    }
}

/// Parameters with `a = b = c = 1` plus the scaling that maps trajectories back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized<T> {
    pub params: ModelParams<T>,
    pub scaling: Scaling<T>,
}

/// Removes `a`, `b`, `c` by rescaling state and time.
///
/// Production inhibition: `x = (b/a) x*`, `y = (c/b) y*`, `t = t*/a`,
/// `delta* = delta/a`, `lambda* = lambda/a`, `kappa* = c kappa/(a b)`.
///
/// Degradation: `x = (b/a) x*`, `y = (c/a) y*`, `t = t*/a`,
/// `delta* = b delta/a^2`, `lambda* = lambda/a`, `kappa* = c kappa/a^2`.
///
/// No rescaling is defined for the autocatalytic model.
pub fn normalize_params<T: Scalar>(params: &ModelParams<T>) -> Result<Normalized<T>> {
    params.validate()?;
    if params.autocatalytic() {
        return Err(IfflError::Unsupported(
            "normalization is only defined for the model without autocatalysis (V = 0)".into(),
        ));
    }
    let ModelParams {
        a, b, c, delta, kappa, lambda, ..
    } = *params;
    let (delta_star, kappa_star, y_scale) = match params.variant {
        Variant::ProductionInhibition => (delta / a, c * kappa / (a * b), c / b),
        Variant::Degradation => (b * delta / (a * a), c * kappa / (a * a), c / a),
    };
    let mut starred = *params;
    starred.a = T::one();
    starred.b = T::one();
    starred.c = T::one();
    starred.delta = delta_star;
    starred.kappa = kappa_star;
    starred.lambda = lambda / a;
    Ok(Normalized {
        params: starred,
        scaling: Scaling {
            x_scale: b / a,
            y_scale,
            time_scale: T::one() / a,
        },
    })
}
