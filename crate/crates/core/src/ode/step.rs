use crate::equilibrium::stable_output_levels;
use crate::error::{IfflError, Result};
use crate::model::{FullState, InputSignal, ModelParams, Variant};
use crate::scalar::Scalar;

use super::{integrate, InitialState, IntegratorConfig, Trajectory};

/// Result of a step experiment `u: u_minus -> u_plus` at `t = 0`.
#[derive(Debug, Clone)]
pub struct StepResponse<T> {
    pub trajectory: Trajectory<T>,
    /// Output level the run started from.
    pub y_pre: T,
    /// `q(0+) = c u_plus / x(0)`; equals `(ac/b) u_plus/u_minus` when pre-adapted.
    pub q_initial: T,
    pub q_peak: T,
    pub y_final: T,
}

/// Open-loop step experiment.
///
/// With `preadapt`, `x(0) = (b/a) u_minus` and `y(0)` is the lowest stable
/// root of `y' = q - delta y + V y^n/(K^n + y^n)` at the adapted drive
/// `q = ac/b` (for the degradation variant `y(0) = ac/(b delta)`). Without it
/// the run starts from `x = y = 1`.
pub fn simulate_step_response<T: Scalar>(
    params: &ModelParams<T>,
    u_minus: T,
    u_plus: T,
    preadapt: bool,
    config: &IntegratorConfig<T>,
) -> Result<StepResponse<T>> {
    params.validate()?;
    for (name, v) in [("u_minus", u_minus), ("u_plus", u_plus)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(IfflError::InvalidInput(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let (x0, y0) = if preadapt {
        let x0 = params.b / params.a * u_minus;
        let q = params.a * params.c / params.b;
        let y0 = match params.variant {
            Variant::Degradation => q / params.delta,
            Variant::ProductionInhibition => *stable_output_levels(params, q)?
                .first()
                .ok_or(IfflError::NoStableEquilibrium { q: q.as_f64() })?,
        };
        (x0, y0)
    } else {
        (T::one(), T::one())
    };
    let input = InputSignal::Step {
        u_minus,
        u_plus,
        t_step: T::zero(),
    };
    let initial = FullState::from_concentrations(x0, y0, u_plus)?;
    let trajectory = integrate(params, InitialState::Full(initial), Some(&input), config)?;
    let q_initial = params.c * u_plus / x0;
    let q_peak = trajectory
        .derived
        .iter()
        .map(|d| d.q)
        .fold(T::neg_infinity(), T::max);
    let y_final = *trajectory
        .y()
        .last()
        .ok_or_else(|| IfflError::InsufficientData("empty trajectory".into()))?;
    Ok(StepResponse {
        trajectory,
        y_pre: y0,
        q_initial,
        q_peak,
        y_final,
    })
}
