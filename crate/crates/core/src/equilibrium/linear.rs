use crate::error::{IfflError, Result};
use crate::model::{ModelParams, Variant};
use crate::scalar::Scalar;

use super::{EquilibriumReport, EquilibriumSource};

fn require_linear<T: Scalar>(params: &ModelParams<T>, operation: &'static str) -> Result<()> {
    params.validate()?;
    if params.autocatalytic() {
        return Err(IfflError::Unsupported(format!(
            "{operation} needs V = 0; use equilibria_autocat for the autocatalytic model"
        )));
    }
    Ok(())
}

/// Asymptotic growth rate of `u` in the closed loop without autocatalysis:
/// `lambda` if `lambda < -a`, else `(lambda b delta - c kappa a) / (b delta + c kappa)`.
pub fn solve_mu<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    require_linear(params, "solve_mu")?;
    let ModelParams {
        a, b, c, delta, kappa, lambda, ..
    } = *params;
    if a + lambda < T::zero() {
        Ok(lambda)
    } else {
        Ok((lambda * b * delta - c * kappa * a) / (b * delta + c * kappa))
    }
}

/// The attracting equilibrium of the reduced system for `V = 0`:
/// `y = c (a + lambda) / (b delta + c kappa)`, `p = (delta / c) y` when
/// `a + lambda >= 0`, otherwise the origin.
pub fn closed_loop_equilibrium_linear<T: Scalar>(
    params: &ModelParams<T>,
) -> Result<EquilibriumReport<T>> {
    require_linear(params, "closed_loop_equilibrium_linear")?;
    if params.variant != Variant::ProductionInhibition {
        return Err(IfflError::UnsupportedVariant {
            operation: "closed_loop_equilibrium_linear",
            variant: params.variant.name(),
        });
    }
    let ModelParams {
        a, b, c, delta, kappa, lambda, ..
    } = *params;
    let growth = a + lambda;
    let (p, y) = if growth < T::zero() {
        (T::zero(), T::zero())
    } else {
        let y = c * growth / (b * delta + c * kappa);
        (delta / c * y, y)
    };
    let mut report = EquilibriumReport::at(params, p, y, EquilibriumSource::ClosedForm);
    // same value, but from the closed form so that mu is exact at the threshold
    report.mu = solve_mu(params)?;
    report.outcome = crate::ode::Outcome::from_rate(report.mu, T::lit(super::MARGINAL_TOL));
    Ok(report)
}

/// Linearisation at the origin `(p, y) = (0, 0)`; determinant `-delta (a + lambda)`.
pub fn origin_report<T: Scalar>(params: &ModelParams<T>) -> EquilibriumReport<T> {
    EquilibriumReport::at(params, T::zero(), T::zero(), EquilibriumSource::ClosedForm)
}

/// Limit of the open-loop output for an input whose log-derivative tends to
/// `mu_input`: `(c / (b delta)) max(0, a + mu_input)`.
pub fn open_loop_output_limit<T: Scalar>(params: &ModelParams<T>, mu_input: T) -> Result<T> {
    require_linear(params, "open_loop_output_limit")?;
    if !mu_input.is_finite() {
        return Err(IfflError::InvalidInput(format!(
            "input growth rate must be finite, got {mu_input}"
        )));
    }
    Ok(params.c / (params.b * params.delta) * (params.a + mu_input).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::super::Stability;
    use super::*;
    use crate::ode::Outcome;

    fn linear_ref() -> ModelParams<f64> {
        ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0)
    }

    #[test]
    fn linear_ref_equilibrium() {
        let r = closed_loop_equilibrium_linear(&linear_ref()).unwrap();
        assert!((r.p_bar - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.y_bar - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.mu + 1.0 / 3.0).abs() < 1e-15);
        assert!(r.jacobian_trace < 0.0 && r.jacobian_det > 0.0);
        assert_eq!(r.stability, Stability::StableNodeFocus);
        assert_eq!(r.outcome, Outcome::Elimination);
        // trace -b delta (a+lambda)/(c kappa + b delta) - delta, det delta (a+lambda)
        assert!((r.jacobian_trace - (-2.0 / 3.0 - 1.0)).abs() < 1e-14);
        assert!((r.jacobian_det - 2.0).abs() < 1e-14);
    }

    #[test]
    fn negative_net_growth_collapses_to_origin() {
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, -2.0);
        let r = closed_loop_equilibrium_linear(&p).unwrap();
        assert_eq!((r.p_bar, r.y_bar), (0.0, 0.0));
        assert_eq!(r.mu, -2.0);
        assert!(r.jacobian_det > 0.0 && r.jacobian_trace < 0.0);
        assert_eq!(r.stability, Stability::StableNodeFocus);
    }

    #[test]
    fn origin_is_a_saddle_when_growth_positive() {
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
        let r = origin_report(&p);
        assert_eq!(r.jacobian_det, -2.0);
        assert_eq!(r.stability, Stability::Saddle);
    }

    #[test]
    fn mu_two_routes_agree() {
        let p = linear_ref();
        let mu = solve_mu(&p).unwrap();
        let v_bar = p.lambda - p.kappa * p.c * (p.a + p.lambda) / (p.b * p.delta + p.c * p.kappa);
        assert!((mu + 1.0 / 3.0).abs() < 1e-15);
        assert!((mu - v_bar).abs() < 1e-15);
    }

    #[test]
    fn mu_at_threshold_is_marginal() {
        // c a kappa = b delta lambda: 1 * 1 * 2 = 1 * 1 * 2
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, 2.0);
        assert_eq!(solve_mu(&p).unwrap(), 0.0);
        let r = closed_loop_equilibrium_linear(&p).unwrap();
        assert_eq!(r.outcome, Outcome::Marginal);
    }

    #[test]
    fn mu_below_minus_a_is_lambda() {
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, -5.0);
        assert_eq!(solve_mu(&p).unwrap(), -5.0);
    }

    #[test]
    fn threshold_sign_matches_mu() {
        for lambda in [-0.5, 0.3, 1.9, 2.1, 7.0] {
            let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, lambda);
            let mu = solve_mu(&p).unwrap();
            let threshold = p.c * p.a * p.kappa - p.b * p.delta * p.lambda;
            assert_eq!(mu < 0.0, threshold > 0.0, "lambda = {lambda}");
        }
    }

    #[test]
    fn open_loop_limits() {
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 2.0, 1.0, 0.0);
        assert_eq!(open_loop_output_limit(&p, 0.0).unwrap(), 0.5);
        assert_eq!(open_loop_output_limit(&p, -1.0).unwrap(), 0.0);
        assert_eq!(open_loop_output_limit(&p, -3.0).unwrap(), 0.0);
        let q = ModelParams::<f64>::new(1.0, 1.0, 1.0, 3.0, 1.0, 0.0);
        assert!((open_loop_output_limit(&q, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn autocatalytic_params_rejected() {
        let p = linear_ref().with_autocatalysis(1.0, 1.0, 2.0);
        assert!(matches!(solve_mu(&p), Err(IfflError::Unsupported(_))));
        assert!(closed_loop_equilibrium_linear(&p).is_err());
    }
}
