use crate::error::{IfflError, Result};
use crate::scalar::Scalar;

use super::input::InputSignal;
use super::params::{ModelParams, Variant};
use super::state::{FullDerivative, FullState, ReducedDerivative, ReducedState};

/// `x^n`, using repeated multiplication for integral exponents.
#[inline]
pub(crate) fn pow_n<T: Scalar>(x: T, n: T) -> T {
    if n == n.round() && n.abs() <= T::lit(64.0) {
        x.powi(n.to_i32().unwrap_or(0))
    } else {
        x.powf(n)
    }
}

/// Hill self-activation `V y^n / (K^n + y^n)`; zero for `y <= 0`.
pub fn hill<T: Scalar>(params: &ModelParams<T>, y: T) -> T {
    if params.v_max == T::zero() || y <= T::zero() {
        return T::zero();
    }
    let r = pow_n(y / params.k_half, params.n_hill);
    if !r.is_finite() {
        return params.v_max;
    }
    params.v_max * r / (T::one() + r)
}

/// `d/dy` of the Hill term: `V n K^n y^(n-1) / (K^n + y^n)^2`.
pub fn hill_derivative<T: Scalar>(params: &ModelParams<T>, y: T) -> T {
    if params.v_max == T::zero() {
        return T::zero();
    }
    if y <= T::zero() {
        return if params.n_hill == T::one() {
            params.v_max / params.k_half
        } else {
            T::zero()
        };
    }
    let r = pow_n(y / params.k_half, params.n_hill);
    if !r.is_finite() {
        return T::zero();
    }
    let s = T::one() + r;
    params.v_max * params.n_hill * (r / s) / (s * y)
}

/// Net reaction term of the `y` equation at fixed input: `f(y) = -delta y + V y^n / (K^n + y^n)`.
pub fn reaction_term_f<T: Scalar>(params: &ModelParams<T>, y: T) -> T {
    -params.delta * y + hill(params, y)
}

fn check_finite<T: Scalar>(component: &'static str, value: T) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(IfflError::NonFiniteState {
            component,
            value: value.as_f64(),
        })
    }
}

/// Right-hand side in the solver's working coordinates `(ln x, y, w)`.
///
/// `open_loop_v` carries the input log-derivative in open loop; `None` selects
/// the closed-loop law `w' = lambda - kappa y`.
#[inline]
pub(crate) fn rhs_log_coords<T: Scalar>(
    params: &ModelParams<T>,
    ln_x: T,
    y: T,
    w: T,
    open_loop_v: Option<T>,
) -> [T; 3] {
    let p = (w - ln_x).exp();
    let d_ln_x = params.b * p - params.a;
    let dy = match params.variant {
        Variant::ProductionInhibition => params.c * p + reaction_term_f(params, y),
        Variant::Degradation => ln_x.exp() * (params.c * p - params.delta * y),
    };
    let dw = open_loop_v.unwrap_or(params.lambda - params.kappa * y);
    [d_ln_x, dy, dw]
}

/// Time derivative `(x', y', w')` of the full system.
///
/// With `u_external` the loop is open: `u` follows the prescribed input and
/// `w' = v(t)`. Otherwise `w' = lambda - kappa y`.
pub fn rhs_full<T: Scalar>(
    params: &ModelParams<T>,
    state: &FullState<T>,
    u_external: Option<&InputSignal<T>>,
    t: T,
) -> Result<FullDerivative<T>> {
    check_finite("ln_x", state.ln_x)?;
    check_finite("y", state.y)?;
    check_finite("w", state.w)?;
    check_finite("t", t)?;
    let x = state.x();
    let u = state.u();
    let dx = -params.a * x + params.b * u;
    let dy = match params.variant {
        Variant::ProductionInhibition => params.c * u / x + reaction_term_f(params, state.y),
        Variant::Degradation => params.c * u - params.delta * x * state.y,
    };
    let dw = match u_external {
        Some(input) => input.log_derivative(t),
        None => params.lambda - params.kappa * state.y,
    };
    Ok(FullDerivative { dx, dy, dw })
}

/// Planar closed-loop system `p' = p (a + lambda - kappa y - b p)`,
/// `y' = c p - delta y + V y^n / (K^n + y^n)`.
///
/// Boundary points (`p = 0` or `y = 0`) are accepted so that nullclines and
/// invariant axes can be probed.
pub fn rhs_reduced<T: Scalar>(
    params: &ModelParams<T>,
    state: &ReducedState<T>,
) -> Result<ReducedDerivative<T>> {
    if params.variant != Variant::ProductionInhibition {
        return Err(IfflError::UnsupportedVariant {
            operation: "rhs_reduced",
            variant: params.variant.name(),
        });
    }
    check_finite("p", state.p)?;
    check_finite("y", state.y)?;
    Ok(reduced_field(params, state.p, state.y))
}

#[inline]
pub(crate) fn reduced_field<T: Scalar>(params: &ModelParams<T>, p: T, y: T) -> ReducedDerivative<T> {
    ReducedDerivative {
        dp: p * (params.a + params.lambda - params.kappa * y - params.b * p),
        dy: params.c * p + reaction_term_f(params, y),
    }
}

/// Open-loop ratio dynamics `p' = p (a + v - b p)` for a given input log-derivative `v`.
pub fn rhs_open_loop_p<T: Scalar>(params: &ModelParams<T>, p: T, v: T) -> Result<T> {
    check_finite("p", p)?;
    check_finite("v", v)?;
    Ok(p * (params.a + v - params.b * p))
}

/// Divergence of the reduced field scaled by the Dulac function `1/p`:
/// `-b + (-delta + H'(y)) / p`. Without autocatalysis this is `-b - delta/p`.
pub fn dulac_divergence<T: Scalar>(params: &ModelParams<T>, state: &ReducedState<T>) -> T {
    -params.b + (-params.delta + hill_derivative(params, state.y)) / state.p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear_ref() -> ModelParams<f64> {
        ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0)
    }

    fn hill_ref() -> ModelParams<f64> {
        ModelParams::<f64>::new(0.8, 1.0, 0.1, 1.0, 20.0, 25.0).with_autocatalysis(1.95, 1.0, 2.0)
    }

    #[test]
    fn full_rhs_at_unit_state() {
        let d = rhs_full(&linear_ref(), &FullState::unit(), None, 0.0).unwrap();
        assert_eq!((d.dx, d.dy, d.dw), (0.0, 0.0, -1.0));
    }

    #[test]
    fn full_rhs_off_equilibrium_when_p_is_one() {
        // x = u means p = 1, so y' = 1 - 2/3 even though y sits at its equilibrium value
        let s = FullState::from_concentrations(1.7, 2.0 / 3.0, 1.7).unwrap();
        let d = rhs_full(&linear_ref(), &s, None, 0.0).unwrap();
        assert!((d.dy - 1.0 / 3.0).abs() < 1e-14);
        let r = rhs_reduced(&linear_ref(), &ReducedState { p: 2.0 / 3.0, y: 2.0 / 3.0 }).unwrap();
        assert!(r.dp.abs() < 1e-15 && r.dy.abs() < 1e-15);
    }

    #[test]
    fn degradation_balanced_point() {
        let p = linear_ref().with_variant(Variant::Degradation);
        let d = rhs_full(&p, &FullState::unit(), None, 0.0).unwrap();
        assert_eq!(d.dy, 0.0);
    }

    #[test]
    fn open_loop_uses_input_log_derivative() {
        let input = InputSignal::Exponential { beta: 1.0, mu: 0.3 };
        let d = rhs_full(&linear_ref(), &FullState::unit(), Some(&input), 2.0).unwrap();
        assert_eq!(d.dw, 0.3);
    }

    #[test]
    fn full_rhs_rejects_non_finite() {
        let s = FullState {
            ln_x: 0.0,
            y: f64::INFINITY,
            w: 0.0,
        };
        assert!(matches!(
            rhs_full(&linear_ref(), &s, None, 0.0),
            Err(IfflError::NonFiniteState { component: "y", .. })
        ));
    }

    #[test]
    fn reduced_rhs_examples() {
        let r = rhs_reduced(&linear_ref(), &ReducedState { p: 0.0, y: 1.0 }).unwrap();
        assert_eq!(r.dp, 0.0);
        let r = rhs_reduced(&hill_ref(), &ReducedState { p: 0.6, y: 1.26 }).unwrap();
        assert!(r.dp.hypot(r.dy) < 1e-2);
        let deg = linear_ref().with_variant(Variant::Degradation);
        assert!(matches!(
            rhs_reduced(&deg, &ReducedState { p: 1.0, y: 1.0 }),
            Err(IfflError::UnsupportedVariant { .. })
        ));
    }

    #[test]
    fn open_loop_p_examples() {
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0);
        for mu in [-0.5, 0.0, 0.7, 2.0] {
            assert!(rhs_open_loop_p(&p, 1.0 + mu, mu).unwrap().abs() < 1e-15);
        }
        for x in [0.01, 1.0, 5.0] {
            assert!(rhs_open_loop_p(&p, x, -2.0).unwrap() < 0.0);
        }
        let q = ModelParams::<f64>::new(2.0, 3.0, 1.0, 1.0, 1.0, 0.0);
        assert_eq!(rhs_open_loop_p(&q, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn reaction_term_examples() {
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 3.0, 1.0, 0.0).with_autocatalysis(10.0, 2.0, 2.0);
        assert!((reaction_term_f(&p, 1.0) + 1.0).abs() < 1e-15);
        let lin = ModelParams::<f64>::new(1.0, 1.0, 1.0, 3.0, 1.0, 0.0);
        assert_eq!(reaction_term_f(&lin, 2.0), -6.0);
        let f3 = reaction_term_f(&hill_ref(), 1.26);
        let expected = -1.26 + 1.95 * 1.5876 / 2.5876;
        assert!((f3 - expected).abs() < 1e-12);
        assert!((f3 + 0.0637).abs() < 1e-3);
    }

    #[test]
    fn hill_handles_extremes_and_fractional_exponents() {
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).with_autocatalysis(2.0, 1.0, 2.5);
        assert_eq!(hill(&p, 0.0), 0.0);
        assert!((hill(&p, 1e200) - 2.0).abs() < 1e-12);
        let y: f64 = 0.7;
        let expected = 2.0 * y.powf(2.5) / (1.0 + y.powf(2.5));
        assert!((hill(&p, y) - expected).abs() < 1e-15);
        let one = p.with_autocatalysis(3.0, 2.0, 1.0);
        assert_eq!(hill_derivative(&one, 0.0), 1.5);
    }

    #[test]
    fn hill_derivative_matches_central_difference() {
        let p = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).with_autocatalysis(1.95, 1.3, 3.0);
        for &y in &[0.05, 0.4, 1.0, 2.5, 9.0] {
            let h = 1e-6 * y;
            let fd = (hill(&p, y + h) - hill(&p, y - h)) / (2.0 * h);
            assert!((fd - hill_derivative(&p, y)).abs() < 1e-7 * (1.0 + fd.abs()));
        }
    }

    proptest! {
        #[test]
        fn reduction_consistency(
            a in 0.1f64..3.0, b in 0.1f64..3.0, c in 0.1f64..3.0, delta in 0.1f64..3.0,
            kappa in 0.1f64..20.0, lambda in -3.0f64..30.0, v in 0.0f64..3.0,
            ln_x in -5.0f64..5.0, y in 0.01f64..5.0, w in -5.0f64..5.0,
        ) {
            let params = ModelParams::new(a, b, c, delta, kappa, lambda).with_autocatalysis(v, 1.0, 2.0);
            let s = FullState { ln_x, y, w };
            let d = rhs_full(&params, &s, None, 0.0).unwrap();
            let (x, u) = (s.x(), s.u());
            let dp_full = d.dw * u / x - u * d.dx / (x * x);
            let r = rhs_reduced(&params, &ReducedState { p: u / x, y }).unwrap();
            let scale = r.dp.abs().max(s.p() * (a + lambda.abs() + kappa * y + b * s.p()));
            prop_assert!((dp_full - r.dp).abs() <= 1e-12 * scale);
            prop_assert!((d.dy - r.dy).abs() <= 1e-12 * (1.0 + d.dy.abs() + c * s.p() + delta * y + v));
        }

        #[test]
        fn dulac_sign_is_negative(
            b in 0.01f64..10.0, delta in 0.01f64..10.0, p in 1e-6f64..1e3, y in 0.0f64..100.0,
        ) {
            let params = ModelParams::<f64>::new(1.0, b, 1.0, delta, 1.0, 1.0);
            let div = dulac_divergence(&params, &ReducedState { p, y });
            prop_assert!(div < 0.0);
            prop_assert!((div - (-b - delta / p)).abs() <= 1e-12 * div.abs());
        }

        #[test]
        fn dulac_matches_finite_difference(
            p in 0.05f64..5.0, y in 0.05f64..5.0, v in 0.0f64..3.0, lambda in 0.0f64..30.0,
        ) {
            let params = ModelParams::<f64>::new(0.8, 1.0, 0.1, 1.0, 20.0, lambda).with_autocatalysis(v, 1.0, 2.0);
            let scaled = |p: f64, y: f64| {
                let r = reduced_field(&params, p, y);
                (r.dp / p, r.dy / p)
            };
            let h = 1e-5;
            let dfp = (scaled(p + h, y).0 - scaled(p - h, y).0) / (2.0 * h);
            let dfy = (scaled(p, y + h).1 - scaled(p, y - h).1) / (2.0 * h);
            let div = dulac_divergence(&params, &ReducedState { p, y });
            prop_assert!((dfp + dfy - div).abs() < 1e-6 * (1.0 + div.abs()));
        }
    }
}
