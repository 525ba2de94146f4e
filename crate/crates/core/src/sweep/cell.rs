use crate::equilibrium::{equilibria_autocat, EquilibriumReport, MARGINAL_TOL};
use crate::error::Result;
use crate::model::{ModelParams, Variant};
use crate::ode::{classify_u_outcome, integrate, InitialState, Outcome, Terminal};
use crate::scalar::Scalar;

use super::{SweepLabel, SweepSpec};

/// Equilibrium-based classification of one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicCell<T> {
    /// Interior equilibria, ascending in `y`; empty when `a + lambda <= 0`.
    pub equilibria: Vec<EquilibriumReport<T>>,
    /// `mu` of every interior equilibrium, or `[lambda]` when only the origin exists.
    pub mus: Vec<T>,
    /// Common outcome of all equilibria; `Indeterminate` if they disagree or none exist.
    pub label: SweepLabel,
}

pub fn algebraic_cell<T: Scalar>(params: &ModelParams<T>) -> Result<AlgebraicCell<T>> {
    if !(params.a + params.lambda > T::zero()) {
        params.validate()?;
        return Ok(AlgebraicCell {
            equilibria: Vec::new(),
            mus: vec![params.lambda],
            label: Outcome::from_rate(params.lambda, T::lit(MARGINAL_TOL)).into(),
        });
    }
    let equilibria = equilibria_autocat(params)?;
    let mus: Vec<T> = equilibria.iter().map(|e| e.mu).collect();
    let label = match equilibria.split_first() {
        None => SweepLabel::Indeterminate,
        Some((first, rest)) => {
            if rest.iter().all(|e| e.outcome == first.outcome) {
                first.outcome.into()
            } else {
                SweepLabel::Indeterminate
            }
        }
    };
    Ok(AlgebraicCell {
        equilibria,
        mus,
        label,
    })
}

/// Simulation-based classification of one parameter point. Failures are
/// captured in `error` and labelled `Indeterminate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCell<T> {
    pub label: SweepLabel,
    /// Fitted slope of `ln u` over the final window.
    pub slope: Option<T>,
    /// Final `(p, y)`.
    pub final_py: Option<(T, T)>,
    pub terminal: Option<Terminal>,
    pub error: Option<String>,
}

impl<T> SimulatedCell<T> {
    fn failed(message: String, terminal: Option<Terminal>) -> Self {
        SimulatedCell {
            label: SweepLabel::Indeterminate,
            slope: None,
            final_py: None,
            terminal,
            error: Some(message),
        }
    }
}

pub fn simulated_cell<T: Scalar>(params: &ModelParams<T>, spec: &SweepSpec<T>) -> SimulatedCell<T> {
    let traj = match integrate(
        params,
        InitialState::Full(spec.initial_state),
        None,
        &spec.integrator,
    ) {
        Ok(t) => t,
        Err(e) => return SimulatedCell::failed(e.to_string(), None),
    };
    let terminal = traj.meta.terminal;
    let final_py = traj.final_reduced().map(|s| (s.p, s.y));
    match classify_u_outcome(&traj, spec.slope_tol) {
        Ok(c) => {
            let mut cell = SimulatedCell {
                label: c.outcome.into(),
                slope: Some(c.slope),
                final_py,
                terminal: Some(terminal),
                error: None,
            };
            // a run cut off while p still climbs away from the p = 0 axis
            // has only sampled the axis saddle, not the attractor
            if let (Terminal::ReachedEnd, Some((p, y))) = (terminal, final_py) {
                let rate = axis_escape_rate(params, p, y);
                if rate > spec.slope_tol {
                    cell.label = SweepLabel::Indeterminate;
                    cell.error = Some(format!(
                        "run ended at t = {} with p still growing at rate {rate}; increase t_end",
                        traj.final_time()
                    ));
                }
            }
            cell
        }
        Err(e) => SimulatedCell::failed(e.to_string(), Some(terminal)),
    }
}

/// Per-capita growth rate `p'/p` of the closed loop.
fn axis_escape_rate<T: Scalar>(params: &ModelParams<T>, p: T, y: T) -> T {
    match params.variant {
        Variant::ProductionInhibition => {
            params.a + params.lambda - params.kappa * y - params.b * p
        }
        Variant::Degradation => T::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band_model(lambda: f64) -> ModelParams<f64> {
        ModelParams::<f64>::new(0.8, 1.0, 0.1, 1.0, 20.0, lambda).with_autocatalysis(1.95, 1.0, 2.0)
    }

    #[test]
    fn algebraic_cell_band_model() {
        let c = algebraic_cell(&band_model(25.0)).unwrap();
        assert_eq!(c.equilibria.len(), 1);
        assert_eq!(c.label, SweepLabel::Elimination);
        let c = algebraic_cell(&band_model(30.0)).unwrap();
        assert_eq!(c.label, SweepLabel::Proliferation);
    }

    #[test]
    fn algebraic_cell_without_net_growth_uses_lambda() {
        let c = algebraic_cell(&band_model(-3.0)).unwrap();
        assert_eq!(c.mus, vec![-3.0]);
        assert_eq!(c.label, SweepLabel::Elimination);
    }

    #[test]
    fn simulated_cell_matches_algebra_on_band_model() {
        let spec = SweepSpec::lambda(0.0, 1.0, 2);
        for lambda in [5.0, 15.0] {
            let sim = simulated_cell(&band_model(lambda), &spec);
            let alg = algebraic_cell(&band_model(lambda)).unwrap();
            assert_eq!(sim.label, alg.label);
            assert!(sim.error.is_none());
        }
    }

    #[test]
    fn run_cut_off_near_axis_saddle_is_indeterminate() {
        // from the unit state u collapses, y empties and p must regrow from ~1e-88
        let mut spec = SweepSpec::lambda(0.0, 1.0, 2);
        let sim = simulated_cell(&band_model(0.0), &spec);
        assert_eq!(sim.label, SweepLabel::Indeterminate);
        assert!(sim.error.as_deref().unwrap().contains("increase t_end"));
        assert!(sim.slope.is_some());

        spec.integrator = crate::ode::IntegratorConfig::new(800.0);
        let sim = simulated_cell(&band_model(0.0), &spec);
        assert_eq!(sim.label, SweepLabel::Elimination, "{sim:?}");
    }

    #[test]
    fn simulated_cell_captures_failures() {
        let mut spec = SweepSpec::lambda(0.0, 1.0, 2);
        spec.integrator.t_end = -1.0;
        let sim = simulated_cell(&band_model(5.0), &spec);
        assert_eq!(sim.label, SweepLabel::Indeterminate);
        assert!(sim.error.is_some());
    }
}
