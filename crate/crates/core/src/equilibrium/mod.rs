//! Equilibria of the reduced closed-loop system, their linear stability, and
//! asymptotic limits of the open-loop output.

mod autocat;
mod limits;
mod linear;
pub(crate) mod roots;

use std::fmt;

use crate::model::{hill_derivative, ModelParams};
use crate::ode::Outcome;
use crate::scalar::Scalar;

pub use autocat::{
    boundary_equilibria, equilibria_autocat, stable_output_levels, switch_lambdas,
    uniqueness_condition, Uniqueness, UniquenessCheck,
};
pub use limits::{estimate_p_y_limits, LimitEstimates};
pub use linear::{closed_loop_equilibrium_linear, open_loop_output_limit, origin_report, solve_mu};
pub use roots::SCAN_POINTS;

/// `|mu|` at or below this is labelled [`Outcome::Marginal`].
pub const MARGINAL_TOL: f64 = 1e-9;
/// `|det|` or `|trace|` below this is labelled [`Stability::Degenerate`].
pub const DEGENERATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    StableNodeFocus,
    Saddle,
    Unstable,
    Degenerate,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::StableNodeFocus => "stable",
            Stability::Saddle => "saddle",
            Stability::Unstable => "unstable",
            Stability::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumSource {
    ClosedForm,
    RootScan,
}

impl EquilibriumSource {
    pub fn name(self) -> &'static str {
        match self {
            EquilibriumSource::ClosedForm => "closed_form",
            EquilibriumSource::RootScan => "root_scan",
        }
    }
}

/// An equilibrium `(p, y)` of the reduced system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport<T> {
    pub p_bar: T,
    pub y_bar: T,
    /// Effective growth rate of `u` at the equilibrium, `lambda - kappa y`.
    pub mu: T,
    pub jacobian_trace: T,
    pub jacobian_det: T,
    pub stability: Stability,
    pub outcome: Outcome,
    pub source: EquilibriumSource,
}

impl<T: Scalar> EquilibriumReport<T> {
    pub(crate) fn at(params: &ModelParams<T>, p: T, y: T, source: EquilibriumSource) -> Self {
        let j = jacobian_reduced(params, p, y);
        let trace = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let mu = params.lambda - params.kappa * y;
        EquilibriumReport {
            p_bar: p,
            y_bar: y,
            mu,
            jacobian_trace: trace,
            jacobian_det: det,
            stability: classify_stability(trace, det),
            outcome: Outcome::from_rate(mu, T::lit(MARGINAL_TOL)),
            source,
        }
    }
}

/// Jacobian of the reduced field, Hill slope included in the `(y, y)` entry:
///
/// ```text
/// [ a + lambda - kappa y - 2 b p    -kappa p          ]
/// [ c                               -delta + H'(y)    ]
/// ```
pub fn jacobian_reduced<T: Scalar>(params: &ModelParams<T>, p: T, y: T) -> [[T; 2]; 2] {
    [
        [
            params.a + params.lambda - params.kappa * y - T::lit(2.0) * params.b * p,
            -params.kappa * p,
        ],
        [params.c, -params.delta + hill_derivative(params, y)],
    ]
}

/// Planar classification from trace and determinant.
pub fn classify_stability<T: Scalar>(trace: T, det: T) -> Stability {
    let tol = T::lit(DEGENERATE_TOL);
    if det.abs() < tol || trace.abs() < tol {
        Stability::Degenerate
    } else if det < T::zero() {
        Stability::Saddle
    } else if trace < T::zero() {
        Stability::StableNodeFocus
    } else {
        Stability::Unstable
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reduced_field, ModelParams};
    use rand::{rngs::StdRng, Rng, SeedableRng};

    #[test]
    fn classification_table() {
        assert_eq!(classify_stability(-1.0, 2.0), Stability::StableNodeFocus);
        assert_eq!(classify_stability(1.0, 2.0), Stability::Unstable);
        assert_eq!(classify_stability(1.0, -2.0), Stability::Saddle);
        assert_eq!(classify_stability(-1.0, 1e-12), Stability::Degenerate);
        assert_eq!(classify_stability(0.0, 3.0), Stability::Degenerate);
    }

    #[test]
    fn analytic_jacobian_matches_central_differences() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let params = ModelParams::new(
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.05..3.0),
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.1..25.0),
                rng.gen_range(-2.0..30.0),
            )
            .with_autocatalysis(rng.gen_range(0.0..3.0), rng.gen_range(0.3..2.0), 2.0);
            let p: f64 = rng.gen_range(0.01..3.0);
            let y: f64 = rng.gen_range(0.01..3.0);
            let j = jacobian_reduced(&params, p, y);
            let hp = 1e-6 * p;
            let hy = 1e-6 * y;
            let fp_plus = reduced_field(&params, p + hp, y);
            let fp_minus = reduced_field(&params, p - hp, y);
            let fy_plus = reduced_field(&params, p, y + hy);
            let fy_minus = reduced_field(&params, p, y - hy);
            let fd = [
                [
                    (fp_plus.dp - fp_minus.dp) / (2.0 * hp),
                    (fy_plus.dp - fy_minus.dp) / (2.0 * hy),
                ],
                [
                    (fp_plus.dy - fp_minus.dy) / (2.0 * hp),
                    (fy_plus.dy - fy_minus.dy) / (2.0 * hy),
                ],
            ];
            let norm = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for r in 0..2 {
                for c in 0..2 {
                    assert!(
                        (fd[r][c] - j[r][c]).abs() <= 1e-6 * norm.max(1.0),
                        "J[{r}][{c}] analytic {} vs fd {}",
                        j[r][c],
                        fd[r][c]
                    );
                }
            }
        }
    }
}
