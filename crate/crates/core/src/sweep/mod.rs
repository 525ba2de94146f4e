//! Parameter sweeps: elimination/proliferation bands along `lambda` and
//! two-parameter heatmaps of the effective rate `mu`.

mod bands;
mod cell;
mod heatmap;

use std::fmt;

use crate::error::{IfflError, Result};
use crate::model::{FullState, ParamName};
use crate::ode::{IntegratorConfig, Outcome, DEFAULT_SLOPE_TOL};
use crate::scalar::Scalar;

pub use bands::{
    band_width_report, band_widths, lambda_sweep, BandReport, BandWidth, Boundary, BoundaryMethod,
    LambdaSweep, SweepPoint,
};
pub use cell::{algebraic_cell, simulated_cell, AlgebraicCell, SimulatedCell};
pub use heatmap::{heatmap, Heatmap, HeatmapCell};

/// Default horizon of per-cell simulations.
pub const DEFAULT_SWEEP_T_END: f64 = 200.0;
/// Default boundary bisection width as a fraction of the axis span.
pub const DEFAULT_BISECT_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepMethod {
    Algebraic,
    Simulation,
    Both,
}

impl SweepMethod {
    pub fn name(self) -> &'static str {
        match self {
            SweepMethod::Algebraic => "algebraic",
            SweepMethod::Simulation => "simulation",
            SweepMethod::Both => "both",
        }
    }

    pub fn algebraic(self) -> bool {
        matches!(self, SweepMethod::Algebraic | SweepMethod::Both)
    }

    pub fn simulation(self) -> bool {
        matches!(self, SweepMethod::Simulation | SweepMethod::Both)
    }
}

impl std::str::FromStr for SweepMethod {
    type Err = IfflError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebraic" => Ok(SweepMethod::Algebraic),
            "simulation" => Ok(SweepMethod::Simulation),
            "both" => Ok(SweepMethod::Both),
            other => Err(IfflError::InvalidConfig(format!(
                "unknown sweep method '{other}' (expected algebraic, simulation or both)"
            ))),
        }
    }
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome label of a sweep point; `Indeterminate` when the point could not
/// be classified (failed run, or several equilibria with conflicting signs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepLabel {
    Elimination,
    Proliferation,
    Marginal,
    Indeterminate,
}

impl SweepLabel {
    pub fn name(self) -> &'static str {
        match self {
            SweepLabel::Elimination => "elimination",
            SweepLabel::Proliferation => "proliferation",
            SweepLabel::Marginal => "marginal",
            SweepLabel::Indeterminate => "indeterminate",
        }
    }

    pub fn determinate(self) -> bool {
        self != SweepLabel::Indeterminate
    }
}

impl From<Outcome> for SweepLabel {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Elimination => SweepLabel::Elimination,
            Outcome::Proliferation => SweepLabel::Proliferation,
            Outcome::Marginal => SweepLabel::Marginal,
        }
    }
}

impl fmt::Display for SweepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One swept parameter: `count` evenly spaced values on `[min, max]`.
/// A single-value axis needs `count = 1` and `min = max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub param: ParamName,
    pub min: T,
    pub max: T,
    pub count: usize,
}

impl<T: Scalar> Axis<T> {
    pub fn new(param: ParamName, min: T, max: T, count: usize) -> Self {
        Axis {
            param,
            min,
            max,
            count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.count {
            0 => false,
            1 => self.min == self.max,
            _ => self.min < self.max,
        };
        if !ok || !self.min.is_finite() || !self.max.is_finite() {
            return Err(IfflError::InvalidConfig(format!(
                "axis {}: need count >= 2 with min < max (or count = 1 with min = max), got [{}, {}] x {}",
                self.param, self.min, self.max, self.count
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<T> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = T::from_usize_lossy(self.count - 1);
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + (self.max - self.min) * T::from_usize_lossy(i) / last
                }
            })
            .collect()
    }

    pub fn span(&self) -> T {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub axis1: Axis<T>,
    pub axis2: Option<Axis<T>>,
    pub method: SweepMethod,
    /// Start of every simulation.
    pub initial_state: FullState<T>,
    pub integrator: IntegratorConfig<T>,
    /// Dead band of the `ln u` slope classification.
    pub slope_tol: T,
    /// Boundary bisection stops at `span * bisect_fraction`.
    pub bisect_fraction: T,
}

impl<T: Scalar> SweepSpec<T> {
    /// Defaults: both methods, start at `x = y = u = 1`, horizon 200 with
    /// steady early exit, slope dead band `1e-4`, bisection to `1e-4` of the span.
    pub fn new(axis1: Axis<T>) -> Self {
        SweepSpec {
            axis1,
            axis2: None,
            method: SweepMethod::Both,
            initial_state: FullState::unit(),
            integrator: IntegratorConfig::new(T::lit(DEFAULT_SWEEP_T_END)),
            slope_tol: T::lit(DEFAULT_SLOPE_TOL),
            bisect_fraction: T::lit(DEFAULT_BISECT_FRACTION),
        }
    }

    pub fn lambda(min: T, max: T, count: usize) -> Self {
        Self::new(Axis::new(ParamName::Lambda, min, max, count))
    }

    pub fn with_axis2(mut self, axis: Axis<T>) -> Self {
        self.axis2 = Some(axis);
        self
    }

    pub fn with_method(mut self, method: SweepMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_integrator(mut self, integrator: IntegratorConfig<T>) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.param == self.axis1.param {
                return Err(IfflError::InvalidConfig(format!(
                    "both sweep axes vary {}",
                    a2.param
                )));
            }
        }
        self.initial_state.validate()?;
        self.integrator.validate()?;
        if !(self.slope_tol >= T::zero()) {
            return Err(IfflError::InvalidConfig(format!(
                "slope_tol must be non-negative, got {}",
                self.slope_tol
            )));
        }
        if !(self.bisect_fraction > T::zero() && self.bisect_fraction < T::one()) {
            return Err(IfflError::InvalidConfig(format!(
                "bisect_fraction must lie in (0, 1), got {}",
                self.bisect_fraction
            )));
        }
        Ok(())
    }
}
