use std::fmt;

use crate::error::{IfflError, Result};
use crate::scalar::Scalar;

use super::{LoopMode, StateSeries, Terminal, Trajectory};

pub const DEFAULT_SLOPE_TOL: f64 = 1e-4;

/// Long-run fate of the controlled population `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// `u -> 0`.
    Elimination,
    /// `u -> infinity`.
    Proliferation,
    /// Growth rate indistinguishable from zero.
    Marginal,
}

impl Outcome {
    /// Label from a growth rate with a symmetric dead band.
    pub fn from_rate<T: Scalar>(rate: T, tol: T) -> Self {
        if rate < -tol {
            Outcome::Elimination
        } else if rate > tol {
            Outcome::Proliferation
        } else {
            Outcome::Marginal
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Elimination => "elimination",
            Outcome::Proliferation => "proliferation",
            Outcome::Marginal => "marginal",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthClassification<T> {
    pub outcome: Outcome,
    /// Least-squares slope of `ln u` over the final window.
    pub slope: T,
    pub samples: usize,
}

/// Least-squares slope of `w = ln u` against `t` over the trajectory's final
/// steady window, labelled with a dead band of `slope_tol`.
pub fn classify_u_outcome<T: Scalar>(
    traj: &Trajectory<T>,
    slope_tol: T,
) -> Result<GrowthClassification<T>> {
    let StateSeries::Full(states) = &traj.states else {
        return Err(IfflError::WrongExperiment(
            "trajectory has no ln u record (reduced system)".into(),
        ));
    };
    if traj.meta.loop_mode != LoopMode::Closed {
        return Err(IfflError::WrongExperiment(
            "outcome classification needs a closed-loop trajectory".into(),
        ));
    }
    if traj.meta.terminal == Terminal::Diverged {
        return Err(IfflError::NotConverged(format!(
            "run diverged at t = {}",
            traj.final_time()
        )));
    }
    let window = traj.meta.steady_window;
    let range = traj.tail_indices(window);
    let n = range.len();
    if n < 2 {
        return Err(IfflError::InsufficientData(format!(
            "{n} sample(s) in the final window of length {window}"
        )));
    }
    let ts = &traj.times[range.clone()];
    let ws: Vec<T> = states[range].iter().map(|s| s.w).collect();
    let slope = least_squares_slope(ts, &ws);
    Ok(GrowthClassification {
        outcome: Outcome::from_rate(slope, slope_tol),
        slope,
        samples: n,
    })
}

pub(crate) fn least_squares_slope<T: Scalar>(ts: &[T], ys: &[T]) -> T {
    let n = T::from_usize_lossy(ts.len());
    let t_mean = ts.iter().fold(T::zero(), |acc, &t| acc + t) / n;
    let y_mean = ys.iter().fold(T::zero(), |acc, &y| acc + y) / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&t, &y) in ts.iter().zip(ys) {
        let dt = t - t_mean;
        sxy = sxy + dt * (y - y_mean);
        sxx = sxx + dt * dt;
    }
    if sxx == T::zero() {
        T::zero()
    } else {
        sxy / sxx
    }
}
