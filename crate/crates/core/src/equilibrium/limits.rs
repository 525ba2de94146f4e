use crate::error::{IfflError, Result};
use crate::ode::{Terminal, Trajectory};
use crate::scalar::Scalar;

/// Fraction of the run, counted from the end, treated as the asymptotic tail.
pub const TAIL_FRACTION: f64 = 0.2;
/// Minimum number of samples in the tail.
pub const MIN_TAIL_SAMPLES: usize = 10;

/// Extremes of `p` and `y` over the final part of a run, used as empirical
/// stand-ins for liminf and limsup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimates<T> {
    pub p_liminf: T,
    pub p_limsup: T,
    pub y_liminf: T,
    pub y_limsup: T,
    pub samples: usize,
    /// False unless the run stopped on the steadiness criterion.
    pub settled: bool,
}

/// Min/max of `p` and `y` over the final 20% of the simulated time span.
pub fn estimate_p_y_limits<T: Scalar>(traj: &Trajectory<T>) -> Result<LimitEstimates<T>> {
    let (Some(&t0), Some(&t1)) = (traj.times.first(), traj.times.last()) else {
        return Err(IfflError::InsufficientData("empty trajectory".into()));
    };
    let range = traj.tail_indices((t1 - t0) * T::lit(TAIL_FRACTION));
    if range.len() < MIN_TAIL_SAMPLES {
        return Err(IfflError::InsufficientData(format!(
            "final window holds {} samples, need at least {MIN_TAIL_SAMPLES}",
            range.len()
        )));
    }
    let ys = traj.y();
    let mut est = LimitEstimates {
        p_liminf: T::infinity(),
        p_limsup: T::neg_infinity(),
        y_liminf: T::infinity(),
        y_limsup: T::neg_infinity(),
        samples: range.len(),
        settled: traj.meta.terminal == Terminal::Steady,
    };
    for i in range {
        let p = traj.derived[i].p;
        est.p_liminf = est.p_liminf.min(p);
        est.p_limsup = est.p_limsup.max(p);
        est.y_liminf = est.y_liminf.min(ys[i]);
        est.y_limsup = est.y_limsup.max(ys[i]);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FullState, InputSignal, ModelParams};
    use crate::ode::{integrate, InitialState, IntegratorConfig};

    fn unit_open_loop(delta: f64) -> ModelParams<f64> {
        ModelParams::<f64>::new(1.0, 1.0, 1.0, delta, 1.0, 0.0)
    }

    fn run(params: &ModelParams<f64>, input: &InputSignal<f64>, t_end: f64) -> Trajectory<f64> {
        let cfg = IntegratorConfig::new(t_end)
            .with_output_step(t_end / 500.0)
            .without_steady_stop();
        integrate(params, InitialState::Full(FullState::unit()), Some(input), &cfg).unwrap()
    }

    #[test]
    fn decaying_input_sends_p_to_zero() {
        let input = InputSignal::Exponential { beta: 1.0, mu: -2.0 };
        let est = estimate_p_y_limits(&run(&unit_open_loop(1.0), &input, 40.0)).unwrap();
        assert!(est.p_limsup < 1e-6 && est.p_liminf >= 0.0);
        assert!(est.y_limsup < 1e-3);
        assert!(!est.settled);
    }

    #[test]
    fn constant_input_adapts() {
        let input = InputSignal::Constant { alpha: 4.0 };
        let est = estimate_p_y_limits(&run(&unit_open_loop(2.0), &input, 60.0)).unwrap();
        assert!((est.p_liminf - 1.0).abs() < 1e-6 && (est.p_limsup - 1.0).abs() < 1e-6);
        assert!((est.y_liminf - 0.5).abs() < 1e-6 && (est.y_limsup - 0.5).abs() < 1e-6);
    }

    #[test]
    fn too_few_samples_rejected() {
        let params = unit_open_loop(1.0);
        let cfg = IntegratorConfig::new(10.0).with_output_times(vec![0.0, 5.0, 10.0]);
        let input = InputSignal::Constant { alpha: 1.0 };
        let traj =
            integrate(&params, InitialState::Full(FullState::unit()), Some(&input), &cfg).unwrap();
        assert!(matches!(
            estimate_p_y_limits(&traj),
            Err(IfflError::InsufficientData(_))
        ));
    }
}
