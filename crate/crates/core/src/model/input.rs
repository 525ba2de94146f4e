use crate::error::{IfflError, Result};
use crate::scalar::Scalar;

/// An externally prescribed input `u(t) > 0` for open-loop experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal<T> {
    /// `u = alpha`.
    Constant { alpha: T },
    /// `u = alpha + beta t`.
    Linear { alpha: T, beta: T },
    /// `u = beta exp(mu t)`.
    Exponential { beta: T, mu: T },
    /// `u = u_minus` for `t < t_step`, `u_plus` afterwards.
    Step { u_minus: T, u_plus: T, t_step: T },
    /// Table of samples, interpolated linearly in `ln u`.
    Sampled(SampledInput<T>),
}

/// Sampled input stored as `(t_i, ln u_i)`; the log-derivative is piecewise
/// constant between samples and zero outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledInput<T> {
    times: Vec<T>,
    ln_u: Vec<T>,
}

impl<T: Scalar> SampledInput<T> {
    pub fn new(samples: &[(T, T)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(IfflError::InvalidInput("sampled input needs at least one sample".into()));
        }
        let mut times = Vec::with_capacity(samples.len());
        let mut ln_u = Vec::with_capacity(samples.len());
        for (i, &(t, u)) in samples.iter().enumerate() {
            if !t.is_finite() || !u.is_finite() || u <= T::zero() {
                return Err(IfflError::InvalidInput(format!(
                    "sample {i} = ({t}, {u}) must have finite t and positive finite u"
                )));
            }
            if let Some(&prev) = times.last() {
                if t <= prev {
                    return Err(IfflError::InvalidInput(format!(
                        "sample times must increase strictly (sample {i} at t = {t})"
                    )));
                }
            }
            times.push(t);
            ln_u.push(u.ln());
        }
        Ok(SampledInput { times, ln_u })
    }

    /// Samples `u = exp(g(t))` on a uniform grid, which is how smooth inputs with
    /// a known log profile are fed to the solver.
    pub fn from_log_profile(t0: T, t1: T, count: usize, g: impl Fn(T) -> T) -> Result<Self> {
        if count < 2 || t1 <= t0 {
            return Err(IfflError::InvalidInput(
                "log profile needs count >= 2 and t1 > t0".into(),
            ));
        }
        let dt = (t1 - t0) / T::from_usize_lossy(count - 1);
        let times: Vec<T> = (0..count)
            .map(|i| t0 + dt * T::from_usize_lossy(i))
            .collect();
        let ln_u = times.iter().map(|&t| g(t)).collect::<Vec<_>>();
        if ln_u.iter().any(|v| !v.is_finite()) {
            return Err(IfflError::InvalidInput("log profile is not finite".into()));
        }
        Ok(SampledInput { times, ln_u })
    }

    pub fn samples(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.times
            .iter()
            .zip(&self.ln_u)
            .map(|(&t, &l)| (t, l.exp()))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index `i` of the interval `[t_i, t_{i+1})` containing `t`, if any.
    fn interval(&self, t: T) -> Option<usize> {
        let n = self.times.len();
        if n < 2 || t < self.times[0] || t >= self.times[n - 1] {
            return None;
        }
        let idx = self.times.partition_point(|&s| s <= t);
        Some(idx - 1)
    }

    fn slope(&self, i: usize) -> T {
        (self.ln_u[i + 1] - self.ln_u[i]) / (self.times[i + 1] - self.times[i])
    }

    fn ln_value(&self, t: T) -> T {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.ln_u[0];
        }
        if t >= self.times[n - 1] {
            return self.ln_u[n - 1];
        }
        let i = self.interval(t).unwrap_or(0);
        self.ln_u[i] + self.slope(i) * (t - self.times[i])
    }
}

impl<T: Scalar> InputSignal<T> {
    /// Checks positivity of `u` on `[t0, t1]`.
    pub fn validate_on(&self, t0: T, t1: T) -> Result<()> {
        let positive = |name: &str, v: T| -> Result<()> {
            if !v.is_finite() || v <= T::zero() {
                Err(IfflError::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            } else {
                Ok(())
            }
        };
        let finite = |name: &str, v: T| -> Result<()> {
            if !v.is_finite() {
                Err(IfflError::InvalidInput(format!("{name} must be finite, got {v}")))
            } else {
                Ok(())
            }
        };
        match self {
            InputSignal::Constant { alpha } => positive("alpha", *alpha),
            InputSignal::Linear { alpha, beta } => {
                finite("alpha", *alpha)?;
                finite("beta", *beta)?;
                let u0 = *alpha + *beta * t0;
                let u1 = *alpha + *beta * t1;
                if u0 <= T::zero() || u1 <= T::zero() {
                    return Err(IfflError::InvalidInput(format!(
                        "linear input alpha + beta t must stay positive on [{t0}, {t1}]"
                    )));
                }
                Ok(())
            }
            InputSignal::Exponential { beta, mu } => {
                positive("beta", *beta)?;
                finite("mu", *mu)
            }
            InputSignal::Step {
                u_minus,
                u_plus,
                t_step,
            } => {
                positive("u_minus", *u_minus)?;
                positive("u_plus", *u_plus)?;
                finite("t_step", *t_step)
            }
            InputSignal::Sampled(s) => {
                if s.is_empty() {
                    Err(IfflError::InvalidInput("empty sampled input".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// `ln u(t)`.
    pub fn ln_value(&self, t: T) -> T {
        match self {
            InputSignal::Constant { alpha } => alpha.ln(),
            InputSignal::Linear { alpha, beta } => (*alpha + *beta * t).ln(),
            InputSignal::Exponential { beta, mu } => beta.ln() + *mu * t,
            InputSignal::Step {
                u_minus,
                u_plus,
                t_step,
            } => {
                if t < *t_step {
                    u_minus.ln()
                } else {
                    u_plus.ln()
                }
            }
            InputSignal::Sampled(s) => s.ln_value(t),
        }
    }

    pub fn value(&self, t: T) -> T {
        self.ln_value(t).exp()
    }

    /// Log-derivative `v = u'/u` at `t`. Piecewise kinds report the value on the
    /// interval that starts at or before `t` (right-continuous convention).
    pub fn log_derivative(&self, t: T) -> T {
        self.log_derivative_on_segment(t, t)
    }

    /// Log-derivative evaluated as if `t` belongs to the smooth segment that
    /// contains `segment_start`. The solver calls this so that stages landing on
    /// a segment's right end do not pick up the next segment's slope.
    pub(crate) fn log_derivative_on_segment(&self, t: T, segment_start: T) -> T {
        match self {
            InputSignal::Constant { .. } | InputSignal::Step { .. } => T::zero(),
            InputSignal::Linear { alpha, beta } => *beta / (*alpha + *beta * t),
            InputSignal::Exponential { mu, .. } => *mu,
            InputSignal::Sampled(s) => s
                .interval(segment_start)
                .map(|i| s.slope(i))
                .unwrap_or_else(T::zero),
        }
    }

    /// Times in `(t0, t1)` where `u` or its log-derivative is discontinuous;
    /// the solver restarts there.
    pub fn breakpoints(&self, t0: T, t1: T) -> Vec<T> {
        match self {
            InputSignal::Step { t_step, .. } if *t_step > t0 && *t_step < t1 => vec![*t_step],
            InputSignal::Sampled(s) => s
                .times
                .iter()
                .copied()
                .filter(|&t| t > t0 && t < t1)
                .collect(),
            _ => Vec::new(),
        }
    }
}
