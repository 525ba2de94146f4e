//! Adaptive integration of the full and reduced systems.

mod dopri;
mod outcome;
mod step;

use crate::error::{IfflError, Result};
use crate::model::{
    rhs_log_coords, FullState, InputSignal, ModelParams, ReducedState, Variant,
};
use crate::scalar::Scalar;

use dopri::{solve_segment, AcceptedStep, Control, Counters, StepControl, VectorField};

pub use outcome::{classify_u_outcome, GrowthClassification, Outcome, DEFAULT_SLOPE_TOL};
pub use step::{simulate_step_response, StepResponse};

/// Runs are aborted as diverged once `y` or `p` exceeds this.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Default attempted-step budget per run.
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Solver settings. Build with [`IntegratorConfig::new`] and adjust fields.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: T,
    pub t_end: T,
    /// Sample times for dense output; `None` records every accepted step.
    pub output_times: Option<Vec<T>>,
    /// How long the steadiness criterion must hold before stopping early.
    pub steady_window: T,
    /// Threshold on `|f| / (1 + |s|)` in `(p, y)` coordinates; zero disables
    /// early stopping.
    pub steady_tol: T,
    /// Attempted-step budget; exhausting it is a non-convergence error.
    pub max_steps: usize,
}

impl<T: Scalar> IntegratorConfig<T> {
    /// Defaults: `rel_tol = 1e-8`, `abs_tol = 1e-10`, `steady_tol = 1e-9`,
    /// `steady_window = t_end / 10`, `max_step = min(steady_window / 10, 1)`,
    /// `max_steps = 1_000_000`.
    ///
    /// The step cap keeps the solver inside its stability region near
    /// equilibria, where step-size noise would otherwise hold the derivative
    /// norm above `steady_tol`.
    pub fn new(t_end: T) -> Self {
        let steady_window = t_end / T::lit(10.0);
        IntegratorConfig {
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            max_step: (steady_window / T::lit(10.0)).min(T::one()),
            t_end,
            output_times: None,
            steady_window,
            steady_tol: T::lit(1e-9),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_output_times(mut self, times: Vec<T>) -> Self {
        self.output_times = Some(times);
        self
    }

    /// Uniform output grid `0, dt, 2 dt, ...` up to `t_end`.
    pub fn with_output_step(self, dt: T) -> Self {
        let n = (self.t_end / dt).floor().to_usize().unwrap_or(0);
        let mut times: Vec<T> = (0..=n).map(|i| dt * T::from_usize_lossy(i)).collect();
        if let Some(&last) = times.last() {
            if self.t_end - last > dt * T::lit(1e-9) {
                times.push(self.t_end);
            }
        }
        self.with_output_times(times)
    }

    pub fn without_steady_stop(mut self) -> Self {
        self.steady_tol = T::zero();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(IfflError::InvalidConfig(msg));
        if !(self.rel_tol > T::zero()) || !(self.abs_tol > T::zero()) {
            return bad(format!(
                "tolerances must be positive (rel_tol = {}, abs_tol = {})",
                self.rel_tol, self.abs_tol
            ));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return bad(format!("t_end must be positive and finite, got {}", self.t_end));
        }
        if !(self.max_step > T::zero()) {
            return bad(format!("max_step must be positive, got {}", self.max_step));
        }
        if !(self.steady_window >= T::zero()) || self.steady_window >= self.t_end {
            return bad(format!(
                "steady_window must lie in [0, t_end), got {}",
                self.steady_window
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if !(self.steady_tol >= T::zero()) {
            return bad(format!("steady_tol must be non-negative, got {}", self.steady_tol));
        }
        if let Some(times) = &self.output_times {
            if times.is_empty() {
                return bad("output_times is empty".into());
            }
            for pair in times.windows(2) {
                if pair[1] <= pair[0] {
                    return bad("output_times must increase strictly".into());
                }
            }
            if times[0] < T::zero() || times[times.len() - 1] > self.t_end {
                return bad("output_times must lie within [0, t_end]".into());
            }
        }
        Ok(())
    }
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    ReachedEnd,
    Steady,
    Diverged,
}

impl Terminal {
    pub fn name(self) -> &'static str {
        match self {
            Terminal::ReachedEnd => "reached_t_end",
            Terminal::Steady => "steady",
            Terminal::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopMode {
    Closed,
    Open,
}

/// Starting point of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState<T> {
    Full(FullState<T>),
    Reduced(ReducedState<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSeries<T> {
    Full(Vec<FullState<T>>),
    Reduced(Vec<ReducedState<T>>),
}

impl<T> StateSeries<T> {
    pub fn len(&self) -> usize {
        match self {
            StateSeries::Full(v) => v.len(),
            StateSeries::Reduced(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Quantities derived at each sample: `p = u/x`, `v = u'/u`, `q = c p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived<T> {
    pub p: T,
    pub v: T,
    pub q: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta<T> {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub positivity_rejections: usize,
    pub evaluations: usize,
    pub terminal: Terminal,
    pub loop_mode: LoopMode,
    pub variant: Variant,
    pub steady_window: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: StateSeries<T>,
    pub derived: Vec<Derived<T>>,
    pub meta: TrajectoryMeta<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> T {
        self.times.last().copied().unwrap_or_else(T::zero)
    }

    pub fn y(&self) -> Vec<T> {
        match &self.states {
            StateSeries::Full(v) => v.iter().map(|s| s.y).collect(),
            StateSeries::Reduced(v) => v.iter().map(|s| s.y).collect(),
        }
    }

    pub fn p(&self) -> Vec<T> {
        self.derived.iter().map(|d| d.p).collect()
    }

    /// `ln u` samples, available for full-state trajectories only.
    pub fn w(&self) -> Option<Vec<T>> {
        match &self.states {
            StateSeries::Full(v) => Some(v.iter().map(|s| s.w).collect()),
            StateSeries::Reduced(_) => None,
        }
    }

    pub fn final_full(&self) -> Option<FullState<T>> {
        match &self.states {
            StateSeries::Full(v) => v.last().copied(),
            StateSeries::Reduced(_) => None,
        }
    }

    pub fn final_reduced(&self) -> Option<ReducedState<T>> {
        match &self.states {
            StateSeries::Reduced(v) => v.last().copied(),
            StateSeries::Full(v) => v.last().map(|s| ReducedState { p: s.p(), y: s.y }),
        }
    }

    /// Indices of samples with `t >= final_time - window`.
    pub fn tail_indices(&self, window: T) -> std::ops::Range<usize> {
        let start_t = self.final_time() - window;
        let start = self.times.partition_point(|&t| t < start_t);
        start..self.times.len()
    }
}

struct FullField<'a, T> {
    params: &'a ModelParams<T>,
    input: Option<&'a InputSignal<T>>,
    segment_start: T,
}

impl<T: Scalar> VectorField<T, 3> for FullField<'_, T> {
    fn eval(&self, t: T, s: &[T; 3]) -> [T; 3] {
        let v = self
            .input
            .map(|i| i.log_derivative_on_segment(t, self.segment_start));
        rhs_log_coords(self.params, s[0], s[1], s[2], v)
    }

    fn admissible(&self, s: &[T; 3]) -> bool {
        s[1] > T::zero()
    }

    fn log_component(&self, i: usize) -> bool {
        i != 1
    }
}

struct ReducedField<'a, T> {
    params: &'a ModelParams<T>,
}

impl<T: Scalar> VectorField<T, 2> for ReducedField<'_, T> {
    fn eval(&self, _t: T, s: &[T; 2]) -> [T; 2] {
        let d = crate::model::reduced_field(self.params, s[0], s[1]);
        [d.dp, d.dy]
    }

    fn admissible(&self, s: &[T; 2]) -> bool {
        s[0] > T::zero() && s[1] > T::zero()
    }
}

/// Scaled derivative norm `|(p', y')| / (1 + |(p, y)|)`.
fn steady_metric<T: Scalar>(p: T, y: T, dp: T, dy: T) -> T {
    dp.hypot(dy) / (T::one() + p.hypot(y))
}

/// Collects samples, tracks the steady-state window and the divergence guard.
struct Recorder<'a, T, S> {
    output_times: Option<&'a [T]>,
    next_output: usize,
    times: Vec<T>,
    states: Vec<S>,
    steady_tol: T,
    steady_window: T,
    steady_since: Option<T>,
    terminal: Terminal,
}

impl<'a, T: Scalar, S> Recorder<'a, T, S> {
    fn new(config: &'a IntegratorConfig<T>) -> Self {
        Recorder {
            output_times: config.output_times.as_deref(),
            next_output: 0,
            times: Vec::new(),
            states: Vec::new(),
            steady_tol: config.steady_tol,
            steady_window: config.steady_window,
            steady_since: None,
            terminal: Terminal::ReachedEnd,
        }
    }

    fn push(&mut self, t: T, s: S) {
        if let Some(&last) = self.times.last() {
            if t <= last {
                // same instant after a restart: keep the post-restart state
                if t == last {
                    *self.states.last_mut().expect("non-empty") = s;
                }
                return;
            }
        }
        self.times.push(t);
        self.states.push(s);
    }

    fn record_initial(&mut self, t0: T, s: S) {
        match self.output_times {
            None => self.push(t0, s),
            Some(times) => {
                while self.next_output < times.len() && times[self.next_output] <= t0 {
                    if times[self.next_output] == t0 {
                        self.times.push(t0);
                        self.states.push(s);
                        self.next_output += 1;
                        return;
                    }
                    self.next_output += 1;
                }
            }
        }
    }

    /// Handles an accepted step; returns whether to stop.
    fn on_step<const N: usize>(
        &mut self,
        step: &AcceptedStep<T, N>,
        convert: impl Fn(&[T; N]) -> S,
        py: impl Fn(&[T; N], &[T; N]) -> (T, T, T, T),
    ) -> Control {
        let t1 = step.t1();
        match self.output_times {
            None => self.push(t1, convert(&step.y1)),
            Some(times) => {
                while self.next_output < times.len() && times[self.next_output] <= t1 {
                    let t = times[self.next_output];
                    let y = if t == t1 { step.y1 } else { step.dense(t) };
                    self.push(t, convert(&y));
                    self.next_output += 1;
                }
            }
        }

        let (p, y, dp, dy) = py(&step.y1, &step.f1);
        let limit = T::lit(DIVERGENCE_LIMIT);
        if p > limit || y > limit {
            self.terminal = Terminal::Diverged;
            self.force_record(t1, convert(&step.y1));
            return Control::Stop;
        }
        if self.steady_tol > T::zero() {
            // near a saddle on the p = 0 axis the metric is tiny while p
            // still grows, so also require p not to be growing
            let leaving_axis = p > T::zero() && dp / p > self.steady_tol.sqrt();
            if steady_metric(p, y, dp, dy) < self.steady_tol && !leaving_axis {
                let since = *self.steady_since.get_or_insert(step.t0);
                if t1 - since >= self.steady_window {
                    self.terminal = Terminal::Steady;
                    self.force_record(t1, convert(&step.y1));
                    return Control::Stop;
                }
            } else {
                self.steady_since = None;
            }
        }
        Control::Continue
    }

    /// Makes sure the terminal state is part of the series when stopping early.
    fn force_record(&mut self, t: T, s: S) {
        if self.times.last().is_none_or(|&last| t > last) {
            self.times.push(t);
            self.states.push(s);
        }
    }
}

/// Integrates the full system (closed loop, or open loop when `input` is given)
/// or the reduced `(p, y)` system.
///
/// In open loop the initial `w` is replaced by `ln u(0)` of the input. The
/// solver restarts at every input discontinuity.
pub fn integrate<T: Scalar>(
    params: &ModelParams<T>,
    initial: InitialState<T>,
    input: Option<&InputSignal<T>>,
    config: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    params.validate()?;
    config.validate()?;
    if let Some(input) = input {
        input.validate_on(T::zero(), config.t_end)?;
    }
    let ctl = StepControl {
        rtol: config.rel_tol,
        atol: config.abs_tol,
        max_step: config.max_step,
        h_min: T::lit(1e-14) * config.t_end,
        max_steps: config.max_steps,
    };
    let mut counters = Counters::default();

    match initial {
        InitialState::Full(state) => {
            state.validate()?;
            let mut state = state;
            if let Some(input) = input {
                state.w = input.ln_value(T::zero());
            }
            integrate_full(params, state, input, config, &ctl, &mut counters)
        }
        InitialState::Reduced(state) => {
            state.validate()?;
            if input.is_some() {
                return Err(IfflError::WrongExperiment(
                    "the reduced (p, y) system is closed-loop only; drop the input".into(),
                ));
            }
            if params.variant != Variant::ProductionInhibition {
                return Err(IfflError::UnsupportedVariant {
                    operation: "reduced integration",
                    variant: params.variant.name(),
                });
            }
            integrate_reduced(params, state, config, &ctl, &mut counters)
        }
    }
}

fn meta<T: Scalar>(
    counters: &Counters,
    terminal: Terminal,
    loop_mode: LoopMode,
    params: &ModelParams<T>,
    config: &IntegratorConfig<T>,
) -> TrajectoryMeta<T> {
    TrajectoryMeta {
        accepted_steps: counters.accepted,
        rejected_steps: counters.rejected,
        positivity_rejections: counters.positivity_rejections,
        evaluations: counters.evaluations,
        terminal,
        loop_mode,
        variant: params.variant,
        steady_window: config.steady_window,
    }
}

fn integrate_full<T: Scalar>(
    params: &ModelParams<T>,
    initial: FullState<T>,
    input: Option<&InputSignal<T>>,
    config: &IntegratorConfig<T>,
    ctl: &StepControl<T>,
    counters: &mut Counters,
) -> Result<Trajectory<T>> {
    let mut segments = vec![T::zero()];
    if let Some(input) = input {
        segments.extend(input.breakpoints(T::zero(), config.t_end));
    }
    segments.push(config.t_end);

    let convert = |s: &[T; 3]| FullState {
        ln_x: s[0],
        y: s[1],
        w: s[2],
    };
    let py = |s: &[T; 3], f: &[T; 3]| {
        let p = (s[2] - s[0]).exp();
        (p, s[1], p * (f[2] - f[0]), f[1])
    };

    let mut rec: Recorder<'_, T, FullState<T>> = Recorder::new(config);
    let mut y = [initial.ln_x, initial.y, initial.w];
    rec.record_initial(T::zero(), initial);

    for seg in segments.windows(2) {
        let (t0, t1) = (seg[0], seg[1]);
        if let Some(input) = input {
            // resynchronise ln u; this applies step jumps
            y[2] = input.ln_value(t0);
            if t0 > T::zero() && rec.output_times.is_none() {
                rec.push(t0, convert(&y));
            }
        }
        let field = FullField {
            params,
            input,
            segment_start: t0,
        };
        let out = solve_segment(&field, ctl, t0, t1, y, counters, |step| {
            rec.on_step(step, convert, py)
        })?;
        y = out.y;
        if out.stopped {
            break;
        }
    }

    let loop_mode = if input.is_some() {
        LoopMode::Open
    } else {
        LoopMode::Closed
    };
    let derived = rec
        .times
        .iter()
        .zip(&rec.states)
        .map(|(&t, s)| {
            let p = s.p();
            let v = match input {
                Some(i) => i.log_derivative(t),
                None => params.lambda - params.kappa * s.y,
            };
            Derived {
                p,
                v,
                q: params.c * p,
            }
        })
        .collect();
    Ok(Trajectory {
        times: rec.times,
        states: StateSeries::Full(rec.states),
        derived,
        meta: meta(counters, rec.terminal, loop_mode, params, config),
    })
}

fn integrate_reduced<T: Scalar>(
    params: &ModelParams<T>,
    initial: ReducedState<T>,
    config: &IntegratorConfig<T>,
    ctl: &StepControl<T>,
    counters: &mut Counters,
) -> Result<Trajectory<T>> {
    let convert = |s: &[T; 2]| ReducedState { p: s[0], y: s[1] };
    let py = |s: &[T; 2], f: &[T; 2]| (s[0], s[1], f[0], f[1]);
    let mut rec: Recorder<'_, T, ReducedState<T>> = Recorder::new(config);
    rec.record_initial(T::zero(), initial);
    let field = ReducedField { params };
    solve_segment(
        &field,
        ctl,
        T::zero(),
        config.t_end,
        [initial.p, initial.y],
        counters,
        |step| rec.on_step(step, convert, py),
    )?;
    let derived = rec
        .states
        .iter()
        .map(|s| Derived {
            p: s.p,
            v: params.lambda - params.kappa * s.y,
            q: params.c * s.p,
        })
        .collect();
    Ok(Trajectory {
        times: rec.times,
        states: StateSeries::Reduced(rec.states),
        derived,
        meta: meta(counters, rec.terminal, LoopMode::Closed, params, config),
    })
}
