//! Line-oriented `section.key = value` experiment configuration.
//!
//! ```text
//! # bistable Hill feedback, phase plane
//! experiment.kind = phase
//! model.a = 0.8
//! model.b = 1
//! model.c = 0.1
//! model.delta = 1
//! model.kappa = 20
//! model.lambda = 25
//! model.V = 1.95
//! ```
//!
//! `#` starts a comment. Unknown keys, duplicate keys and malformed values are
//! rejected with the offending line number.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{IfflError, Result};
use crate::model::{FullState, InputSignal, ModelParams, ParamName, ReducedState, SampledInput, Variant};
use crate::ode::{InitialState, IntegratorConfig, DEFAULT_SLOPE_TOL};
use crate::sweep::{
    Axis, SweepMethod, SweepSpec, DEFAULT_BISECT_FRACTION, DEFAULT_SWEEP_T_END,
};

/// Default nullcline sampling density.
pub const DEFAULT_PHASE_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Simulate,
    Step,
    Equilibria,
    Limits,
    Sweep,
    Heatmap,
    Phase,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Simulate,
        ExperimentKind::Step,
        ExperimentKind::Equilibria,
        ExperimentKind::Limits,
        ExperimentKind::Sweep,
        ExperimentKind::Heatmap,
        ExperimentKind::Phase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Step => "step",
            ExperimentKind::Equilibria => "equilibria",
            ExperimentKind::Limits => "limits",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Heatmap => "heatmap",
            ExperimentKind::Phase => "phase",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }

    pub fn extension(self) -> &'static str {
        self.name()
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialSystem {
    Full,
    Reduced,
}

impl InitialSystem {
    fn name(self) -> &'static str {
        match self {
            InitialSystem::Full => "full",
            InitialSystem::Reduced => "reduced",
        }
    }
}

/// Integrator settings with every default resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub steady_window: f64,
    pub steady_tol: f64,
    /// Uniform sampling interval; `None` records every accepted step.
    pub output_step: Option<f64>,
    pub max_steps: usize,
}

impl RunSettings {
    pub fn from_t_end(t_end: f64) -> Self {
        let d = IntegratorConfig::new(t_end);
        RunSettings {
            t_end,
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step: d.max_step,
            steady_window: d.steady_window,
            steady_tol: d.steady_tol,
            output_step: None,
            max_steps: d.max_steps,
        }
    }

    pub fn integrator(&self) -> IntegratorConfig<f64> {
        let mut cfg = IntegratorConfig::new(self.t_end);
        cfg.rel_tol = self.rel_tol;
        cfg.abs_tol = self.abs_tol;
        cfg.max_step = self.max_step;
        cfg.steady_window = self.steady_window;
        cfg.steady_tol = self.steady_tol;
        cfg.max_steps = self.max_steps;
        match self.output_step {
            Some(dt) => cfg.with_output_step(dt),
            None => cfg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialSettings {
    pub system: InitialSystem,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub p: f64,
}

impl Default for InitialSettings {
    fn default() -> Self {
        InitialSettings {
            system: InitialSystem::Full,
            x: 1.0,
            y: 1.0,
            u: 1.0,
            p: 1.0,
        }
    }
}

impl InitialSettings {
    pub fn full_state(&self) -> Result<FullState<f64>> {
        FullState::from_concentrations(self.x, self.y, self.u)
    }

    pub fn state(&self) -> Result<InitialState<f64>> {
        Ok(match self.system {
            InitialSystem::Full => InitialState::Full(self.full_state()?),
            InitialSystem::Reduced => InitialState::Reduced(ReducedState::new(self.p, self.y)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSettings {
    pub u_minus: f64,
    pub u_plus: f64,
    pub preadapt: bool,
}

impl Default for StepSettings {
    fn default() -> Self {
        StepSettings {
            u_minus: 1.0,
            u_plus: 2.0,
            preadapt: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub axis1: Axis<f64>,
    pub axis2: Option<Axis<f64>>,
    pub method: SweepMethod,
    pub slope_tol: f64,
    pub bisect_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSettings {
    pub points: usize,
    /// Plot window; `None` picks a window around the equilibria.
    pub p_max: Option<f64>,
    pub y_max: Option<f64>,
}

impl Default for PhaseSettings {
    fn default() -> Self {
        PhaseSettings {
            points: DEFAULT_PHASE_POINTS,
            p_max: None,
            y_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelParams<f64>,
    /// Present for open-loop runs.
    pub input: Option<InputSignal<f64>>,
    pub run: RunSettings,
    pub initial: InitialSettings,
    pub step: StepSettings,
    pub sweep: Option<SweepSettings>,
    pub phase: PhaseSettings,
    pub output: OutputSettings,
}

impl ExperimentConfig {
    pub fn sweep_spec(&self) -> Result<SweepSpec<f64>> {
        let s = self.sweep.as_ref().ok_or_else(|| IfflError::Config {
            line: 0,
            key: "sweep.param1".into(),
            message: format!("the {} experiment needs a sweep section", self.experiment),
        })?;
        let mut spec = SweepSpec::new(s.axis1)
            .with_method(s.method)
            .with_integrator(self.run.integrator());
        spec.axis2 = s.axis2;
        spec.initial_state = self.initial.full_state()?;
        spec.slope_tol = s.slope_tol;
        spec.bisect_fraction = s.bisect_fraction;
        Ok(spec)
    }
}

const KEYS: &[&str] = &[
    "experiment.kind",
    "model.a",
    "model.b",
    "model.c",
    "model.delta",
    "model.kappa",
    "model.lambda",
    "model.V",
    "model.K",
    "model.n",
    "model.variant",
    "input.kind",
    "input.alpha",
    "input.beta",
    "input.mu",
    "input.u_minus",
    "input.u_plus",
    "input.t_step",
    "input.samples",
    "run.t_end",
    "run.rel_tol",
    "run.abs_tol",
    "run.max_step",
    "run.steady_window",
    "run.steady_tol",
    "run.output_step",
    "run.max_steps",
    "initial.system",
    "initial.x",
    "initial.y",
    "initial.u",
    "initial.p",
    "step.u_minus",
    "step.u_plus",
    "step.preadapt",
    "sweep.param1",
    "sweep.min1",
    "sweep.max1",
    "sweep.count1",
    "sweep.param2",
    "sweep.min2",
    "sweep.max2",
    "sweep.count2",
    "sweep.method",
    "sweep.slope_tol",
    "sweep.bisect_fraction",
    "phase.points",
    "phase.p_max",
    "phase.y_max",
    "output.dir",
    "output.format",
];

struct Entries {
    map: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(IfflError::Config {
                    line,
                    key: content.to_string(),
                    message: "expected `section.key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(IfflError::Config {
                    line,
                    key: key.to_string(),
                    message: "unknown key".into(),
                });
            };
            if value.is_empty() {
                return Err(IfflError::Config {
                    line,
                    key: key.to_string(),
                    message: "missing value".into(),
                });
            }
            if let Some((first, _)) = map.insert(known, (line, value.to_string())) {
                return Err(IfflError::Config {
                    line,
                    key: key.to_string(),
                    message: format!("duplicate key (first set on line {first})"),
                });
            }
        }
        Ok(Entries { map })
    }

    fn has_section(&self, section: &str) -> bool {
        self.map.keys().any(|k| k.split('.').next() == Some(section))
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |(l, _)| *l)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> IfflError {
        IfflError::Config {
            line: self.line(key),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn parsed<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<V>()
                .map(Some)
                .map_err(|e| self.err(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn required<V: FromStr>(&self, key: &str) -> Result<V>
    where
        V::Err: fmt::Display,
    {
        self.parsed(key)?
            .ok_or_else(|| self.err(key, "required key is missing"))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.parsed::<f64>(key)? {
            Some(v) if !v.is_finite() => Err(self.err(key, format!("must be finite, got {v}"))),
            other => Ok(other),
        }
    }

    fn required_number(&self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| self.err(key, "required key is missing"))
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.number(key)? {
            Some(v) if v <= 0.0 => Err(self.err(key, format!("must be positive, got {v}"))),
            other => Ok(other),
        }
    }

    fn required_positive(&self, key: &str) -> Result<f64> {
        self.positive(key)?
            .ok_or_else(|| self.err(key, "required key is missing"))
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some("true") | Some("yes") | Some("1") => Ok(Some(true)),
            Some("false") | Some("no") | Some("0") => Ok(Some(false)),
            Some(v) => Err(self.err(key, format!("expected true or false, got `{v}`"))),
        }
    }

    /// Rejects keys of `section` that the selected variant does not use.
    fn forbid(&self, keys: &[&str], why: &str) -> Result<()> {
        for key in keys {
            if self.raw(key).is_some() {
                return Err(self.err(key, why.to_string()));
            }
        }
        Ok(())
    }
}

/// Parses a configuration; `experiment.kind` defaults to `simulate`.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_for(text, None)
}

/// Parses a configuration for a given experiment. A conflicting
/// `experiment.kind` in the text is an error.
pub fn parse_config_for(text: &str, experiment: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let e = Entries::parse(text)?;
    if !e.has_section("model") {
        return Err(IfflError::Config {
            line: 0,
            key: "model".into(),
            message: "missing model section".into(),
        });
    }
    let declared: Option<ExperimentKind> = e.parsed("experiment.kind")?;
    let kind = match (declared, experiment) {
        (Some(d), Some(x)) if d != x => {
            return Err(e.err(
                "experiment.kind",
                format!("config declares `{d}` but `{x}` was requested"),
            ))
        }
        (Some(d), _) => d,
        (None, Some(x)) => x,
        (None, None) => ExperimentKind::Simulate,
    };

    let model = parse_model(&e)?;
    let input = parse_input(&e)?;
    let run = parse_run(&e, kind)?;
    let initial = parse_initial(&e)?;
    let step = StepSettings {
        u_minus: e.positive("step.u_minus")?.unwrap_or(1.0),
        u_plus: e.positive("step.u_plus")?.unwrap_or(2.0),
        preadapt: e.boolean("step.preadapt")?.unwrap_or(true),
    };
    let sweep = parse_sweep(&e)?;
    let phase = PhaseSettings {
        points: match e.parsed::<usize>("phase.points")? {
            Some(n) if n < 2 => return Err(e.err("phase.points", "need at least 2 points")),
            Some(n) => n,
            None => DEFAULT_PHASE_POINTS,
        },
        p_max: e.positive("phase.p_max")?,
        y_max: e.positive("phase.y_max")?,
    };
    let output = OutputSettings {
        dir: PathBuf::from(e.raw("output.dir").unwrap_or("out")),
        format: e.parsed("output.format")?.unwrap_or(OutputFormat::Csv),
    };

    let config = ExperimentConfig {
        experiment: kind,
        model,
        input,
        run,
        initial,
        step,
        sweep,
        phase,
        output,
    };
    check_experiment(&e, &config)?;
    Ok(config)
}

fn parse_model(e: &Entries) -> Result<ModelParams<f64>> {
    let mut m = ModelParams::new(
        e.required_positive("model.a")?,
        e.required_positive("model.b")?,
        e.required_positive("model.c")?,
        e.required_positive("model.delta")?,
        e.required_positive("model.kappa")?,
        e.required_number("model.lambda")?,
    );
    m.v_max = e.number("model.V")?.unwrap_or(0.0);
    m.k_half = e.positive("model.K")?.unwrap_or(m.k_half);
    m.n_hill = e.number("model.n")?.unwrap_or(m.n_hill);
    m.variant = e.parsed::<Variant>("model.variant")?.unwrap_or(m.variant);
    m.validate().map_err(|err| match err {
        IfflError::InvalidParameter { name, reason } => {
            let key = if name == "V" && e.raw("model.V").is_none() {
                "model.variant".to_string()
            } else {
                format!("model.{name}")
            };
            let line = e.line(&key).max(e.line("model.variant"));
            IfflError::Config {
                line: if e.raw(&key).is_some() { e.line(&key) } else { line },
                key,
                message: reason,
            }
        }
        other => other,
    })?;
    Ok(m)
}

fn parse_samples(e: &Entries) -> Result<SampledInput<f64>> {
    let key = "input.samples";
    let raw = e
        .raw(key)
        .ok_or_else(|| e.err(key, "sampled input needs `t:u` pairs"))?;
    let mut pairs = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (t, u) = item
            .split_once(':')
            .ok_or_else(|| e.err(key, format!("expected `t:u`, got `{item}`")))?;
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| e.err(key, format!("bad time in `{item}`")))?;
        let u: f64 = u
            .trim()
            .parse()
            .map_err(|_| e.err(key, format!("bad value in `{item}`")))?;
        pairs.push((t, u));
    }
    SampledInput::new(&pairs).map_err(|err| e.err(key, err.to_string()))
}

fn parse_input(e: &Entries) -> Result<Option<InputSignal<f64>>> {
    let all = [
        "input.alpha",
        "input.beta",
        "input.mu",
        "input.u_minus",
        "input.u_plus",
        "input.t_step",
        "input.samples",
    ];
    let Some(kind) = e.raw("input.kind") else {
        if e.has_section("input") {
            let stray = all.iter().find(|k| e.raw(k).is_some()).copied().unwrap_or("input");
            return Err(e.err(stray, "input section needs `input.kind`"));
        }
        return Ok(None);
    };
    let unused = |used: &[&str]| -> Vec<&'static str> {
        all.iter().copied().filter(|k| !used.contains(k)).collect()
    };
    let why = format!("not used by input.kind = {kind}");
    let signal = match kind {
        "constant" => {
            e.forbid(&unused(&["input.alpha"]), &why)?;
            InputSignal::Constant {
                alpha: e.required_positive("input.alpha")?,
            }
        }
        "linear" => {
            e.forbid(&unused(&["input.alpha", "input.beta"]), &why)?;
            InputSignal::Linear {
                alpha: e.required_positive("input.alpha")?,
                beta: e.required_number("input.beta")?,
            }
        }
        "exponential" => {
            e.forbid(&unused(&["input.beta", "input.mu"]), &why)?;
            InputSignal::Exponential {
                beta: e.positive("input.beta")?.unwrap_or(1.0),
                mu: e.required_number("input.mu")?,
            }
        }
        "step" => {
            e.forbid(&unused(&["input.u_minus", "input.u_plus", "input.t_step"]), &why)?;
            InputSignal::Step {
                u_minus: e.required_positive("input.u_minus")?,
                u_plus: e.required_positive("input.u_plus")?,
                t_step: e.number("input.t_step")?.unwrap_or(0.0),
            }
        }
        "sampled" => {
            e.forbid(&unused(&["input.samples"]), &why)?;
            InputSignal::Sampled(parse_samples(e)?)
        }
        other => {
            return Err(e.err(
                "input.kind",
                format!("unknown input kind `{other}` (constant, linear, exponential, step, sampled)"),
            ))
        }
    };
    Ok(Some(signal))
}

fn parse_run(e: &Entries, kind: ExperimentKind) -> Result<RunSettings> {
    let default_t_end = match kind {
        ExperimentKind::Sweep | ExperimentKind::Heatmap => DEFAULT_SWEEP_T_END,
        _ => 100.0,
    };
    let t_end = e.positive("run.t_end")?.unwrap_or(default_t_end);
    let defaults = IntegratorConfig::new(t_end);
    let steady_window = match e.number("run.steady_window")? {
        Some(w) if w < 0.0 || w >= t_end => {
            return Err(e.err("run.steady_window", format!("must lie in [0, t_end), got {w}")))
        }
        Some(w) => w,
        None => defaults.steady_window,
    };
    let steady_tol = match e.number("run.steady_tol")? {
        Some(v) if v < 0.0 => {
            return Err(e.err("run.steady_tol", format!("must be non-negative, got {v}")))
        }
        Some(v) => v,
        None => defaults.steady_tol,
    };
    let max_step = e
        .positive("run.max_step")?
        .unwrap_or_else(|| (steady_window / 10.0).min(1.0).max(t_end * 1e-6));
    Ok(RunSettings {
        t_end,
        rel_tol: e.positive("run.rel_tol")?.unwrap_or(defaults.rel_tol),
        abs_tol: e.positive("run.abs_tol")?.unwrap_or(defaults.abs_tol),
        max_step,
        steady_window,
        steady_tol,
        output_step: e.positive("run.output_step")?,
        max_steps: match e.parsed::<usize>("run.max_steps")? {
            Some(0) => return Err(e.err("run.max_steps", "must be at least 1")),
            Some(n) => n,
            None => defaults.max_steps,
        },
    })
}

fn parse_initial(e: &Entries) -> Result<InitialSettings> {
    let d = InitialSettings::default();
    let system = match e.raw("initial.system") {
        None | Some("full") => InitialSystem::Full,
        Some("reduced") => InitialSystem::Reduced,
        Some(other) => {
            return Err(e.err(
                "initial.system",
                format!("expected full or reduced, got `{other}`"),
            ))
        }
    };
    Ok(InitialSettings {
        system,
        x: e.positive("initial.x")?.unwrap_or(d.x),
        y: e.positive("initial.y")?.unwrap_or(d.y),
        u: e.positive("initial.u")?.unwrap_or(d.u),
        p: e.positive("initial.p")?.unwrap_or(d.p),
    })
}

fn parse_axis(e: &Entries, idx: u8) -> Result<Option<Axis<f64>>> {
    let key = |k: &str| format!("sweep.{k}{idx}");
    let param_key = key("param");
    let Some(param) = e.parsed::<ParamName>(&param_key)? else {
        for k in ["min", "max", "count"] {
            if e.raw(&key(k)).is_some() {
                return Err(e.err(&key(k), format!("set {param_key} first")));
            }
        }
        return Ok(None);
    };
    let axis = Axis::new(
        param,
        e.required_number(&key("min"))?,
        e.required_number(&key("max"))?,
        e.required::<usize>(&key("count"))?,
    );
    axis.validate().map_err(|err| e.err(&key("count"), err.to_string()))?;
    Ok(Some(axis))
}

fn parse_sweep(e: &Entries) -> Result<Option<SweepSettings>> {
    let Some(axis1) = parse_axis(e, 1)? else {
        if e.has_section("sweep") {
            let first = e.map.keys().find(|k| k.starts_with("sweep.")).copied().unwrap_or("sweep");
            return Err(e.err(first, "sweep section needs sweep.param1"));
        }
        return Ok(None);
    };
    let axis2 = parse_axis(e, 2)?;
    if let Some(a2) = &axis2 {
        if a2.param == axis1.param {
            return Err(e.err("sweep.param2", "both axes vary the same parameter"));
        }
    }
    let bisect_fraction = e
        .positive("sweep.bisect_fraction")?
        .unwrap_or(DEFAULT_BISECT_FRACTION);
    if bisect_fraction >= 1.0 {
        return Err(e.err("sweep.bisect_fraction", "must be below 1"));
    }
    let slope_tol = match e.number("sweep.slope_tol")? {
        Some(v) if v < 0.0 => return Err(e.err("sweep.slope_tol", "must be non-negative")),
        Some(v) => v,
        None => DEFAULT_SLOPE_TOL,
    };
    Ok(Some(SweepSettings {
        axis1,
        axis2,
        method: e.parsed::<SweepMethod>("sweep.method")?.unwrap_or(SweepMethod::Both),
        slope_tol,
        bisect_fraction,
    }))
}

/// Cross-section requirements of each experiment.
fn check_experiment(e: &Entries, c: &ExperimentConfig) -> Result<()> {
    use ExperimentKind as K;
    let input_key = "input.kind";
    match c.experiment {
        K::Sweep => {
            let s = c.sweep.as_ref().ok_or_else(|| e.err("sweep.param1", "the sweep experiment needs a sweep section"))?;
            if s.axis1.param != ParamName::Lambda {
                return Err(e.err("sweep.param1", "the sweep experiment sweeps lambda"));
            }
            if s.axis2.is_some() {
                return Err(e.err("sweep.param2", "use the heatmap experiment for two axes"));
            }
        }
        K::Heatmap => {
            let s = c.sweep.as_ref().ok_or_else(|| e.err("sweep.param1", "the heatmap experiment needs a sweep section"))?;
            if s.axis2.is_none() {
                return Err(e.err("sweep.param2", "the heatmap experiment needs a second axis"));
            }
        }
        _ => {}
    }
    match c.experiment {
        K::Sweep | K::Heatmap | K::Equilibria | K::Phase | K::Step if c.input.is_some() => {
            Err(e.err(input_key, format!("the {} experiment is closed-loop or sets its own input", c.experiment)))
        }
        K::Phase | K::Equilibria if c.model.variant == Variant::Degradation => Err(e.err(
            "model.variant",
            format!("the {} experiment needs the production variant", c.experiment),
        )),
        K::Simulate | K::Limits
            if c.input.is_some() && c.initial.system == InitialSystem::Reduced =>
        {
            Err(e.err("initial.system", "the reduced system is closed-loop only"))
        }
        _ => Ok(()),
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Writes every resolved setting back in the config syntax.
/// `parse_config(&serialize_config(&c)) == c` for every parsed `c`.
pub fn serialize_config(c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let mut put = |key: &str, value: String| {
        let _ = writeln!(s, "{key} = {value}");
    };
    put("experiment.kind", c.experiment.name().into());
    let m = &c.model;
    put("model.a", num(m.a));
    put("model.b", num(m.b));
    put("model.c", num(m.c));
    put("model.delta", num(m.delta));
    put("model.kappa", num(m.kappa));
    put("model.lambda", num(m.lambda));
    put("model.V", num(m.v_max));
    put("model.K", num(m.k_half));
    put("model.n", num(m.n_hill));
    put("model.variant", m.variant.name().into());
    if let Some(input) = &c.input {
        match input {
            InputSignal::Constant { alpha } => {
                put("input.kind", "constant".into());
                put("input.alpha", num(*alpha));
            }
            InputSignal::Linear { alpha, beta } => {
                put("input.kind", "linear".into());
                put("input.alpha", num(*alpha));
                put("input.beta", num(*beta));
            }
            InputSignal::Exponential { beta, mu } => {
                put("input.kind", "exponential".into());
                put("input.beta", num(*beta));
                put("input.mu", num(*mu));
            }
            InputSignal::Step {
                u_minus,
                u_plus,
                t_step,
            } => {
                put("input.kind", "step".into());
                put("input.u_minus", num(*u_minus));
                put("input.u_plus", num(*u_plus));
                put("input.t_step", num(*t_step));
            }
            InputSignal::Sampled(table) => {
                put("input.kind", "sampled".into());
                let pairs: Vec<String> = table
                    .samples()
                    .map(|(t, u)| format!("{}:{}", num(t), num(u)))
                    .collect();
                put("input.samples", pairs.join(", "));
            }
        }
    }
    let r = &c.run;
    put("run.t_end", num(r.t_end));
    put("run.rel_tol", num(r.rel_tol));
    put("run.abs_tol", num(r.abs_tol));
    put("run.max_step", num(r.max_step));
    put("run.steady_window", num(r.steady_window));
    put("run.steady_tol", num(r.steady_tol));
    if let Some(dt) = r.output_step {
        put("run.output_step", num(dt));
    }
    put("run.max_steps", r.max_steps.to_string());
    let i = &c.initial;
    put("initial.system", i.system.name().into());
    put("initial.x", num(i.x));
    put("initial.y", num(i.y));
    put("initial.u", num(i.u));
    put("initial.p", num(i.p));
    put("step.u_minus", num(c.step.u_minus));
    put("step.u_plus", num(c.step.u_plus));
    put("step.preadapt", c.step.preadapt.to_string());
    if let Some(sw) = &c.sweep {
        for (idx, axis) in [(1, Some(sw.axis1)), (2, sw.axis2)] {
            if let Some(a) = axis {
                put(&format!("sweep.param{idx}"), a.param.key().into());
                put(&format!("sweep.min{idx}"), num(a.min));
                put(&format!("sweep.max{idx}"), num(a.max));
                put(&format!("sweep.count{idx}"), a.count.to_string());
            }
        }
        put("sweep.method", sw.method.name().into());
        put("sweep.slope_tol", num(sw.slope_tol));
        put("sweep.bisect_fraction", num(sw.bisect_fraction));
    }
    put("phase.points", c.phase.points.to_string());
    if let Some(p) = c.phase.p_max {
        put("phase.p_max", num(p));
    }
    if let Some(y) = c.phase.y_max {
        put("phase.y_max", num(y));
    }
    put("output.dir", c.output.dir.display().to_string());
    put("output.format", c.output.format.name().into());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HILL_PHASE: &str = "\
# phase plane with autocatalysis
experiment.kind = phase
model.a = 0.8
model.b = 1
model.c = 0.1
model.delta = 1   # degradation
model.n = 2
model.V = 1.95
model.K = 1
model.kappa = 20
model.lambda = 25
";

    #[test]
    fn hill_ref_block() {
        let c = parse_config(HILL_PHASE).unwrap();
        assert_eq!(c.experiment, ExperimentKind::Phase);
        let want = ModelParams::new(0.8, 1.0, 0.1, 1.0, 20.0, 25.0).with_autocatalysis(1.95, 1.0, 2.0);
        assert_eq!(c.model, want);
        assert!(c.input.is_none());
        assert_eq!(c.phase.points, 512);
    }

    #[test]
    fn empty_text_misses_model() {
        let err = parse_config("").unwrap_err();
        assert!(err.to_string().contains("missing model section"), "{err}");
        assert!(err.is_validation());
    }

    #[test]
    fn negative_rate_names_line_and_key() {
        let text = "model.a = 1\nmodel.b = 1\nmodel.c = 1\nmodel.delta = -1\nmodel.kappa = 1\nmodel.lambda = 0\n";
        match parse_config(text).unwrap_err() {
            IfflError::Config { line, key, message } => {
                assert_eq!((line, key.as_str()), (4, "model.delta"));
                assert!(message.contains("positive"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{HILL_PHASE}model.lamda = 3\n");
        match parse_config(&text).unwrap_err() {
            IfflError::Config { line, key, .. } => assert_eq!((line, key.as_str()), (12, "model.lamda")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_malformed_lines_rejected() {
        assert!(parse_config(&format!("{HILL_PHASE}model.a = 2\n")).is_err());
        assert!(parse_config(&format!("{HILL_PHASE}just words\n")).is_err());
        assert!(parse_config(&format!("{HILL_PHASE}run.t_end = fast\n")).is_err());
    }

    #[test]
    fn missing_required_key() {
        let err = parse_config("model.a = 1\n").unwrap_err();
        assert!(matches!(err, IfflError::Config { ref key, .. } if key == "model.b"));
    }

    #[test]
    fn degradation_with_hill_term_rejected() {
        let text = format!("{}model.variant = degradation\n", HILL_PHASE.replace("phase", "simulate"));
        assert!(matches!(parse_config(&text), Err(IfflError::Config { .. })));
    }

    #[test]
    fn requested_experiment_must_match_declared() {
        assert!(parse_config_for(HILL_PHASE, Some(ExperimentKind::Phase)).is_ok());
        assert!(parse_config_for(HILL_PHASE, Some(ExperimentKind::Step)).is_err());
        let plain = HILL_PHASE.replace("experiment.kind = phase\n", "");
        let c = parse_config_for(&plain, Some(ExperimentKind::Equilibria)).unwrap();
        assert_eq!(c.experiment, ExperimentKind::Equilibria);
        assert_eq!(parse_config(&plain).unwrap().experiment, ExperimentKind::Simulate);
    }

    #[test]
    fn input_keys_must_match_kind() {
        let base = "model.a = 1\nmodel.b = 1\nmodel.c = 1\nmodel.delta = 2\nmodel.kappa = 1\nmodel.lambda = 0\n";
        let ok = format!("{base}input.kind = linear\ninput.alpha = 3\ninput.beta = 0.7\n");
        assert_eq!(
            parse_config(&ok).unwrap().input,
            Some(InputSignal::Linear { alpha: 3.0, beta: 0.7 })
        );
        let bad = format!("{base}input.kind = constant\ninput.alpha = 3\ninput.mu = 0.7\n");
        assert!(parse_config(&bad).is_err());
        let orphan = format!("{base}input.alpha = 3\n");
        assert!(parse_config(&orphan).is_err());
        let sampled = format!("{base}input.kind = sampled\ninput.samples = 0:1, 1:2.5, 3:0.5\n");
        assert!(matches!(parse_config(&sampled).unwrap().input, Some(InputSignal::Sampled(_))));
    }

    #[test]
    fn sweep_section_checks() {
        let base = HILL_PHASE.replace("phase", "sweep");
        assert!(parse_config(&base).is_err());
        let ok = format!("{base}sweep.param1 = lambda\nsweep.min1 = 0\nsweep.max1 = 30\nsweep.count1 = 31\n");
        let c = parse_config(&ok).unwrap();
        assert_eq!(c.run.t_end, 200.0);
        let spec = c.sweep_spec().unwrap();
        assert_eq!(spec.axis1.count, 31);
        let hm = ok.replace("sweep\n", "heatmap\n");
        assert!(parse_config(&hm).is_err());
        let hm2 = format!("{hm}sweep.param2 = kappa\nsweep.min2 = 10\nsweep.max2 = 20\nsweep.count2 = 3\n");
        assert!(parse_config(&hm2).is_ok());
    }

    #[test]
    fn serialize_echoes_defaults() {
        let c = parse_config(HILL_PHASE).unwrap();
        let text = serialize_config(&c);
        for key in ["run.rel_tol", "run.steady_tol", "initial.x", "output.format", "model.variant"] {
            assert!(text.contains(key), "{key} missing in\n{text}");
        }
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        let model = (
            0.01f64..10.0,
            0.01f64..10.0,
            0.01f64..10.0,
            0.01f64..10.0,
            0.01f64..50.0,
            -5.0f64..40.0,
            0.0f64..5.0,
            0.1f64..3.0,
            1.0f64..4.0,
        )
            .prop_map(|(a, b, c, d, k, l, v, kh, n)| {
                ModelParams::new(a, b, c, d, k, l).with_autocatalysis(v, kh, n)
            });
        let input = prop_oneof![
            Just(None),
            (0.1f64..10.0).prop_map(|alpha| Some(InputSignal::Constant { alpha })),
            (0.1f64..10.0, 0.0f64..2.0).prop_map(|(alpha, beta)| Some(InputSignal::Linear { alpha, beta })),
            (0.1f64..10.0, -2.0f64..2.0).prop_map(|(beta, mu)| Some(InputSignal::Exponential { beta, mu })),
        ];
        let run = (1.0f64..500.0, 1e-10f64..1e-4, proptest::option::of(0.01f64..1.0))
            .prop_map(|(t_end, rtol, dt)| {
                let mut r = RunSettings::from_t_end(t_end);
                r.rel_tol = rtol;
                r.output_step = dt;
                r
            });
        let format = prop_oneof![Just(OutputFormat::Csv), Just(OutputFormat::Jsonl)];
        (model, input, run, 0.1f64..5.0, format, any::<bool>()).prop_map(|(model, input, run, x0, format, pre)| {
            ExperimentConfig {
                experiment: if input.is_some() { ExperimentKind::Simulate } else { ExperimentKind::Equilibria },
                model,
                input,
                run,
                initial: InitialSettings { x: x0, ..Default::default() },
                step: StepSettings { preadapt: pre, ..Default::default() },
                sweep: None,
                phase: PhaseSettings::default(),
                output: OutputSettings { dir: PathBuf::from("out/run"), format },
            }
        })
    }

    proptest! {
        #[test]
        fn round_trip(c in arb_config()) {
            let text = serialize_config(&c);
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
