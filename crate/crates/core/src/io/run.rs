//! Experiment dispatch and output files.

use std::path::{Path, PathBuf};

use crate::equilibrium::{
    boundary_equilibria, closed_loop_equilibrium_linear, equilibria_autocat, estimate_p_y_limits,
    open_loop_output_limit, origin_report, solve_mu, switch_lambdas, uniqueness_condition,
    EquilibriumReport, Uniqueness,
};
use crate::error::{IfflError, Result};
use crate::model::{InputSignal, ModelParams, ParamName};
use crate::ode::{
    classify_u_outcome, integrate, simulate_step_response, LoopMode, StateSeries,
    Terminal, Trajectory, DEFAULT_SLOPE_TOL,
};
use crate::sweep::{band_widths, heatmap, lambda_sweep, BandReport};

use super::config::{serialize_config, ExperimentConfig, ExperimentKind, InitialSystem, OutputFormat};
use super::nullcline::nullclines;
use super::write::{fmt_float, write_file, JsonLine, Table};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const EQUILIBRIA_FILE: &str = "equilibria.jsonl";

/// Files written by one experiment plus its one-line JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Runs the configured experiment and writes its files into `config.output.dir`.
///
/// Numerical failures after the main output was written (a diverged
/// simulation) are reported as errors once the files are on disk.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    let dir = config.output.dir.as_path();
    let mut out = Output {
        dir,
        format: config.output.format,
        files: Vec::new(),
    };
    let (summary, late_error) = match config.experiment {
        ExperimentKind::Simulate => run_simulate(config, &mut out)?,
        ExperimentKind::Step => (run_step(config, &mut out)?, None),
        ExperimentKind::Equilibria => (run_equilibria(config, &mut out)?, None),
        ExperimentKind::Limits => run_limits(config, &mut out)?,
        ExperimentKind::Sweep => (run_sweep(config, &mut out)?, None),
        ExperimentKind::Heatmap => (run_heatmap(config, &mut out)?, None),
        ExperimentKind::Phase => run_phase(config, &mut out)?,
    };
    let summary = summary.finish();
    let manifest = manifest_text(config, &summary, &out.files);
    out.files.push(write_file(dir, MANIFEST_FILE, &manifest)?);
    match late_error {
        Some(e) => Err(e),
        None => Ok(RunOutcome {
            files: out.files,
            summary,
        }),
    }
}

/// The config text recorded in a manifest: the resolved config without the
/// output directory, so that replays elsewhere produce identical files.
pub fn manifest_config_text(config: &ExperimentConfig) -> String {
    serialize_config(config)
        .lines()
        .filter(|l| !l.starts_with("output.dir"))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn manifest_text(config: &ExperimentConfig, summary: &str, files: &[PathBuf]) -> String {
    let mut text = JsonLine::new()
        .str("record", "manifest")
        .str("software", "iffl")
        .str("version", env!("CARGO_PKG_VERSION"))
        .str("experiment", config.experiment.name())
        .str("config", &manifest_config_text(config))
        .finish();
    text.push('\n');
    text.push_str(summary);
    text.push('\n');
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        text.push_str(&JsonLine::new().str("record", "file").str("name", &name).finish());
        text.push('\n');
    }
    text
}

/// Extracts the config text from a manifest, or returns `text` unchanged when
/// it is not a manifest.
pub fn config_text_from(text: &str) -> Result<String> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if !first.trim_start().starts_with('{') {
        return Ok(text.to_string());
    }
    let value: serde_json::Value = serde_json::from_str(first).map_err(|e| IfflError::Config {
        line: 1,
        key: "manifest".into(),
        message: format!("not a valid manifest line: {e}"),
    })?;
    value
        .get("config")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| IfflError::Config {
            line: 1,
            key: "manifest".into(),
            message: "manifest has no `config` field".into(),
        })
}

struct Output<'a> {
    dir: &'a Path,
    format: OutputFormat,
    files: Vec<PathBuf>,
}

impl Output<'_> {
    fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        let (name, body) = match self.format {
            OutputFormat::Csv => (format!("{stem}.csv"), table.to_csv()),
            OutputFormat::Jsonl => (format!("{stem}.jsonl"), table.to_jsonl()),
        };
        self.files.push(write_file(self.dir, &name, &body)?);
        Ok(())
    }

    fn lines(&mut self, name: &str, lines: &[String]) -> Result<()> {
        let mut body = lines.join("\n");
        if !body.is_empty() {
            body.push('\n');
        }
        self.files.push(write_file(self.dir, name, &body)?);
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn trajectory_table(traj: &Trajectory<f64>) -> Table {
    let mut t = Table::new(&["t", "x", "y", "u", "p", "v", "q", "ln_u"]);
    match &traj.states {
        StateSeries::Full(states) => {
            for ((&time, s), d) in traj.times.iter().zip(states).zip(&traj.derived) {
                t.push(vec![
                    fmt_float(time),
                    fmt_float(s.x()),
                    fmt_float(s.y),
                    fmt_float(s.u()),
                    fmt_float(d.p),
                    fmt_float(d.v),
                    fmt_float(d.q),
                    fmt_float(s.w),
                ]);
            }
        }
        StateSeries::Reduced(states) => {
            for ((&time, s), d) in traj.times.iter().zip(states).zip(&traj.derived) {
                t.push(vec![
                    fmt_float(time),
                    String::new(),
                    fmt_float(s.y),
                    String::new(),
                    fmt_float(s.p),
                    fmt_float(d.v),
                    fmt_float(d.q),
                    String::new(),
                ]);
            }
        }
    }
    t
}

fn equilibrium_line(role: &str, e: &EquilibriumReport<f64>) -> String {
    JsonLine::new()
        .str("role", role)
        .num("p_bar", e.p_bar)
        .num("y_bar", e.y_bar)
        .num("mu", e.mu)
        .num("jacobian_trace", e.jacobian_trace)
        .num("jacobian_det", e.jacobian_det)
        .str("stability", e.stability.name())
        .str("outcome", e.outcome.name())
        .str("source", e.source.name())
        .finish()
}

fn trajectory_summary(line: JsonLine, traj: &Trajectory<f64>) -> JsonLine {
    let end = traj.final_reduced();
    line.str("terminal", traj.meta.terminal.name())
        .num("t_final", traj.final_time())
        .opt_num("p_final", end.map(|s| s.p))
        .opt_num("y_final", end.map(|s| s.y))
        .int("samples", traj.len())
        .int("accepted_steps", traj.meta.accepted_steps)
        .int("rejected_steps", traj.meta.rejected_steps)
}

fn divergence_error(traj: &Trajectory<f64>, what: &str) -> Option<IfflError> {
    (traj.meta.terminal == Terminal::Diverged).then(|| {
        IfflError::NotConverged(format!(
            "{what}: y or p exceeded the divergence limit at t = {}",
            traj.final_time()
        ))
    })
}

/// Asymptotic log-derivative of an input, used for the limit predictions.
fn asymptotic_rate(input: &InputSignal<f64>, t_end: f64) -> f64 {
    match input {
        InputSignal::Constant { .. } | InputSignal::Linear { .. } | InputSignal::Step { .. } => 0.0,
        InputSignal::Exponential { mu, .. } => *mu,
        InputSignal::Sampled(_) => input.log_derivative(t_end),
    }
}

fn run_simulate(c: &ExperimentConfig, out: &mut Output) -> Result<(JsonLine, Option<IfflError>)> {
    let traj = integrate(&c.model, c.initial.state()?, c.input.as_ref(), &c.run.integrator())?;
    out.table("trajectory", &trajectory_table(&traj))?;
    let mut line = trajectory_summary(JsonLine::new().str("record", "summary").str("experiment", "simulate"), &traj);
    line = line.str(
        "loop",
        match traj.meta.loop_mode {
            LoopMode::Closed => "closed",
            LoopMode::Open => "open",
        },
    );
    if traj.meta.loop_mode == LoopMode::Closed && matches!(traj.states, StateSeries::Full(_)) {
        match classify_u_outcome(&traj, DEFAULT_SLOPE_TOL) {
            Ok(g) => line = line.str("outcome", g.outcome.name()).num("ln_u_slope", g.slope),
            Err(e) => line = line.null("outcome").str("classification_error", &e.to_string()),
        }
    }
    if let (Some(input), false) = (&c.input, c.model.autocatalytic()) {
        let mu = asymptotic_rate(input, c.run.t_end);
        line = line.opt_num("predicted_y_limit", open_loop_output_limit(&c.model, mu).ok());
    }
    Ok((line, divergence_error(&traj, "simulate")))
}

fn run_step(c: &ExperimentConfig, out: &mut Output) -> Result<JsonLine> {
    let r = simulate_step_response(
        &c.model,
        c.step.u_minus,
        c.step.u_plus,
        c.step.preadapt,
        &c.run.integrator(),
    )?;
    out.table("trajectory", &trajectory_table(&r.trajectory))?;
    let line = JsonLine::new()
        .str("record", "summary")
        .str("experiment", "step")
        .num("u_minus", c.step.u_minus)
        .num("u_plus", c.step.u_plus)
        .boolean("preadapt", c.step.preadapt)
        .num("y_pre", r.y_pre)
        .num("q_initial", r.q_initial)
        .num("q_peak", r.q_peak);
    Ok(trajectory_summary(line, &r.trajectory))
}

fn equilibrium_reports(model: &ModelParams<f64>) -> Result<Vec<(&'static str, EquilibriumReport<f64>)>> {
    let mut reports = Vec::new();
    if model.autocatalytic() {
        for e in equilibria_autocat(model)? {
            reports.push(("interior", e));
        }
        for e in boundary_equilibria(model)? {
            reports.push(("boundary", e));
        }
    } else {
        let closed = closed_loop_equilibrium_linear(model)?;
        let interior = closed.p_bar > 0.0;
        reports.push((if interior { "interior" } else { "boundary" }, closed));
        if interior {
            reports.push(("boundary", origin_report(model)));
        }
    }
    Ok(reports)
}

fn run_equilibria(c: &ExperimentConfig, out: &mut Output) -> Result<JsonLine> {
    let reports = equilibrium_reports(&c.model)?;
    let lines: Vec<String> = reports.iter().map(|(role, e)| equilibrium_line(role, e)).collect();
    out.lines(EQUILIBRIA_FILE, &lines)?;
    let mut line = JsonLine::new()
        .str("record", "summary")
        .str("experiment", "equilibria")
        .int("interior", reports.iter().filter(|(r, _)| *r == "interior").count());
    if c.model.autocatalytic() {
        let u = uniqueness_condition(&c.model)?;
        line = line
            .str(
                "uniqueness",
                match u.status {
                    Uniqueness::Guaranteed => "guaranteed",
                    Uniqueness::NotGuaranteed => "not_guaranteed",
                    Uniqueness::NotApplicable => "not_applicable",
                },
            )
            .opt_num("max_hill_slope", u.max_hill_slope)
            .num("uniqueness_bound", u.bound)
            .opt_num("uniqueness_margin", u.margin);
    } else {
        line = line.num("mu", solve_mu(&c.model)?);
    }
    if let Some(s) = c.sweep.as_ref().filter(|s| s.axis1.param == ParamName::Lambda) {
        let switches = switch_lambdas(&c.model, (s.axis1.min, s.axis1.max))?;
        line = line.nums("switch_lambdas", &switches);
    }
    Ok(line)
}

fn run_limits(c: &ExperimentConfig, out: &mut Output) -> Result<(JsonLine, Option<IfflError>)> {
    let traj = integrate(&c.model, c.initial.state()?, c.input.as_ref(), &c.run.integrator())?;
    out.table("trajectory", &trajectory_table(&traj))?;
    let est = estimate_p_y_limits(&traj)?;
    let mut line = JsonLine::new()
        .str("record", "limits")
        .num("p_liminf", est.p_liminf)
        .num("p_limsup", est.p_limsup)
        .num("y_liminf", est.y_liminf)
        .num("y_limsup", est.y_limsup)
        .int("samples", est.samples)
        .boolean("settled", est.settled);
    if let (Some(input), false) = (&c.input, c.model.autocatalytic()) {
        let mu = asymptotic_rate(input, c.run.t_end);
        line = line
            .num("input_rate", mu)
            .num("predicted_p_limit", ((c.model.a + mu) / c.model.b).max(0.0))
            .opt_num("predicted_y_limit", open_loop_output_limit(&c.model, mu).ok());
    }
    out.lines("limits.jsonl", &[line.finish()])?;
    let summary = trajectory_summary(
        JsonLine::new().str("record", "summary").str("experiment", "limits"),
        &traj,
    )
    .boolean("settled", est.settled);
    Ok((summary, divergence_error(&traj, "limits")))
}

fn band_lines(report: &BandReport<f64>) -> Vec<String> {
    let mut lines = Vec::new();
    for b in &report.boundaries {
        lines.push(
            JsonLine::new()
                .str("record", "boundary")
                .str("method", b.method.name())
                .num("lambda", b.value)
                .finish(),
        );
    }
    let widths = band_widths(report);
    if widths.is_empty() {
        for &label in &report.labels {
            lines.push(
                JsonLine::new()
                    .str("record", "band")
                    .str("method", report.method.name())
                    .str("label", label.name())
                    .null("lo")
                    .null("hi")
                    .null("fold")
                    .finish(),
            );
        }
    }
    for w in widths {
        lines.push(
            JsonLine::new()
                .str("record", "band")
                .str("method", report.method.name())
                .str("label", w.label.name())
                .opt_num("lo", w.lo)
                .opt_num("hi", w.hi)
                .opt_num("fold", w.fold)
                .finish(),
        );
    }
    lines
}

fn run_sweep(c: &ExperimentConfig, out: &mut Output) -> Result<JsonLine> {
    let spec = c.sweep_spec()?;
    let s = lambda_sweep(&c.model, &spec)?;
    let mut t = Table::new(&[
        "lambda",
        "algebraic_label",
        "algebraic_mu",
        "simulation_label",
        "simulation_slope",
    ]);
    let values = spec.axis1.values();
    for (i, &lambda) in values.iter().enumerate() {
        let a = s.algebraic.as_ref().map(|r| r.points[i]);
        let m = s.simulation.as_ref().map(|r| r.points[i]);
        t.push(vec![
            fmt_float(lambda),
            a.map(|p| p.label.name().to_string()).unwrap_or_default(),
            opt(a.and_then(|p| p.rate)),
            m.map(|p| p.label.name().to_string()).unwrap_or_default(),
            opt(m.and_then(|p| p.rate)),
        ]);
    }
    out.table("sweep", &t)?;
    let mut lines = Vec::new();
    for r in [&s.algebraic, &s.simulation].into_iter().flatten() {
        lines.extend(band_lines(r));
    }
    out.lines("bands.jsonl", &lines)?;
    let labels = |r: &Option<BandReport<f64>>| {
        r.as_ref()
            .map(|r| r.labels.iter().map(|l| l.name()).collect::<Vec<_>>().join(" "))
    };
    Ok(JsonLine::new()
        .str("record", "summary")
        .str("experiment", "sweep")
        .str("method", spec.method.name())
        .opt_str("algebraic_bands", labels(&s.algebraic).as_deref())
        .opt_str("simulation_bands", labels(&s.simulation).as_deref())
        .nums("disagreements", &s.disagreements))
}

fn run_heatmap(c: &ExperimentConfig, out: &mut Output) -> Result<JsonLine> {
    let spec = c.sweep_spec()?;
    let h = heatmap(&c.model, &spec)?;
    let (k1, k2) = (h.axis1.param.key(), h.axis2.param.key());
    let mut t = Table::new(&[
        "row",
        "col",
        k1,
        k2,
        "label",
        "selected_mu",
        "algebraic_label",
        "n_roots",
        "mus",
        "simulation_label",
        "simulation_slope",
        "error",
    ]);
    for (name, a) in [("axis1", h.axis1), ("axis2", h.axis2)] {
        t.comment(format!(
            "{name},{},{},{},{}",
            a.param.key(),
            fmt_float(a.min),
            fmt_float(a.max),
            a.count
        ));
    }
    let mut failed = 0;
    for cell in &h.cells {
        failed += usize::from(cell.error.is_some());
        let alg = cell.algebraic.as_ref();
        let sim = cell.simulated.as_ref();
        t.push(vec![
            cell.row.to_string(),
            cell.col.to_string(),
            fmt_float(cell.v1),
            fmt_float(cell.v2),
            cell.label.name().to_string(),
            opt(cell.selected_mu),
            alg.map(|a| a.label.name().to_string()).unwrap_or_default(),
            alg.map(|a| a.equilibria.len().to_string()).unwrap_or_default(),
            alg.map(|a| a.mus.iter().map(|&m| fmt_float(m)).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            sim.map(|s| s.label.name().to_string()).unwrap_or_default(),
            opt(sim.and_then(|s| s.slope)),
            cell.error.as_deref().map(|e| e.replace([',', '\n'], ";")).unwrap_or_default(),
        ]);
    }
    out.table("grid", &t)?;
    Ok(JsonLine::new()
        .str("record", "summary")
        .str("experiment", "heatmap")
        .str("axis1", k1)
        .int("rows", h.rows())
        .str("axis2", k2)
        .int("cols", h.cols())
        .int("failed_cells", failed))
}

fn run_phase(c: &ExperimentConfig, out: &mut Output) -> Result<(JsonLine, Option<IfflError>)> {
    let m = &c.model;
    let reports = equilibrium_reports(m)?;
    let start_p = match c.initial.system {
        InitialSystem::Reduced => c.initial.p,
        InitialSystem::Full => c.initial.u / c.initial.x,
    };
    let p_max = c.phase.p_max.unwrap_or_else(|| {
        let eq_p = reports.iter().map(|(_, e)| e.p_bar).fold(0.0, f64::max);
        (1.5 * ((m.a + m.lambda) / m.b).max(eq_p)).max(1.2 * start_p).max(1.0)
    });
    let y_max = c.phase.y_max.unwrap_or_else(|| {
        let y_curve = (m.c * p_max + m.v_max) / m.delta;
        (1.05 * y_curve.max((m.a + m.lambda) / m.kappa)).max(1.2 * c.initial.y)
    });
    let pts = nullclines(m, p_max, y_max, c.phase.points)?;
    let mut t = Table::new(&["component", "p", "y"]);
    t.comment(format!("window,{},{}", fmt_float(p_max), fmt_float(y_max)));
    for q in &pts {
        t.push(vec![q.component.name().to_string(), fmt_float(q.p), fmt_float(q.y)]);
    }
    out.table("nullclines", &t)?;
    let lines: Vec<String> = reports.iter().map(|(role, e)| equilibrium_line(role, e)).collect();
    out.lines(EQUILIBRIA_FILE, &lines)?;
    let traj = integrate(m, c.initial.state()?, None, &c.run.integrator())?;
    out.table("trajectory", &trajectory_table(&traj))?;
    let line = trajectory_summary(
        JsonLine::new()
            .str("record", "summary")
            .str("experiment", "phase")
            .num("p_max", p_max)
            .num("y_max", y_max)
            .int("equilibria", reports.len()),
        &traj,
    );
    Ok((line, divergence_error(&traj, "phase")))
}

