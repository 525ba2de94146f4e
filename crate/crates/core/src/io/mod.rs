//! Experiment configuration, dispatch and plot-ready output files.

mod config;
mod nullcline;
mod run;
mod write;

pub use config::{
    parse_config, parse_config_for, serialize_config, ExperimentConfig, ExperimentKind,
    InitialSettings, InitialSystem, OutputFormat, OutputSettings, PhaseSettings, RunSettings,
    StepSettings, SweepSettings, DEFAULT_PHASE_POINTS,
};
pub use nullcline::{nullclines, NullclineComponent, NullclinePoint};
pub use run::{
    config_text_from, manifest_config_text, run_experiment, RunOutcome, EQUILIBRIA_FILE,
    MANIFEST_FILE,
};
pub use write::{fmt_float, write_file, JsonLine, Table};
