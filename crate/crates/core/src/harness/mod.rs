//! Experiment configuration, presets, execution and output formats.

mod config;
mod output;
mod presets;
mod run;

pub use config::{
    parse_a, parse_config, parse_v, AdmitParams, ConfigError, ConfigIssue, Equation, ExperimentConfig,
    InitialCondition, StudyParams, REQUIRED_KEYS,
};
pub use output::{
    decode_snapshot, encode_snapshot, format_float, plot_script, read_snapshot, report_csv, trajectory_csv,
    write_csv, write_snapshot, Snapshot, CSV_HEADER, SNAPSHOT_HEADER_LEN, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};
pub use presets::{KernelChoice, Preset, PRESET_IDS};
pub use run::{
    initial_field, run, Command, ErrorRecord, HarnessError, RunOutcome, EXIT_CERTIFICATE, EXIT_GUARD, EXIT_OK,
    EXIT_OTHER, EXIT_VALIDATION,
};
