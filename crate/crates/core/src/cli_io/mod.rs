//! Run documents, figure presets, persistence and the command implementations
//! behind the `ksfp` binary.
mod commands;
mod config;
mod presets;
pub mod svg;
mod validate;

pub use commands::{
    cmd_converge, cmd_expand, cmd_simulate, cmd_stability, ExpansionRow, SimulateReport,
    StabilityReport, PEAK_THRESHOLD,
};
pub use config::{
    ConvergeSection, ExpandSection, GridSection, ModelKind, ModelSection, OutputFormat,
    OutputSection, RunConfig, StabilitySection, TimeSection,
};
pub use presets::{preset, preset_names, preset_source, PRESETS};
pub use validate::{run_validation, Check, ValidateOptions, ValidationReport};
