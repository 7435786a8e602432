//! Sweep engine, figure presets, file formats and the validation driver
//! behind the `nlcs` command-line tool.

pub mod config;
pub mod format;
pub mod reproduce;
pub mod sweep;
pub mod table;
pub mod validate;
pub mod wigner_job;

pub use config::{parse_ij, FileConfig};
pub use format::{fmt_sci, round_sig};
pub use reproduce::{preset, run_reproduce, FigureId, Preset, PresetOptions};
pub use sweep::{
    compute_row, run_sweep, with_threads, LambdaGrid, OutputField, ResultRow, RowStatus, Spacing,
    SweepConfig,
};
pub use table::{emit_table, parse_table, TableFormat};
pub use validate::{run_validate, Fault, Scope, ValidateReport};
pub use wigner_job::{
    compute_wigner_job, run_wigner_job, with_converged_table, write_wigner_grid, WignerJob,
    WignerOutput, WIGNER_DEFAULT_TOL,
};
