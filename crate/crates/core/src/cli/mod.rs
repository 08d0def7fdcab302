//! Experiment driver behind the `fedgan` binary: config files, presets,
//! runs, report comparison, and image grids.

pub mod compare;
pub mod config;
pub mod grid;
pub mod presets;
pub mod run;

use crate::error::Error;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_NOT_IMPROVED: i32 = 3;

/// Process exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Partition(_) | Error::Format(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}
