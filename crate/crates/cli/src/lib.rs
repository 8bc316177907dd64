//! Batch front end for the grasp pipeline.

pub mod commands;
pub mod config;

use graspgen_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::UnreadableFile { .. }
        | Error::UnsupportedFormat(_)
        | Error::Format(_)
        | Error::EmptyMesh(_)
        | Error::NotFound(_) => EXIT_INPUT,
        Error::Invariant(_) | Error::InvalidArgument(_) => EXIT_INVARIANT,
        Error::Io(_) => EXIT_FAILURE,
    }
}
