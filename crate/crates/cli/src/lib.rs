//! The `ko` command line: argument parsing into a [`RunConfig`], dispatch
//! via [`run`], and the serialized result types.
//!
//! Exit statuses: 0 success, 1 verdict differs from `--expect`, 2 usage or
//! input error, 3 numerical failure.

pub mod args;
pub mod error;
pub mod output;
mod run;

pub use args::{parse_args, Command, Expectation, Format, RunConfig};
pub use error::CliError;
pub use run::{report, run};

/// Parses `argv` and runs it; returns the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cfg) => run(&cfg),
        Err(e) => report(&e),
    }
}
