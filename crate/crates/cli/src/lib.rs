//! Command-line tools for the `stringinv-core` library.

pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod suites;
