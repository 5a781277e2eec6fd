//! Scenario files, output formats and subcommands for the Morawetz lab.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod io;
pub mod report;
pub mod scenario;

pub use error::{LabError, LabResult};
