//! Command-line front end for `graphing-core`: spec files, a threaded
//! executor, and deterministic CSV/JSON reports.

pub mod cli;
pub mod error;
pub mod exec;
pub mod report;
pub mod spec;

pub use error::{LabError, Result};
pub use exec::Threaded;
pub use report::{Format, Report};
