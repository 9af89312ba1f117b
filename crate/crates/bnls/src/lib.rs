//! Monte Carlo studies, statistics, and file formats on top of
//! `bnls-core`; the `bnls` binary drives them from the command line.

pub mod config;
pub mod experiments;
pub mod io;
pub mod report;
pub mod stats;

pub use experiments::{run_study, StudyKind, StudySpec};
pub use report::ExperimentReport;
