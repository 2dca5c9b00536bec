//! File formats, configuration and the command-line front end for the
//! `rcim-core` exploration pipeline.

pub mod cli;
pub mod config;
pub mod exec;
pub mod fixtures;
pub mod formats;
pub mod report;
pub mod trend;
