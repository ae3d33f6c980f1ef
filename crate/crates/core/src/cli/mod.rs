//! Document formats and report rendering for the command-line interface.

pub mod document;
pub mod report;
