//! Command-line front end for `permwalk`.
//!
//! Inputs are CSV: a feature-by-subject matrix whose header row names the
//! subjects, a two-column group label file and a two-column twin pair file.
//! Every command writes a versioned JSON [`ResultDocument`] (or a flat CSV
//! table) that records its full configuration, so `permwalk replay` can
//! reproduce it byte for byte.

pub mod cli;
pub mod commands;
pub mod document;
pub mod error;
pub mod ingest;

pub use document::{ResultDocument, Run, SCHEMA_VERSION};
pub use error::{CliError, Result};
pub use ingest::{DataMatrix, Group, GroupLabels, PairLabels};
