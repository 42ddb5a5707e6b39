//! Std companion of `stfreq-core`: file formats, cross-checks and the command-line tool.

pub mod cli;
pub mod io;
pub mod oracle;
pub mod schema;
