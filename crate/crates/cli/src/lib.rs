//! Library side of the command-line tool: argument/configuration handling,
//! CSV/JSON input and output, and the on-disk fit format (a directory of CSV
//! files plus a versioned JSON manifest).

pub mod cli_error;
pub mod config;
pub mod fitdir;
pub mod io;

pub use cli_error::{CliError, ExitKind};
