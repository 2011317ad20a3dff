//! Scenario-driven front end for `scatter-core`.
//!
//! A scenario file is parsed by [`parse_scenario`], optionally adjusted with
//! command-line [`Overrides`], and handed to [`run`] with a [`Subcommand`].
//! The result is a [`ResultTable`] carrying the scenario hash.

pub mod error;
pub mod run;
pub mod scenario;
pub mod table;

pub use error::{CliError, ParseError};
pub use run::{run, Subcommand};
pub use scenario::{parse_scenario, Format, Overrides, Scenario};
pub use table::{Cell, Metadata, ResultTable};

use std::path::Path;

/// Reads, overrides and runs a scenario file.
pub fn run_file(cmd: Subcommand, path: &Path, overrides: &Overrides) -> Result<(Scenario, ResultTable), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut scenario = parse_scenario(&text).map_err(CliError::Parse)?;
    scenario.apply(overrides).map_err(CliError::Parse)?;
    let table = run(cmd, &scenario)?;
    Ok((scenario, table))
}
