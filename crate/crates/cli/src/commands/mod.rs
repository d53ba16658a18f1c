//! Subcommand implementations. Each `run` returns the list of files it wrote;
//! errors bubble up as `spotwise_core::Error` for exit-code mapping.

pub mod areas;
pub mod codec;
pub mod entities;
pub mod eval;
pub mod process;
pub mod simulate;
pub mod stats_cmd;

use std::path::Path;

use chrono::FixedOffset;
use spotwise_core::error::{Error, Result};

/// Read a configuration file, classifying missing/unreadable files as config
/// errors (exit 2).
pub(crate) fn read_config_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

/// Read a data file; IO failures stay data errors (exit 1).
pub(crate) fn read_data_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))
}

/// Parse a timezone offset such as `+00:00`, `-03:00`, `Z`, or `UTC`.
pub(crate) fn parse_tz(text: &str) -> Result<FixedOffset> {
    if text.eq_ignore_ascii_case("z") || text.eq_ignore_ascii_case("utc") {
        return Ok(FixedOffset::east_opt(0).expect("zero offset"));
    }
    text.parse::<FixedOffset>()
        .map_err(|e| Error::Config(format!("bad timezone `{text}`: {e} (use e.g. -03:00)")))
}

/// Render a float with one decimal, the precision used by the reports.
pub(crate) fn fmt1(x: f64) -> String {
    format!("{x:.1}")
}
