//! Command-line front end for `uscsim-core`: parameter resolution, sweeps
//! on a bounded worker pool, and the CSV/JSON/binary artifacts written by
//! each subcommand. Every run leaves a `manifest.json` and `config.txt`
//! echoing the resolved parameters next to its outputs.

use std::fmt;

pub mod args;
pub mod commands;
pub mod output;
pub mod records;
pub mod sweep;

pub use commands::run;

/// A well-formed request the model refuses (unphysical state).
#[derive(Debug)]
pub struct Rejected(pub String);

impl fmt::Display for Rejected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

/// 2 for unstable or unphysical configurations, 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let refused = err.chain().any(|e| {
        e.is::<Rejected>() || matches!(e.downcast_ref::<uscsim_core::Error>(), Some(uscsim_core::Error::Unstable { .. }))
    });
    if refused {
        2
    } else {
        1
    }
}
