//! File formats, batch stages and the command-line front end for
//! [`trackfuse_core`].
//!
//! Everything here is plumbing around the core crate: CSV track ingest,
//! the land-sea mask file, camera rig configs, deterministic CSV writers and
//! run manifests. [`stages`] runs the per-flight pipeline over many flights;
//! [`cli`] maps subcommands onto it.

pub mod cli;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod mask;
pub mod output;
pub mod rig;
pub mod stages;

pub use error::{Error, Result};
