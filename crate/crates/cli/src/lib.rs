//! File sharding, reconstruction, repair and verification on top of `msr-core`.

pub mod commands;
pub mod error;
pub mod shard;

pub use error::{CliError, Result};
