//! The partition lattice induced by random maps `[n] -> [n]`.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod partition;
pub mod random_maps;
pub mod report;
pub mod stirling;
pub mod verify;

pub use error::{Error, Result};
pub use partition::{BlockStats, SetPartition};
