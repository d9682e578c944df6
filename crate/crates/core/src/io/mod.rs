pub mod config;
pub mod snapshot;

pub use config::{parse_config, RunConfig};
