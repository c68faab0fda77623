//! File formats, configuration and command line for the gridmap pipeline.
//!
//! The analytics live in `gridmap-core`; this crate reads annual summary CSV
//! files and JSON configuration, and renders reports.

pub mod cli;
pub mod config;
pub mod ingest;
pub mod render;

pub use cli::run_cli;
pub use config::{ConfigError, ConfigPaths, Configuration};
pub use gridmap_core as core;
pub use ingest::{load_dataset, parse_annual_summary, read_dataset, IngestMode, LoadError, LoadOptions, ParseError};
pub use render::{Format, Report};
