//! File formats, dataset rendering, and the `cbar` command line on top of
//! [`cbar_core`].

pub mod build;
pub mod cbf;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod featurize;
pub mod measure;
pub mod png_io;
pub mod render;
pub mod selection;
pub mod severity_config;
pub mod tables;
pub mod toy;

pub use error::{CliError, Result};
