//! Severity tables as TOML: one table per corruption, one array per
//! parameter, indexed by severity minus one.
//!
//! ```toml
//! [gaussian_noise]
//! sigma = [0.04, 0.06, 0.08, 0.10, 0.12]
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use cbar_core::transforms::SeverityTable;
use cbar_core::Registry;

use crate::error::{CliError, Result};

/// The table shipped with the repository.
pub const SHIPPED: &str = include_str!("../config/severities.toml");

pub fn parse_severities(text: &str) -> Result<SeverityTable> {
    let raw: BTreeMap<String, BTreeMap<String, Vec<f64>>> =
        toml::from_str(text).map_err(|e| CliError::Config(format!("severity table: {e}")))?;
    let mut table = SeverityTable::empty();
    for (corruption, params) in raw {
        for (param, values) in params {
            table.set_row(&corruption, &param, values);
        }
    }
    Ok(table)
}

pub fn to_toml(table: &SeverityTable) -> String {
    let mut out = String::new();
    let mut current = "";
    for (c, p, values) in table.iter() {
        if c != current {
            if !current.is_empty() {
                out.push('\n');
            }
            writeln!(out, "[{c}]").unwrap();
            current = c;
        }
        let vals: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{p} = [{}]", vals.join(", ")).unwrap();
    }
    out
}

/// A validated registry from a TOML severity file, or the built-in table.
pub fn load_registry(path: Option<&Path>) -> Result<Registry> {
    let table = match path {
        Some(p) => parse_severities(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?,
        None => SeverityTable::builtin(),
    };
    Registry::validated(table).map_err(|e| CliError::Config(format!("severity table: {e}")))
}
