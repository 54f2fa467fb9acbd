//! Parsing of transform and severity selections given on the command line.

use cbar_core::transforms::{lookup, registry_list, TransformKind};

use crate::error::{CliError, Result};

/// Corruption names for `reference`, `cbar`, `all`, `none`, or a
/// comma-separated list. An empty string selects nothing.
pub fn parse_corruptions(s: &str) -> Result<Vec<String>> {
    let by_kind = |want: &[TransformKind]| -> Vec<String> {
        registry_list()
            .into_iter()
            .filter(|(_, k, _)| want.contains(k))
            .map(|(n, _, _)| n.to_string())
            .collect()
    };
    let s = s.trim();
    Ok(match s {
        "" | "none" => Vec::new(),
        "reference" => by_kind(&[TransformKind::CorruptionReference]),
        "cbar" => by_kind(&[TransformKind::CorruptionCbar]),
        "all" => by_kind(&[
            TransformKind::CorruptionReference,
            TransformKind::CorruptionCbar,
        ]),
        list => {
            let mut out = Vec::new();
            for name in list.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                match lookup(name) {
                    Some(e) if e.kind.severity_range().is_some() => out.push(name.to_string()),
                    Some(_) => {
                        return Err(CliError::Config(format!("`{name}` is not a corruption")))
                    }
                    None => return Err(CliError::Config(format!("unknown corruption `{name}`"))),
                }
            }
            out
        }
    })
}

/// Base augmentation names from a comma-separated list.
pub fn parse_augmentations(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        match lookup(name) {
            Some(e) if e.kind == TransformKind::Augmentation => out.push(name.to_string()),
            _ => return Err(CliError::Config(format!("unknown augmentation `{name}`"))),
        }
    }
    Ok(out)
}

/// Severities from `3`, `1-5`, or `1,3,5-7`, sorted and deduplicated.
pub fn parse_severities(s: &str) -> Result<Vec<u8>> {
    let bad = || CliError::Config(format!("bad severity list `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u8 = a.trim().parse().map_err(|_| bad())?;
                let b: u8 = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Powerset indices from `all` or a list like `0,3,10-20`.
pub fn parse_schemes(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s == "all" {
        return Ok((0..512).collect());
    }
    let bad = || CliError::Config(format!("bad scheme list `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if let Some(i) = out.iter().find(|&&i| i >= 512) {
        return Err(CliError::Config(format!(
            "scheme index {i} is not below 512"
        )));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Severities of `name` selected by `wanted`, or its full range when
/// `wanted` is `None`.
pub fn severities_for(name: &str, wanted: Option<&[u8]>) -> Result<Vec<u8>> {
    let (lo, hi) = lookup(name)
        .and_then(|e| e.kind.severity_range())
        .ok_or_else(|| CliError::Config(format!("`{name}` is not a corruption")))?;
    match wanted {
        None => Ok((lo..=hi).collect()),
        Some(w) => {
            if let Some(s) = w.iter().find(|s| !(lo..=hi).contains(*s)) {
                return Err(CliError::Config(format!(
                    "severity {s} out of range {lo}-{hi} for `{name}`"
                )));
            }
            Ok(w.to_vec())
        }
    }
}

/// Directory and feature-id label of a powerset scheme.
pub fn scheme_label(index: usize) -> String {
    format!("scheme-{index:03}")
}
