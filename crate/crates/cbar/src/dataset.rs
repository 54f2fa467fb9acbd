//! Image directories: listing, loading, and synthetic stand-ins.

use std::path::Path;

use cbar_core::image::{choose_subset, synthetic_image};
use cbar_core::{ImageSubset, Seed};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::png_io::load_png;

/// Relative paths of every `.png` under `dir`, `/`-separated and sorted.
pub fn list_images(dir: &Path) -> Result<Vec<String>> {
    if !dir.is_dir() {
        return Err(CliError::Config(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(|e| CliError::Data(e.to_string()))?;
        let path = entry.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !entry.file_type().is_file() || !is_png {
            continue;
        }
        let rel = path.strip_prefix(dir).expect("walked under dir");
        let parts: Vec<&str> = rel
            .components()
            .map(|c| {
                c.as_os_str()
                    .to_str()
                    .ok_or_else(|| CliError::Data(format!("non UTF-8 path {}", rel.display())))
            })
            .collect::<Result<_>>()?;
        out.push(parts.join("/"));
    }
    out.sort();
    Ok(out)
}

/// Loads `ids` (relative paths) from `dir`, in the given order.
pub fn load_images(dir: &Path, ids: &[String]) -> Result<ImageSubset> {
    let images = ids
        .par_iter()
        .map(|id| load_png(&dir.join(id)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageSubset::new(ids.to_vec(), images)?)
}

/// A seeded sample of `n` images from `dir`; all of them when `n` is `None`.
pub fn sample_subset(dir: &Path, n: Option<usize>, seed: Seed) -> Result<ImageSubset> {
    let all = list_images(dir)?;
    if all.is_empty() {
        return Err(CliError::Data(format!(
            "no .png files under {}",
            dir.display()
        )));
    }
    let ids = match n {
        Some(n) => choose_subset(&all, n, seed)?,
        None => all,
    };
    load_images(dir, &ids)
}

/// `n` procedural images named `synthetic/00000.png`, ...
pub fn synthetic_subset(n: usize, size: usize, seed: Seed) -> ImageSubset {
    let ids: Vec<String> = (0..n).map(|i| format!("synthetic/{i:05}.png")).collect();
    let images = (0..n)
        .into_par_iter()
        .map(|i| synthetic_image(size, size, seed.derive("synthetic", i as u64)))
        .collect();
    ImageSubset::new(ids, images).expect("matching lengths")
}
