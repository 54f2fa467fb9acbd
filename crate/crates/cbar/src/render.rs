//! Materializes transformed copies of an image directory.
//!
//! Output layout: `<corruption>/<severity>/<relpath>` for corruptions,
//! `<augmentation>/<relpath>` for single augmentations, and
//! `scheme-NNN/<draw>/<relpath>` for draws of a powerset scheme.
//! `manifest.jsonl` in the output root has one record per written file,
//! ordered by spec then source path.
//!
//! Each source image gets the seed `seed.derive("render", fnv1a(relpath))`,
//! shared by every corruption and augmentation applied to it. Scheme draw
//! `d` uses that seed derived once more with `("draw", d)`.

use std::io::Write;
use std::path::Path;

use cbar_core::rng::fnv1a;
use cbar_core::transforms::{sample_augmentation, AugmentationScheme, Transform};
use cbar_core::{Registry, Seed, TransformSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cbf::write_atomic;
use crate::dataset::list_images;
use crate::error::{CliError, Result};
use crate::png_io::{load_png, save_png};
use crate::selection::scheme_label;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RenderSpec {
    Corruption { name: String, severity: u8 },
    Augmentation { name: String },
    Scheme { index: usize, draw: usize },
}

impl RenderSpec {
    /// Output subdirectory, also the transform label in the manifest.
    pub fn label(&self) -> String {
        match self {
            RenderSpec::Corruption { name, severity } => format!("{name}/{severity}"),
            RenderSpec::Augmentation { name } => name.clone(),
            RenderSpec::Scheme { index, draw } => format!("{}/{draw}", scheme_label(*index)),
        }
    }

    fn seed(&self, image_seed: Seed) -> Seed {
        match self {
            RenderSpec::Scheme { draw, .. } => image_seed.derive("draw", *draw as u64),
            _ => image_seed,
        }
    }

    fn transform(&self, seed: Seed) -> Result<Box<dyn Transform + Send + Sync>> {
        Ok(match self {
            RenderSpec::Corruption { name, severity } => {
                Box::new(TransformSpec::corruption(name, *severity, seed))
            }
            RenderSpec::Augmentation { name } => Box::new(TransformSpec::augmentation(name, seed)),
            RenderSpec::Scheme { index, .. } => Box::new(sample_augmentation(
                &AugmentationScheme::from_powerset_index(*index),
                seed,
            )?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub transform: String,
    pub source: String,
    pub file: String,
    pub seed: u64,
}

pub fn image_seed(seed: Seed, relpath: &str) -> Seed {
    seed.derive("render", fnv1a(relpath.as_bytes()))
}

/// Renders every `(spec, image)` pair. An empty spec list does nothing.
pub fn render_dataset(
    input_dir: &Path,
    specs: &[RenderSpec],
    output_dir: &Path,
    seed: Seed,
    registry: &Registry,
) -> Result<Vec<ManifestRecord>> {
    if specs.is_empty() {
        return Ok(Vec::new());
    }
    let ids = list_images(input_dir)?;
    if ids.is_empty() {
        return Err(CliError::Data(format!(
            "no .png files under {}",
            input_dir.display()
        )));
    }
    std::fs::create_dir_all(output_dir).map_err(|e| CliError::io(output_dir, e))?;
    let per_image: Vec<Vec<ManifestRecord>> = ids
        .par_iter()
        .map(|id| {
            let img = load_png(&input_dir.join(id))?;
            let base = image_seed(seed, id);
            specs
                .iter()
                .map(|spec| {
                    let s = spec.seed(base);
                    let out = spec.transform(s)?.apply(registry, &img)?;
                    let file = format!("{}/{id}", spec.label());
                    save_png(&output_dir.join(&file), &out)?;
                    Ok(ManifestRecord {
                        transform: spec.label(),
                        source: id.clone(),
                        file,
                        seed: s.0,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(ids.len() * specs.len());
    for k in 0..specs.len() {
        records.extend(per_image.iter().map(|r| r[k].clone()));
    }
    write_manifest(&output_dir.join("manifest.jsonl"), &records)?;
    Ok(records)
}

pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<()> {
    write_atomic(path, |w| {
        for r in records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
        })
        .collect()
}
