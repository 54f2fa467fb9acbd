//! Transform features written as `CBF1` files.
//!
//! Row ids:
//! - `center/<corruption>/<severity>`: a corruption center, the mean of
//!   `f(c)` over the corruption draws;
//! - `scheme-NNN/<k>`: `f(a)` of the `k`-th draw of powerset scheme `NNN`
//!   (scheme 0 is the identity);
//! - with embedded renders, any other render label as it appears.
//!
//! Rows sharing the prefix before their last `/` form one sample set.

use cbar_core::features::{corruption_center, corruption_center_paired, PreparedSubset};
use cbar_core::rng::fnv1a;
use cbar_core::transforms::{sample_augmentation, AugmentationScheme, Transform};
use cbar_core::{Extractor, FeatureVector, ImageBuffer, ImageSubset, Registry, Seed};
use rayon::prelude::*;

use crate::cbf::FeatureFile;
use crate::error::{CliError, Result};
use crate::selection::scheme_label;

pub const CENTER_PREFIX: &str = "center/";

#[derive(Clone, Debug, PartialEq)]
pub struct FeaturizePlan {
    /// `(corruption, severity)` pairs to center.
    pub centers: Vec<(String, u8)>,
    pub corruption_draws: usize,
    /// Draw `i` goes to image `i` only, one draw per image.
    pub paired: bool,
    pub schemes: Vec<usize>,
    pub augmentation_draws: usize,
    pub seed: Seed,
}

pub fn center_id(corruption: &str, severity: u8) -> String {
    format!("{CENTER_PREFIX}{corruption}/{severity}")
}

pub fn draw_seed(seed: Seed, scheme: usize, draw: usize) -> Seed {
    seed.derive("scheme", scheme as u64)
        .derive("draw", draw as u64)
}

pub fn center_seed(seed: Seed, corruption: &str) -> Seed {
    seed.derive("center", fnv1a(corruption.as_bytes()))
}

/// Sample-set name of a row id: everything before the last `/`.
pub fn group_of(id: &str) -> &str {
    id.rsplit_once('/').map_or(id, |(g, _)| g)
}

enum Task {
    Center(String, u8),
    Draw(usize, usize),
}

/// Centers first, then scheme draws, each in plan order.
pub fn featurize_plan<E: Extractor + Sync>(
    extractor: &E,
    registry: &Registry,
    subset: &ImageSubset,
    plan: &FeaturizePlan,
) -> Result<FeatureFile> {
    if plan.corruption_draws == 0 && !plan.paired && !plan.centers.is_empty() {
        return Err(CliError::Config(
            "corruption_draws must be at least 1".into(),
        ));
    }
    if plan.augmentation_draws == 0 && !plan.schemes.is_empty() {
        return Err(CliError::Config(
            "augmentation_draws must be at least 1".into(),
        ));
    }
    let prepared = PreparedSubset::new(extractor, subset)?;
    let mut tasks: Vec<Task> = plan
        .centers
        .iter()
        .map(|(c, s)| Task::Center(c.clone(), *s))
        .collect();
    for &i in &plan.schemes {
        tasks.extend((0..plan.augmentation_draws).map(|k| Task::Draw(i, k)));
    }
    let rows: Vec<(String, FeatureVector)> = tasks
        .par_iter()
        .map(|t| -> Result<_> {
            Ok(match t {
                Task::Center(c, s) => {
                    let seed = center_seed(plan.seed, c);
                    let v = if plan.paired {
                        corruption_center_paired(extractor, registry, &prepared, c, *s, seed)?
                    } else {
                        corruption_center(
                            extractor,
                            registry,
                            &prepared,
                            c,
                            *s,
                            plan.corruption_draws,
                            seed,
                        )?
                    };
                    (center_id(c, *s), v)
                }
                Task::Draw(i, k) => {
                    let scheme = AugmentationScheme::from_powerset_index(*i);
                    let aug = sample_augmentation(&scheme, draw_seed(plan.seed, *i, *k))?;
                    let f = prepared.featurize(extractor, registry, &aug)?;
                    (format!("{}/{k}", scheme_label(*i)), f.feature)
                }
            })
        })
        .collect::<Result<_>>()?;
    let mut out = FeatureFile::new(extractor.dim(), extractor.fingerprint());
    for (id, v) in rows {
        out.push(id, v)?;
    }
    Ok(out)
}

/// A transform known only by its render label; the pixels are never used.
struct Label(String);

impl Transform for Label {
    fn apply(&self, _: &Registry, img: &ImageBuffer) -> cbar_core::Result<ImageBuffer> {
        Ok(img.clone())
    }
    fn label(&self) -> String {
        self.0.clone()
    }
}

/// Transform features from externally embedded images.
///
/// `embeddings` holds clean images under their relative path and rendered
/// ones under `<label>/<relpath>`. Every label found for the first clean
/// id becomes one row; corruption labels `<name>/<severity>` are written
/// as centers.
pub fn featurize_embedded(embeddings: &FeatureFile, clean_ids: &[String]) -> Result<FeatureFile> {
    let first = clean_ids
        .first()
        .ok_or_else(|| CliError::Data("no clean image ids".into()))?;
    let table = embeddings.to_table()?;
    let suffix = format!("/{first}");
    let mut labels: Vec<&str> = embeddings
        .rows
        .iter()
        .filter_map(|(id, _)| id.strip_suffix(suffix.as_str()))
        .collect();
    labels.sort_unstable();
    let placeholders = vec![ImageBuffer::zeros(1, 1); clean_ids.len()];
    let subset = ImageSubset::new(clean_ids.to_vec(), placeholders)?;
    let prepared = PreparedSubset::new(&table, &subset)?;
    let registry = Registry::default();
    let mut out = FeatureFile::new(embeddings.dim, embeddings.fingerprint);
    for label in labels {
        let f = prepared.featurize(&table, &registry, &Label(label.to_string()))?;
        out.push(row_id_for_label(label), f.feature)?;
    }
    Ok(out)
}

fn row_id_for_label(label: &str) -> String {
    match label.split_once('/') {
        Some((name, sev))
            if sev.parse::<u8>().is_ok()
                && cbar_core::transforms::lookup(name)
                    .is_some_and(|e| e.kind.severity_range().is_some()) =>
        {
            format!("{CENTER_PREFIX}{label}")
        }
        _ => label.to_string(),
    }
}
