//! Distances, correlations and augmentation rankings over feature files.

use std::collections::BTreeMap;

use cbar_core::distances::{
    rank_augmentations, select_subset, spearman, MsdAccumulator, SelectMode,
};
use cbar_core::{FeatureVector, Seed};
use rayon::prelude::*;

use crate::cbf::FeatureFile;
use crate::error::{CliError, Result};
use crate::featurize::{group_of, CENTER_PREFIX};

/// Corruption centers and augmentation sample sets of a feature file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Split {
    /// `(corruption label, center)` in file order.
    pub centers: Vec<(String, FeatureVector)>,
    /// `(group, [(row id, feature)])`, groups sorted by name, rows in file order.
    pub groups: Vec<(String, Vec<(String, FeatureVector)>)>,
}

pub fn split(file: &FeatureFile) -> Split {
    let mut centers = Vec::new();
    let mut groups: BTreeMap<String, Vec<(String, FeatureVector)>> = BTreeMap::new();
    for (id, v) in &file.rows {
        match id.strip_prefix(CENTER_PREFIX) {
            Some(label) => centers.push((label.to_string(), v.clone())),
            None => groups
                .entry(group_of(id).to_string())
                .or_default()
                .push((id.clone(), v.clone())),
        }
    }
    Split {
        centers,
        groups: groups.into_iter().collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceRow {
    pub scheme: String,
    pub corruption: String,
    pub msd: f64,
    /// Row id of the nearest sample.
    pub nearest: String,
    pub mmd: f64,
    pub samples: usize,
}

const SCAN_CHUNK: usize = 4096;

/// MSD and MMD for every (group, center) pair, using at most `budget`
/// samples per group, taken in file order.
pub fn distance_table(split: &Split, budget: usize) -> Result<Vec<DistanceRow>> {
    if split.centers.is_empty() {
        return Err(CliError::Data(
            "no `center/` rows in the feature files".into(),
        ));
    }
    if split.groups.is_empty() {
        return Err(CliError::Data(
            "no augmentation rows in the feature files".into(),
        ));
    }
    let mut rows = Vec::new();
    for (name, members) in &split.groups {
        let used = &members[..members.len().min(budget)];
        let feats: Vec<FeatureVector> = used.iter().map(|(_, v)| v.clone()).collect();
        let mean = FeatureVector::mean(&feats).expect("groups are nonempty");
        for (label, center) in &split.centers {
            let acc = feats
                .par_chunks(SCAN_CHUNK)
                .enumerate()
                .map(|(ci, chunk)| {
                    let mut acc = MsdAccumulator::new(center.clone());
                    for (j, f) in chunk.iter().enumerate() {
                        acc.push(ci * SCAN_CHUNK + j, f);
                    }
                    acc
                })
                .reduce_with(MsdAccumulator::merge)
                .expect("nonempty");
            let (msd, argmin) = acc.finish().expect("nonempty");
            rows.push(DistanceRow {
                scheme: name.clone(),
                corruption: label.clone(),
                msd,
                nearest: used[argmin].0.clone(),
                mmd: mean.distance(center),
                samples: used.len(),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationRow {
    pub corruption: String,
    pub schemes: usize,
    pub mean_msd: f64,
    pub mean_error: f64,
    /// NaN when undefined (constant input or fewer than two schemes).
    pub spearman: f64,
}

/// `(scheme, corruption, msd, error)` joined on the error table's keys.
pub fn join_errors(
    distances: &[DistanceRow],
    errors: &BTreeMap<(String, String), f64>,
) -> Result<Vec<(String, String, f64, f64)>> {
    let by_key: BTreeMap<(&str, &str), f64> = distances
        .iter()
        .map(|r| ((r.scheme.as_str(), r.corruption.as_str()), r.msd))
        .collect();
    errors
        .iter()
        .map(|((s, c), &e)| {
            let d = by_key.get(&(s.as_str(), c.as_str())).ok_or_else(|| {
                CliError::Data(format!("no features for scheme `{s}` and corruption `{c}`"))
            })?;
            Ok((s.clone(), c.clone(), *d, e))
        })
        .collect()
}

/// Per-corruption Spearman correlation of MSD with error across schemes.
pub fn correlate(points: &[(String, String, f64, f64)]) -> Vec<CorrelationRow> {
    let mut per: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (_, c, d, e) in points {
        let entry = per.entry(c.as_str()).or_default();
        entry.0.push(*d);
        entry.1.push(*e);
    }
    per.into_iter()
        .map(|(c, (ds, es))| {
            let n = ds.len() as f64;
            CorrelationRow {
                corruption: c.to_string(),
                schemes: ds.len(),
                mean_msd: ds.iter().sum::<f64>() / n,
                mean_error: es.iter().sum::<f64>() / n,
                spearman: spearman(&ds, &es).unwrap_or(f64::NAN),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedAugmentation {
    /// 1-based position in the full ranking.
    pub rank: usize,
    pub id: String,
    /// Nearest selected center and the distance to it.
    pub nearest: String,
    pub distance: f64,
}

/// Every augmentation row, ordered round robin over the centers by
/// closeness. `only` restricts the centers by corruption label.
pub fn rank_rows(split: &Split, only: Option<&[String]>) -> Result<Vec<RankedAugmentation>> {
    let centers: Vec<&(String, FeatureVector)> = split
        .centers
        .iter()
        .filter(|(l, _)| only.is_none_or(|o| o.contains(l)))
        .collect();
    if centers.is_empty() {
        return Err(CliError::Data("no matching corruption centers".into()));
    }
    let rows: Vec<&(String, FeatureVector)> = split.groups.iter().flat_map(|(_, m)| m).collect();
    let feats: Vec<FeatureVector> = rows.iter().map(|(_, v)| v.clone()).collect();
    let cvecs: Vec<FeatureVector> = centers.iter().map(|(_, v)| v.clone()).collect();
    let order = rank_augmentations(&feats, &cvecs)?;
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(pos, i)| {
            let (j, d) = cvecs
                .iter()
                .enumerate()
                .map(|(j, c)| (j, feats[i].distance(c)))
                .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
            RankedAugmentation {
                rank: pos + 1,
                id: rows[i].0.clone(),
                nearest: centers[j].0.clone(),
                distance: d,
            }
        })
        .collect())
}

pub fn choose(
    ranked: &[RankedAugmentation],
    k: usize,
    mode: SelectMode,
    seed: Seed,
) -> Result<Vec<RankedAugmentation>> {
    Ok(select_subset(ranked, k, mode, seed)?)
}
