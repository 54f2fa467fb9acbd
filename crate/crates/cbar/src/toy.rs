//! The mixing experiment on real features.

use cbar_core::distances::{mmd, msd, SampleSet, ToyMixRow};
use cbar_core::{FeatureVector, Seed};
use rand::Rng;

use crate::error::{CliError, Result};

/// Like the synthetic sweep, with the two clusters given as feature rows.
///
/// Each of the `n` samples is a uniformly drawn `target` row with
/// probability `alpha`, else a uniformly drawn `other` row. Distances are
/// to the mean of `target`. Returns the rows and the distance between
/// the two means.
pub fn real_mix_sweep(
    target: &SampleSet,
    other: &SampleSet,
    alphas: &[f64],
    n: usize,
    seed: Seed,
) -> Result<(Vec<ToyMixRow>, f64)> {
    if target.is_empty() || other.is_empty() {
        return Err(CliError::Data(
            "both mixture groups need at least one row".into(),
        ));
    }
    let center = target.mean().expect("nonempty");
    let gap = center.distance(&other.mean().expect("nonempty"));
    let center_set = SampleSet::new(target.fingerprint, vec![center.clone()])?;
    let mut rows = Vec::with_capacity(alphas.len());
    for (i, &alpha) in alphas.iter().enumerate() {
        let mut rng = seed.stream("real-mixture", i as u64);
        let features: Vec<FeatureVector> = (0..n)
            .map(|_| {
                let pool = if rng.random::<f64>() < alpha {
                    target
                } else {
                    other
                };
                pool.features[rng.random_range(0..pool.len())].clone()
            })
            .collect();
        let s = SampleSet::new(target.fingerprint, features)?;
        rows.push(ToyMixRow {
            alpha,
            mmd: mmd(&s, &center_set)?,
            msd: msd(&s, &center, target.fingerprint)?.0,
        });
    }
    Ok((rows, gap))
}
