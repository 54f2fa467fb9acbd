//! Distances between augmentation and corruption distributions in the
//! transform feature space, rank correlation, and augmentation ranking.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::features::{corruption_center, Extractor, FeatureVector, Fingerprint, PreparedSubset};
use crate::image::{choose_subset, ImageSubset};
use crate::math;
use crate::rng::Seed;
use crate::transforms::{Registry, Transform};

/// Features sampled from one distribution, all from one extractor.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub fingerprint: Fingerprint,
    pub features: Vec<FeatureVector>,
}

impl SampleSet {
    pub fn new(fingerprint: Fingerprint, features: Vec<FeatureVector>) -> Result<Self> {
        if let Some(first) = features.first() {
            let dim = first.dim();
            if let Some(bad) = features.iter().find(|f| f.dim() != dim) {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: bad.dim(),
                });
            }
        }
        Ok(Self {
            fingerprint,
            features,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.features.first().map(FeatureVector::dim)
    }

    pub fn mean(&self) -> Option<FeatureVector> {
        FeatureVector::mean(&self.features)
    }

    fn compatible(&self, fingerprint: Fingerprint, dim: usize) -> Result<()> {
        self.fingerprint.check(fingerprint)?;
        match self.dim() {
            Some(d) if d != dim => Err(Error::DimMismatch {
                expected: d,
                found: dim,
            }),
            _ => Ok(()),
        }
    }
}

/// Both distances between an augmentation sample set and a corruption.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceReport {
    pub msd: f64,
    pub mmd: f64,
    /// Index into the augmentation samples attaining `msd`.
    pub argmin: usize,
    pub sample_count: usize,
}

/// Streaming minimum of distances to a fixed center. Ties keep the lowest
/// index, so merging partial scans in any order gives the same result.
#[derive(Clone, Debug, PartialEq)]
pub struct MsdAccumulator {
    center: FeatureVector,
    best: Option<(f64, usize)>,
    seen: usize,
}

impl MsdAccumulator {
    pub fn new(center: FeatureVector) -> Self {
        Self {
            center,
            best: None,
            seen: 0,
        }
    }

    pub fn push(&mut self, index: usize, feature: &FeatureVector) {
        let d = feature.distance(&self.center);
        self.offer(d, index);
        self.seen += 1;
    }

    fn offer(&mut self, d: f64, index: usize) {
        self.best = match self.best {
            Some((bd, bi)) if bd < d || (bd == d && bi < index) => Some((bd, bi)),
            _ => Some((d, index)),
        };
    }

    pub fn merge(mut self, other: MsdAccumulator) -> Self {
        if let Some((d, i)) = other.best {
            self.offer(d, i);
        }
        self.seen += other.seen;
        self
    }

    /// `(distance, argmin)`, or `None` before any sample.
    pub fn finish(&self) -> Option<(f64, usize)> {
        self.best
    }

    pub fn count(&self) -> usize {
        self.seen
    }
}

/// Minimal sample distance: `min over a in samples of ‖a − center‖`.
/// Returns the distance and the first index attaining it.
pub fn msd(
    samples: &SampleSet,
    center: &FeatureVector,
    center_fingerprint: Fingerprint,
) -> Result<(f64, usize)> {
    if samples.is_empty() {
        return Err(Error::Domain(
            "minimal sample distance needs at least one sample".into(),
        ));
    }
    samples.compatible(center_fingerprint, center.dim())?;
    let mut acc = MsdAccumulator::new(center.clone());
    for (i, f) in samples.features.iter().enumerate() {
        acc.push(i, f);
    }
    Ok(acc.finish().expect("nonempty"))
}

/// Distance between the sample means of two sets.
pub fn mmd(a: &SampleSet, b: &SampleSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain(
            "mean discrepancy needs nonempty sample sets".into(),
        ));
    }
    b.compatible(a.fingerprint, a.dim().unwrap_or(0))?;
    let ma = a.mean().expect("nonempty");
    let mb = b.mean().expect("nonempty");
    Ok(ma.distance(&mb))
}

/// Both distances from augmentation samples to a corruption given by its
/// draws; MSD uses the mean of the draws as the center.
pub fn distance_report(
    augmentations: &SampleSet,
    corruption: &SampleSet,
) -> Result<DistanceReport> {
    let d = mmd(augmentations, corruption)?;
    let center = corruption.mean().expect("nonempty");
    let (m, argmin) = msd(augmentations, &center, corruption.fingerprint)?;
    Ok(DistanceReport {
        msd: m,
        mmd: d,
        argmin,
        sample_count: augmentations.len(),
    })
}

/// 1-based ranks with ties given the average of the positions they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Pearson correlation; `Undefined` if either input has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Domain(
            "correlation needs at least two points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined(
            "correlation of a constant sequence".into(),
        ));
    }
    Ok((sxy / math::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN in rank correlation input".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Round-robin ordering of `features` against `centers`.
///
/// Position `k * centers.len() + j` holds the closest feature to center
/// `j` not already placed. Distance ties go to the lower feature index.
/// Every feature appears exactly once.
pub fn rank_augmentations(
    features: &[FeatureVector],
    centers: &[FeatureVector],
) -> Result<Vec<usize>> {
    if centers.is_empty() {
        return Err(Error::Domain("ranking needs at least one center".into()));
    }
    let sorted: Vec<Vec<usize>> = centers
        .iter()
        .map(|c| {
            let d: Vec<f64> = features.iter().map(|f| f.distance(c)).collect();
            let mut idx: Vec<usize> = (0..features.len()).collect();
            idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
            idx
        })
        .collect();
    let mut cursor = vec![0usize; centers.len()];
    let mut used = vec![false; features.len()];
    let mut out = Vec::with_capacity(features.len());
    'outer: loop {
        for j in 0..centers.len() {
            if out.len() == features.len() {
                break 'outer;
            }
            while used[sorted[j][cursor[j]]] {
                cursor[j] += 1;
            }
            let pick = sorted[j][cursor[j]];
            used[pick] = true;
            out.push(pick);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectMode {
    Random,
    Closest,
    Farthest,
}

impl core::str::FromStr for SelectMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SelectMode::Random),
            "closest" => Ok(SelectMode::Closest),
            "farthest" => Ok(SelectMode::Farthest),
            _ => Err(Error::Domain(format!("unknown selection mode `{s}`"))),
        }
    }
}

/// Picks `k` entries of a ranked list. Random picks keep ranked order.
pub fn select_subset<T: Clone>(
    ordered: &[T],
    k: usize,
    mode: SelectMode,
    seed: Seed,
) -> Result<Vec<T>> {
    if k > ordered.len() {
        return Err(Error::Size {
            requested: k,
            available: ordered.len(),
        });
    }
    Ok(match mode {
        SelectMode::Closest => ordered[..k].to_vec(),
        SelectMode::Farthest => ordered[ordered.len() - k..].to_vec(),
        SelectMode::Random => {
            let mut idx: Vec<usize> = (0..ordered.len()).collect();
            idx.shuffle(&mut seed.stream("select-subset", 0));
            idx.truncate(k);
            idx.sort_unstable();
            idx.into_iter().map(|i| ordered[i].clone()).collect()
        }
    })
}

/// Settings for [`variance_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub corruption: String,
    pub severity: u8,
    pub n_images: usize,
    pub n_corruptions: usize,
    pub repeats: usize,
    pub seed: Seed,
    /// Reuse `seed` for every repeat instead of deriving one per repeat.
    pub force_same_seed: bool,
}

/// Distances from a fixed probe transform to a corruption center, one per
/// independent (image subset, corruption draws) repeat.
pub fn probe_distances<E: Extractor + ?Sized, T: Transform + ?Sized>(
    extractor: &E,
    registry: &Registry,
    probe: &T,
    pool: &ImageSubset,
    cfg: &ProbeConfig,
) -> Result<Vec<f64>> {
    if cfg.repeats < 2 {
        return Err(Error::Domain(
            "variance probe needs at least two repeats".into(),
        ));
    }
    let mut out = Vec::with_capacity(cfg.repeats);
    for r in 0..cfg.repeats {
        let seed = if cfg.force_same_seed {
            cfg.seed
        } else {
            cfg.seed.derive("variance-probe", r as u64)
        };
        let ids = choose_subset(&pool.ids, cfg.n_images, seed.derive("images", 0))?;
        let images = ids
            .iter()
            .map(|id| {
                let i = pool
                    .ids
                    .iter()
                    .position(|p| p == id)
                    .expect("chosen from pool");
                pool.images[i].clone()
            })
            .collect();
        let subset = ImageSubset::new(ids, images)?;
        let prepared = PreparedSubset::new(extractor, &subset)?;
        let center = corruption_center(
            extractor,
            registry,
            &prepared,
            &cfg.corruption,
            cfg.severity,
            cfg.n_corruptions,
            seed.derive("corruptions", 0),
        )?;
        let f = prepared.featurize(extractor, registry, probe)?;
        out.push(f.feature.distance(&center));
    }
    Ok(out)
}

/// `100 · std / mean` of a set of distances, with the `n − 1` std.
pub fn relative_std_percent(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Domain(
            "relative spread needs at least two values".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::Undefined("mean distance is zero".into()));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(100.0 * math::sqrt(var) / mean)
}

/// Spread of the probe distance as a percentage of its mean.
pub fn variance_probe<E: Extractor + ?Sized, T: Transform + ?Sized>(
    extractor: &E,
    registry: &Registry,
    probe: &T,
    pool: &ImageSubset,
    cfg: &ProbeConfig,
) -> Result<f64> {
    relative_std_percent(&probe_distances(extractor, registry, probe, pool, cfg)?)
}

/// Two isotropic Gaussian clusters in feature space: `target` at the origin
/// and `other` at distance `separation` along the first axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyClusters {
    pub dim: usize,
    pub separation: f64,
    pub sigma: f64,
}

impl Default for ToyClusters {
    fn default() -> Self {
        Self {
            dim: 2,
            separation: 1.0,
            sigma: 0.05,
        }
    }
}

impl ToyClusters {
    pub fn target_center(&self) -> FeatureVector {
        FeatureVector::zeros(self.dim)
    }

    pub fn other_center(&self) -> FeatureVector {
        let mut v = vec![0.0f32; self.dim];
        v[0] = self.separation as f32;
        FeatureVector(v)
    }

    /// `n` samples, each from the target cluster with probability `alpha`.
    pub fn mixture(&self, alpha: f64, n: usize, seed: Seed) -> SampleSet {
        let mut rng = seed.stream("toy-mixture", 0);
        let features = (0..n)
            .map(|_| {
                let from_target = rng.random::<f64>() < alpha;
                let shift = if from_target { 0.0 } else { self.separation };
                let v = (0..self.dim)
                    .map(|d| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (if d == 0 { shift } else { 0.0 } + self.sigma * z) as f32
                    })
                    .collect();
                FeatureVector(v)
            })
            .collect();
        SampleSet {
            fingerprint: Fingerprint(0),
            features,
        }
    }

    /// MMD predicted by the mixture mean: `(1 − α) · separation`.
    pub fn analytic_mmd(&self, alpha: f64) -> f64 {
        (1.0 - alpha) * self.separation
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyMixRow {
    pub alpha: f64,
    pub mmd: f64,
    pub msd: f64,
}

/// For each `alpha`, MMD and MSD of a mixture sample set to the target
/// cluster center.
pub fn toy_mix_sweep(
    clusters: &ToyClusters,
    alphas: &[f64],
    n: usize,
    seed: Seed,
) -> Vec<ToyMixRow> {
    let center = clusters.target_center();
    let target = SampleSet {
        fingerprint: Fingerprint(0),
        features: vec![center.clone()],
    };
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let s = clusters.mixture(alpha, n, seed.derive("alpha", i as u64));
            ToyMixRow {
                alpha,
                mmd: mmd(&s, &target).expect("nonempty"),
                msd: msd(&s, &center, Fingerprint(0)).expect("nonempty").0,
            }
        })
        .collect()
}

/// Ordinary least squares `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Domain(
            "linear fit needs two or more paired points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Undefined("all x values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Coefficient of determination of `predicted` for `observed`.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() || observed.is_empty() {
        return Err(Error::Domain(
            "r² needs equal-length nonempty inputs".into(),
        ));
    }
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let ss_tot: f64 = observed.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Undefined("observed values are constant".into()));
    }
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(vs: &[&[f32]]) -> SampleSet {
        SampleSet::new(
            Fingerprint(1),
            vs.iter().map(|v| FeatureVector(v.to_vec())).collect(),
        )
        .unwrap()
    }

    fn fv(v: &[f32]) -> FeatureVector {
        FeatureVector(v.to_vec())
    }

    #[test]
    fn msd_examples() {
        let fp = Fingerprint(1);
        assert_eq!(
            msd(&set(&[&[0.0, 0.0], &[3.0, 4.0]]), &fv(&[0.0, 0.0]), fp).unwrap(),
            (0.0, 0)
        );
        assert_eq!(
            msd(&set(&[&[3.0, 4.0], &[6.0, 8.0]]), &fv(&[0.0, 0.0]), fp).unwrap(),
            (5.0, 0)
        );
        assert_eq!(
            msd(&set(&[&[6.0, 8.0], &[3.0, 4.0]]), &fv(&[0.0, 0.0]), fp).unwrap(),
            (5.0, 1)
        );
    }

    #[test]
    fn msd_errors() {
        let empty = SampleSet::new(Fingerprint(1), vec![]).unwrap();
        assert!(matches!(
            msd(&empty, &fv(&[0.0]), Fingerprint(1)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            msd(&set(&[&[1.0]]), &fv(&[0.0]), Fingerprint(2)),
            Err(Error::FingerprintMismatch { .. })
        ));
        assert!(matches!(
            msd(&set(&[&[1.0]]), &fv(&[0.0, 1.0]), Fingerprint(1)),
            Err(Error::DimMismatch { .. })
        ));
        assert!(SampleSet::new(Fingerprint(1), vec![fv(&[1.0]), fv(&[1.0, 2.0])]).is_err());
    }

    #[test]
    fn mmd_examples() {
        let a = set(&[&[1.0, 1.0], &[-1.0, -1.0]]);
        assert_eq!(mmd(&a, &a).unwrap(), 0.0);
        let b = set(&[&[2.0, 4.0], &[4.0, 4.0]]);
        assert_eq!(mmd(&a, &b).unwrap(), 5.0);
        let mut c = b.clone();
        c.fingerprint = Fingerprint(9);
        assert!(mmd(&a, &c).is_err());
    }

    #[test]
    fn accumulator_merge_matches_single_scan() {
        let feats: Vec<FeatureVector> = (0..20).map(|i| fv(&[(i % 7) as f32, 1.0])).collect();
        let center = fv(&[3.0, 1.0]);
        let mut whole = MsdAccumulator::new(center.clone());
        feats.iter().enumerate().for_each(|(i, f)| whole.push(i, f));
        let mut a = MsdAccumulator::new(center.clone());
        let mut b = MsdAccumulator::new(center);
        for (i, f) in feats.iter().enumerate() {
            if i >= 10 {
                a.push(i, f)
            } else {
                b.push(i, f)
            }
        }
        assert_eq!(a.merge(b).finish(), whole.finish());
        assert_eq!(whole.finish(), Some((0.0, 3)));
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(
            spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0
        );
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            spearman(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::Undefined(_))
        ));
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn round_robin_two_centers() {
        // Center A at 0, center B at 10 on a line; points at 1, 2, 9, 12.
        // A takes 1, B takes 9, A takes 2, B takes 12.
        let pts = [fv(&[12.0]), fv(&[2.0]), fv(&[9.0]), fv(&[1.0])];
        let centers = [fv(&[0.0]), fv(&[10.0])];
        assert_eq!(
            rank_augmentations(&pts, &centers).unwrap(),
            vec![3, 2, 1, 0]
        );
        // 9 and 11 tie for B; the lower index wins.
        let pts = [fv(&[1.0]), fv(&[9.0]), fv(&[11.0]), fv(&[2.0])];
        assert_eq!(
            rank_augmentations(&pts, &centers).unwrap(),
            vec![0, 1, 3, 2]
        );
    }

    #[test]
    fn round_robin_single_center_is_sort() {
        let pts: Vec<FeatureVector> = [5.0, -1.0, 3.0, 0.5].iter().map(|&x| fv(&[x])).collect();
        assert_eq!(
            rank_augmentations(&pts, &[fv(&[0.0])]).unwrap(),
            vec![3, 1, 2, 0]
        );
        assert!(rank_augmentations(&pts, &[]).is_err());
    }

    #[test]
    fn select_modes() {
        let v: Vec<u32> = (0..10).collect();
        assert_eq!(
            select_subset(&v, 3, SelectMode::Closest, Seed(0)).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(
            select_subset(&v, 3, SelectMode::Farthest, Seed(0)).unwrap(),
            vec![7, 8, 9]
        );
        for m in [
            SelectMode::Random,
            SelectMode::Closest,
            SelectMode::Farthest,
        ] {
            assert_eq!(select_subset(&v, 10, m, Seed(4)).unwrap(), v);
        }
        let r = select_subset(&v, 4, SelectMode::Random, Seed(4)).unwrap();
        assert_eq!(
            r,
            select_subset(&v, 4, SelectMode::Random, Seed(4)).unwrap()
        );
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        assert!(select_subset(&v, 11, SelectMode::Random, Seed(4)).is_err());
    }

    #[test]
    fn relative_std() {
        assert_eq!(relative_std_percent(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        // mean 2, sample std 1.
        assert!((relative_std_percent(&[1.0, 2.0, 3.0]).unwrap() - 50.0).abs() < 1e-12);
        assert!(relative_std_percent(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn toy_endpoints() {
        let c = ToyClusters::default();
        let rows = toy_mix_sweep(&c, &[0.0, 1.0], 2000, Seed(3));
        assert!((rows[0].mmd - 1.0).abs() < 0.01);
        assert!(rows[1].mmd < 0.01);
        assert!(rows[1].msd < 0.01);
        assert!(rows[0].msd > 0.7);
    }

    #[test]
    fn fit_and_r2() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 3.0, 5.0];
        assert_eq!(linear_fit(&xs, &ys).unwrap(), (1.0, 2.0));
        assert_eq!(r_squared(&ys, &ys).unwrap(), 1.0);
    }
}
