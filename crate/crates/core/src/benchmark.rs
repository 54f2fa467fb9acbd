//! Construction of a corruption benchmark that is far, in transform feature
//! space, from a reference benchmark while matching its baseline error.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, Fingerprint};
use crate::math;
use crate::rng::{fnv1a, Seed};

/// Lowest and highest allowed group center.
pub const CENTER_RANGE: (u8, u8) = (3, 8);
/// Severities of the new corruption family.
pub const NEW_SEVERITIES: (u8, u8) = (1, 10);
/// Number of corruptions in a candidate dataset.
pub const CANDIDATE_SIZE: usize = 10;
const HALF: usize = CANDIDATE_SIZE / 2;

/// Baseline test error (percent) per `(corruption, severity)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorTable {
    pub baseline: Option<String>,
    entries: BTreeMap<(String, u8), f64>,
}

impl ErrorTable {
    pub fn new(baseline: Option<String>) -> Self {
        Self {
            baseline,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, corruption: &str, severity: u8, error: f64) -> Result<()> {
        if !(0.0..=100.0).contains(&error) {
            return Err(Error::Domain(format!(
                "error {error} for {corruption}/{severity} outside [0, 100]"
            )));
        }
        self.entries
            .insert((corruption.to_string(), severity), error);
        Ok(())
    }

    pub fn get(&self, corruption: &str, severity: u8) -> Result<f64> {
        self.entries
            .get(&(corruption.to_string(), severity))
            .copied()
            .ok_or_else(|| Error::Coverage(format!("no error entry for {corruption}/{severity}")))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u8, f64)> {
        self.entries.iter().map(|((c, s), e)| (c.as_str(), *s, *e))
    }

    /// Corruption names in lexicographic order.
    pub fn corruptions(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.entries.keys().map(|(c, _)| c).collect();
        set.into_iter().cloned().collect()
    }

    pub fn severities(&self, corruption: &str) -> Vec<u8> {
        self.entries
            .keys()
            .filter(|(c, _)| c == corruption)
            .map(|(_, s)| *s)
            .collect()
    }

    /// Entries for the named corruptions only.
    pub fn restrict(&self, names: &[String]) -> ErrorTable {
        ErrorTable {
            baseline: self.baseline.clone(),
            entries: self
                .entries
                .iter()
                .filter(|((c, _), _)| names.contains(c))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    /// Mean over every entry: the benchmark's average error.
    pub fn mean_error(&self) -> Result<f64> {
        if self.entries.is_empty() {
            return Err(Error::Coverage("empty error table".into()));
        }
        Ok(self.entries.values().sum::<f64>() / self.entries.len() as f64)
    }

    /// Mean over corruptions of `max − min` error across their severities.
    pub fn mean_spread(&self) -> Result<f64> {
        let names = self.corruptions();
        if names.is_empty() {
            return Err(Error::Coverage("empty error table".into()));
        }
        let mut total = 0.0;
        for c in &names {
            let errs: Vec<f64> = self
                .severities(c)
                .iter()
                .map(|&s| self.get(c, s).unwrap())
                .collect();
            let (lo, hi) = errs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
                    (lo.min(e), hi.max(e))
                });
            total += hi - lo;
        }
        Ok(total / names.len() as f64)
    }
}

/// Five consecutive severities of one corruption.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeverityGroup {
    pub corruption: String,
    pub center: u8,
}

impl SeverityGroup {
    pub fn new(corruption: &str, center: u8) -> Result<Self> {
        if center < CENTER_RANGE.0 || center > CENTER_RANGE.1 {
            return Err(Error::Domain(format!(
                "group center {center} outside 3..=8"
            )));
        }
        Ok(Self {
            corruption: corruption.to_string(),
            center,
        })
    }

    pub fn severities(&self) -> [u8; 5] {
        let c = self.center;
        [c - 2, c - 1, c, c + 1, c + 2]
    }

    pub fn mean_error(&self, table: &ErrorTable) -> Result<f64> {
        let mut t = 0.0;
        for s in self.severities() {
            t += table.get(&self.corruption, s)?;
        }
        Ok(t / 5.0)
    }

    pub fn spread(&self, table: &ErrorTable) -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in self.severities() {
            let e = table.get(&self.corruption, s)?;
            lo = lo.min(e);
            hi = hi.max(e);
        }
        Ok(hi - lo)
    }
}

/// All groups whose error spread lies within `band · spread_target` of
/// `spread_target`, for every corruption in `table`, ordered by
/// corruption then center. Every corruption must cover severities 1–10.
pub fn form_severity_groups(
    table: &ErrorTable,
    spread_target: f64,
    band: f64,
) -> Result<Vec<SeverityGroup>> {
    if band.is_nan() || band < 0.0 || !spread_target.is_finite() {
        return Err(Error::Domain(
            "spread band and target must be finite and nonnegative".into(),
        ));
    }
    let mut out = Vec::new();
    for c in table.corruptions() {
        for s in NEW_SEVERITIES.0..=NEW_SEVERITIES.1 {
            table.get(&c, s)?;
        }
        for center in CENTER_RANGE.0..=CENTER_RANGE.1 {
            let g = SeverityGroup::new(&c, center)?;
            let spread = g.spread(table)?;
            if (spread - spread_target).abs() <= band * spread_target.abs() {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// Ten severity groups over distinct corruptions, sorted by corruption.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateDataset {
    pub groups: Vec<SeverityGroup>,
    /// Mean baseline error over the 50 members.
    pub avg_error: f64,
}

impl CandidateDataset {
    pub fn new(mut groups: Vec<SeverityGroup>, table: &ErrorTable) -> Result<Self> {
        groups.sort();
        if groups
            .windows(2)
            .any(|w| w[0].corruption == w[1].corruption)
        {
            return Err(Error::Domain("candidate repeats a corruption".into()));
        }
        let mut t = 0.0;
        for g in &groups {
            t += g.mean_error(table)?;
        }
        let avg_error = if groups.is_empty() {
            0.0
        } else {
            t / groups.len() as f64
        };
        Ok(Self { groups, avg_error })
    }

    pub fn corruptions(&self) -> Vec<&str> {
        self.groups.iter().map(|g| g.corruption.as_str()).collect()
    }

    /// Group centers in corruption order; the tie-break key.
    pub fn severity_vector(&self) -> Vec<u8> {
        self.groups.iter().map(|g| g.center).collect()
    }

    /// Every `(corruption, severity)` member.
    pub fn members(&self) -> impl Iterator<Item = (&str, u8)> + '_ {
        self.groups.iter().flat_map(|g| {
            g.severities()
                .into_iter()
                .map(move |s| (g.corruption.as_str(), s))
        })
    }
}

/// Settings for [`sample_candidates`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingConfig {
    pub reference_avg: f64,
    /// Allowed `|avg_error − reference_avg|`, in percentage points.
    pub tolerance: f64,
    pub n_candidates: usize,
    /// Attempt budget as a multiple of `n_candidates`.
    pub budget_factor: usize,
    pub seed: Seed,
}

/// Outcome of candidate sampling, including any shortfall.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSample {
    pub candidates: Vec<CandidateDataset>,
    pub attempts: usize,
    pub requested: usize,
    /// Average error of the closest-to-reference pairing seen.
    pub nearest_avg: f64,
}

impl CandidateSample {
    pub fn shortfall(&self) -> usize {
        self.requested - self.candidates.len()
    }
}

/// One feasible severity assignment for a 5-corruption half, or the
/// closest infeasible average when none exists.
enum HalfChoice {
    Feasible(Vec<SeverityGroup>, f64),
    Infeasible(f64),
}

struct HalfSampler<'a> {
    by_corruption: BTreeMap<&'a str, Vec<(SeverityGroup, f64)>>,
    cfg: SamplingConfig,
}

impl<'a> HalfSampler<'a> {
    /// The assignment for a half is drawn once per `(seed, half)`: uniform
    /// over assignments within tolerance.
    fn choose(&self, half: &[&'a str]) -> HalfChoice {
        let options: Vec<&Vec<(SeverityGroup, f64)>> =
            half.iter().map(|c| &self.by_corruption[c]).collect();
        let mut key = String::new();
        for c in half {
            key.push_str(c);
            key.push('\n');
        }
        let mut rng = self.cfg.seed.stream("half", fnv1a(key.as_bytes()));
        let mut idx = [0usize; HALF];
        let mut chosen: Option<[usize; HALF]> = None;
        let mut feasible = 0u64;
        let mut nearest = f64::NAN;
        loop {
            let avg = idx.iter().zip(&options).map(|(&i, o)| o[i].1).sum::<f64>() / HALF as f64;
            let gap = (avg - self.cfg.reference_avg).abs();
            if gap <= self.cfg.tolerance {
                feasible += 1;
                if rng.random_range(0..feasible) == 0 {
                    chosen = Some(idx);
                }
            }
            if nearest.is_nan() || gap < (nearest - self.cfg.reference_avg).abs() {
                nearest = avg;
            }
            // Odometer increment over the per-corruption option lists.
            let mut k = 0;
            loop {
                if k == HALF {
                    return match chosen {
                        Some(ix) => {
                            let groups = ix
                                .iter()
                                .zip(&options)
                                .map(|(&i, o)| o[i].0.clone())
                                .collect();
                            let avg = ix.iter().zip(&options).map(|(&i, o)| o[i].1).sum::<f64>()
                                / HALF as f64;
                            HalfChoice::Feasible(groups, avg)
                        }
                        None => HalfChoice::Infeasible(nearest),
                    };
                }
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// Samples candidate datasets as pairs of disjoint 5-corruption halves.
///
/// Each half is a uniformly random 5-subset of the corruptions that have
/// groups; its severity assignment is fixed per `(seed, half)` and drawn
/// uniformly among assignments within `tolerance` of the reference. A
/// half with no such assignment fails the attempt. Since both halves meet
/// the tolerance, so does their union. Attempt `i` uses its own derived
/// stream, so the output is a pure function of the inputs.
pub fn sample_candidates(
    groups: &[SeverityGroup],
    table: &ErrorTable,
    cfg: &SamplingConfig,
) -> Result<CandidateSample> {
    if cfg.tolerance.is_nan() || cfg.tolerance < 0.0 {
        return Err(Error::Domain("tolerance must be nonnegative".into()));
    }
    let mut by_corruption: BTreeMap<&str, Vec<(SeverityGroup, f64)>> = BTreeMap::new();
    for g in groups {
        let e = g.mean_error(table)?;
        by_corruption
            .entry(g.corruption.as_str())
            .or_default()
            .push((g.clone(), e));
    }
    for opts in by_corruption.values_mut() {
        opts.sort_by(|a, b| a.0.cmp(&b.0));
        opts.dedup_by(|a, b| a.0 == b.0);
    }
    if by_corruption.len() < CANDIDATE_SIZE {
        return Err(Error::Coverage(format!(
            "only {} corruptions have severity groups; {} needed",
            by_corruption.len(),
            CANDIDATE_SIZE
        )));
    }
    let names: Vec<&str> = by_corruption.keys().copied().collect();
    let sampler = HalfSampler {
        by_corruption,
        cfg: *cfg,
    };
    let budget = cfg.n_candidates.saturating_mul(cfg.budget_factor.max(1));
    let mut out = CandidateSample {
        candidates: Vec::with_capacity(cfg.n_candidates),
        attempts: 0,
        requested: cfg.n_candidates,
        nearest_avg: f64::NAN,
    };
    let mut nearest = f64::NAN;
    while out.candidates.len() < cfg.n_candidates && out.attempts < budget {
        let attempt = out.attempts;
        out.attempts += 1;
        let mut rng = cfg.seed.stream("candidate", attempt as u64);
        let mut pool = names.clone();
        pool.shuffle(&mut rng);
        let mut first: Vec<&str> = pool[..HALF].to_vec();
        let mut second: Vec<&str> = pool[HALF..CANDIDATE_SIZE].to_vec();
        first.sort_unstable();
        second.sort_unstable();
        let a = sampler.choose(&first);
        let b = sampler.choose(&second);
        match (a, b) {
            (HalfChoice::Feasible(mut ga, ea), HalfChoice::Feasible(gb, eb)) => {
                closer(&mut nearest, (ea + eb) / 2.0, cfg.reference_avg);
                ga.extend(gb);
                let cand = CandidateDataset::new(ga, table)?;
                // Both halves pass, so only rounding can push the union out.
                if (cand.avg_error - cfg.reference_avg).abs() <= cfg.tolerance {
                    out.candidates.push(cand);
                }
            }
            (x, y) => {
                let avg = |h: &HalfChoice| match h {
                    HalfChoice::Feasible(_, e) | HalfChoice::Infeasible(e) => *e,
                };
                closer(&mut nearest, (avg(&x) + avg(&y)) / 2.0, cfg.reference_avg);
            }
        }
    }
    out.nearest_avg = nearest;
    if out.candidates.is_empty() && cfg.n_candidates > 0 {
        return Err(Error::Infeasible {
            reason: format!(
                "no candidate within ±{} of the reference average after {} attempts",
                cfg.tolerance, out.attempts
            ),
            nearest,
            target: cfg.reference_avg,
        });
    }
    Ok(out)
}

fn closer(best: &mut f64, avg: f64, target: f64) {
    if best.is_nan() || (avg - target).abs() < (*best - target).abs() {
        *best = avg;
    }
}

/// Feature centers keyed by `(corruption, severity)`, from one extractor.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CenterTable {
    pub fingerprint: Fingerprint,
    pub centers: BTreeMap<(String, u8), FeatureVector>,
}

impl CenterTable {
    pub fn new(fingerprint: Fingerprint) -> Self {
        Self {
            fingerprint,
            centers: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, corruption: &str, severity: u8, center: FeatureVector) {
        self.centers
            .insert((corruption.to_string(), severity), center);
    }

    pub fn get(&self, corruption: &str, severity: u8) -> Result<&FeatureVector> {
        self.centers
            .get(&(corruption.to_string(), severity))
            .ok_or_else(|| {
                Error::Coverage(format!("no feature center for {corruption}/{severity}"))
            })
    }
}

/// Distance from each new `(corruption, severity)` center to its nearest
/// reference center.
pub fn member_terms(
    new_centers: &CenterTable,
    reference: &CenterTable,
) -> Result<BTreeMap<(String, u8), f64>> {
    new_centers.fingerprint.check(reference.fingerprint)?;
    if reference.centers.is_empty() {
        return Err(Error::Coverage("no reference centers".into()));
    }
    let mut out = BTreeMap::new();
    for (k, c) in &new_centers.centers {
        let mut best = f64::INFINITY;
        for r in reference.centers.values() {
            if r.dim() != c.dim() {
                return Err(Error::DimMismatch {
                    expected: c.dim(),
                    found: r.dim(),
                });
            }
            best = best.min(c.distance(r));
        }
        out.insert(k.clone(), best);
    }
    Ok(out)
}

fn term(terms: &BTreeMap<(String, u8), f64>, c: &str, s: u8) -> Result<f64> {
    terms
        .get(&(c.to_string(), s))
        .copied()
        .ok_or_else(|| Error::Coverage(format!("no distance term for {c}/{s}")))
}

/// Mean over the candidate's members of their min distance to the
/// reference, from precomputed [`member_terms`].
pub fn dataset_distance_from_terms(
    candidate: &CandidateDataset,
    terms: &BTreeMap<(String, u8), f64>,
) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for (c, s) in candidate.members() {
        total += term(terms, c, s)?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Domain("candidate has no members".into()));
    }
    Ok(total / n as f64)
}

/// `mean over members m of min over references r of ‖center(m) − r‖`.
pub fn dataset_distance(
    candidate: &CandidateDataset,
    new_centers: &CenterTable,
    reference: &CenterTable,
) -> Result<f64> {
    new_centers.fingerprint.check(reference.fingerprint)?;
    if reference.centers.is_empty() {
        return Err(Error::Coverage("no reference centers".into()));
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for (c, s) in candidate.members() {
        let m = new_centers.get(c, s)?;
        let mut best = f64::INFINITY;
        for r in reference.centers.values() {
            best = best.min(m.distance(r));
        }
        total += best;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Domain("candidate has no members".into()));
    }
    Ok(total / n as f64)
}

/// Per-corruption contribution to the dataset distance.
#[derive(Clone, Debug, PartialEq)]
pub struct Contribution {
    pub corruption: String,
    /// Mean of the member terms of this corruption over all candidates.
    pub mean: f64,
    /// `(mean − population mean) / population std`; 0 when the std is 0.
    pub normalized: f64,
    /// Number of candidate members the mean is taken over.
    pub members: usize,
}

/// Contributions sorted by `normalized` descending, ties by name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContributionRanking {
    pub entries: Vec<Contribution>,
}

impl ContributionRanking {
    pub fn top(&self, k: usize) -> Vec<String> {
        self.entries
            .iter()
            .take(k)
            .map(|c| c.corruption.clone())
            .collect()
    }

    fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            b.normalized
                .total_cmp(&a.normalized)
                .then_with(|| a.corruption.cmp(&b.corruption))
        });
    }
}

/// Ranks corruptions by their average member term across `candidates`.
///
/// The population is every member of every candidate. Contributions are
/// reported as shifts from the population mean in units of its std.
pub fn rank_contributions(
    candidates: &[CandidateDataset],
    terms: &BTreeMap<(String, u8), f64>,
) -> Result<ContributionRanking> {
    if candidates.is_empty() {
        return Err(Error::Domain(
            "contribution ranking needs at least one candidate".into(),
        ));
    }
    let mut per: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    let mut population = Vec::new();
    for cand in candidates {
        for (c, s) in cand.members() {
            let t = term(terms, c, s)?;
            let e = per.entry(c).or_insert((0.0, 0));
            e.0 += t;
            e.1 += 1;
            population.push(t);
        }
    }
    let (pop_mean, pop_std) = math::mean_std(&population);
    let mut ranking = ContributionRanking {
        entries: per
            .into_iter()
            .map(|(c, (sum, n))| {
                let mean = sum / n as f64;
                Contribution {
                    corruption: c.to_string(),
                    mean,
                    normalized: if pop_std > 0.0 {
                        (mean - pop_mean) / pop_std
                    } else {
                        0.0
                    },
                    members: n,
                }
            })
            .collect(),
    };
    ranking.sort();
    Ok(ranking)
}

/// Averages rankings from repeated runs, per corruption over the runs in
/// which it appears.
pub fn average_rankings(runs: &[ContributionRanking]) -> ContributionRanking {
    let mut acc: BTreeMap<&str, (f64, f64, usize, usize)> = BTreeMap::new();
    for r in runs {
        for c in &r.entries {
            let e = acc.entry(c.corruption.as_str()).or_insert((0.0, 0.0, 0, 0));
            e.0 += c.mean;
            e.1 += c.normalized;
            e.2 += c.members;
            e.3 += 1;
        }
    }
    let mut ranking = ContributionRanking {
        entries: acc
            .into_iter()
            .map(|(c, (m, z, members, runs))| Contribution {
                corruption: c.to_string(),
                mean: m / runs as f64,
                normalized: z / runs as f64,
                members,
            })
            .collect(),
    };
    ranking.sort();
    ranking
}

/// Among candidates composed of exactly the top `k` ranked corruptions,
/// the one whose average error is closest to `reference_avg`; ties go to
/// the lexicographically smallest severity vector.
pub fn select_benchmark(
    ranking: &ContributionRanking,
    candidates: &[CandidateDataset],
    reference_avg: f64,
    k: usize,
) -> Result<CandidateDataset> {
    if ranking.entries.len() < k {
        return Err(Error::Size {
            requested: k,
            available: ranking.entries.len(),
        });
    }
    let mut top = ranking.top(k);
    top.sort();
    candidates
        .iter()
        .filter(|c| {
            c.corruptions()
                .iter()
                .copied()
                .eq(top.iter().map(String::as_str))
        })
        .min_by(|a, b| {
            let da = (a.avg_error - reference_avg).abs();
            let db = (b.avg_error - reference_avg).abs();
            da.total_cmp(&db)
                .then_with(|| a.severity_vector().cmp(&b.severity_vector()))
        })
        .cloned()
        .ok_or(Error::Composition)
}

/// Settings for the full construction.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildConfig {
    pub reference_avg: f64,
    pub spread_target: f64,
    /// Relative half-width of the accepted spread band.
    pub spread_band: f64,
    pub tolerance: f64,
    pub n_candidates: usize,
    pub budget_factor: usize,
    /// Independent sampling runs whose rankings are averaged.
    pub repeats: usize,
    pub k: usize,
    pub seed: Seed,
}

impl BuildConfig {
    /// Reference average and spread taken from the reference error table.
    pub fn from_reference(reference: &ErrorTable, seed: Seed) -> Result<Self> {
        Ok(Self {
            reference_avg: reference.mean_error()?,
            spread_target: reference.mean_spread()?,
            spread_band: 0.5,
            tolerance: 1.0,
            n_candidates: 100_000,
            budget_factor: 100,
            repeats: 10,
            k: CANDIDATE_SIZE,
            seed,
        })
    }
}

/// Everything the construction produced.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildOutcome {
    pub selected: CandidateDataset,
    pub selected_distance: f64,
    pub ranking: ContributionRanking,
    pub groups: Vec<SeverityGroup>,
    /// Candidates sampled per run, plus the resampling pass if one ran.
    pub runs: Vec<CandidateSample>,
    /// Whether selection needed a pass restricted to the top `k`.
    pub resampled: bool,
}

/// Groups, candidates, contribution ranking, and top-`k` selection.
///
/// If no sampled candidate is made of exactly the top `k` corruptions, a
/// further pass samples candidates from those corruptions only.
pub fn build_benchmark(
    table: &ErrorTable,
    new_centers: &CenterTable,
    reference: &CenterTable,
    cfg: &BuildConfig,
) -> Result<BuildOutcome> {
    if cfg.repeats == 0 || cfg.n_candidates == 0 {
        return Err(Error::Domain(
            "repeats and n_candidates must be at least 1".into(),
        ));
    }
    let groups = form_severity_groups(table, cfg.spread_target, cfg.spread_band)?;
    let terms = member_terms(new_centers, reference)?;
    let mut runs = Vec::with_capacity(cfg.repeats);
    let mut rankings = Vec::with_capacity(cfg.repeats);
    for r in 0..cfg.repeats {
        let sampling = SamplingConfig {
            reference_avg: cfg.reference_avg,
            tolerance: cfg.tolerance,
            n_candidates: cfg.n_candidates,
            budget_factor: cfg.budget_factor,
            seed: cfg.seed.derive("run", r as u64),
        };
        let sample = sample_candidates(&groups, table, &sampling)?;
        rankings.push(rank_contributions(&sample.candidates, &terms)?);
        runs.push(sample);
    }
    let ranking = average_rankings(&rankings);
    let pooled: Vec<CandidateDataset> = runs
        .iter()
        .flat_map(|r| r.candidates.iter().cloned())
        .collect();
    let (selected, resampled) = match select_benchmark(&ranking, &pooled, cfg.reference_avg, cfg.k)
    {
        Ok(s) => (s, false),
        Err(Error::Composition) => {
            let top = ranking.top(cfg.k);
            let restricted: Vec<SeverityGroup> = groups
                .iter()
                .filter(|g| top.contains(&g.corruption))
                .cloned()
                .collect();
            let sampling = SamplingConfig {
                reference_avg: cfg.reference_avg,
                tolerance: cfg.tolerance,
                n_candidates: cfg.n_candidates,
                budget_factor: cfg.budget_factor,
                seed: cfg.seed.derive("resample", 0),
            };
            let sample = sample_candidates(&restricted, table, &sampling)?;
            let s = select_benchmark(&ranking, &sample.candidates, cfg.reference_avg, cfg.k)?;
            runs.push(sample);
            (s, true)
        }
        Err(e) => return Err(e),
    };
    let selected_distance = dataset_distance_from_terms(&selected, &terms)?;
    Ok(BuildOutcome {
        selected,
        selected_distance,
        ranking,
        groups,
        runs,
        resampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Errors rising by `step` per severity from `base`.
    fn linear_table(names: &[&str], base: f64, step: f64) -> ErrorTable {
        let mut t = ErrorTable::new(None);
        for (i, n) in names.iter().enumerate() {
            for s in 1..=10u8 {
                t.insert(n, s, base + i as f64 * 0.1 + step * f64::from(s))
                    .unwrap();
            }
        }
        t
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i:02}")).collect()
    }

    #[test]
    fn error_table_basics() {
        let mut t = ErrorTable::new(Some("baseline".into()));
        assert!(t.insert("a", 1, 101.0).is_err());
        assert!(t.insert("a", 1, -0.1).is_err());
        t.insert("a", 1, 10.0).unwrap();
        t.insert("a", 2, 30.0).unwrap();
        t.insert("b", 1, 20.0).unwrap();
        t.insert("b", 2, 20.0).unwrap();
        assert_eq!(t.mean_error().unwrap(), 20.0);
        assert_eq!(t.mean_spread().unwrap(), 10.0);
        assert!(matches!(t.get("c", 1), Err(Error::Coverage(_))));
        assert_eq!(t.corruptions(), vec!["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn uniform_step_accepts_all_centers() {
        let t = linear_table(&["x", "y"], 10.0, 2.0);
        let g = form_severity_groups(&t, 8.0, 1.0).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g[0].severities(), [1, 2, 3, 4, 5]);
        assert_eq!(g[5].severities(), [6, 7, 8, 9, 10]);
    }

    #[test]
    fn flat_table_gives_no_groups() {
        let t = linear_table(&["x"], 40.0, 0.0);
        assert!(form_severity_groups(&t, 5.0, 0.1).unwrap().is_empty());
    }

    #[test]
    fn incomplete_table_is_a_coverage_error() {
        let mut t = linear_table(&["x"], 10.0, 1.0);
        t.entries.remove(&("x".to_string(), 10));
        assert!(matches!(
            form_severity_groups(&t, 4.0, 0.5),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn spread_band_enumeration() {
        // Errors 0,1,2,4,8,16,... (capped) give spreads that grow with the
        // center; only centers whose spread is within ±50% of 12 pass.
        let mut t = ErrorTable::new(None);
        let errs = [0.0, 1.0, 2.0, 4.0, 8.0, 14.0, 20.0, 26.0, 32.0, 38.0];
        for (i, e) in errs.iter().enumerate() {
            t.insert("x", i as u8 + 1, *e).unwrap();
        }
        // spreads by center 3..8: 8, 13, 18, 22, 24, 24
        let got: Vec<u8> = form_severity_groups(&t, 12.0, 0.5)
            .unwrap()
            .iter()
            .map(|g| g.center)
            .collect();
        assert_eq!(got, vec![3, 4, 5]);
    }

    fn groups_all(t: &ErrorTable) -> Vec<SeverityGroup> {
        form_severity_groups(t, 1.0, f64::INFINITY).unwrap()
    }

    #[test]
    fn vacuous_tolerance_yields_requested_count() {
        let n = names(14);
        let t = linear_table(&n.iter().map(String::as_str).collect::<Vec<_>>(), 10.0, 3.0);
        let cfg = SamplingConfig {
            reference_avg: 50.0,
            tolerance: 100.0,
            n_candidates: 50,
            budget_factor: 100,
            seed: Seed(3),
        };
        let s = sample_candidates(&groups_all(&t), &t, &cfg).unwrap();
        assert_eq!(s.candidates.len(), 50);
        assert_eq!(s.attempts, 50);
        for c in &s.candidates {
            let names: BTreeSet<&str> = c.corruptions().into_iter().collect();
            assert_eq!(names.len(), 10);
        }
        assert_eq!(s, sample_candidates(&groups_all(&t), &t, &cfg).unwrap());
    }

    #[test]
    fn ten_corruptions_one_group_each() {
        let n = names(10);
        let t = linear_table(&n.iter().map(String::as_str).collect::<Vec<_>>(), 10.0, 3.0);
        let groups: Vec<SeverityGroup> = n
            .iter()
            .map(|c| SeverityGroup::new(c, 5).unwrap())
            .collect();
        let cfg = SamplingConfig {
            reference_avg: 25.0,
            tolerance: 100.0,
            n_candidates: 20,
            budget_factor: 10,
            seed: Seed(1),
        };
        let s = sample_candidates(&groups, &t, &cfg).unwrap();
        assert!(s.candidates.iter().all(|c| c == &s.candidates[0]));
    }

    #[test]
    fn infeasible_tolerance_reports_nearest() {
        let n = names(10);
        let t = linear_table(&n.iter().map(String::as_str).collect::<Vec<_>>(), 10.0, 1.0);
        let cfg = SamplingConfig {
            reference_avg: 90.0,
            tolerance: 1.0,
            n_candidates: 5,
            budget_factor: 2,
            seed: Seed(1),
        };
        match sample_candidates(&groups_all(&t), &t, &cfg) {
            Err(Error::Infeasible {
                nearest, target, ..
            }) => {
                assert_eq!(target, 90.0);
                // Highest achievable: every group centered at 8, mean of
                // severities 6..10 = 8, plus 10 and the per-corruption offset.
                assert!((nearest - (18.0 + 0.45)).abs() < 1e-9, "{nearest}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_corruptions() {
        let n = names(9);
        let t = linear_table(&n.iter().map(String::as_str).collect::<Vec<_>>(), 10.0, 1.0);
        let cfg = SamplingConfig {
            reference_avg: 15.0,
            tolerance: 100.0,
            n_candidates: 1,
            budget_factor: 1,
            seed: Seed(0),
        };
        assert!(matches!(
            sample_candidates(&groups_all(&t), &t, &cfg),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn dataset_distance_examples() {
        let fp = Fingerprint(5);
        let mut newc = CenterTable::new(fp);
        let mut refc = CenterTable::new(fp);
        refc.insert("r", 1, FeatureVector(vec![0.0, 0.0]));
        refc.insert("r", 2, FeatureVector(vec![10.0, 0.0]));
        let n = names(10);
        for (i, c) in n.iter().enumerate() {
            for s in 1..=10 {
                newc.insert(
                    c,
                    s,
                    FeatureVector(vec![if i == 0 { 3.0 } else { 0.0 }, 0.0]),
                );
            }
        }
        let t = linear_table(&n.iter().map(String::as_str).collect::<Vec<_>>(), 10.0, 1.0);
        let groups = n
            .iter()
            .map(|c| SeverityGroup::new(c, 3).unwrap())
            .collect();
        let cand = CandidateDataset::new(groups, &t).unwrap();
        // one corruption of ten sits at distance 3, the rest at 0
        assert!((dataset_distance(&cand, &newc, &refc).unwrap() - 0.3).abs() < 1e-12);
        let terms = member_terms(&newc, &refc).unwrap();
        assert_eq!(
            dataset_distance_from_terms(&cand, &terms).unwrap(),
            dataset_distance(&cand, &newc, &refc).unwrap()
        );
        refc.fingerprint = Fingerprint(6);
        assert!(matches!(
            dataset_distance(&cand, &newc, &refc),
            Err(Error::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn equal_terms_rank_equal() {
        let n = names(10);
        let t = linear_table(&n.iter().map(String::as_str).collect::<Vec<_>>(), 10.0, 1.0);
        let cand = CandidateDataset::new(
            n.iter()
                .map(|c| SeverityGroup::new(c, 4).unwrap())
                .collect(),
            &t,
        )
        .unwrap();
        let mut terms = BTreeMap::new();
        for c in &n {
            for s in 1..=10 {
                terms.insert((c.clone(), s), 2.5);
            }
        }
        let r = rank_contributions(&[cand], &terms).unwrap();
        assert!(r
            .entries
            .iter()
            .all(|e| e.mean == 2.5 && e.normalized == 0.0));
        assert_eq!(
            r.top(3),
            vec!["c00".to_string(), "c01".to_string(), "c02".to_string()]
        );
    }

    #[test]
    fn single_candidate_contributions_are_its_terms() {
        let n = names(10);
        let t = linear_table(&n.iter().map(String::as_str).collect::<Vec<_>>(), 10.0, 1.0);
        let cand = CandidateDataset::new(
            n.iter()
                .map(|c| SeverityGroup::new(c, 3).unwrap())
                .collect(),
            &t,
        )
        .unwrap();
        let mut terms = BTreeMap::new();
        for (i, c) in n.iter().enumerate() {
            for s in 1..=10 {
                terms.insert((c.clone(), s), i as f64);
            }
        }
        let r = rank_contributions(&[cand], &terms).unwrap();
        // population: each value 0..9 five times; mean 4.5, std sqrt(8.25)
        let std = math::sqrt(8.25);
        for e in &r.entries {
            let i: f64 = e.corruption[1..].parse().unwrap();
            assert_eq!(e.mean, i);
            assert!((e.normalized - (i - 4.5) / std).abs() < 1e-12);
        }
        assert_eq!(r.entries[0].corruption, "c09");
    }

    #[test]
    fn select_prefers_closest_error() {
        let mut t = ErrorTable::new(None);
        let n = names(10);
        for c in &n {
            for s in 1..=10u8 {
                t.insert(c, s, 50.0 + f64::from(s)).unwrap();
            }
        }
        let mk = |center: u8| {
            CandidateDataset::new(
                n.iter()
                    .map(|c| SeverityGroup::new(c, center).unwrap())
                    .collect(),
                &t,
            )
            .unwrap()
        };
        let mut a = mk(3);
        let mut b = mk(4);
        a.avg_error = 57.5;
        b.avg_error = 58.9;
        let ranking = ContributionRanking {
            entries: n
                .iter()
                .map(|c| Contribution {
                    corruption: c.clone(),
                    mean: 1.0,
                    normalized: 0.0,
                    members: 5,
                })
                .collect(),
        };
        assert_eq!(
            select_benchmark(&ranking, &[b.clone(), a.clone()], 58.1, 10).unwrap(),
            a
        );
        // exact tie in |Δ|: lower severity vector wins
        b.avg_error = 58.7;
        let sel = select_benchmark(&ranking, &[b.clone(), a.clone()], 58.1, 10).unwrap();
        assert_eq!(sel.severity_vector(), vec![3; 10]);
        assert!(matches!(
            select_benchmark(&ranking, &[], 58.1, 10),
            Err(Error::Composition)
        ));
    }
}
