//! The benchmark construction driven from files.

use std::path::Path;

use cbar_core::benchmark::{build_benchmark, BuildConfig, BuildOutcome, CenterTable, ErrorTable};
use cbar_core::Registry;

use crate::cbf::FeatureFile;
use crate::error::{CliError, Result};
use crate::measure::split;
use crate::render::{render_dataset, ManifestRecord, RenderSpec};
use crate::tables::{num, TableWriter};

/// Centers of the corruptions listed in `table`, from `center/` rows.
pub fn centers_for(file: &FeatureFile, table: &ErrorTable) -> Result<CenterTable> {
    let names = table.corruptions();
    let mut out = CenterTable::new(file.fingerprint);
    for (label, v) in split(file).centers {
        let Some((name, sev)) = label.rsplit_once('/') else {
            continue;
        };
        if !names.iter().any(|n| n == name) {
            continue;
        }
        let sev: u8 = sev
            .parse()
            .map_err(|_| CliError::Data(format!("bad severity in center `{label}`")))?;
        out.insert(name, sev, v);
    }
    if out.centers.is_empty() {
        return Err(CliError::Data(
            "feature files hold no centers for the error table's corruptions".into(),
        ));
    }
    Ok(out)
}

pub fn run_build(
    features: &FeatureFile,
    new_errors: &ErrorTable,
    reference_errors: &ErrorTable,
    cfg: &BuildConfig,
) -> Result<BuildOutcome> {
    let new_centers = centers_for(features, new_errors)?;
    let reference = centers_for(features, reference_errors)?;
    Ok(build_benchmark(new_errors, &new_centers, &reference, cfg)?)
}

/// Writes `benchmark.csv` (an error table of the selected members) and
/// `ranking.csv` into `out`.
pub fn write_outcome(out: &Path, outcome: &BuildOutcome, errors: &ErrorTable) -> Result<()> {
    let mut bench = TableWriter::create(
        Some(&out.join("benchmark.csv")),
        &["corruption", "severity", "error"],
    )?;
    for (c, s) in outcome.selected.members() {
        bench.row([c.to_string(), s.to_string(), num(errors.get(c, s)?)])?;
    }
    bench.finish()?;
    let mut rank = TableWriter::create(
        Some(&out.join("ranking.csv")),
        &[
            "rank",
            "corruption",
            "mean_distance",
            "normalized",
            "members",
            "selected",
        ],
    )?;
    let chosen = outcome.selected.corruptions();
    for (i, c) in outcome.ranking.entries.iter().enumerate() {
        rank.row([
            (i + 1).to_string(),
            c.corruption.clone(),
            num(c.mean),
            num(c.normalized),
            c.members.to_string(),
            chosen.contains(&c.corruption.as_str()).to_string(),
        ])?;
    }
    rank.finish()
}

pub fn render_selected(
    dataset: &Path,
    out: &Path,
    outcome: &BuildOutcome,
    seed: cbar_core::Seed,
    registry: &Registry,
) -> Result<Vec<ManifestRecord>> {
    let specs: Vec<RenderSpec> = outcome
        .selected
        .members()
        .map(|(c, s)| RenderSpec::Corruption {
            name: c.to_string(),
            severity: s,
        })
        .collect();
    render_dataset(dataset, &specs, out, seed, registry)
}
