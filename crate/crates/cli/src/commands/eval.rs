use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use voxblend_core::featstore::read_features;
use voxblend_core::metrics::{
    compute_eer, diag_dominance, estimate_f0, gain_vd, pitch_correlation, similarity_matrix, F0Params, MetricReport,
    VPC_SUBSET_WEIGHTS,
};
use voxblend_core::{Error, FeatureMatrix64, PitchTrack, ScoreSet};

use super::{feature_files, stem};

/// Frame rate assumed for stored F0 tracks.
pub const TRACK_FRAME_HZ: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Metric {
    /// Equal error rate in percent from `genuine|impostor<TAB>score` files.
    Eer,
    /// Mean per-utterance F0 correlation between `orig/` and `anon/` tracks.
    Pitch,
    /// Gain of voice distinctiveness in dB from `orig/` and `anon/` embeddings.
    Gvd,
    /// Precomputed `subset<TAB>value` lines, aggregated only.
    Values,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Eer => "eer",
            Metric::Pitch => "pitch",
            Metric::Gvd => "gvd",
            Metric::Values => "values",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub metric: Metric,
    /// `[name=]path` per subset; the name defaults to the file stem.
    pub inputs: Vec<String>,
    /// `subset<TAB>weight` lines. Without it, six subsets get the usual
    /// challenge weights in input order and a single subset gets 1.
    pub weights_file: Option<PathBuf>,
    /// Where to write the `key<TAB>value` report.
    pub out: Option<PathBuf>,
    /// Pitch inputs are raw waveforms at this sample rate rather than F0 tracks.
    pub sample_rate: Option<u32>,
}

/// `(line number, fields)` of every non-blank, non-comment line.
fn tab_lines(path: &Path) -> anyhow::Result<Vec<(usize, Vec<String>)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').map(|f| f.trim().to_string()).collect()))
        .collect())
}

fn malformed(path: &Path, line: usize, what: &str) -> anyhow::Error {
    anyhow::Error::new(Error::Manifest {
        line,
        reason: what.to_string(),
    })
    .context(format!("malformed line in {}", path.display()))
}

fn number(path: &Path, line: usize, field: &str) -> anyhow::Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| malformed(path, line, &format!("{field:?} is not a finite number")))
}

fn two_columns(path: &Path) -> anyhow::Result<Vec<(usize, String, f64)>> {
    tab_lines(path)?
        .into_iter()
        .map(|(line, fields)| match fields.as_slice() {
            [key, value] => Ok((line, key.clone(), number(path, line, value)?)),
            _ => Err(malformed(path, line, "expected two tab-separated fields")),
        })
        .collect()
}

/// Read a `genuine|impostor<TAB>score` file.
pub fn read_scores(path: &Path) -> anyhow::Result<ScoreSet> {
    let mut set = ScoreSet::default();
    for (line, label, score) in two_columns(path)? {
        match label.as_str() {
            "genuine" | "target" => set.genuine.push(score),
            "impostor" | "nontarget" => set.impostor.push(score),
            other => return Err(malformed(path, line, &format!("unknown trial label {other:?}"))),
        }
    }
    Ok(set)
}

fn split_input(input: &str) -> (String, PathBuf) {
    match input.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(input);
            (stem(&path), path)
        }
    }
}

fn pitch_subset(dir: &Path, sample_rate: Option<u32>) -> anyhow::Result<f64> {
    let track = |path: &Path| -> anyhow::Result<PitchTrack> {
        let m: FeatureMatrix64 = read_features(path)?;
        if m.dims() != 1 {
            bail!("{} has {} dims, expected a 1-dim track", path.display(), m.dims());
        }
        Ok(match sample_rate {
            Some(sr) => estimate_f0(m.as_slice(), sr, &F0Params::default())?,
            None => PitchTrack {
                frame_hz: TRACK_FRAME_HZ,
                values: m.into_vec(),
            },
        })
    };
    let mut values = Vec::new();
    for orig in feature_files(&dir.join("orig"))? {
        let anon = dir.join("anon").join(orig.file_name().expect("listed files have names"));
        if !anon.is_file() {
            log::warn!("{} has no anonymized counterpart, skipped", orig.display());
            continue;
        }
        match pitch_correlation(&track(&orig)?, &track(&anon)?) {
            Ok(rho) => values.push(rho),
            Err(e @ (Error::InsufficientVoicedOverlap { .. } | Error::DegenerateSequence(_))) => {
                log::warn!("{}: {e}, skipped", orig.display());
            }
            Err(e) => return Err(e.into()),
        }
    }
    if values.is_empty() {
        bail!("no utterance pair in {} gave a pitch correlation", dir.display());
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn embeddings(dir: &Path) -> anyhow::Result<BTreeMap<String, FeatureMatrix64>> {
    feature_files(dir)?
        .into_iter()
        .map(|p| Ok((stem(&p), read_features(&p)?)))
        .collect()
}

fn gvd_subset(dir: &Path) -> anyhow::Result<f64> {
    let orig = embeddings(&dir.join("orig"))?;
    let anon = embeddings(&dir.join("anon"))?;
    let oo = similarity_matrix(&orig, &orig)?;
    let aa = similarity_matrix(&anon, &anon)?;
    log::debug!(
        "{}: D_oo = {}, D_aa = {}",
        dir.display(),
        diag_dominance(&oo)?,
        diag_dominance(&aa)?
    );
    Ok(gain_vd(&aa, &oo)?)
}

fn subset_values(args: &EvalArgs) -> anyhow::Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for input in &args.inputs {
        let (name, path) = split_input(input);
        let context = || format!("subset {name:?} ({})", path.display());
        let value = match args.metric {
            Metric::Values => {
                out.extend(two_columns(&path)?.into_iter().map(|(_, k, v)| (k, v)));
                continue;
            }
            Metric::Eer => 100.0 * compute_eer(&read_scores(&path)?).with_context(context)?.eer,
            Metric::Pitch => pitch_subset(&path, args.sample_rate).with_context(context)?,
            Metric::Gvd => gvd_subset(&path).with_context(context)?,
        };
        out.push((name, value));
    }
    Ok(out)
}

fn weights_for(args: &EvalArgs, names: &[String]) -> anyhow::Result<Vec<f64>> {
    let Some(path) = &args.weights_file else {
        return match names.len() {
            1 => Ok(vec![1.0]),
            6 => Ok(VPC_SUBSET_WEIGHTS.to_vec()),
            n => Err(crate::usage(format!(
                "{n} subsets need a --weights-file (defaults exist for 1 or 6)"
            ))),
        };
    };
    let mut table = BTreeMap::new();
    for (line, name, weight) in two_columns(path)? {
        if table.insert(name.clone(), weight).is_some() {
            return Err(malformed(path, line, &format!("subset {name:?} listed twice")));
        }
    }
    let weights = names
        .iter()
        .map(|n| {
            table
                .remove(n)
                .ok_or_else(|| crate::usage(format!("{} has no weight for subset {n:?}", path.display())))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if let Some(extra) = table.keys().next() {
        return Err(crate::usage(format!("{} weights unknown subset {extra:?}", path.display())));
    }
    Ok(weights)
}

/// Score each subset, aggregate with subset weights, and optionally write
/// the machine-readable report.
pub fn cmd_eval(args: &EvalArgs) -> anyhow::Result<MetricReport> {
    if args.inputs.is_empty() {
        return Err(crate::usage("eval needs at least one input"));
    }
    let values = subset_values(args)?;
    if values.is_empty() {
        bail!("inputs hold no subset values");
    }
    let names: Vec<String> = values.iter().map(|v| v.0.clone()).collect();
    let weights = weights_for(args, &names)?;
    let subsets = values
        .into_iter()
        .zip(weights)
        .map(|((name, value), weight)| (name, value, weight))
        .collect();
    let report = MetricReport::from_subsets(args.metric.name(), subsets)?;
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_tsv()).map_err(|e| anyhow!("writing {}: {e}", out.display()))?;
    }
    Ok(report)
}
