use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use voxblend::{
    cmd_anonymize, cmd_build_pool, cmd_eval, cmd_pca, cmd_prematch, exit_code_for, AnonymizeArgs, BuildPoolArgs,
    EvalArgs, Metric, Mode, Outcome, PcaArgs, PrematchArgs, RunConfig, Usage,
};
use voxblend_core::BlendConfig;

/// Speaker anonymization by blending kNN-matched reference speakers.
///
/// Verbosity follows the SALT_LOG variable (error, warn, info, debug, trace).
/// Exit status: 0 success, 1 partial or runtime failure, 2 invalid invocation.
#[derive(Parser)]
#[command(name = "voxblend", version)]
struct Cli {
    /// TOML file whose keys mirror the long flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a reference speaker pool from a manifest into one archive.
    BuildPool(BuildPoolFlags),
    /// Anonymize a directory of feature files.
    Anonymize(AnonymizeFlags),
    /// kNN-match training utterances against their own speaker's references.
    Prematch(PrematchFlags),
    /// Compute a metric per subset and its weighted average.
    Eval(EvalFlags),
    /// Project speaker embeddings to 2-D plot data.
    Pca(PcaFlags),
}

#[derive(Args)]
struct BuildPoolFlags {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_speakers: Option<usize>,
    #[arg(long)]
    n_utts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AnonymizeFlags {
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Directory of source `.saltfeat` files.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Neighbours per matched frame [default: 4].
    #[arg(long)]
    k: Option<usize>,
    /// Reference speakers per pseudo speaker [default: 4].
    #[arg(long)]
    m: Option<usize>,
    /// Weight extrapolation scale s [default: 0].
    #[arg(long)]
    scale: Option<f64>,
    /// Share p of source features kept [default: 0].
    #[arg(long)]
    preserve: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Pseudo speaker per utterance or per source speaker [default: utterance].
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// `utterance speaker` lines overriding the file-name convention.
    #[arg(long)]
    utt2spk: Option<PathBuf>,
}

#[derive(Args)]
struct PrematchFlags {
    /// Training manifest: `speaker<TAB>features[<TAB>audio]`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Pool archive with one reference set per training speaker.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvalFlags {
    #[arg(long, value_enum)]
    metric: Option<Metric>,
    /// `subset<TAB>weight` lines.
    #[arg(long)]
    weights_file: Option<PathBuf>,
    /// Also write the `key<TAB>value` report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat pitch inputs as waveforms sampled at this rate.
    #[arg(long)]
    sample_rate: Option<u32>,
    /// One `[name=]path` per subset.
    #[arg(required = true)]
    inputs: Vec<String>,
}

#[derive(Args)]
struct PcaFlags {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Embedding files or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn workers(n: Option<usize>) -> usize {
    n.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::BuildPool(f) => {
            let c = RunConfig {
                manifest: f.manifest,
                out: f.out,
                n_speakers: f.n_speakers,
                n_utts: f.n_utts,
                seed: f.seed,
                ..Default::default()
            }
            .or(&file);
            cmd_build_pool(&BuildPoolArgs {
                manifest: RunConfig::require_path(&c.manifest, "manifest")?,
                out: RunConfig::require_path(&c.out, "out")?,
                n_speakers: c.n_speakers,
                n_utts: c.n_utts,
                seed: c.seed,
            })
        }
        Command::Anonymize(f) => {
            let c = RunConfig {
                pool: f.pool,
                input: f.input,
                out: f.out,
                k: f.k,
                m: f.m,
                scale: f.scale,
                preserve: f.preserve,
                seed: f.seed,
                workers: f.workers,
                mode: f.mode,
                utt2spk: f.utt2spk,
                ..Default::default()
            }
            .or(&file);
            let d = BlendConfig::default();
            cmd_anonymize(&AnonymizeArgs {
                input: RunConfig::require_path(&c.input, "input")?,
                pool: RunConfig::require_path(&c.pool, "pool")?,
                out: RunConfig::require_path(&c.out, "out")?,
                blend: BlendConfig {
                    m: c.m.unwrap_or(d.m),
                    k: c.k.unwrap_or(d.k),
                    scale: c.scale.unwrap_or(d.scale),
                    preserve: c.preserve.unwrap_or(d.preserve),
                    seed: c.seed.unwrap_or(d.seed),
                },
                workers: workers(c.workers),
                mode: c.mode.unwrap_or_default(),
                utt2spk: c.utt2spk,
            })
        }
        Command::Prematch(f) => {
            let c = RunConfig {
                manifest: f.manifest,
                pool: f.pool,
                k: f.k,
                out: f.out,
                workers: f.workers,
                ..Default::default()
            }
            .or(&file);
            cmd_prematch(&PrematchArgs {
                manifest: RunConfig::require_path(&c.manifest, "manifest")?,
                pool: RunConfig::require_path(&c.pool, "pool")?,
                k: c.k.unwrap_or(BlendConfig::default().k),
                out: RunConfig::require_path(&c.out, "out")?,
                workers: workers(c.workers),
            })
        }
        Command::Eval(f) => {
            let c = RunConfig {
                weights_file: f.weights_file,
                out: f.out,
                ..Default::default()
            }
            .or(&file);
            let metric = match (f.metric, &c.metric) {
                (Some(m), _) => m,
                (None, Some(name)) => clap::ValueEnum::from_str(name, false)
                    .map_err(|_| Usage(format!("unknown metric {name:?} in config")))?,
                (None, None) => return Err(Usage("--metric is required".into()).into()),
            };
            let report = cmd_eval(&EvalArgs {
                metric,
                inputs: f.inputs,
                weights_file: c.weights_file,
                out: c.out,
                sample_rate: f.sample_rate,
            })?;
            print!("{}", report.to_text());
            Ok(Outcome::Complete)
        }
        Command::Pca(f) => {
            let c = RunConfig {
                out: f.out,
                ..Default::default()
            }
            .or(&file);
            let (outcome, _) = cmd_pca(&PcaArgs {
                inputs: f.inputs,
                out: RunConfig::require_path(&c.out, "out")?,
            })?;
            Ok(outcome)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SALT_LOG", "info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => {
            if let Outcome::Partial { failed } = outcome {
                log::error!("{failed} item(s) failed");
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
