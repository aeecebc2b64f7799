//! The `cacer` command line.
//!
//! Exit status: 0 on success, 1 when annotations fail validation or a score
//! falls below `--min-f1`, 2 on unreadable input or bad usage. Commands that
//! write files also write `manifest.json` into their output directory.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::score::{MatchOptions, ScoreError, Strategy};
use crate::standoff::StandoffError;
use crate::synth::GenError;

mod codec;
mod corpus;
mod eval;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Standoff(#[from] StandoffError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Score(ScoreError),
    /// Annotations or scores failed a check; not an I/O problem.
    #[error("{0}")]
    Failed(String),
}

impl From<ScoreError> for CliError {
    fn from(e: ScoreError) -> Self {
        match e {
            ScoreError::Invalid { .. } => CliError::Failed(e.to_string()),
            other => CliError::Score(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Parser, Debug)]
#[command(name = "cacer", version, about = "Clinical event/relation annotation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Per-sentence event extraction.
    Events,
    /// Per-window relation extraction over marked triggers.
    Marker,
    /// Per-pair multiple-choice relation classification.
    Qa,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct MatchArgs {
    /// Use maximum bipartite matching instead of greedy.
    #[arg(long)]
    optimal: bool,
    /// Require identical offsets instead of overlap.
    #[arg(long)]
    exact: bool,
    /// Refuse to score notes with schema errors.
    #[arg(long)]
    strict: bool,
}

impl MatchArgs {
    fn options(&self) -> crate::score::ScoreOptions {
        crate::score::ScoreOptions {
            matching: MatchOptions {
                strategy: if self.optimal { Strategy::Optimal } else { Strategy::Greedy },
                exact_spans: self.exact,
            },
            strict: self.strict,
        }
    }
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct WindowArgs {
    #[arg(long, default_value_t = 5)]
    max_sent: usize,
    #[arg(long, default_value_t = 400)]
    max_tokens: usize,
}

impl WindowArgs {
    fn limits(&self) -> crate::window::WindowLimits {
        crate::window::WindowLimits {
            max_sentences: self.max_sent,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a corpus against the annotation schema.
    Validate {
        corpus: PathBuf,
        /// Fail on warnings too.
        #[arg(long)]
        strict: bool,
        /// Directory for violations.jsonl and the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against gold annotations.
    Score {
        gold: PathBuf,
        pred: PathBuf,
        /// Output directory for report.json, report.txt and per_note.tsv.
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        matching: MatchArgs,
        /// Exit 1 if the overall micro F1 is below this value.
        #[arg(long)]
        min_f1: Option<f64>,
    },
    /// Agreement between two annotators' corpora.
    Iaa {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// Paired bootstrap test that system A outperforms system B.
    Sigtest {
        /// Per-note scores of A: `doc_id<TAB>score` lines, or a per_note.tsv.
        scores_a: PathBuf,
        scores_b: PathBuf,
        /// Column to read when the files have a header row.
        #[arg(long, default_value = "overall")]
        column: String,
        #[arg(long, default_value_t = crate::score::DEFAULT_ITERATIONS)]
        iterations: usize,
        #[arg(long, env = "CACER_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate candidate pairs and relation window coverage.
    Windows {
        corpus: PathBuf,
        #[command(flatten)]
        limits: WindowArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render model prompts and gold targets as JSONL.
    Encode {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[command(flatten)]
        limits: WindowArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn model outputs back into standoff predictions.
    Decode {
        corpus: PathBuf,
        /// JSONL records as written by `encode`, with the model's text in `field`.
        #[arg(long)]
        outputs: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, default_value = "output")]
        field: String,
        #[command(flatten)]
        limits: WindowArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic schema-valid corpus.
    Gen {
        /// TOML generator settings; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long, env = "CACER_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        n_notes: Option<usize>,
    },
}

/// Provenance of one run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// SHA-256 of the effective settings.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix_ms: u128,
    pub elapsed_ms: f64,
}

pub(crate) struct Run {
    command: &'static str,
    inputs: Vec<String>,
    outputs: Vec<String>,
    config: String,
    seed: Option<u64>,
    started: SystemTime,
    clock: Instant,
}

impl Run {
    fn new(command: &'static str, inputs: &[&Path], config: &impl Serialize) -> Self {
        Run {
            command,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: Vec::new(),
            config: serde_json::to_string(config).expect("settings serialize"),
            seed: None,
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub(crate) fn write(&mut self, path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        fs::write(path, contents).map_err(io_err(path))?;
        self.output(path);
        Ok(())
    }

    pub(crate) fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    fn finish(self, dir: &Path) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            inputs: self.inputs,
            outputs: self.outputs,
            config_digest: hex::encode(Sha256::digest(self.config.as_bytes())),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: self.started.duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0),
            elapsed_ms: self.clock.elapsed().as_secs_f64() * 1000.0,
        };
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, json + "\n").map_err(io_err(&path))
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Parses `args` (program name first), runs the command, and returns the
/// exit status. Results go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let out = io::stdout();
    let err = io::stderr();
    run(std::env::args_os(), &mut out.lock(), &mut err.lock())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Validate {
            corpus,
            strict,
            out: dir,
        } => {
            let mut run = Run::new("validate", &[&corpus], &strict);
            if let Some(d) = &dir {
                create_dir(d)?;
            }
            let code = corpus::validate(&corpus, strict, dir.as_deref(), &mut run, out)?;
            if let Some(d) = &dir {
                run.finish(d)?;
            }
            Ok(code)
        }
        Command::Score {
            gold,
            pred,
            report,
            matching,
            min_f1,
        } => {
            create_dir(&report)?;
            let mut run = Run::new("score", &[&gold, &pred], &(&matching, min_f1));
            let f1 = eval::score(&gold, &pred, matching.options(), &report, &mut run, out)?;
            run.finish(&report)?;
            match min_f1 {
                Some(min) if f1 < min => Err(CliError::Failed(format!(
                    "overall micro F1 {f1:.4} is below --min-f1 {min}"
                ))),
                _ => Ok(0),
            }
        }
        Command::Iaa { a, b, report, matching } => {
            create_dir(&report)?;
            let mut run = Run::new("iaa", &[&a, &b], &matching);
            eval::score(&a, &b, matching.options(), &report, &mut run, out)?;
            run.finish(&report)?;
            Ok(0)
        }
        Command::Sigtest {
            scores_a,
            scores_b,
            column,
            iterations,
            seed,
            out: dir,
        } => {
            let mut run = Run::new("sigtest", &[&scores_a, &scores_b], &(&column, iterations));
            run.seed = Some(seed);
            if let Some(d) = &dir {
                create_dir(d)?;
            }
            eval::sigtest(&scores_a, &scores_b, &column, iterations, seed, dir.as_deref(), &mut run, out)?;
            if let Some(d) = &dir {
                run.finish(d)?;
            }
            Ok(0)
        }
        Command::Windows {
            corpus,
            limits,
            out: dir,
        } => {
            create_dir(&dir)?;
            let mut run = Run::new("windows", &[&corpus], &limits);
            corpus::windows(&corpus, limits.limits(), &dir, &mut run, out)?;
            run.finish(&dir)?;
            Ok(0)
        }
        Command::Encode {
            corpus,
            format,
            limits,
            out: dir,
        } => {
            create_dir(&dir)?;
            let mut run = Run::new("encode", &[&corpus], &(format, &limits));
            codec::encode(&corpus, format, limits.limits(), &dir, &mut run, out)?;
            run.finish(&dir)?;
            Ok(0)
        }
        Command::Decode {
            corpus,
            outputs,
            format,
            field,
            limits,
            out: dir,
        } => {
            create_dir(&dir)?;
            let mut run = Run::new("decode", &[&corpus, &outputs], &(format, &field, &limits));
            codec::decode(&corpus, &outputs, format, &field, limits.limits(), &dir, &mut run, out)?;
            run.finish(&dir)?;
            Ok(0)
        }
        Command::Gen {
            config,
            out: dir,
            seed,
            n_notes,
        } => {
            let mut cfg = match &config {
                Some(p) => {
                    let s = fs::read_to_string(p).map_err(io_err(p))?;
                    toml::from_str(&s).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
                }
                None => crate::synth::GenConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = n_notes {
                cfg.n_notes = n;
            }
            create_dir(&dir)?;
            let inputs: Vec<&Path> = config.iter().map(PathBuf::as_path).collect();
            let mut run = Run::new("gen", &inputs, &cfg);
            run.seed = Some(cfg.seed);
            corpus::generate(&cfg, &dir, &mut run, out)?;
            run.finish(&dir)?;
            Ok(0)
        }
    }
}
