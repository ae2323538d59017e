//! Argument parsing and dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permwalk::experiments::Scenario;
use permwalk::inference::DEFAULT_ENUMERATION_LIMIT;
use permwalk::{Comparison, Side};

use crate::commands::*;
use crate::document::*;
use crate::error::{CliError, Result};

/// Environment variable that, when set, overrides `--threads`.
pub const THREADS_ENV: &str = "PERMWALK_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "permwalk",
    version,
    about = "Permutation tests by random transposition walks",
    after_help = "Exit codes: 0 success, 2 input error, 3 computation error, 4 output error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-sample t-test at every feature, with optional max-statistic correction.
    Ttest(TtestArgs),
    /// Twin correlation averaged over random pair flips, per feature.
    Twin(TwinArgs),
    /// Heritability index from MZ and DZ twin results.
    Heritability(HeritabilityArgs),
    /// Walk-based vs naive p-value convergence at equal wall time.
    Simulate(SimulateArgs),
    /// Mixing curve: mean share of subjects moved across groups after each walk.
    Mixing(MixingArgs),
    /// Statistic evaluations per second, walk-based vs naive.
    Bench(BenchArgs),
    /// Exact p-values by enumerating every group assignment.
    Enumerate(EnumerateArgs),
    /// Re-run the command recorded in a result document.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Greater,
    Less,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Greater => Side::Greater,
            SideArg::Less => Side::Less,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionArg {
    None,
    Maxstat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComparisonArg {
    /// Count permuted statistics strictly beyond the observed one.
    Strict,
    /// Count ties with the observed statistic as well.
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    /// m = n = 10
    Small,
    /// m = n = 100
    Large,
}

/// Accepts plain integers and exact scientific notation such as `5e5`.
fn count(s: &str) -> std::result::Result<u64, String> {
    let s = s.replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= 9.007_199_254_740_992e15 => Ok(v as u64),
        _ => Err(format!("'{s}' is not a non-negative integer")),
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Add wall time and thread count to the JSON document.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Number of random walks (accepts forms like 5e5).
    #[arg(long, value_parser = count, default_value = "500000")]
    pub walks: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Walks discarded before counting.
    #[arg(long, value_parser = count, default_value = "0")]
    pub burnin: u64,
    /// Checkpoint spacing for running summaries.
    #[arg(long, value_parser = count, default_value = "100")]
    pub report_every: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

impl WalkArgs {
    fn config(&self) -> WalkConfig {
        WalkConfig {
            walks: self.walks,
            seed: self.seed,
            burnin: self.burnin,
            report_every: self.report_every,
        }
    }
}

#[derive(Debug, Args)]
pub struct TtestArgs {
    /// Feature-by-subject CSV matrix with a header row of subject ids.
    #[arg(long)]
    pub data: String,
    /// Two-column CSV: subject id, group (x or y).
    #[arg(long)]
    pub groups: String,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long, value_enum, default_value_t = SideArg::Greater)]
    pub side: SideArg,
    #[arg(long, value_enum, default_value_t = CorrectionArg::None)]
    pub correction: CorrectionArg,
    /// Family-wise level for the corrected thresholds.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TwinArgs {
    #[arg(long)]
    pub data: String,
    /// Two-column CSV of twin pairs: id A, id B.
    #[arg(long)]
    pub pairs: String,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct HeritabilityArgs {
    /// JSON document from `twin` on monozygotic pairs.
    #[arg(long)]
    pub mz: String,
    /// JSON document from `twin` on dizygotic pairs.
    #[arg(long)]
    pub dz: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long, value_parser = count, default_value = "100")]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Naive permutations per replicate [default: 1e4 small, 1e5 large].
    #[arg(long, value_parser = count)]
    pub naive_perms: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub checkpoints: usize,
    /// Walks per naive permutation at equal wall time. Measured when
    /// omitted; give it to make the curves fully deterministic.
    #[arg(long)]
    pub speedup: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MixingArgs {
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, value_parser = count, default_value = "2000")]
    pub walks: u64,
    #[arg(long, value_parser = count, default_value = "1000")]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, value_parser = count, default_value = "1000000")]
    pub walks: u64,
    #[arg(long, value_parser = count, default_value = "20000")]
    pub naive_perms: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub data: String,
    #[arg(long)]
    pub groups: String,
    #[arg(long, value_enum, default_value_t = SideArg::Greater)]
    pub side: SideArg,
    #[arg(long, value_enum, default_value_t = ComparisonArg::Strict)]
    pub comparison: ComparisonArg,
    /// Refuse to enumerate more assignments than this per feature.
    #[arg(long, value_parser = count, default_value_t = DEFAULT_ENUMERATION_LIMIT as u64)]
    pub limit: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Result document to reproduce.
    pub document: String,
    /// Fail with a computation error unless the new result is identical.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub output: Output,
}

/// `PERMWALK_THREADS` wins over the flag when set.
pub fn resolve_threads(flag: usize) -> Result<usize> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("{THREADS_ENV}='{v}' is not a positive integer")))?,
        Err(_) => flag,
    };
    if n == 0 {
        return Err(CliError::Input("thread count must be at least 1".into()));
    }
    Ok(n)
}

fn emit(doc: &ResultDocument, output: &Output) -> Result<()> {
    let write = |w: &mut dyn Write| -> Result<()> {
        match output.format {
            Format::Json => w
                .write_all(doc.to_json().as_bytes())
                .map_err(|e| CliError::Output(e.to_string())),
            Format::Csv => doc.write_csv(&mut *w),
        }?;
        w.flush().map_err(|e| CliError::Output(e.to_string()))
    };
    match &output.out {
        Some(path) if path != "-" => {
            let file = File::create(path).map_err(|e| CliError::Output(format!("{path}: {e}")))?;
            write(&mut BufWriter::new(file))
        }
        _ => write(&mut std::io::stdout().lock()),
    }
}

fn finish(run: Run, output: &Output, threads: usize, start: Instant) -> Result<()> {
    let mut doc = ResultDocument::new(run);
    if output.timing {
        doc.runtime = Some(Runtime {
            seconds: start.elapsed().as_secs_f64(),
            threads,
        });
    }
    emit(&doc, output)
}

pub fn execute(cli: Cli) -> Result<()> {
    let start = Instant::now();
    match cli.command {
        Command::Ttest(a) => {
            let threads = resolve_threads(a.walk.threads)?;
            let (_, data) = read_input(&a.data, None)?;
            let (_, groups) = read_input(&a.groups, None)?;
            let config = TtestConfig {
                data,
                groups,
                walk: a.walk.config(),
                side: a.side.into(),
                correction: match a.correction {
                    CorrectionArg::None => Correction::None,
                    CorrectionArg::Maxstat => Correction::Maxstat,
                },
                alpha: a.alpha,
            };
            let result = run_ttest(&config, threads)?;
            finish(Run::Ttest { config, result }, &a.output, threads, start)
        }
        Command::Twin(a) => {
            let threads = resolve_threads(a.walk.threads)?;
            let (_, data) = read_input(&a.data, None)?;
            let (_, pairs) = read_input(&a.pairs, None)?;
            let config = TwinConfig {
                data,
                pairs,
                walk: a.walk.config(),
            };
            let result = run_twin(&config, threads)?;
            finish(Run::Twin { config, result }, &a.output, threads, start)
        }
        Command::Heritability(a) => {
            let (_, mz) = read_input(&a.mz, None)?;
            let (_, dz) = read_input(&a.dz, None)?;
            let config = HeritabilityConfig { mz, dz };
            let result = run_heritability(&config)?;
            finish(Run::Heritability { config, result }, &a.output, 1, start)
        }
        Command::Simulate(a) => {
            let scenario = match a.scenario {
                ScenarioArg::Small => Scenario::Small,
                ScenarioArg::Large => Scenario::Large,
            };
            let config = resolve_simulate(scenario, a.reps, a.seed, a.naive_perms, a.checkpoints, a.speedup)?;
            let result = run_simulate(&config)?;
            finish(Run::Simulate { config, result }, &a.output, 1, start)
        }
        Command::Mixing(a) => {
            let config = MixingConfig {
                m: a.m,
                n: a.n,
                walks: a.walks as usize,
                reps: a.reps,
                seed: a.seed,
            };
            let result = run_mixing(&config)?;
            finish(Run::Mixing { config, result }, &a.output, 1, start)
        }
        Command::Bench(a) => {
            let config = BenchConfig {
                m: a.m,
                n: a.n,
                walks: a.walks,
                naive_perms: a.naive_perms,
                seed: a.seed,
            };
            let result = run_bench(&config)?;
            finish(Run::Bench { config, result }, &a.output, 1, start)
        }
        Command::Enumerate(a) => {
            let (_, data) = read_input(&a.data, None)?;
            let (_, groups) = read_input(&a.groups, None)?;
            let config = EnumerateConfig {
                data,
                groups,
                side: a.side.into(),
                comparison: match a.comparison {
                    ComparisonArg::Strict => Comparison::Strict,
                    ComparisonArg::AtLeast => Comparison::AtLeast,
                },
                limit: a.limit,
            };
            let result = run_enumerate(&config)?;
            finish(Run::Enumerate { config, result }, &a.output, 1, start)
        }
        Command::Replay(a) => {
            let threads = resolve_threads(a.threads)?;
            let (bytes, _) = read_input(&a.document, None)?;
            let text = String::from_utf8(bytes).map_err(|e| CliError::Input(format!("{}: {e}", a.document)))?;
            let original = ResultDocument::from_json(&text, &a.document)?;
            let run = replay(&original, threads)?;
            if a.verify && run != original.run {
                return Err(CliError::Compute(format!(
                    "replay of {} produced different results",
                    a.document
                )));
            }
            finish(run, &a.output, threads, start)
        }
    }
}
