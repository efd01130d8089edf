use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "eidoku",
    version,
    about = "Structural verification gate for reasoning chains"
)]
pub struct Cli {
    /// Worker threads for per-sample parallelism (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Milliseconds to wait for an external provider reply.
    #[arg(long, global = true, default_value_t = 30_000)]
    pub provider_timeout_ms: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a Reasoning Gap Dataset as JSON Lines.
    GenRgd(GenRgdArgs),
    /// Run the gate over a context and candidate chains.
    Verify(VerifyArgs),
    /// Evaluate methods on a dataset and report FTAR/TTAR with bootstrap CIs.
    Bench(BenchArgs),
    /// Grid of FTAR/TTAR over percentile p and margin delta.
    Sweep(SweepArgs),
    /// Pearson correlations between the three cost proxies.
    Correlate(CorrelateArgs),
    /// Print every gate setting as `key = value` (a valid config file).
    Defaults,
    /// Serve the builtin providers over stdin/stdout using the provider protocol.
    #[command(hide = true)]
    ProviderStdio,
}

#[derive(Debug, Args)]
pub struct GenRgdArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Minimum cosine similarity between C and the distractor D.
    #[arg(long, default_value_t = 0.7)]
    pub theta: f64,
    /// Maximum entailment of the false target.
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    /// Maximum uses of any (C, D) pair.
    #[arg(long, default_value_t = 5)]
    pub reuse_limit: usize,
}

/// Gate settings shared by every command that runs the gate.
#[derive(Debug, Args, Default)]
pub struct GateArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any config key, e.g. `--set alpha_curv=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Percentile p of the calibration sample.
    #[arg(long)]
    pub p: Option<f64>,
    /// Safety margin delta.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Sliding window size W.
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One statement per line.
    #[arg(long)]
    pub context: PathBuf,
    /// One candidate per line; steps separated by ` || `.
    #[arg(long)]
    pub candidates: PathBuf,
    #[command(flatten)]
    pub gate: GateArgs,
    /// Exit with status 2 when every candidate is rejected.
    #[arg(long)]
    pub strict_exit: bool,
    /// Write the cumulative cost trace as TSV.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Verdict JSON destination (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Comma-separated: eidoku, prob, prob_strict, nli_only, self_consistency.
    #[arg(
        long,
        default_value = "eidoku,prob,prob_strict,nli_only,self_consistency"
    )]
    pub methods: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub b_resamples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta_loose: f64,
    #[arg(long, default_value_t = 0.75)]
    pub theta_strict: f64,
    #[command(flatten)]
    pub gate: GateArgs,
    /// Report JSON destination.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Inclusive `start:stop:step`.
    #[arg(long, default_value = "85:99:1")]
    pub p_range: String,
    #[arg(long, default_value = "0:0.3:0.05")]
    pub delta_range: String,
    #[command(flatten)]
    pub gate: GateArgs,
    /// TSV destination.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub gate: GateArgs,
    /// Report JSON destination.
    #[arg(long)]
    pub out: PathBuf,
}
