use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use radixplan::RadixPlan;

mod commands;

/// Exit status for runtime and domain failures.
const EXIT_DOMAIN: u8 = 1;
/// Exit status for malformed or out-of-range arguments; matches clap's own.
const EXIT_USAGE: u8 = 2;
const DEFAULT_SEED: u64 = 0x5eed_f00d;

#[derive(Parser, Debug)]
#[command(name = "radixplan", version, about = "Mixed-radix FFT planning, benchmarking and batch simulation")]
struct Cli {
    /// Emit a single JSON document on stdout instead of the text report.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for every random input the command generates.
    #[arg(long, global = true, env = "RADIXPLAN_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Number of radix plans and stage experiments for a transform size.
    Count {
        #[arg(long)]
        size: usize,
    },
    /// Time every (stage, radix) kernel on this host and write a cost table.
    Bench(BenchArgs),
    /// Cheapest plan for a cost table, with speedups over the baselines.
    Plan(PlanArgs),
    /// Compare plans against the direct DFT on random inputs.
    Verify(VerifyArgs),
    /// Optimal CPU/GPU batch split for two pool throughputs.
    Ratio(RatioArgs),
    /// Run the FFT / transpose / FFT batch on two worker pools.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    size: usize,
    /// CSV destination; metadata goes to the matching .json file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    warmup: u32,
    #[arg(long, default_value_t = 31)]
    runs: u32,
    /// Stage invocations timed together per run.
    #[arg(long, default_value_t = 256)]
    batch: u32,
    /// Use the fastest run instead of the median.
    #[arg(long)]
    min: bool,
    #[arg(long, default_value = "host cpu")]
    label: String,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long)]
    costs: PathBuf,
    /// Also price this plan against the same baselines.
    #[arg(long)]
    evaluate: Option<RadixPlan>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    size: usize,
    /// Plan to check, e.g. "4,8,8,4". Every plan is checked when omitted.
    #[arg(long)]
    plan: Option<RadixPlan>,
    #[arg(long, default_value_t = 10)]
    seeds: u64,
}

#[derive(Args, Debug)]
struct RatioArgs {
    /// CPU throughput in GFlops.
    #[arg(long)]
    p_cpu: f64,
    /// GPU throughput in GFlops.
    #[arg(long)]
    p_gpu: f64,
    /// Upper bound on the CPU load, in (0, 1].
    #[arg(long)]
    load_cap: Option<f64>,
    /// Transforms in the batch.
    #[arg(long, default_value_t = 1024)]
    batch: u64,
    /// Points per transform.
    #[arg(long, default_value_t = 1024)]
    size: usize,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1024)]
    rows: usize,
    #[arg(long, default_value_t = 1024)]
    cols: usize,
    /// Share of each pass run by the cpu pool. Defaults to the optimal split
    /// when both throughputs are given, otherwise 0.5.
    #[arg(long)]
    ratio: Option<f64>,
    /// Cost table; its cheapest plan is used for every pass of matching length.
    #[arg(long)]
    costs: Option<PathBuf>,
    #[arg(long)]
    plan1: Option<RadixPlan>,
    #[arg(long)]
    plan2: Option<RadixPlan>,
    /// Writes the task trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Row-major input grid (binary, or CSV by extension). Random when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Writes the transformed grid, which is `cols` x `rows`.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    p_cpu: Option<f64>,
    #[arg(long)]
    p_gpu: Option<f64>,
    /// Transpose tile edge.
    #[arg(long, default_value_t = radixplan::pipeline::DEFAULT_TRANSPOSE_BLOCK)]
    block: usize,
}

/// Error raised for arguments that parse but are out of range.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// The error chain on one line, skipping causes already spelled out by the
/// message above them.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&out.json).expect("report serializes") + "\n"
            } else {
                out.text
            };
            // A closed pipe (e.g. `| head`) is not a failure of the command.
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_DOMAIN)
            }
        }
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_DOMAIN)
            }
        }
    }
}
