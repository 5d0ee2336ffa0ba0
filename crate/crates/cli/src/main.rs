//! `densest`: run an engine on a SNAP edge list, or run a self-check suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use densest_core::harness::{cmd_run, Engine, ExperimentConfig};
use densest_core::ingest::{ParseOptions, StreamOrder};
use densest_core::mpc::RoundCosts;
use densest_core::verify::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(name = "densest", version, about = "Approximate directed densest subgraphs")]
struct Args {
    /// stream, mpc, baseline-stream, baseline-mpc, base-peel or exact
    #[arg(long, default_value = "stream")]
    engine: Engine,
    /// Grid step; defaults to 0.6 for MPC engines and 0.2 otherwise
    #[arg(long)]
    epsilon: Option<f64>,
    /// Per-machine memory exponent (MPC engines only)
    #[arg(long)]
    delta: Option<f64>,
    /// file, shuffle:SEED or time
    #[arg(long, default_value = "file")]
    order: StreamOrder,
    #[arg(long, default_value_t = 10_000)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    dedupe: bool,
    #[arg(long)]
    drop_self_loops: bool,
    #[arg(long, required_unless_present = "verify")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// small-oracle, sampling-lemma, adversary or determinism
    #[arg(long, value_name = "SUITE")]
    verify: Option<Suite>,
    /// Directory for the binary edge cache
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    timing_repeats: usize,
    /// Streaming state budget in bytes; larger grids take several passes
    #[arg(long, default_value_t = 4 << 30)]
    max_state_bytes: usize,
    /// Rounds charged per MPC phase beyond the exponentiation steps
    #[arg(long, default_value_t = RoundCosts::default().phase_overhead)]
    phase_overhead: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();

    if let Some(suite) = args.verify {
        let report = run_suite(suite);
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        println!("{json}");
        return if report.passed {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        };
    }

    let mut cfg = ExperimentConfig::new(args.engine, args.input.expect("required by clap"), args.out_dir);
    if let Some(eps) = args.epsilon {
        cfg.epsilon = eps;
    }
    cfg.delta = args.delta;
    cfg.order = args.order;
    cfg.batch_size = args.batch_size;
    cfg.seed = args.seed;
    cfg.parse = ParseOptions {
        dedupe: args.dedupe,
        drop_self_loops: args.drop_self_loops,
    };
    cfg.cache_dir = args.cache_dir;
    cfg.timing_repeats = args.timing_repeats;
    cfg.max_state_bytes = args.max_state_bytes;
    cfg.round_costs.phase_overhead = args.phase_overhead;

    match cmd_run(&cfg) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
