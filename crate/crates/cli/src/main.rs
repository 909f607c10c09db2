use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lindecomp::protocols::ProtocolTag;
use lindecomp_cli::{
    bench, list_protocols, parse_param, render_catalog, run_experiment, BenchConfig, CliError,
    ConfigFile, ExperimentConfig, Overrides,
};

#[derive(Parser)]
#[command(name = "lindecomp", version, about = "Linear decomposition attacks on group-based key exchange")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate instances, attack them and report.
    Run(RunArgs),
    /// List the supported schemes and their default parameters.
    List {
        /// Print the catalog as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Time span closure on random maps of growing dimension.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        generators: usize,
        #[arg(long, default_value_t = 7)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    protocol: Option<ProtocolTag>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Parameter override, e.g. `--param n=4 --param style=center_scalars`.
    #[arg(long = "param", value_name = "KEY=VALUE", num_args = 1..)]
    params: Vec<String>,
    /// JSON config file; command-line values take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print closure progress to standard error (runs trials sequentially).
    #[arg(long)]
    trace: bool,
    /// Include each transcript, private view included.
    #[arg(long)]
    emit_private: bool,
    /// Include each public transcript.
    #[arg(long)]
    emit_transcripts: bool,
    /// Use the full-size hkks parameters.
    #[arg(long)]
    large: bool,
    /// Record per-trial wall time (makes reports non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn configure(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let file = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let params = args
        .params
        .iter()
        .map(|s| parse_param(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cfg = ExperimentConfig::resolve(
        file,
        Overrides {
            protocol: args.protocol,
            trials: args.trials,
            seed: args.seed,
            params,
            large: args.large,
        },
    )?;
    cfg.trace = args.trace;
    cfg.emit_private = args.emit_private;
    cfg.emit_transcripts = args.emit_transcripts;
    cfg.timing = args.timing;
    Ok(cfg)
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match configure(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let json = report.to_json();
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{json}"),
    }
    eprintln!(
        "{}: {}/{} keys recovered",
        report.protocol, report.successes, report.trials
    );
    for r in report.records.iter().filter(|r| r.error.is_some()) {
        eprintln!("  trial {}: {}", r.trial, r.error.as_deref().unwrap_or_default());
    }
    if report.all_succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
        Command::List { json } => {
            let catalog = list_protocols();
            if json {
                println!("{}", serde_json::to_string_pretty(&catalog).expect("catalog serializes"));
            } else {
                print!("{}", render_catalog(&catalog));
            }
            ExitCode::SUCCESS
        }
        Command::Bench { dims, generators, p, seed } => {
            let cfg = BenchConfig { dims, generators, p, seed };
            match bench(&cfg) {
                Ok(rows) => {
                    println!("{:>6} {:>6} {:>7} {:>14} {:>9}", "d", "rank", "passes", "ops", "ops/d^3");
                    for r in rows {
                        println!(
                            "{:>6} {:>6} {:>7} {:>14} {:>9.3}",
                            r.dim, r.rank, r.passes, r.ops, r.ops_per_cube
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
