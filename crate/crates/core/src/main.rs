use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swapnet::graph::InteractionGraph;
use swapnet::optimizer::optimize_weights;
use swapnet::report::{analyze_graph, to_json, write_atomic};
use swapnet::scenario::{run_scenario, Scenario};
use swapnet::verify::verify_range;
use swapnet::{Error, DEFAULT_DENSE_CAP};

/// Consensus and synchronization analysis of swapping-operator qubit networks.
///
/// Exit codes: 0 success, 1 I/O failure or failed verification, 2 malformed
/// input, 3 qubit cap exceeded, 4 numerical failure, 5 infeasible problem.
#[derive(Parser)]
#[command(name = "swapnet", version)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Largest n for paths that build the Laplacian or dense states.
    #[arg(long, global = true, default_value_t = DEFAULT_DENSE_CAP)]
    cap: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Component census, degrees, regularity, kernel dimension and λ₂ of a graph.
    Analyze {
        graph: PathBuf,
        /// Skip the Laplacian (allows n up to 12).
        #[arg(long)]
        structural: bool,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a scenario and write trajectory, Bloch, sync and summary files.
    Simulate {
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Runge-Kutta step override.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Run the structural invariant suite, e.g. `--n 2..4` or `--n 2,3,5`.
    Verify {
        #[arg(long, default_value = "2..4", value_parser = parse_n_range)]
        n: NRange,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize λ₂ over edge weights with Σα = budget.
    Optimize {
        graph: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Debug)]
struct NRange(Vec<usize>);

fn parse_n_range(s: &str) -> Result<NRange, String> {
    let bad = |_| format!("invalid n range {s:?}");
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi): (usize, usize) = (lo.parse().map_err(bad)?, hi.parse().map_err(bad)?);
        if lo > hi {
            return Err(format!("empty n range {s:?}"));
        }
        return Ok(NRange((lo..=hi).collect()));
    }
    s.split(',').map(|x| x.trim().parse().map_err(bad)).collect::<Result<_, _>>().map(NRange)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 1,
        Error::QubitCap { .. } => 3,
        Error::NonFinite { .. } | Error::NoDecay(_) => 4,
        Error::Disconnected | Error::NoEdges => 5,
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Analyze { graph, structural, out } => {
            let g = InteractionGraph::from_json(&read(&graph)?)?;
            let report = analyze_graph(&g, cli.cap, structural)?;
            emit(&to_json(&report)?, out.as_deref())?;
            Ok(true)
        }
        Command::Simulate { scenario, out, step } => {
            let scenario = Scenario::from_json(&read(&scenario)?)?;
            if scenario.n() > cli.cap {
                return Err(Error::QubitCap {
                    n: scenario.n(),
                    cap: cli.cap,
                });
            }
            let result = run_scenario(&scenario, cli.cap, step)?;
            std::fs::create_dir_all(&out)?;
            write_atomic(&out.join("trajectory.csv"), result.trajectory_csv().as_bytes())?;
            write_atomic(&out.join("bloch.csv"), result.bloch_csv().as_bytes())?;
            if let Some(sync) = result.sync_csv() {
                write_atomic(&out.join("sync.csv"), sync.as_bytes())?;
            }
            write_atomic(&out.join("summary.json"), to_json(&result.summary)?.as_bytes())?;
            for w in &result.summary.warnings {
                eprintln!("warning: {w}");
            }
            Ok(true)
        }
        Command::Verify { n: NRange(n), out } => {
            if let Some(&big) = n.iter().find(|&&k| k > cli.cap) {
                return Err(Error::QubitCap { n: big, cap: cli.cap });
            }
            let report = verify_range(&n, cli.seed)?;
            emit(&to_json(&report)?, out.as_deref())?;
            for f in &report.failed {
                eprintln!("failed: {f}");
            }
            Ok(report.all_passed)
        }
        Command::Optimize {
            graph,
            budget,
            iterations,
            out,
        } => {
            let g = InteractionGraph::from_json(&read(&graph)?)?;
            if g.n() > cli.cap {
                return Err(Error::QubitCap { n: g.n(), cap: cli.cap });
            }
            let report = optimize_weights(&g, budget, iterations)?;
            emit(&to_json(&report)?, out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
