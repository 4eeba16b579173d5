use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use noether_cli::problem::parse_assignment;
use noether_cli::{run, Options};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Derive,
    Verify,
    Solve,
    Integrals,
    Simulate,
    Killing,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Derive => "derive",
            Command::Verify => "verify",
            Command::Solve => "solve",
            Command::Integrals => "integrals",
            Command::Simulate => "simulate",
            Command::Killing => "killing",
        }
    }
}

/// Approximate Noether symmetries of perturbed Lagrangians.
#[derive(Debug, Parser)]
#[command(name = "noether", version)]
struct Args {
    command: Command,
    problem: PathBuf,
    /// Restrict to one candidate generator.
    #[arg(long)]
    candidate: Option<String>,
    /// Numeric zero-test tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Seed of the zero-test sample points.
    #[arg(long, default_value_t = noether_core::expr::DEFAULT_SEED)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Perturbation strengths for `simulate`.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    epsilon: Option<Vec<f64>>,
    /// Trajectory CSV for `simulate`.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Polynomial degree for `killing`.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Override a parameter, `NAME=VALUE`.
    #[arg(long = "set")]
    set: Vec<String>,
    /// Step size override for `simulate`.
    #[arg(long)]
    dt: Option<f64>,
    /// End time override for `simulate`.
    #[arg(long)]
    t_end: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let set = match args.set.iter().map(|s| parse_assignment(s)).collect::<Result<Vec<_>, _>>() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let opts = Options {
        candidate: args.candidate,
        tolerance: args.tolerance,
        seed: args.seed,
        epsilons: args.epsilon,
        csv: args.csv,
        degree: args.degree,
        set,
        dt: args.dt,
        t_end: args.t_end,
    };
    match run(args.command.name(), &args.problem, &opts) {
        Ok(report) => {
            if let Some(path) = &args.report {
                if let Err(e) = std::fs::write(path, report.to_json() + "\n") {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if args.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
