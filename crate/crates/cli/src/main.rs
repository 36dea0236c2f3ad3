use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use gibbsinit::harness::{run_experiment, sweep, ExperimentConfig, RunResult, SweepAxis};
use gibbsinit::theory::{battery, BatteryConfig, TheoryReport};
use gibbsinit::Error;

#[derive(Parser)]
#[command(
    name = "gibbsinit",
    version,
    about = "Sampling-based initial points for non-convex optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config file.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides `workers` from the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides `replications` from the config.
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Run one experiment per value of beta, n or L.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values, e.g. `10,30,50,100`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Evaluate the bound calculators against their measured counterparts.
    TheoryCheck {
        /// JSON report destination.
        #[arg(long, default_value = "theory_report.json")]
        output: PathBuf,
        #[arg(long, default_value_t = BatteryConfig::default().seed)]
        seed: u64,
        /// Fewer batches and seeds, for a quick look.
        #[arg(long)]
        quick: bool,
    },
    /// List the built-in problems and their config keys.
    ListProblems,
}

fn load(
    path: &PathBuf,
    output_dir: Option<PathBuf>,
    workers: Option<usize>,
) -> anyhow::Result<ExperimentConfig> {
    let mut cfg =
        ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if output_dir.is_some() {
        cfg.output_dir = output_dir;
    }
    if workers.is_some() {
        cfg.workers = workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_result(label: &str, r: &RunResult) {
    let s = &r.summary;
    println!(
        "{label:<14} success {:>6.3} ± {:.3}  median {:>12.6}  mean {:>12.6}  completed {}/{}  {:.1}s",
        s.success_rate,
        s.success_se,
        s.median_value,
        s.mean_value,
        s.completed,
        s.replications,
        r.wall_time_ms / 1e3
    );
}

fn print_theory(rep: &TheoryReport) {
    let (delta, rho, d, c) = rep.sample_size_params;
    println!(
        "sample size n(δ={delta}, ρ={rho}, d={d}, C={c}) = {}",
        rep.sample_size
    );
    println!(
        "\ndouble well: gap {}, convexity radius {:.5}",
        rep.well_gap, rep.well_radius
    );
    println!("{:>8} {:>14} {:>12}", "beta", "mass outside", "log mass");
    for row in &rep.concentration {
        println!(
            "{:>8} {:>14.6e} {:>12.4}",
            row.beta, row.mass_outside, row.log_mass_outside
        );
    }
    println!("terminal slope {:.4}", rep.terminal_slope);
    println!(
        "\n{:>8} {:>4} {:>12} {:>12} {:>10} {:>6}",
        "beta", "L", "bound", "empirical", "se", "ok"
    );
    for row in &rep.miss {
        println!(
            "{:>8} {:>4} {:>12.4e} {:>12.4e} {:>10.2e} {:>6}",
            row.beta,
            row.samples,
            row.bound,
            row.empirical.frequency,
            row.empirical.standard_error,
            row.within_bound
        );
    }
    println!(
        "\n{:>8} {:>16} {:>18} {:>10}",
        "n", "median sup gap", "median displacement", "mismatch"
    );
    for row in &rep.approx {
        println!(
            "{:>8} {:>16.4e} {:>18.4e} {:>10}",
            row.n, row.median_value_gap, row.median_displacement, row.mismatches
        );
    }
    println!("log-log slope of sup gap on n: {:.4}", rep.approx_slope);
}

const PROBLEMS: &str = "\
st           Styblinski-Tang on [-5,5]^dim, normalized by 2·dim
             keys: dim
gmm          negated Gaussian-kernel expectation under a seeded mixture
             keys: dim, components, instance_seed, pool, gradient_batch (0 = analytic)
gmnl         GMNL simulated negative log-likelihood on generated choices
             keys: attributes, characteristics, alternatives, customers, draws,
                   shock_sd, half_width, instance_seed
double_well  tilted 1-D quartic with minima at ±scale and gap alpha
             keys: alpha, scale";

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            output_dir,
            workers,
            replications,
        } => {
            let mut cfg = load(&config, output_dir, workers)?;
            if let Some(r) = replications {
                cfg.replications = r;
            }
            let result = run_experiment(&cfg)?;
            print_result(&cfg.name, &result);
            if let Some(dir) = &cfg.output_dir {
                println!("results written to {}", dir.display());
            }
        }
        Command::Sweep {
            config,
            axis,
            values,
            output_dir,
            workers,
            replications,
        } => {
            let mut cfg = load(&config, output_dir, workers)?;
            if let Some(r) = replications {
                cfg.replications = r;
            }
            for (v, r) in sweep(&cfg, axis, &values)? {
                print_result(&format!("{}={v}", axis.as_str()), &r);
            }
        }
        Command::TheoryCheck {
            output,
            seed,
            quick,
        } => {
            let mut bc = BatteryConfig {
                seed,
                ..BatteryConfig::default()
            };
            if quick {
                bc.batches = 1000;
                bc.seeds_per_n = 5;
                bc.ns = vec![10, 100, 1000];
            }
            let rep = battery(&bc)?;
            print_theory(&rep);
            let text = serde_json::to_string_pretty(&rep)?;
            std::fs::write(&output, text)
                .with_context(|| format!("writing {}", output.display()))?;
            println!("\nreport written to {}", output.display());
        }
        Command::ListProblems => println!("{PROBLEMS}"),
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::ExperimentUnstable { .. }) => 3,
        Some(
            Error::InvalidConfig(_)
            | Error::Format(_)
            | Error::BadTheoryParams(_)
            | Error::DimMismatch { .. }
            | Error::BadSubsampleSize { .. }
            | Error::Io { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
