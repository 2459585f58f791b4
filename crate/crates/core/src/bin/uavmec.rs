use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use uavmec::config::Config;
use uavmec::scenario::Strategy;
use uavmec::sweep::{self, Preset, SweepSpec, Variant};
use uavmec::{Error, Result};

#[derive(Parser)]
#[command(name = "uavmec", version, about = "Energy of UAV onboard computing versus MEC offloading")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file.
    config: PathBuf,
    /// Override a field, e.g. `--set deployment.lambda_c=1e-7`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write the results as CSV.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Figure preset: fig1, fig2, fig3 or fig4.
        #[arg(long, conflicts_with = "axis")]
        preset: Option<String>,
        /// Field to sweep, e.g. deployment.lambda_c or v.
        #[arg(long, requires = "values")]
        axis: Option<String>,
        /// `logspace:lo:hi:n`, `linspace:lo:hi:n` or a comma-separated list.
        #[arg(long, requires = "axis", allow_hyphen_values = true)]
        values: Option<String>,
        /// Comma-separated strategies; defaults to the configured one.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<String>,
        /// Comma-separated seeds; defaults to the configured seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Print every resolved value with its unit and source.
    Describe {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Check that the configuration loads and validates.
    Validate {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn load(args: &ConfigArgs) -> Result<Config> {
    Config::load(&args.config, &args.overrides)
}

fn parse_strategies(names: &[String]) -> Result<Vec<Strategy>> {
    names
        .iter()
        .map(|n| Strategy::parse(n.trim()).ok_or_else(|| Error::validation(format!("unknown strategy `{n}`"))))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run(
    cfg: &ConfigArgs,
    preset: Option<&str>,
    axis: Option<&str>,
    values: Option<&str>,
    strategies: &[String],
    seeds: &[u64],
    out: &Path,
    jobs: usize,
) -> Result<()> {
    let base = load(cfg)?;
    let base_spec = base.spec()?;
    let seeds = if seeds.is_empty() { vec![base_spec.seed()] } else { seeds.to_vec() };
    let strategies = parse_strategies(strategies)?;
    let mut spec = match (preset, axis) {
        (Some(name), _) => {
            let p = Preset::parse(name).ok_or_else(|| Error::validation(format!("unknown preset `{name}`")))?;
            let mut s = p.build(base, seeds);
            if !strategies.is_empty() {
                s.variants.retain(|v| strategies.contains(&v.strategy));
            }
            s
        }
        (None, axis) => {
            let (axis, values) = match (axis, values) {
                (Some(a), Some(v)) => (a.to_string(), sweep::parse_values(v)?),
                _ => ("scenario.q_bits".to_string(), vec![base_spec.q_bits]),
            };
            let strategies = if strategies.is_empty() { vec![base.strategy()] } else { strategies };
            SweepSpec { base, axis, values, variants: strategies.into_iter().map(Variant::plain).collect(), seeds }
        }
    };
    spec.axis = spec.axis_path().to_string();
    let outcome = if jobs > 0 { sweep::run_sweep_with_jobs(&spec, jobs)? } else { sweep::run_sweep(&spec)? };
    let report = outcome.write(out)?;
    eprintln!(
        "wrote {} rows to {} ({} skipped, see {})",
        outcome.rows.len(),
        out.display(),
        outcome.skipped.len(),
        report.display()
    );
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { cfg, preset, axis, values, strategies, seeds, out, jobs } => run(
            cfg,
            preset.as_deref(),
            axis.as_deref(),
            values.as_deref(),
            strategies,
            seeds,
            out,
            *jobs,
        ),
        Command::Describe { cfg } => {
            let c = load(cfg)?;
            print!("{}", c.describe());
            Ok(())
        }
        Command::Validate { cfg } => {
            let c = load(cfg)?;
            let spec = c.spec()?;
            println!("ok: {} on {} ({})", spec.strategy, c.band(), cfg.config.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level)))
        .with_writer(std::io::stderr)
        .init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
