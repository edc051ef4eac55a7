use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use geomopt_cli::{experiments, CliResult, Experiment, ExperimentConfig, RawConfig};

/// Proximal gradient experiments with restricted geometric constants.
#[derive(Parser, Debug)]
#[command(name = "geomopt", version)]
struct Args {
    /// hoffman_scaling, trajectory, svm, solve or constants
    command: String,
    /// TOML file with [problem], [solver] and [experiment] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Prepend a `# generated <unix time>` comment to every CSV.
    #[arg(long)]
    timestamp: bool,
    /// `--key value` overrides (`--section.key value` when qualified).
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

fn run(args: &Args) -> CliResult<()> {
    let experiment: Experiment = args.command.parse()?;
    let mut raw = match &args.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    raw.apply_args(&args.overrides)?;
    let cfg = ExperimentConfig::resolve(Some(experiment), raw)?;
    for path in experiments::execute(&cfg, args.timestamp)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
