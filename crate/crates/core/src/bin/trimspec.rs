use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use trimspec::runner::{load_config, run, write_outputs, Command, ExperimentConfig, Outcome, Params, RunError};
use trimspec::verify::{verify_suite, Level};

#[derive(Parser)]
#[command(name = "trimspec", version, about = "Trimmed Schrödinger operators on Z^d: spectra, bounds and Anderson-model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON config: `{"command": ..., "params": {...}}` or a bare parameter object.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV output path; the JSON summary goes next to it. Without it the CSV goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave out the `# generated_unix=` line so identical runs give identical files.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Parameter override `key=value` (value parsed as JSON, else taken as a string).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Closed-form bounds (δ lower bounds, Cheeger-type bounds, κ).
    Bounds,
    /// Ground-state energy of H, H_Γ or H(t) on a box.
    Gsenergy,
    /// E(t) on a grid with the derivative bound check.
    Curve,
    /// Window Cheeger constant by exhaustive search.
    Cheeger,
    /// Wegner estimate by Monte Carlo.
    Wegner,
    /// Projection inequality P χ_Γ P ≥ κ P on samples.
    Pvp,
    /// One-site spectral averaging against 8 S_μ(|I|/λ).
    Specavg,
    /// Ground-state energy of random samples across box sizes.
    Gsmc,
    /// Run the built-in verification battery.
    Verify {
        #[arg(long, default_value = "fast")]
        level: String,
    },
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn emit(outcome: &Outcome, common: &Common) -> Result<(), RunError> {
    let stamp = (!common.no_timestamp).then(now);
    match &common.out {
        Some(path) => {
            let summary = write_outputs(outcome, path, stamp)?;
            eprintln!("wrote {} and {}", path.display(), summary.display());
        }
        None => {
            if let Some(ts) = stamp {
                println!("# generated_unix={ts}");
            }
            print!("{}", outcome.csv);
            eprintln!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default());
        }
    }
    Ok(())
}

fn experiment(cmd: Command, common: &Common) -> Result<Outcome, RunError> {
    let mut params = Params::new();
    if let Some(path) = &common.config {
        let (file_cmd, file_params) = load_config(path)?;
        if let Some(c) = file_cmd {
            if c != cmd {
                return Err(RunError::Config(format!(
                    "parameter `command`: config is for `{}`, but `{}` was requested",
                    c.name(),
                    cmd.name()
                )));
            }
        }
        params = file_params;
    }
    for s in &common.set {
        params.set_from_str(s)?;
    }
    if let Some(seed) = common.seed {
        params.insert("seed", seed.into());
    }
    let outcome = run(&ExperimentConfig { command: cmd, params })?;
    emit(&outcome, common)?;
    Ok(outcome)
}

fn verify(level: &str, common: &Common) -> Result<Outcome, RunError> {
    let level: Level = level
        .parse()
        .map_err(|e: trimspec::Error| RunError::Config(format!("parameter `level`: {e}")))?;
    let summary = verify_suite(level, common.seed.unwrap_or(0));
    for c in &summary.checks {
        eprintln!("{} {} ({:.2}s) {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
    }
    let outcome = Outcome {
        csv: summary.to_csv(),
        summary: serde_json::to_value(&summary).map_err(|e| RunError::Runtime(e.to_string()))?,
        violated: !summary.passed(),
    };
    emit(&outcome, common)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Sub::Bounds => experiment(Command::Bounds, &cli.common),
        Sub::Gsenergy => experiment(Command::Gsenergy, &cli.common),
        Sub::Curve => experiment(Command::Curve, &cli.common),
        Sub::Cheeger => experiment(Command::Cheeger, &cli.common),
        Sub::Wegner => experiment(Command::Wegner, &cli.common),
        Sub::Pvp => experiment(Command::Pvp, &cli.common),
        Sub::Specavg => experiment(Command::Specavg, &cli.common),
        Sub::Gsmc => experiment(Command::Gsmc, &cli.common),
        Sub::Verify { level } => verify(level, &cli.common),
    };
    match result {
        Ok(o) => ExitCode::from(o.exit_code() as u8),
        Err(e) => {
            eprintln!("trimspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
