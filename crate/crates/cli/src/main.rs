use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergofit::commands::Command;
use ergofit::config::{parse_theta, ModelSpec};
use ergofit::harness::{StudyConfig, DEFAULT_CALIBRATION_REPLICATES, DEFAULT_DT};
use ergofit::statistics::DEFAULT_GRID_POINTS;
use ergofit::Error;

/// Goodness-of-fit tests for ergodic diffusions.
#[derive(Parser, Debug)]
#[command(name = "ergofit", version)]
struct Cli {
    /// Print the validated command as JSON instead of running it.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Simulate one path and write it as `t,x` CSV.
    Simulate {
        #[arg(long)]
        model: String,
        /// `alpha,beta` for a family model.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate thresholds of a limit law.
    Calibrate {
        #[arg(long)]
        law: String,
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Simple model, for `delta_S0` laws.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Test one trajectory and print a JSON verdict.
    Test {
        #[arg(long)]
        traj: PathBuf,
        /// `Family:Norm`, e.g. `ParamEDF:CvM`.
        #[arg(long)]
        stat: String,
        #[arg(long)]
        model: String,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        /// Fail instead of calibrating when no table is given.
        #[arg(long)]
        no_autocalibrate: bool,
        #[arg(long, default_value_t = DEFAULT_CALIBRATION_REPLICATES)]
        calibration_n: usize,
        #[arg(long, default_value_t = 1)]
        calibration_seed: u64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        /// Weight the increment sup-statistic by 1/sigma.
        #[arg(long)]
        ks_weight_by_sigma: bool,
    },
    /// Run a study from a JSON config; writes rows.csv and summary.json.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print every effective default.
    Defaults,
}

fn model(flag: &str, spec: &str) -> Result<ModelSpec, Error> {
    spec.parse()
        .map_err(|e| Error::Parse(format!("invalid {flag} `{spec}`: {}", strip(&e))))
}

fn strip(e: &Error) -> String {
    let s = e.to_string();
    s.strip_prefix("parse error: ").map(str::to_string).unwrap_or(s)
}

fn resolve(sub: Sub) -> Result<Command, Error> {
    Ok(match sub {
        Sub::Simulate {
            model: spec,
            theta,
            horizon,
            dt,
            seed,
            stream,
            x0,
            out,
        } => Command::Simulate {
            model: model("--model", &spec)?,
            theta: theta.as_deref().map(parse_theta).transpose()?,
            horizon,
            dt,
            seed,
            stream,
            x0,
            out,
        },
        Sub::Calibrate {
            law,
            eps,
            n,
            seed,
            model: spec,
            out,
        } => Command::Calibrate {
            law,
            epsilons: eps,
            n_replicates: n,
            seed,
            model: spec.as_deref().map(|s| model("--model", s)).transpose()?,
            out,
        },
        Sub::Test {
            traj,
            stat,
            model: spec,
            table,
            eps,
            no_autocalibrate,
            calibration_n,
            calibration_seed,
            grid_points,
            ks_weight_by_sigma,
        } => Command::Test {
            traj,
            stat: stat
                .parse()
                .map_err(|e| Error::Parse(format!("invalid --stat `{stat}`: {}", strip(&e))))?,
            model: model("--model", &spec)?,
            table,
            epsilon: eps,
            autocalibrate: !no_autocalibrate,
            calibration_replicates: calibration_n,
            calibration_seed,
            grid_points,
            ks_weight_by_sigma,
        },
        Sub::Study { config, out } => Command::Study {
            config: Box::new(StudyConfig::load(&config)?),
            out,
        },
        Sub::Defaults => Command::Defaults,
    })
}

fn run(cli: Cli) -> Result<String, Error> {
    let command = resolve(cli.command)?;
    command.validate()?;
    if cli.dry_run {
        return Ok(command.to_json());
    }
    command.execute()
}

fn fail(message: &str, code: u8) -> ExitCode {
    let line = message.lines().next().unwrap_or("").trim();
    let line = line.strip_prefix("error: ").unwrap_or(line);
    eprintln!("error: {line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(&e.to_string(), 2);
        }
    };
    match run(cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e.to_string(), e.exit_code() as u8),
    }
}
