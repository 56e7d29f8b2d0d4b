use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fwis::harness::commands::{blend_report, price_forward, simulate_to_dir};
use fwis::harness::{validate_suite, ExportFormat, RunConfig, RunManifest};
use fwis::{FwisError, Result};

/// Simulation and validation of fractional Wishart processes.
#[derive(Parser)]
#[command(name = "fwis", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths of a process and write them with a manifest.
    Simulate {
        #[arg(long, value_enum)]
        process: Process,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a validation suite.
    Validate {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for manifest.json and checks.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print blend coefficients and residuals as JSON.
    Blend {
        #[arg(long)]
        hurst: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Price the variance forward of the configuration.
    Price {
        #[arg(long)]
        config: PathBuf,
        /// Also estimate the value by Monte Carlo.
        #[arg(long)]
        mc: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Regenerate the symbol index and reproduction guide.
    Docs {
        #[arg(long, default_value = "docs")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Process {
    Fwis,
    EpsInt,
    EpsGeneral,
    Six,
    Volmodel,
}

impl Process {
    fn name(self) -> &'static str {
        match self {
            Process::Fwis => "fwis",
            Process::EpsInt => "eps-int",
            Process::EpsGeneral => "eps-general",
            Process::Six => "six",
            Process::Volmodel => "volmodel",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
}

/// Flags that replace configuration keys.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    obs_dt: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    antithetic: bool,
    #[arg(long)]
    weak_order_paths: Option<usize>,
}

fn resolve(config: Option<&Path>, o: &Overrides) -> Result<RunConfig> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_process_env()?;
    if let Some(s) = o.seed {
        cfg.mc.master_seed = s;
    }
    if let Some(t) = o.threads {
        cfg.mc.threads = Some(t);
    }
    if let Some(n) = o.paths {
        cfg.mc.n_paths = n;
    }
    if let Some(dt) = o.dt {
        cfg.mc.dt = dt;
    }
    if let Some(h) = o.horizon {
        cfg.horizon = h;
    }
    if let Some(h) = o.obs_dt {
        cfg.obs_dt = Some(h);
    }
    if let Some(f) = o.format {
        cfg.format = match f {
            Format::Csv => ExportFormat::Csv,
            Format::JsonLines => ExportFormat::JsonLines,
        };
    }
    if o.antithetic {
        cfg.mc.antithetic = true;
    }
    if let Some(n) = o.weak_order_paths {
        cfg.weak_order_paths = Some(n);
    }
    if cfg.mc.threads == Some(0) {
        return Err(FwisError::Config("--threads must be >= 1".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn to_json(value: &impl serde::Serialize) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| FwisError::Numeric(e.to_string()))
}

fn report(m: &RunManifest) {
    for c in &m.checks {
        println!("{}", c.summary());
    }
    for n in &m.notes {
        println!("note: {n}");
    }
    let verdict = if m.passed { "PASS" } else { "FAIL" };
    println!("{} {}: {verdict}", m.command, m.suite);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate {
            process,
            config,
            out,
            overrides,
        } => {
            let cfg = resolve(Some(&config), &overrides)?;
            let m = simulate_to_dir(&cfg, process.name(), &out)?;
            report(&m);
            Ok(m.exit_code())
        }
        Command::Validate {
            suite,
            config,
            out,
            overrides,
        } => {
            let cfg = resolve(config.as_deref(), &overrides)?;
            let m = validate_suite(&suite, &cfg)?;
            if let Some(dir) = out {
                m.write_dir(&dir)?;
            }
            report(&m);
            Ok(m.exit_code())
        }
        Command::Blend { hurst, eps } => {
            println!("{}", to_json(&blend_report(hurst, eps)?)?);
            Ok(0)
        }
        Command::Price { config, mc, overrides } => {
            let cfg = resolve(Some(&config), &overrides)?;
            println!("{}", to_json(&price_forward(&cfg, mc)?)?);
            Ok(0)
        }
        Command::Docs { out } => {
            fwis::docs::write_docs(&out)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
