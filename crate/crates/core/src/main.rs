use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use freefield::cli::{export_density, export_generating, export_scan, run_suites, DensitySpec, ScanKind, SuiteConfig, SuiteName, Trials};
use freefield::Error;

#[derive(Parser)]
#[command(name = "freefield", version, about = "Verification suites for commuting random free fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write report.json plus CSV artifacts.
    Verify(VerifyArgs),
    /// Write one CSV artifact.
    #[command(subcommand)]
    Export(Export),
}

#[derive(Args)]
struct Overrides {
    /// JSON configuration file; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    mass: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Overrides,
    /// Suite to run; repeat for several. Defaults to every suite except `scan`.
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<String>,
    /// Trial count applied to every selected suite.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print only failing checks.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Export {
    /// Single-measurement density of a self-conjugate function.
    Density {
        /// Total norm s; needs --s-plus. Without it a random function is drawn from --seed.
        #[arg(long, requires = "s_plus")]
        s: Option<f64>,
        #[arg(long, requires = "s")]
        s_plus: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separation or width scan.
    Scan {
        /// em-decay, dirac-decay or singularity.
        #[arg(long)]
        kind: String,
        #[command(flatten)]
        common: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vacuum generating function: closed form against the truncated series.
    Generating {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Overrides) -> Result<SuiteConfig, Error> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            SuiteConfig::from_json(&text)?
        }
        None => SuiteConfig::default(),
    };
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(q) = common.quad_order {
        config.quad_order = q;
    }
    if let Some(m) = common.mass {
        config.mass = m;
    }
    Ok(config)
}

fn verify(args: VerifyArgs) -> Result<bool, Error> {
    let mut config = load(&args.common)?;
    if !args.suites.is_empty() {
        config.suites = args.suites.iter().map(|s| s.parse()).collect::<Result<Vec<SuiteName>, _>>()?;
    }
    if let Some(n) = args.trials {
        config.trials = Trials::Uniform(n);
    }
    if args.rel_tol.is_some() {
        config.rel_tol = args.rel_tol;
    }
    if args.abs_tol.is_some() {
        config.abs_tol = args.abs_tol;
    }
    if let Some(out) = args.out {
        config.out = out;
    }
    let outcome = run_suites(&config)?;
    for (report, (suite, t)) in outcome.document.suites.iter().zip(&outcome.timings) {
        for line in report.summary_lines() {
            if !args.quiet || line.starts_with("FAIL") {
                println!("{line}");
            }
        }
        eprintln!(
            "{} {suite} ({} checks) in {:.1} s",
            if report.passed() { "PASS" } else { "FAIL" },
            report.checks.len(),
            t.as_secs_f64()
        );
    }
    outcome.write(&config.out)?;
    eprintln!("wrote {}", config.out.join("report.json").display());
    Ok(outcome.passed())
}

fn emit(csv: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => Ok(std::fs::write(p, csv)?),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn export(e: Export) -> Result<bool, Error> {
    match e {
        Export::Density { s, s_plus, seed, mass, out } => {
            let spec = match (s, s_plus) {
                (Some(s), Some(s_plus)) => DensitySpec::Parameters { s, s_plus },
                _ => DensitySpec::Random { seed, mass },
            };
            emit(&export_density(spec)?, out.as_deref())?;
        }
        Export::Scan { kind, common, out } => {
            let kind: ScanKind = kind.parse()?;
            emit(&export_scan(kind, &load(&common)?)?, out.as_deref())?;
        }
        Export::Generating { seed, mass, out } => emit(&export_generating(seed, mass)?, out.as_deref())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Export(e) => export(e),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
