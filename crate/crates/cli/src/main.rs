use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use volkov_cli::config::OutputFormat;
use volkov_cli::{commands, suites, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "volkov", version, about = "Klein-Fock-Gordon Green functions, free and in a plane wave")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a free propagator on the configured grid.
    EvalFree(Common),
    /// Tabulate the Volkov solution or the two-point propagator.
    EvalVolkov(Common),
    /// Run the verification suites and print a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run only this suite group (repeatable).
        #[arg(long)]
        suite: Vec<String>,
    },
    /// Solve the characteristic problem and run the convergence study.
    Goursat(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(format) = self.format {
            cfg.format = format;
        }
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn convergence_path(out: &Path, format: OutputFormat) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("goursat");
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    out.with_file_name(format!("{stem}.convergence.{ext}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::EvalFree(c) => {
            let cfg = c.load()?;
            emit(c.out.as_deref(), &commands::eval_free(&cfg)?)
        }
        Command::EvalVolkov(c) => {
            let cfg = c.load()?;
            emit(c.out.as_deref(), &commands::eval_volkov(&cfg)?)
        }
        Command::Goursat(c) => {
            let cfg = c.load()?;
            let out = commands::goursat(&cfg)?;
            if out.unstable {
                eprintln!("warning: |Phi| exceeded the instability threshold (growing regime)");
            }
            emit(c.out.as_deref(), &out.grid)?;
            match c.out.as_deref() {
                Some(path) => emit(Some(&convergence_path(path, cfg.format)), &out.convergence),
                None => {
                    eprint!("{}", String::from_utf8_lossy(&out.convergence));
                    Ok(())
                }
            }
        }
        Command::Verify { common, suite } => {
            let mut cfg = common.load()?;
            cfg.validate()?;
            if !suite.is_empty() {
                cfg.verify.suites = suite;
            }
            let report = suites::run(&cfg.verify, cfg.seed)?;
            eprint!("{}", suites::format_table(&report));
            let mut json = serde_json::to_vec_pretty(&report)?;
            json.push(b'\n');
            emit(common.out.as_deref(), &json)?;
            let failed = report.suites.iter().filter(|s| !s.pass).count();
            if failed > 0 {
                return Err(CliError::VerifyFailed(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
