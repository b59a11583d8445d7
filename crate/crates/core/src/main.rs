use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermistor::driver::{self, exit, RunConfig};

#[derive(Parser)]
#[command(version, about = "Thermoviscoelastic thermistor with frictional contact")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with code 4 on any assumption or invariant violation.
    #[arg(long)]
    assert: bool,
    /// Trajectory thinning, overriding `output.stride`.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, write trajectory and diagnostics, then run the cascade if configured.
    Run(Common),
    /// Check the model assumptions without simulating.
    Check(Common),
    /// Run only the refinement cascade.
    Cascade(Common),
}

fn load(c: &Common) -> Result<RunConfig, thermistor::Error> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(out) = &c.out {
        cfg.output.dir = out.clone();
    }
    if let Some(stride) = c.stride {
        if stride == 0 {
            return Err(thermistor::Error::Config("--stride must be positive".into()));
        }
        cfg.output.stride = stride;
    }
    cfg.output.assert |= c.assert;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<u8, thermistor::Error> {
    match cli.command {
        Command::Check(c) => {
            let cfg = load(&c)?;
            let r = driver::check(&cfg)?;
            print!("{}", r.report);
            println!("contact trace norm ‖γ‖ = {:e}", r.trace.norm);
            println!("scalar trace norm = {:e}", r.scalar_trace.norm);
            if r.passed() {
                println!("all assumptions hold");
                Ok(exit::OK)
            } else {
                for line in r.failure_lines() {
                    eprintln!("{line}");
                }
                Ok(exit::VIOLATION)
            }
        }
        Command::Run(c) => {
            let cfg = load(&c)?;
            let s = driver::run(&cfg)?;
            for f in &s.files {
                println!("wrote {}", f.display());
            }
            if let Some(c) = &s.cascade {
                for (i, h) in c.delays.iter().enumerate() {
                    println!(
                        "h = {h:e}: max mechanical {:e}, max thermal {:e}, majorant {:e}",
                        c.mechanical_maxima[i], c.thermal_maxima[i], c.majorants[i]
                    );
                }
            }
            for v in &s.violations {
                eprintln!("violation: {v}");
            }
            Ok(if cfg.output.assert && !s.violations.is_empty() {
                exit::VIOLATION
            } else {
                exit::OK
            })
        }
        Command::Cascade(c) => {
            let cfg = load(&c)?;
            let (files, _) = driver::cascade(&cfg)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(driver::exit_code(&e))
        }
    }
}
