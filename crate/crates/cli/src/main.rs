use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use lcqft_core::report::Report;
use lcqft_core::suite::{self, SuiteConfig};

#[derive(Parser)]
#[command(name = "lcqft", version, about = "Axiom suites for the locally covariant free field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected suites; exit code 0 iff every check passes.
    Run(Common),
    /// Write the causal propagator of the configured source.
    Propagator(Common),
    /// Sweep causal factorization over support separations.
    Smatrix(Common),
    /// Modular theory of the configured density matrix.
    Modular(Common),
    /// Deviations across the refinement family as CSV.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
}

impl Common {
    fn load(&self) -> anyhow::Result<SuiteConfig> {
        let mut cfg = SuiteConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(n) = self.samples {
            anyhow::ensure!(n > 0, "--samples must be positive");
            cfg.samples = n;
        }
        Ok(cfg)
    }
}

fn print_reports<'a>(reports: impl IntoIterator<Item = &'a Report>) -> bool {
    let mut ok = true;
    for r in reports {
        ok &= r.pass;
        println!(
            "{} {:<48} dev={:.3e} tol={:.3e} n={}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check_id,
            r.max_deviation,
            r.tolerance,
            r.n_samples
        );
    }
    ok
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Run(c) => {
            let cfg = c.load()?;
            let out = suite::run(&cfg).context("suite run failed")?;
            let ok = print_reports(out.reports());
            println!("reports written to {}", cfg.output_dir.display());
            Ok(status(ok))
        }
        Command::Propagator(c) => {
            let cfg = c.load()?;
            for p in suite::emit_propagator(&cfg)? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Smatrix(c) => {
            let cfg = c.load()?;
            let (reports, _) = suite::emit_smatrix(&cfg)?;
            Ok(status(print_reports(&reports)))
        }
        Command::Modular(c) => {
            let cfg = c.load()?;
            let (reports, paths) = suite::emit_modular(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&reports)?);
            for p in paths {
                eprintln!("{}", p.display());
            }
            Ok(status(reports.iter().all(|r| r.pass)))
        }
        Command::Convergence(c) => {
            let cfg = c.load()?;
            for p in suite::emit_convergence(&cfg)? {
                println!("{}", std::fs::read_to_string(&p)?);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
