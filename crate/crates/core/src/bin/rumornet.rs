use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rumornet::expcli::{
    compare_engines, generate_networks, run_scenario, run_thresholds, Scenario,
};
use rumornet::Error;

#[derive(Parser)]
#[command(
    name = "rumornet",
    version,
    about = "Rumor spreading on scale-free networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the scenario's networks as edge lists.
    Generate(Common),
    /// Write analytic threshold tables.
    Threshold(Common),
    /// Run one scenario.
    Simulate(Common),
    /// Cross-check the mean-field and Monte Carlo engines.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn scenario(&self) -> Result<Scenario, Error> {
        let mut s = Scenario::load(&self.config)?;
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(out) = &self.out {
            s.out_dir = out.clone();
        }
        if let Some(w) = self.workers {
            s.workers = w;
        }
        Ok(s)
    }
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) | Error::Parse { .. } => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Generate(c) | Command::Threshold(c) | Command::Simulate(c) | Command::Compare(c)) =
        &cli.command;
    let s = match c.scenario() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let result = match &cli.command {
        Command::Generate(_) => generate_networks(&s).map(|m| (m, true)),
        Command::Threshold(_) => run_thresholds(&s).map(|m| (m, true)),
        Command::Simulate(_) => run_scenario(&s).map(|o| (o.manifest, true)),
        Command::Compare(_) => compare_engines(&s).map(|r| {
            for d in &r.rows {
                println!(
                    "point {:>3}  N={} lambda={} alpha={} beta={}  R_mf={:.4} R_mc={:.4} dev={:.4} {}",
                    d.point.index,
                    d.point.n,
                    d.point.lambda,
                    d.point.alpha,
                    d.point.beta,
                    d.r_meanfield,
                    d.r_montecarlo,
                    d.deviation,
                    if d.pass { "pass" } else { "FAIL" }
                );
            }
            let ok = r.all_pass();
            (r.manifest, ok)
        }),
    };
    match result {
        Ok((manifest, ok)) => {
            for f in &manifest.failures {
                eprintln!("failed {} point {}: {}", f.family, f.point, f.message);
            }
            println!(
                "wrote {} files to {}",
                manifest.files.len(),
                s.out_dir.display()
            );
            if !ok {
                ExitCode::from(3)
            } else if !manifest.failures.is_empty() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
