use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ffr::config::DesignName;
use ffr::{commands, Context, Overrides, Result};

#[derive(Debug, Parser)]
#[command(
    name = "ffr",
    version,
    about = "Cell throughput of fractional frequency reuse in OFDMA networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed of the simulator.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, env = "FFR_OUT_DIR")]
    out: Option<PathBuf>,

    /// Design problem solved by `optimize`.
    #[arg(long, global = true, value_enum)]
    design: Option<DesignArg>,

    /// Edge-to-centre per-user throughput fraction for `--design qoscd`.
    #[arg(long, global = true)]
    q: Option<f64>,

    /// Spectrum allocation factor for `--design fxd`.
    #[arg(long, global = true)]
    zeta0: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the analytical cell throughput over the configured grid.
    Analyze,
    /// Solve the FFR design problem.
    Optimize,
    /// Run the Monte Carlo simulator next to the analysis.
    Simulate,
    /// Run the acceptance suite.
    Validate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DesignArg {
    Fxd,
    Apd,
    Qoscd,
}

impl From<DesignArg> for DesignName {
    fn from(d: DesignArg) -> Self {
        match d {
            DesignArg::Fxd => DesignName::Fxd,
            DesignArg::Apd => DesignName::Apd,
            DesignArg::Qoscd => DesignName::Qoscd,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
        design: cli.design.map(Into::into),
        q: cli.q,
        zeta0: cli.zeta0,
    };
    let ctx = Context::prepare(cli.config.as_deref(), &overrides)?;
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Analyze => {
            let reports = commands::analyze(&ctx)?;
            let _ = writeln!(
                stdout,
                "{} rows written to {}",
                reports.len(),
                ctx.out_dir.display()
            );
        }
        Command::Optimize => {
            for s in commands::optimize(&ctx)? {
                let _ = writeln!(
                    stdout,
                    "{} {} {} M={}: omega*={:.4} zeta*={} tau*={:.6}{}",
                    s.design.name(),
                    s.report.scheduler.as_str(),
                    s.report.rate_model,
                    s.report.mean_users,
                    s.omega,
                    s.zeta,
                    s.tau,
                    if s.feasible { "" } else { " (infeasible)" }
                );
            }
        }
        Command::Simulate => {
            let summary = commands::simulate(&ctx)?;
            for run in &summary.runs {
                for m in &run.models {
                    let _ = writeln!(
                        stdout,
                        "M={} omega={} {} {}: simulated {:.6} ± {:.6}, analytical {:.6}{}",
                        run.m,
                        run.omega,
                        run.scheduler.as_str(),
                        m.rate_model,
                        m.tau.mean,
                        m.tau.ci95,
                        m.analytical.tau_bpshz_rb,
                        if m.ci_met { "" } else { " (CI target not met)" }
                    );
                }
            }
            if !summary.ci_met {
                eprintln!("warning: CI target not met for some configurations; see simulate.json");
            }
        }
        Command::Validate => {
            commands::validate(&ctx, &mut |c| {
                let _ = writeln!(stdout, "{c}");
                let _ = stdout.flush();
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
