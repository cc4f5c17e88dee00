//! Subcommand implementations. Each one is a pure function of the
//! configuration and writes its results under the output directory.

use std::path::{Path, PathBuf};

use ffr_core::analysis::{cell_throughput, FfrPartition, SchedulerKind, ThroughputReport};
use ffr_core::montecarlo::{Estimate, SimReport};
use ffr_core::optimizer::{solve, DesignKind, DesignSolution};
use ffr_core::rate::RateModel;
use rayon::prelude::*;
use serde::Serialize;

use crate::acceptance::{self, AcceptanceOptions, AcceptanceReport, CriterionResult};
use crate::config::{DesignName, Resolved, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{append_csv, config_hash, ensure_dir, write_csv, write_geometry, write_json};
use crate::sim::SimJob;

pub const DEFAULT_OUT_DIR: &str = "ffr-out";

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub design: Option<DesignName>,
    pub q: Option<f64>,
    pub zeta0: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Context {
    pub resolved: Resolved,
    pub out_dir: PathBuf,
    pub config_hash: String,
}

impl Context {
    /// Loads the configuration (defaults when `path` is `None`), applies
    /// the overrides and validates the result.
    pub fn prepare(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let (mut config, base) = match path {
            Some(p) => (
                RunConfig::load(p)?,
                p.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (RunConfig::default(), PathBuf::new()),
        };
        if let Some(s) = overrides.seed {
            config.seed = s;
        }
        if let Some(d) = overrides.design {
            config.design.kind = d;
        }
        if let Some(q) = overrides.q {
            config.design.q = q;
        }
        if let Some(z) = overrides.zeta0 {
            config.design.zeta0 = z;
        }
        let out_dir = overrides
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let resolved = config.resolve(&base)?;
        Ok(Context {
            config_hash: config_hash(&resolved.config),
            resolved,
            out_dir,
        })
    }

    fn config(&self) -> &RunConfig {
        &self.resolved.config
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeRow {
    #[serde(rename = "M")]
    pub m: f64,
    pub omega: f64,
    pub zeta: f64,
    pub scheduler: SchedulerKind,
    pub rate_model: String,
    pub tau: f64,
    pub tau_centre: f64,
    pub tau_edge: f64,
}

impl From<&ThroughputReport> for AnalyzeRow {
    fn from(r: &ThroughputReport) -> Self {
        AnalyzeRow {
            m: r.mean_users,
            omega: r.omega,
            zeta: r.zeta,
            scheduler: r.scheduler,
            rate_model: r.rate_model.clone(),
            tau: r.tau_bpshz_rb,
            tau_centre: r.tau_centre,
            tau_edge: r.tau_edge,
        }
    }
}

/// Evaluates the cell throughput over loads × ω grid × schedulers × rate
/// models and writes `analyze.csv`, `analyze.json` and `geometry.json`.
pub fn analyze(ctx: &Context) -> Result<Vec<ThroughputReport>> {
    let r = &ctx.resolved;
    let mut tasks = Vec::new();
    for load in &r.loads {
        for &omega in &r.omegas {
            for &s in &r.config.schedulers {
                for rate in &r.rates {
                    tasks.push((load, omega, s, rate));
                }
            }
        }
    }
    let reports = tasks
        .par_iter()
        .map(|&(load, omega, s, rate)| {
            let part = FfrPartition::from_zeta(omega, r.config.zeta, r.system.radio.num_rbs)?;
            Ok(cell_throughput(&r.system, load, &part, s, rate)?)
        })
        .collect::<Result<Vec<_>>>()?;

    ensure_dir(&ctx.out_dir)?;
    let rows: Vec<AnalyzeRow> = reports.iter().map(AnalyzeRow::from).collect();
    write_csv(&ctx.out_dir.join("analyze.csv"), &rows)?;
    write_json(&ctx.out_dir.join("analyze.json"), &reports)?;
    write_geometry(&ctx.out_dir.join("geometry.json"), &r.system.geometry)?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignRow {
    pub design: String,
    pub scheduler: SchedulerKind,
    pub rate_model: String,
    #[serde(rename = "M")]
    pub m: f64,
    pub q: Option<f64>,
    pub omega_star: f64,
    pub zeta_star: f64,
    pub tau_star: f64,
    pub feasible: bool,
}

impl From<&DesignSolution> for DesignRow {
    fn from(s: &DesignSolution) -> Self {
        DesignRow {
            design: s.design.name().to_string(),
            scheduler: s.report.scheduler,
            rate_model: s.report.rate_model.clone(),
            m: s.report.mean_users,
            q: s.design.q(),
            omega_star: s.omega,
            zeta_star: s.zeta,
            tau_star: s.tau,
            feasible: s.feasible,
        }
    }
}

/// Solves the configured design problem for every load, scheduler and rate
/// model. Rows are appended to the `designs.csv` ledger; `designs.json`
/// holds the full solutions of this run.
pub fn optimize(ctx: &Context) -> Result<Vec<DesignSolution>> {
    let r = &ctx.resolved;
    let design: DesignKind = r.config.design.kind();
    let mut tasks = Vec::new();
    for load in &r.loads {
        for &s in &r.config.schedulers {
            for rate in &r.rates {
                tasks.push(r.design_problem(s, rate, *load));
            }
        }
    }
    let solutions = tasks
        .par_iter()
        .map(|p| Ok(solve(&r.system, p, design)?))
        .collect::<Result<Vec<_>>>()?;

    ensure_dir(&ctx.out_dir)?;
    let rows: Vec<DesignRow> = solutions.iter().map(DesignRow::from).collect();
    append_csv(&ctx.out_dir.join("designs.csv"), &rows)?;
    write_json(&ctx.out_dir.join("designs.json"), &solutions)?;
    Ok(solutions)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeError {
    pub cell: Option<f64>,
    pub centre: Option<f64>,
    pub edge: Option<f64>,
}

fn rel_err(analytical: f64, simulated: f64) -> Option<f64> {
    if simulated != 0.0 {
        Some((analytical - simulated).abs() / simulated.abs())
    } else if analytical == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

impl RelativeError {
    pub fn between(analytical: &ThroughputReport, simulated: &SimReport) -> Self {
        RelativeError {
            cell: rel_err(analytical.tau_bpshz_rb, simulated.tau.mean),
            centre: rel_err(analytical.tau_centre, simulated.tau_centre.mean),
            edge: rel_err(analytical.tau_edge, simulated.tau_edge.mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub rate_model: String,
    pub tau: Estimate,
    pub tau_centre: Estimate,
    pub tau_edge: Estimate,
    pub ci_met: bool,
    pub relative_error: RelativeError,
    pub simulated: SimReport,
    pub analytical: ThroughputReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRun {
    #[serde(rename = "M")]
    pub m: f64,
    pub omega: f64,
    pub zeta: f64,
    pub scheduler: SchedulerKind,
    pub drops: usize,
    pub slots_per_drop: usize,
    pub models: Vec<ModelComparison>,
    /// `(analytical − simulated)/analytical` cell throughput under DRA; the
    /// analysis ignores block errors, so this is expected to be positive.
    pub dra_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub seed: u64,
    pub config_hash: String,
    pub ci_met: bool,
    pub runs: Vec<SimRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct DropRow<'a> {
    #[serde(rename = "M")]
    m: f64,
    omega: f64,
    zeta: f64,
    scheduler: SchedulerKind,
    rate_model: &'a str,
    drop: u64,
    users_centre: usize,
    users_edge: usize,
    tau: f64,
    tau_centre: f64,
    tau_edge: f64,
}

/// Runs the simulator and the analysis side by side for every load,
/// simulated ω and scheduler. Writes `simulate_drops.csv` and
/// `simulate.json`.
pub fn simulate(ctx: &Context) -> Result<SimSummary> {
    let r = &ctx.resolved;
    let cfg = r.config.sim_config();
    let mut runs = Vec::new();
    let mut drop_rows_owned = Vec::new();
    for load in &r.loads {
        for &omega in &r.config.simulation.omegas {
            let part = FfrPartition::from_zeta(omega, r.config.zeta, r.system.radio.num_rbs)?;
            for &s in &r.config.schedulers {
                let job = SimJob {
                    system: &r.system,
                    config: &cfg,
                    partition: &part,
                    scheduler: s,
                    load,
                    rates: &r.rates,
                };
                let (reports, drops) = job.run()?;
                let mut models = Vec::new();
                for (rate, sim) in r.rates.iter().zip(reports) {
                    let analytical = cell_throughput(&r.system, load, &part, s, rate)?;
                    models.push(ModelComparison {
                        rate_model: rate.name().to_string(),
                        tau: sim.tau,
                        tau_centre: sim.tau_centre,
                        tau_edge: sim.tau_edge,
                        ci_met: sim.ci_met,
                        relative_error: RelativeError::between(&analytical, &sim),
                        simulated: sim,
                        analytical,
                    });
                }
                let dra_gap = r
                    .rates
                    .iter()
                    .position(|m| matches!(m, RateModel::Dra(_)))
                    .and_then(|i| {
                        let a = models[i].analytical.tau_bpshz_rb;
                        (a > 0.0).then(|| (a - models[i].tau.mean) / a)
                    });
                for d in &drops {
                    for (ri, rate) in r.rates.iter().enumerate() {
                        drop_rows_owned.push((
                            load.mean_users,
                            omega,
                            part.zeta,
                            s,
                            rate.name(),
                            d.clone(),
                            ri,
                        ));
                    }
                }
                runs.push(SimRun {
                    m: load.mean_users,
                    omega,
                    zeta: part.zeta,
                    scheduler: s,
                    drops: drops.len(),
                    slots_per_drop: cfg.slots_per_drop,
                    models,
                    dra_gap,
                });
            }
        }
    }
    let summary = SimSummary {
        seed: r.config.seed,
        config_hash: ctx.config_hash.clone(),
        ci_met: runs.iter().all(|run| run.models.iter().all(|m| m.ci_met)),
        runs,
    };

    let rows: Vec<DropRow> = drop_rows_owned
        .iter()
        .map(|(m, omega, zeta, s, name, d, ri)| DropRow {
            m: *m,
            omega: *omega,
            zeta: *zeta,
            scheduler: *s,
            rate_model: name,
            drop: d.drop,
            users_centre: d.users_centre,
            users_edge: d.users_edge,
            tau: d.rates[*ri].tau,
            tau_centre: d.rates[*ri].tau_centre,
            tau_edge: d.rates[*ri].tau_edge,
        })
        .collect();
    ensure_dir(&ctx.out_dir)?;
    write_csv(&ctx.out_dir.join("simulate_drops.csv"), &rows)?;
    write_json(&ctx.out_dir.join("simulate.json"), &summary)?;
    Ok(summary)
}

/// Runs the acceptance suite, reporting each criterion as it completes,
/// and writes `acceptance.json`. A failed criterion is an error.
pub fn validate(
    ctx: &Context,
    on_result: &mut dyn FnMut(&CriterionResult),
) -> Result<AcceptanceReport> {
    let options = AcceptanceOptions {
        seed: ctx.config().seed,
        ..AcceptanceOptions::default()
    };
    let report = acceptance::run(&options, on_result)?;
    ensure_dir(&ctx.out_dir)?;
    write_json(&ctx.out_dir.join("acceptance.json"), &report)?;
    if !report.passed {
        let failed: Vec<String> = report
            .criteria
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.to_string())
            .collect();
        return Err(CliError::Acceptance(format!(
            "criteria {} failed",
            failed.join(", ")
        )));
    }
    Ok(report)
}
