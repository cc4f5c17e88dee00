//! Acceptance suite: nine end-to-end checks of the analytical engine, the
//! simulator and the design solvers on the LTE reference deployment.

use std::f64::consts::PI;
use std::fmt;

use ffr_core::analysis::{
    cell_throughput, p_centre, FfrPartition, LoadModel, SchedulerKind, SystemModel,
    ThroughputReport,
};
use ffr_core::channel::avg_power_profile;
use ffr_core::geometry::Region;
use ffr_core::montecarlo::{simulate, SimConfig, SimReport};
use ffr_core::optimizer::{solve_apd, solve_fxd, DesignGrid, DesignProblem};
use ffr_core::rate::{CraParams, McsTable, RateModel};
use ffr_core::rng::StreamKey;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::sim::SimJob;

/// Top rate of the LTE MCS table in bit/s/Hz.
pub const DRA_PEAK_BPS_HZ: f64 = 5.55;

#[derive(Debug, Clone)]
pub struct AcceptanceOptions {
    pub system: SystemModel,
    pub seed: u64,
    pub slots_per_drop: usize,
    /// Initial drop counts for the two simulated loads; more drops are added
    /// until the CI target is met.
    pub drops_m8: usize,
    pub drops_m32: usize,
    /// Cap on the drop count, as a multiple of the initial count.
    pub max_drop_factor: usize,
    pub ci_target: f64,
    pub ks_draws: usize,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions {
            system: SystemModel::lte_default(),
            seed: 1,
            slots_per_drop: 20,
            drops_m8: 1500,
            drops_m32: 400,
            max_drop_factor: 4,
            ci_target: 0.02,
            ks_draws: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{tag}] criterion {}: {}: {}",
            self.id, self.name, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

struct Models {
    cra: RateModel,
    dra: RateModel,
}

impl Models {
    fn new(system: &SystemModel) -> Result<Self> {
        Ok(Models {
            cra: RateModel::Cra(CraParams::new(1.0, system.radio.symbol_time_s)?),
            dra: RateModel::Dra(McsTable::lte(0.1)?),
        })
    }

    fn both(&self) -> [RateModel; 2] {
        [self.cra.clone(), self.dra.clone()]
    }
}

/// One simulated configuration of the agreement sweep.
struct SweepEntry {
    m: f64,
    omega: f64,
    scheduler: SchedulerKind,
    drops: usize,
    /// Indexed like `Models::both`.
    simulated: Vec<SimReport>,
    analytical: Vec<ThroughputReport>,
    /// Largest per-drop region throughput under DRA (bit/s/Hz per RB).
    max_drop_dra_region: f64,
}

const SWEEP_LOADS: [f64; 2] = [8.0, 32.0];
const SWEEP_OMEGAS: [f64; 3] = [0.5, 0.7, 0.9];
const SWEEP_ZETA: f64 = 0.52;

fn run_sweep(opts: &AcceptanceOptions, models: &Models) -> Result<Vec<SweepEntry>> {
    let system = &opts.system;
    let rates = models.both();
    let mut out = Vec::new();
    for m in SWEEP_LOADS {
        let load = LoadModel::new(m)?;
        let initial = if m <= 8.0 {
            opts.drops_m8
        } else {
            opts.drops_m32
        };
        let cfg = SimConfig {
            drops: initial,
            slots_per_drop: opts.slots_per_drop,
            seed: opts.seed,
            ci_target: opts.ci_target,
            ..SimConfig::default()
        };
        for omega in SWEEP_OMEGAS {
            let part = FfrPartition::from_zeta(omega, SWEEP_ZETA, system.radio.num_rbs)?;
            for s in SchedulerKind::ALL {
                let job = SimJob {
                    system,
                    config: &cfg,
                    partition: &part,
                    scheduler: s,
                    load: &load,
                    rates: &rates,
                };
                let (simulated, drops) = job.run_to_target(initial * opts.max_drop_factor)?;
                let analytical = rates
                    .iter()
                    .map(|r| cell_throughput(system, &load, &part, s, r))
                    .collect::<ffr_core::Result<Vec<_>>>()?;
                let max_drop_dra_region = drops
                    .iter()
                    .map(|d| d.rates[1].tau_centre.max(d.rates[1].tau_edge))
                    .fold(0.0, f64::max);
                out.push(SweepEntry {
                    m,
                    omega,
                    scheduler: s,
                    drops: drops.len(),
                    simulated,
                    analytical,
                    max_drop_dra_region,
                });
            }
        }
    }
    Ok(out)
}

fn criterion(id: u8, name: &str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        name: name.to_string(),
        passed,
        detail,
    }
}

fn agreement(sweep: &[SweepEntry]) -> CriterionResult {
    let mut total = 0;
    let mut within = 0;
    let mut ci_ok = 0;
    let mut worst = (0.0f64, String::new());
    let mut worst_ci = 0.0f64;
    for e in sweep {
        for (sim, ana) in e.simulated.iter().zip(&e.analytical) {
            total += 1;
            let err = (ana.tau_bpshz_rb - sim.tau.mean).abs() / sim.tau.mean;
            if err <= 0.05 {
                within += 1;
            }
            if sim.ci_met {
                ci_ok += 1;
            }
            worst_ci = worst_ci.max(sim.tau.relative_ci());
            if err > worst.0 || worst.1.is_empty() {
                worst = (
                    err,
                    format!(
                        "M={} ω={} {}/{}",
                        e.m,
                        e.omega,
                        e.scheduler.as_str(),
                        ana.rate_model
                    ),
                );
            }
        }
    }
    let drops_lo = sweep.iter().map(|e| e.drops).min().unwrap_or(0);
    let drops_hi = sweep.iter().map(|e| e.drops).max().unwrap_or(0);
    criterion(
        1,
        "analytical vs Monte Carlo agreement",
        total == 36 && within == total && ci_ok == total,
        format!(
            "{within}/{total} within 5% (worst {:.2}% at {}), CI ≤ 2% in {ci_ok}/{total} (worst {:.2}%), {drops_lo}..{drops_hi} drops",
            100.0 * worst.0,
            worst.1,
            100.0 * worst_ci
        ),
    )
}

fn scheduler_ordering(
    opts: &AcceptanceOptions,
    models: &Models,
    sweep: &[SweepEntry],
) -> Result<CriterionResult> {
    let system = &opts.system;
    let mut cases = Vec::new();
    for m in [2.0, 8.0, 32.0, 128.0] {
        for omega in [0.2, 0.5, 0.7, 0.9, 1.0] {
            for zeta in [0.52, 1.0] {
                for rate in models.both() {
                    cases.push((m, omega, zeta, rate));
                }
            }
        }
    }
    let violations: Vec<String> = cases
        .par_iter()
        .map(|(m, omega, zeta, rate)| -> Result<Option<String>> {
            let load = LoadModel::new(*m)?;
            let part = FfrPartition::from_zeta(*omega, *zeta, system.radio.num_rbs)?;
            let t = |s| cell_throughput(system, &load, &part, s, rate);
            let (rr, pf, ms) = (
                t(SchedulerKind::Rr)?,
                t(SchedulerKind::Pf)?,
                t(SchedulerKind::Msinr)?,
            );
            let tol = |a: &ThroughputReport, b: &ThroughputReport| {
                1e-9 * b.tau_bpshz_rb + a.quadrature_error + b.quadrature_error
            };
            let ok = rr.tau_bpshz_rb <= pf.tau_bpshz_rb + tol(&rr, &pf)
                && pf.tau_bpshz_rb <= ms.tau_bpshz_rb + tol(&pf, &ms);
            Ok((!ok).then(|| {
                format!(
                    "M={m} ω={omega} ζ={zeta} {}: RR {} PF {} MSINR {}",
                    rate.name(),
                    rr.tau_bpshz_rb,
                    pf.tau_bpshz_rb,
                    ms.tau_bpshz_rb
                )
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut mc_checked = 0;
    let mut mc_bad = Vec::new();
    for m in SWEEP_LOADS {
        for omega in SWEEP_OMEGAS {
            let find = |s| {
                sweep
                    .iter()
                    .find(|e| e.m == m && e.omega == omega && e.scheduler == s)
            };
            let (Some(rr), Some(pf), Some(ms)) = (
                find(SchedulerKind::Rr),
                find(SchedulerKind::Pf),
                find(SchedulerKind::Msinr),
            ) else {
                continue;
            };
            for ri in 0..2 {
                mc_checked += 1;
                let (a, b, c) = (
                    &rr.simulated[ri].tau,
                    &pf.simulated[ri].tau,
                    &ms.simulated[ri].tau,
                );
                let ok = a.mean - a.ci95 <= b.mean + b.ci95 && b.mean - b.ci95 <= c.mean + c.ci95;
                if !ok {
                    mc_bad.push(format!(
                        "M={m} ω={omega} {}",
                        rr.simulated[ri].report.rate_model
                    ));
                }
            }
        }
    }
    let passed = violations.is_empty() && mc_bad.is_empty() && mc_checked == 12;
    let mut detail = format!(
        "analytical {}/{} configs ordered, Monte Carlo {}/{} ordered within CI",
        cases.len() - violations.len(),
        cases.len(),
        mc_checked - mc_bad.len(),
        mc_checked
    );
    if let Some(v) = violations.first().or(mc_bad.first()) {
        detail.push_str(&format!("; first violation: {v}"));
    }
    Ok(criterion(2, "scheduler ordering", passed, detail))
}

fn rr_msinr_identity(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let system = &opts.system;
    let part = FfrPartition::from_zeta(0.7, SWEEP_ZETA, system.radio.num_rbs)?;
    let mut worst = 0.0f64;
    let mut points = 0;
    for region in Region::ALL {
        let Some(cdf) = system.region_cdf(region, &part)? else {
            continue;
        };
        for i in 0..200 {
            let x = 10f64.powf(-3.0 + 7.0 * i as f64 / 199.0);
            let ms1 = cdf.cond_cdf(x, 1, SchedulerKind::Msinr);
            for k in [1, 2, 5, 20] {
                points += 1;
                worst = worst.max((cdf.cond_cdf(x, k, SchedulerKind::Rr) - ms1).abs());
            }
        }
    }
    Ok(criterion(
        3,
        "round robin equals single-user max-SINR",
        points == 1600 && worst <= 2.0 * f64::EPSILON,
        format!("{points} points, max |ΔF| = {worst:e}"),
    ))
}

fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

fn sinr_cdf_oracle(opts: &AcceptanceOptions) -> Result<CriterionResult> {
    let system = &opts.system;
    let part = FfrPartition::from_zeta(0.7, SWEEP_ZETA, system.radio.num_rbs)?;
    let key = StreamKey::from_seed(opts.seed).child(0x4b53);
    let g = &system.geometry;
    let mut worst = 0.0f64;
    for pair in 0..10u64 {
        let k = key.child(pair);
        let d = g.min_distance + (g.circle_radius - g.min_distance) * k.uniform(0);
        let theta = 2.0 * PI * k.uniform(1);
        let band = if k.uniform(2) < 0.5 {
            Region::Centre
        } else {
            Region::Edge
        };
        let profile = avg_power_profile(d, theta, band, &system.radio, g, &part)?;
        let draws = k.child(1);
        let stride = profile.interferers.len() as u64 + 1;
        let mut samples: Vec<f64> = (0..opts.ks_draws as u64)
            .map(|n| {
                let base = n * stride;
                let signal = draws.exp1(base) * profile.signal;
                let interference: f64 = profile
                    .interferers
                    .iter()
                    .enumerate()
                    .map(|(b, &p)| draws.exp1(base + 1 + b as u64) * p)
                    .sum();
                signal / (profile.noise + interference)
            })
            .collect();
        let ks = ks_distance(&mut samples, |x| {
            profile.conditional_sinr_cdf(x).unwrap_or(f64::NAN)
        });
        worst = worst.max(ks);
    }
    Ok(criterion(
        4,
        "conditional SINR CDF vs fading draws",
        worst <= 0.01,
        format!(
            "10 (d, band) pairs, {} draws each, max KS = {worst:.4}",
            opts.ks_draws
        ),
    ))
}

fn apd_full_reuse(opts: &AcceptanceOptions, models: &Models) -> Result<CriterionResult> {
    let mut parts = Vec::new();
    let mut passed = true;
    for m in [8.0, 128.0] {
        for rate in models.both() {
            let problem =
                DesignProblem::new(SchedulerKind::Msinr, rate.clone(), LoadModel::new(m)?);
            let sol = solve_apd(&opts.system, &problem)?;
            passed &= sol.zeta == 1.0;
            parts.push(format!("M={m} {}: ζ*={}", rate.name(), sol.zeta));
        }
    }
    Ok(criterion(
        5,
        "all-parameter design with max-SINR uses full reuse",
        passed,
        parts.join(", "),
    ))
}

const QOS_LOADS: [f64; 3] = [8.0, 32.0, 128.0];

fn qos_structure(opts: &AcceptanceOptions, models: &Models) -> Result<CriterionResult> {
    let mut tasks = Vec::new();
    for m in QOS_LOADS {
        for s in SchedulerKind::ALL {
            tasks.push((m, s));
        }
    }
    let results = tasks
        .par_iter()
        .map(|&(m, s)| -> Result<_> {
            let problem = DesignProblem::new(s, models.cra.clone(), LoadModel::new(m)?);
            let grid = DesignGrid::build(&opts.system, &problem)?;
            Ok((m, s, grid.solve_qoscd(0.02)?, grid.solve_qoscd(0.2)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut passed = true;
    let mut zetas = Vec::new();
    let mut problems = Vec::new();
    for (m, s, lo, hi) in &results {
        for sol in [lo, hi] {
            let slack = sol.constraint_slack.unwrap_or(f64::NEG_INFINITY);
            if !sol.feasible || slack < -1e-12 {
                passed = false;
                problems.push(format!(
                    "M={m} {} q={:?} infeasible",
                    s.as_str(),
                    sol.design.q()
                ));
            }
        }
        if *s == SchedulerKind::Msinr {
            zetas.push(format!("M={m}: {}", lo.zeta));
            if lo.zeta < 0.90 {
                passed = false;
                problems.push(format!("M={m} MSINR ζ*={} < 0.90", lo.zeta));
            }
        }
        if !(hi.tau < lo.tau) {
            passed = false;
            problems.push(format!(
                "M={m} {}: τ*(0.2)={} ≥ τ*(0.02)={}",
                s.as_str(),
                hi.tau,
                lo.tau
            ));
        }
    }
    let mut detail = format!(
        "MSINR ζ* at q=0.02 ({}), τ*(0.2) < τ*(0.02) and constraint met for {} of {} cases",
        zetas.join(", "),
        results.len() - problems.len().min(results.len()),
        results.len()
    );
    if let Some(p) = problems.first() {
        detail.push_str(&format!("; {p}"));
    }
    Ok(criterion(
        6,
        "QoS-constrained design structure",
        passed,
        detail,
    ))
}

fn fxd_trend(opts: &AcceptanceOptions, models: &Models) -> Result<CriterionResult> {
    let loads = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0];
    let mut tasks = Vec::new();
    for s in SchedulerKind::ALL {
        for m in loads {
            tasks.push((s, m));
        }
    }
    let omegas = tasks
        .par_iter()
        .map(|&(s, m)| -> Result<f64> {
            let problem = DesignProblem::new(s, models.cra.clone(), LoadModel::new(m)?);
            Ok(solve_fxd(&opts.system, &problem, SWEEP_ZETA)?.omega)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, s) in SchedulerKind::ALL.iter().enumerate() {
        let w = &omegas[i * loads.len()..(i + 1) * loads.len()];
        passed &= w.windows(2).all(|p| p[1] <= p[0] + 1e-3);
        let list: Vec<String> = w.iter().map(|x| format!("{x:.3}")).collect();
        parts.push(format!("{} [{}]", s.as_str(), list.join(" ")));
    }
    Ok(criterion(
        7,
        "fixed-spectrum design ω* decreases with load",
        passed,
        format!("ω* over M = 4..128: {}", parts.join(", ")),
    ))
}

fn dra_ceiling(
    opts: &AcceptanceOptions,
    models: &Models,
    sweep: &[SweepEntry],
) -> Result<CriterionResult> {
    let system = &opts.system;
    let bb = system.radio.rb_bandwidth_hz();
    let cap = bb * DRA_PEAK_BPS_HZ * (1.0 + 1e-12);
    let mut analytic_max = 0.0f64;
    for omega in [0.3, 0.7, 1.0] {
        let part = FfrPartition::from_zeta(omega, SWEEP_ZETA, system.radio.num_rbs)?;
        for region in Region::ALL {
            let Some(cdf) = system.region_cdf(region, &part)? else {
                continue;
            };
            for s in SchedulerKind::ALL {
                let t = cdf.rb_throughputs(300, s, &models.dra)?;
                analytic_max = t.bps.iter().copied().fold(analytic_max, f64::max);
            }
        }
    }
    let sim_max = sweep
        .iter()
        .map(|e| e.max_drop_dra_region)
        .fold(0.0, f64::max);
    let ceiling_ok = analytic_max <= cap && sim_max * bb <= cap && !sweep.is_empty();

    let part = FfrPartition::from_zeta(0.7, SWEEP_ZETA, system.radio.num_rbs)?;
    let gain = |rate: &RateModel| -> Result<f64> {
        let t = |m| -> Result<f64> {
            Ok(cell_throughput(
                system,
                &LoadModel::new(m)?,
                &part,
                SchedulerKind::Msinr,
                rate,
            )?
            .tau_bpshz_rb)
        };
        Ok(t(128.0)? / t(8.0)? - 1.0)
    };
    let (g_cra, g_dra) = (gain(&models.cra)?, gain(&models.dra)?);
    let ratio = g_dra / g_cra;

    let gaps: Vec<f64> = sweep
        .iter()
        .map(|e| {
            (e.analytical[1].tau_bpshz_rb - e.simulated[1].tau.mean) / e.analytical[1].tau_bpshz_rb
        })
        .collect();
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    Ok(criterion(
        8,
        "DRA ceiling and saturation",
        ceiling_ok && ratio < 0.5,
        format!(
            "peak per-RB rate {:.4} (analytical) / {:.4} (simulated) of {DRA_PEAK_BPS_HZ} bit/s/Hz; MSINR gain M=8→128: CRA {:.3}, DRA {:.3}, ratio {:.3}; mean DRA analytical-minus-simulated gap {:.2}%",
            analytic_max / bb,
            sim_max,
            g_cra,
            g_dra,
            ratio,
            100.0 * mean_gap
        ),
    ))
}

type Check = std::result::Result<(), String>;

fn check_cdf_bounds(opts: &AcceptanceOptions, key: StreamKey) -> Result<Check> {
    let system = &opts.system;
    let g = &system.geometry;
    let part = FfrPartition::from_zeta(0.7, SWEEP_ZETA, system.radio.num_rbs)?;
    for case in 0..20u64 {
        let k = key.child(case);
        let d = g.min_distance + (g.circle_radius - g.min_distance) * k.uniform(0);
        let band = if k.uniform(1) < 0.5 {
            Region::Centre
        } else {
            Region::Edge
        };
        let profile = avg_power_profile(d, 2.0 * PI * k.uniform(2), band, &system.radio, g, &part)?;
        if profile.conditional_sinr_cdf(0.0)? != 0.0 {
            return Ok(Err(format!("F(0) ≠ 0 at d={d}")));
        }
        let mut prev = 0.0;
        for i in 0..200 {
            let x = 10f64.powf(-4.0 + 9.0 * i as f64 / 199.0);
            let f = profile.conditional_sinr_cdf(x)?;
            if !(0.0..=1.0).contains(&f) || f < prev - 1e-15 {
                return Ok(Err(format!(
                    "SINR CDF not monotone in [0, 1] at d={d}, x={x}"
                )));
            }
            prev = f;
        }
    }
    Ok(Ok(()))
}

fn check_dominance(opts: &AcceptanceOptions, key: StreamKey) -> Result<Check> {
    let system = &opts.system;
    for case in 0..40u64 {
        let k = key.child(case);
        let omega = 0.1 + 0.9 * k.uniform(0);
        let n_edge = (k.word(1) % 34) as usize;
        let part = FfrPartition::from_counts(omega, system.radio.num_rbs, n_edge)?;
        for region in Region::ALL {
            let Some(cdf) = system.region_cdf(region, &part)? else {
                continue;
            };
            for j in 0..10u64 {
                let x = 10f64.powf(-3.0 + 6.0 * k.uniform(2 + 2 * j));
                let users = 1 + (k.word(3 + 2 * j) % 60) as usize;
                let ms = cdf.cond_cdf(x, users, SchedulerKind::Msinr);
                let pf = cdf.cond_cdf(x, users, SchedulerKind::Pf);
                let rr = cdf.cond_cdf(x, users, SchedulerKind::Rr);
                if !(ms <= pf + 1e-12 && pf <= rr + 1e-12) {
                    return Ok(Err(format!(
                        "dominance broken at ω={omega}, k={users}, x={x}: {ms} {pf} {rr}"
                    )));
                }
            }
        }
    }
    Ok(Ok(()))
}

fn check_staircase(key: StreamKey) -> Result<Check> {
    let table = McsTable::lte(0.1)?;
    let mut gammas: Vec<f64> = (0..2000u64)
        .map(|i| 10f64.powf((-10.0 + 40.0 * key.uniform(i)) / 10.0))
        .collect();
    gammas.sort_by(f64::total_cmp);
    let mut prev = (0, 0.0);
    for g in gammas {
        let m = table.select_mode(g);
        let bits = table.bits_per_symbol(m);
        if m < prev.0 || bits < prev.1 {
            return Ok(Err(format!("rate staircase decreases at γ={g}")));
        }
        if m >= 1 && table.bler(g, m) > table.target_bler() + 1e-12 {
            return Ok(Err(format!("selected mode exceeds target BLER at γ={g}")));
        }
        prev = (m, bits);
    }
    Ok(Ok(()))
}

fn check_poisson_mass(opts: &AcceptanceOptions) -> Result<Check> {
    for m in [0.0, 1.0, 8.0, 32.0, 128.0, 400.0] {
        for delta in [1e-3, 1e-6, 1e-9] {
            let pmf = LoadModel::with_truncation(m, delta)?.served_pmf(&opts.system.geometry)?;
            let total: f64 = pmf.iter().sum();
            if !(total >= 1.0 - delta && total <= 1.0 + 1e-12) {
                return Ok(Err(format!(
                    "truncated Poisson mass {total} for M={m}, δ={delta}"
                )));
            }
        }
    }
    Ok(Ok(()))
}

fn check_quadrature_refinement(opts: &AcceptanceOptions, models: &Models) -> Result<Check> {
    let base = &opts.system;
    let mut fine = base.clone();
    fine.options.distance_nodes = 2 * base.options.distance_nodes;
    let load = LoadModel::new(32.0)?;
    for omega in [0.3, 0.7, 0.95] {
        let part = FfrPartition::from_zeta(omega, SWEEP_ZETA, base.radio.num_rbs)?;
        for s in SchedulerKind::ALL {
            for rate in models.both() {
                let a = cell_throughput(base, &load, &part, s, &rate)?.tau_bpshz_rb;
                let b = cell_throughput(&fine, &load, &part, s, &rate)?.tau_bpshz_rb;
                if (a - b).abs() >= 1e-6 * b {
                    return Ok(Err(format!(
                        "distance quadrature unstable at ω={omega}: {a} vs {b}"
                    )));
                }
            }
        }
    }
    Ok(Ok(()))
}

fn check_seed_determinism(opts: &AcceptanceOptions, models: &Models) -> Result<Check> {
    let system = &opts.system;
    let part = FfrPartition::from_zeta(0.7, SWEEP_ZETA, system.radio.num_rbs)?;
    let load = LoadModel::new(8.0)?;
    let rates = models.both();
    let cfg = |seed| SimConfig {
        drops: 8,
        slots_per_drop: 10,
        seed,
        ..SimConfig::default()
    };
    for s in SchedulerKind::ALL {
        let (c1, c2) = (cfg(opts.seed), cfg(opts.seed.wrapping_add(1)));
        let job = |c| SimJob {
            system,
            config: c,
            partition: &part,
            scheduler: s,
            load: &load,
            rates: &rates,
        };
        let a = job(&c1).run()?;
        let b = job(&c1).run()?;
        let sequential = simulate(system, &c1, &part, s, &load, &rates)?;
        let other = job(&c2).run()?;
        if a != b || a != sequential {
            return Ok(Err(format!("{} simulation not reproducible", s.as_str())));
        }
        if a.1 == other.1 {
            return Ok(Err(format!("{} simulation ignores the seed", s.as_str())));
        }
    }
    Ok(Ok(()))
}

fn property_suites(opts: &AcceptanceOptions, models: &Models) -> Result<CriterionResult> {
    let key = StreamKey::from_seed(opts.seed).child(0x5052);
    let checks: [(&str, Check); 7] = [
        ("CDF bounds", check_cdf_bounds(opts, key.child(1))?),
        ("dominance", check_dominance(opts, key.child(2))?),
        ("staircase", check_staircase(key.child(3))?),
        ("Poisson mass", check_poisson_mass(opts)?),
        (
            "quadrature refinement",
            check_quadrature_refinement(opts, models)?,
        ),
        ("seed determinism", check_seed_determinism(opts, models)?),
        ("region split", check_region_split(opts)?),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter_map(|(name, c)| c.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let names: Vec<&str> = checks.iter().map(|(n, _)| *n).collect();
    let detail = if failed.is_empty() {
        format!("{} suites hold ({})", checks.len(), names.join(", "))
    } else {
        failed.join("; ")
    };
    Ok(criterion(9, "property suites", failed.is_empty(), detail))
}

fn check_region_split(opts: &AcceptanceOptions) -> Result<Check> {
    let g = &opts.system.geometry;
    let mut prev = 0.0;
    for i in 0..=100 {
        let omega = g.omega_min() + (1.0 - g.omega_min()) * i as f64 / 100.0;
        let pc = p_centre(omega, g)?;
        if !(0.0..=1.0).contains(&pc) || pc < prev {
            return Ok(Err(format!("P(centre) not monotone at ω={omega}")));
        }
        prev = pc;
    }
    Ok(Ok(()))
}

/// Runs all criteria in order, calling `on_result` after each one.
pub fn run(
    options: &AcceptanceOptions,
    on_result: &mut dyn FnMut(&CriterionResult),
) -> Result<AcceptanceReport> {
    let models = Models::new(&options.system)?;
    let mut criteria = Vec::new();
    let mut push = |c: CriterionResult, list: &mut Vec<CriterionResult>| {
        on_result(&c);
        list.push(c);
    };
    let sweep = run_sweep(options, &models)?;
    push(agreement(&sweep), &mut criteria);
    push(scheduler_ordering(options, &models, &sweep)?, &mut criteria);
    push(rr_msinr_identity(options)?, &mut criteria);
    push(sinr_cdf_oracle(options)?, &mut criteria);
    push(apd_full_reuse(options, &models)?, &mut criteria);
    push(qos_structure(options, &models)?, &mut criteria);
    push(fxd_trend(options, &models)?, &mut criteria);
    push(dra_ceiling(options, &models, &sweep)?, &mut criteria);
    push(property_suites(options, &models)?, &mut criteria);
    Ok(AcceptanceReport {
        seed: options.seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}
