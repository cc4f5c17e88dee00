//! Discrete-time system-level simulator.
//!
//! Each drop places a Poisson number of users uniformly in the served
//! annulus of the tagged cell, then runs the schedulers slot by slot over
//! fresh Rayleigh fades on every (BS, UE, RB) link. Interfering cells are
//! fully loaded. Because the schedule does not depend on the rate model,
//! one pass produces results for any number of rate models.
//!
//! Draws come from counter-based streams keyed by (drop, slot, UE, RB, BS)
//! so a drop's outcome is independent of which worker runs it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use rand_core::RngCore;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    FfrPartition, LoadModel, Provenance, SchedulerKind, SystemModel, ThroughputReport,
};
use crate::channel::{profile_at, SinrKernel};
use crate::error::{Error, Result};
use crate::geometry::{NetworkGeometry, Region};
use crate::rate::RateModel;
use crate::rng::StreamKey;

/// Draw indices reserved per RB in a (slot, UE) stream.
const DRAWS_PER_RB: u64 = 32;
const BLOCK_ERROR_DRAW: u64 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub drops: usize,
    pub slots_per_drop: usize,
    /// PF averaging window `W` in slots.
    pub pf_window: usize,
    /// Slots discarded before measuring; only PF carries state across slots.
    pub warmup_slots: usize,
    pub seed: u64,
    /// Largest acceptable relative 95% CI half-width of the cell throughput.
    pub ci_target: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            drops: 500,
            slots_per_drop: 200,
            pf_window: 100,
            warmup_slots: 200,
            seed: 1,
            ci_target: 0.02,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.drops < 2 {
            return Err(Error::param(
                "drops",
                "need at least 2 drops for a confidence interval",
            ));
        }
        if self.slots_per_drop == 0 {
            return Err(Error::param("slots_per_drop", "must be at least 1"));
        }
        if self.pf_window < 50 {
            return Err(Error::param(
                "pf_window",
                "PF window must be at least 50 slots",
            ));
        }
        if self.warmup_slots < self.pf_window {
            return Err(Error::param(
                "warmup_slots",
                "warmup must cover at least one PF window",
            ));
        }
        if !(self.ci_target > 0.0) {
            return Err(Error::param("ci_target", "must be positive"));
        }
        Ok(())
    }

    /// Warmup actually run for `scheduler`.
    pub fn effective_warmup(&self, scheduler: SchedulerKind) -> usize {
        match scheduler {
            SchedulerKind::Pf => self.warmup_slots,
            SchedulerKind::Msinr | SchedulerKind::Rr => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserPosition {
    pub d: f64,
    pub theta: f64,
    pub region: Region,
}

/// One PPP realisation in the served annulus `[R_0m, R_m]`.
pub fn drop_users<R: RngCore>(
    load: &LoadModel,
    geometry: &NetworkGeometry,
    omega: f64,
    rng: &mut R,
) -> Vec<UserPosition> {
    let mean = load.served_mean(geometry);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map(|p| p.sample(rng) as usize)
            .unwrap_or(0)
    } else {
        0
    };
    let r0_sq = geometry.min_distance * geometry.min_distance;
    let rm_sq = geometry.circle_radius * geometry.circle_radius;
    let threshold = omega * geometry.circle_radius;
    (0..count)
        .map(|_| {
            let u = unit(rng);
            let d = (r0_sq + u * (rm_sq - r0_sq)).sqrt();
            let theta = 2.0 * PI * unit(rng);
            let region = if d <= threshold {
                Region::Centre
            } else {
                Region::Edge
            };
            UserPosition { d, theta, region }
        })
        .collect()
}

fn unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Per-UE PF prioritisation state.
#[derive(Debug, Clone, PartialEq)]
pub struct PfState {
    /// Moving average `μ_q` of the SINR delivered to each UE.
    pub mu: Vec<f64>,
}

impl PfState {
    /// `μ_q(t) = (1 − 1/W)·μ_q(t−1) + Σ_n ι_{q,n}(t)·γ_{q,n}(t)/W`.
    pub fn update(&mut self, window: usize, delivered: &[f64]) {
        let w = window as f64;
        for (mu, g) in self.mu.iter_mut().zip(delivered) {
            *mu = (1.0 - 1.0 / w) * *mu + g / w;
        }
    }
}

#[derive(Debug, Clone)]
struct RegionUsers {
    rbs: Range<usize>,
    ids: Vec<u64>,
    kernels: Vec<SinrKernel>,
    interferer_bs: Vec<u64>,
    pf: PfState,
    delivered: Vec<f64>,
    allocations: Vec<u64>,
    sinr: Vec<f64>,
}

/// Users of one drop and their scheduler state.
#[derive(Debug, Clone)]
pub struct DropState {
    scheduler: SchedulerKind,
    pf_window: usize,
    key: StreamKey,
    regions: [RegionUsers; 2],
}

/// Allocation and realised rates of one slot.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlotOutcome {
    /// Scheduled UE of each RB of the tagged cell, `None` if idle.
    pub rb_user: Vec<Option<u64>>,
    pub rb_sinr: Vec<f64>,
    /// `rb_rate[r][n]`: bit/s realised on RB `n` under rate model `r`.
    pub rb_rate: Vec<Vec<f64>>,
}

impl DropState {
    pub fn new(
        system: &SystemModel,
        partition: &FfrPartition,
        scheduler: SchedulerKind,
        pf_window: usize,
        key: StreamKey,
        users: &[UserPosition],
    ) -> Result<Self> {
        let pc = system.radio.per_subcarrier_power(partition)?;
        let geometry = &system.geometry;
        let mk = |region: Region, rbs: Range<usize>| -> Result<RegionUsers> {
            let mut ids = Vec::new();
            let mut kernels = Vec::new();
            for (i, u) in users.iter().enumerate().filter(|(_, u)| u.region == region) {
                ids.push(i as u64);
                kernels
                    .push(profile_at(u.d, u.theta, region, &system.radio, geometry, pc).kernel());
            }
            let mu = if scheduler == SchedulerKind::Pf {
                kernels
                    .iter()
                    .map(|k| k.mean())
                    .collect::<Result<Vec<_>>>()?
            } else {
                vec![1.0; kernels.len()]
            };
            let n = ids.len();
            Ok(RegionUsers {
                rbs,
                ids,
                kernels,
                interferer_bs: geometry
                    .interferers(region)
                    .iter()
                    .map(|&b| b as u64)
                    .collect(),
                pf: PfState { mu },
                delivered: vec![0.0; n],
                allocations: vec![0; n],
                sinr: vec![0.0; n],
            })
        };
        let nc = partition.n_centre;
        Ok(DropState {
            scheduler,
            pf_window,
            key,
            regions: [
                mk(Region::Centre, 0..nc)?,
                mk(Region::Edge, nc..nc + partition.n_edge)?,
            ],
        })
    }

    pub fn users(&self, region: Region) -> usize {
        self.regions[region_index(region)].ids.len()
    }

    pub fn pf_state(&self, region: Region) -> &PfState {
        &self.regions[region_index(region)].pf
    }

    /// Allocation counts per UE of `region` since the last reset.
    pub fn allocations(&self, region: Region) -> &[u64] {
        &self.regions[region_index(region)].allocations
    }

    fn reset_allocations(&mut self) {
        for r in &mut self.regions {
            r.allocations.fill(0);
        }
    }

    /// Schedules every RB of slot `t` and realises its rate under each model.
    pub fn run_slot(
        &mut self,
        t: u64,
        rates: &[RateModel],
        system: &SystemModel,
        out: &mut SlotOutcome,
    ) {
        let n_rbs = self.regions[1].rbs.end;
        out.rb_user.clear();
        out.rb_user.resize(n_rbs, None);
        out.rb_sinr.clear();
        out.rb_sinr.resize(n_rbs, 0.0);
        out.rb_rate.resize(rates.len(), Vec::new());
        for r in out.rb_rate.iter_mut() {
            r.clear();
            r.resize(n_rbs, 0.0);
        }
        let slot_key = self.key.child(t);
        let n_sc = system.radio.subcarriers_per_rb as f64;
        let bb = system.radio.rb_bandwidth_hz();
        let scheduler = self.scheduler;
        let window = self.pf_window;

        for reg in &mut self.regions {
            let k = reg.ids.len();
            if k == 0 {
                continue;
            }
            reg.delivered.fill(0.0);
            let user_keys: Vec<StreamKey> = reg.ids.iter().map(|&id| slot_key.child(id)).collect();
            for (offset, n) in reg.rbs.clone().enumerate() {
                let base = n as u64 * DRAWS_PER_RB;
                let sample = |q: usize| {
                    let uk = user_keys[q];
                    let kern = &reg.kernels[q];
                    let mut interference = kern.noise_ratio;
                    for (r, &b) in kern.interference_ratios.iter().zip(&reg.interferer_bs) {
                        interference += r * uk.exp1(base + b);
                    }
                    uk.exp1(base) / interference
                };
                let (chosen, gamma) = match scheduler {
                    SchedulerKind::Rr => {
                        let q = (t as usize + offset) % k;
                        (q, sample(q))
                    }
                    SchedulerKind::Msinr | SchedulerKind::Pf => {
                        for q in 0..k {
                            reg.sinr[q] = sample(q);
                        }
                        let mut best = 0;
                        let mut best_metric = f64::NEG_INFINITY;
                        for q in 0..k {
                            let m = if scheduler == SchedulerKind::Pf {
                                reg.sinr[q] / reg.pf.mu[q]
                            } else {
                                reg.sinr[q]
                            };
                            if m > best_metric {
                                best_metric = m;
                                best = q;
                            }
                        }
                        (best, reg.sinr[best])
                    }
                };
                reg.allocations[chosen] += 1;
                reg.delivered[chosen] += gamma;
                out.rb_user[n] = Some(reg.ids[chosen]);
                out.rb_sinr[n] = gamma;
                for (ri, rate) in rates.iter().enumerate() {
                    out.rb_rate[ri][n] = match rate {
                        RateModel::Cra(c) => n_sc * c.cra_rate(gamma),
                        RateModel::Dra(table) => {
                            let m = table.select_mode(gamma);
                            if m == 0 {
                                0.0
                            } else {
                                let u = user_keys[chosen].uniform(base + BLOCK_ERROR_DRAW);
                                if u <= table.bler(gamma, m) {
                                    0.0
                                } else {
                                    bb * table.bits_per_symbol(m)
                                }
                            }
                        }
                    };
                }
            }
            if scheduler == SchedulerKind::Pf {
                reg.pf.update(window, &reg.delivered);
            }
        }
    }
}

fn region_index(region: Region) -> usize {
    match region {
        Region::Centre => 0,
        Region::Edge => 1,
    }
}

/// Throughput of one drop under one rate model, averaged over its
/// measured slots.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DropRates {
    /// Cell throughput per RB and Hz, `Σ_n rate_n / (B_b·N_b)`.
    pub tau: f64,
    /// Mean per-RB spectral efficiency of the centre band.
    pub tau_centre: f64,
    pub tau_edge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropStats {
    pub drop: u64,
    pub users_centre: usize,
    pub users_edge: usize,
    pub rates: Vec<DropRates>,
    /// Jain index of the per-UE allocation counts (1 for fewer than 2 UEs).
    pub jain_centre: f64,
    pub jain_edge: f64,
}

fn jain(counts: &[u64]) -> f64 {
    if counts.len() < 2 {
        return 1.0;
    }
    let s: f64 = counts.iter().map(|&c| c as f64).sum();
    let s2: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    if s2 == 0.0 {
        1.0
    } else {
        s * s / (counts.len() as f64 * s2)
    }
}

/// Key of drop `drop` under `seed`.
pub fn drop_key(seed: u64, drop: u64) -> StreamKey {
    StreamKey::from_seed(seed).child(drop)
}

/// Runs one drop and returns its measured throughput for every rate model.
pub fn simulate_drop(
    system: &SystemModel,
    config: &SimConfig,
    partition: &FfrPartition,
    scheduler: SchedulerKind,
    load: &LoadModel,
    rates: &[RateModel],
    drop: u64,
) -> Result<DropStats> {
    let key = drop_key(config.seed, drop);
    let mut placement = key.child(u64::MAX).rng();
    let users = drop_users(load, &system.geometry, partition.omega, &mut placement);
    let mut state = DropState::new(system, partition, scheduler, config.pf_window, key, &users)?;
    let warmup = config.effective_warmup(scheduler);
    let mut out = SlotOutcome::default();
    let mut sums = vec![[0.0f64; 3]; rates.len()];
    for t in 0..warmup + config.slots_per_drop {
        if t == warmup {
            state.reset_allocations();
        }
        state.run_slot(t as u64, rates, system, &mut out);
        if t < warmup {
            continue;
        }
        for (ri, r) in out.rb_rate.iter().enumerate() {
            let c: f64 = r[..partition.n_centre].iter().sum();
            let e: f64 = r[partition.n_centre..].iter().sum();
            sums[ri][0] += c;
            sums[ri][1] += e;
        }
    }
    let slots = config.slots_per_drop as f64;
    let bb = system.radio.rb_bandwidth_hz();
    let n_b = partition.n_rbs as f64;
    let per_rb = |total: f64, n: usize| {
        if n == 0 {
            0.0
        } else {
            total / (slots * bb * n as f64)
        }
    };
    let rates_out = sums
        .iter()
        .map(|s| DropRates {
            tau: (s[0] + s[1]) / (slots * bb * n_b),
            tau_centre: per_rb(s[0], partition.n_centre),
            tau_edge: per_rb(s[1], partition.n_edge),
        })
        .collect();
    Ok(DropStats {
        drop,
        users_centre: state.users(Region::Centre),
        users_edge: state.users(Region::Edge),
        rates: rates_out,
        jain_centre: jain(state.allocations(Region::Centre)),
        jain_edge: jain(state.allocations(Region::Edge)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// 95% confidence half-width of the mean.
    pub ci95: f64,
}

impl Estimate {
    pub fn from_samples(samples: impl Iterator<Item = f64> + Clone) -> Self {
        let n = samples.clone().count();
        if n == 0 {
            return Estimate {
                mean: 0.0,
                ci95: 0.0,
            };
        }
        let mean = samples.clone().sum::<f64>() / n as f64;
        if n < 2 {
            return Estimate { mean, ci95: 0.0 };
        }
        let var = samples.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        Estimate {
            mean,
            ci95: 1.96 * (var / n as f64).sqrt(),
        }
    }

    pub fn relative_ci(&self) -> f64 {
        if self.mean == 0.0 {
            0.0
        } else {
            self.ci95 / self.mean.abs()
        }
    }
}

/// Monte Carlo estimate for one rate model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub drops: usize,
    pub slots_per_drop: usize,
    pub tau: Estimate,
    pub tau_centre: Estimate,
    pub tau_edge: Estimate,
    pub mean_users_centre: f64,
    pub mean_users_edge: f64,
    pub jain_centre: f64,
    pub jain_edge: f64,
    pub ci_target: f64,
    /// The CI half-width of `tau` is within `ci_target` of the mean.
    pub ci_met: bool,
    pub report: ThroughputReport,
}

/// Aggregates per-drop results (in drop order) into one report per rate
/// model.
pub fn summarize(
    system: &SystemModel,
    config: &SimConfig,
    partition: &FfrPartition,
    scheduler: SchedulerKind,
    load: &LoadModel,
    rates: &[RateModel],
    drops: &[DropStats],
) -> Vec<SimReport> {
    let nd = drops.len().max(1) as f64;
    let users_c: usize = drops.iter().map(|d| d.users_centre).sum();
    let users_e: usize = drops.iter().map(|d| d.users_edge).sum();
    let jain_c = drops.iter().map(|d| d.jain_centre).sum::<f64>() / nd;
    let jain_e = drops.iter().map(|d| d.jain_edge).sum::<f64>() / nd;
    let zeta = partition.zeta;
    let pc = crate::analysis::p_centre(partition.omega, &system.geometry).unwrap_or(0.0);
    rates
        .iter()
        .enumerate()
        .map(|(ri, rate)| {
            let tau = Estimate::from_samples(drops.iter().map(|d| d.rates[ri].tau));
            let tau_c = Estimate::from_samples(drops.iter().map(|d| d.rates[ri].tau_centre));
            let tau_e = Estimate::from_samples(drops.iter().map(|d| d.rates[ri].tau_edge));
            // MSINR per-UE values do not average over users
            let (pu_c, pu_e) = if scheduler == SchedulerKind::Msinr {
                (zeta * tau_c.mean, (1.0 - zeta) * tau_e.mean / 3.0)
            } else {
                let per_user = |share: f64, users: usize| {
                    if users == 0 {
                        0.0
                    } else {
                        share * nd / users as f64
                    }
                };
                (
                    per_user(zeta * tau_c.mean, users_c),
                    per_user((1.0 - zeta) * tau_e.mean / 3.0, users_e),
                )
            };
            let bb = system.radio.rb_bandwidth_hz();
            let report = ThroughputReport {
                provenance: Provenance::Simulated,
                scheduler,
                rate_model: String::from(rate.name()),
                mean_users: load.mean_users,
                omega: partition.omega,
                zeta,
                n_centre: partition.n_centre,
                n_edge: partition.n_edge,
                p_centre: pc,
                eta_bps: tau.mean * bb * partition.n_rbs as f64,
                tau_bpshz_rb: tau.mean,
                tau_centre: tau_c.mean,
                tau_edge: tau_e.mean,
                per_ue_tau_centre: pu_c,
                per_ue_tau_edge: pu_e,
                per_ue_degenerate: users_c == 0 || users_e == 0,
                truncation_k_max: 0,
                quadrature_error: 0.0,
            };
            SimReport {
                seed: config.seed,
                drops: drops.len(),
                slots_per_drop: config.slots_per_drop,
                tau,
                tau_centre: tau_c,
                tau_edge: tau_e,
                mean_users_centre: users_c as f64 / nd,
                mean_users_edge: users_e as f64 / nd,
                jain_centre: jain_c,
                jain_edge: jain_e,
                ci_target: config.ci_target,
                ci_met: tau.relative_ci() <= config.ci_target,
                report,
            }
        })
        .collect()
}

/// Runs all drops sequentially and summarises them.
pub fn simulate(
    system: &SystemModel,
    config: &SimConfig,
    partition: &FfrPartition,
    scheduler: SchedulerKind,
    load: &LoadModel,
    rates: &[RateModel],
) -> Result<(Vec<SimReport>, Vec<DropStats>)> {
    config.validate()?;
    let drops = (0..config.drops as u64)
        .map(|d| simulate_drop(system, config, partition, scheduler, load, rates, d))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        summarize(system, config, partition, scheduler, load, rates, &drops),
        drops,
    ))
}
