//! Analytical throughput engine.
//!
//! Per-RB throughput in a region depends only on how many users share the
//! region and on the CDF of the SINR of the scheduled user. That CDF is
//! built from the distance-conditioned SINR CDF `F(x|d)` averaged over the
//! user position:
//!
//! * PF: `E_pos[F(x|pos)^k]` (scheduling metrics treated as i.i.d.),
//! * MSINR: `(E_pos[F(x|pos)])^k`,
//! * RR: `E_pos[F(x|pos)]`, i.e. MSINR with a single user.
//!
//! The position average uses Gauss–Legendre nodes in distance and,
//! optionally, equally spaced angles over one 60° sector of the layout.
//! Cell throughput then averages over the Poisson number of users and its
//! binomial split between the two regions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LOG2_E, PI};

use serde::{Deserialize, Serialize};

use crate::channel::{profile_at, RadioParams, SinrKernel};
use crate::error::{Error, Result};
use crate::geometry::{NetworkGeometry, Region, RegionBounds};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, GaussLegendre};
use crate::rate::RateModel;

/// Spatial and spectral FFR split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FfrPartition {
    /// Distance threshold ratio `ω = R_th / R_m`.
    pub omega: f64,
    /// Spectrum allocation factor `ζ = N_C / N_b`.
    pub zeta: f64,
    pub n_rbs: usize,
    pub n_centre: usize,
    /// RBs in each of the three edge sub-bands.
    pub n_edge: usize,
}

impl FfrPartition {
    /// Partition with `n_edge` RBs per edge sub-band and the rest in the
    /// centre band.
    pub fn from_counts(omega: f64, n_rbs: usize, n_edge: usize) -> Result<Self> {
        if n_rbs == 0 {
            return Err(Error::param("n_rbs", "must be at least 1"));
        }
        if 3 * n_edge > n_rbs {
            return Err(Error::param(
                "n_edge",
                alloc::format!(
                    "{n_edge} edge RBs per sub-band exceed N_b / 3 = {}",
                    n_rbs / 3
                ),
            ));
        }
        if !(omega.is_finite() && omega > 0.0 && omega <= 1.0 + 1e-12) {
            return Err(Error::param("omega", "must lie in (0, 1]"));
        }
        let n_centre = n_rbs - 3 * n_edge;
        Ok(FfrPartition {
            omega: omega.min(1.0),
            zeta: n_centre as f64 / n_rbs as f64,
            n_rbs,
            n_centre,
            n_edge,
        })
    }

    /// Partition for a spectrum allocation factor that must be a member of
    /// the feasible set (within `1e-9`).
    pub fn from_zeta(omega: f64, zeta: f64, n_rbs: usize) -> Result<Self> {
        let n_edge = edge_rbs_for_zeta(zeta, n_rbs)?;
        Self::from_counts(omega, n_rbs, n_edge)
    }

    /// Number of RBs the tagged BS transmits on, `N_C + N_E`.
    pub fn rbs_in_use(&self) -> usize {
        self.n_centre + self.n_edge
    }

    pub fn rbs(&self, region: Region) -> usize {
        match region {
            Region::Centre => self.n_centre,
            Region::Edge => self.n_edge,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }
}

/// Feasible member of `S_ζ` closest to `zeta`.
pub fn nearest_feasible_zeta(zeta: f64, n_rbs: usize) -> f64 {
    let n_b = n_rbs as f64;
    let n_edge = ((n_b - zeta * n_b) / 3.0)
        .round()
        .clamp(0.0, (n_rbs / 3) as f64);
    (n_b - 3.0 * n_edge) / n_b
}

fn edge_rbs_for_zeta(zeta: f64, n_rbs: usize) -> Result<usize> {
    if n_rbs == 0 {
        return Err(Error::param("n_rbs", "must be at least 1"));
    }
    let n_b = n_rbs as f64;
    let n_edge = ((n_b - zeta * n_b) / 3.0).round();
    let valid = zeta.is_finite()
        && n_edge >= 0.0
        && n_edge <= (n_rbs / 3) as f64
        && ((n_b - 3.0 * n_edge) / n_b - zeta).abs() <= 1e-9;
    if !valid {
        return Err(Error::param(
            "zeta",
            alloc::format!(
                "{zeta} is not an admissible spectrum allocation factor for N_b = {n_rbs}; \
                 nearest valid value is {}",
                nearest_feasible_zeta(zeta, n_rbs)
            ),
        ));
    }
    Ok(n_edge as usize)
}

/// Traffic load: Poisson users of mean `M = π·λ_m·R_m²` per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadModel {
    pub mean_users: f64,
    /// Poisson mass `δ` allowed to be dropped by truncation.
    pub truncation_mass: f64,
}

impl LoadModel {
    pub const DEFAULT_TRUNCATION: f64 = 1e-6;

    pub fn new(mean_users: f64) -> Result<Self> {
        Self::with_truncation(mean_users, Self::DEFAULT_TRUNCATION)
    }

    pub fn with_truncation(mean_users: f64, truncation_mass: f64) -> Result<Self> {
        if !(mean_users.is_finite() && mean_users >= 0.0) {
            return Err(Error::param(
                "mean_users",
                "must be finite and non-negative",
            ));
        }
        if !(truncation_mass > 0.0 && truncation_mass < 1.0) {
            return Err(Error::param("truncation_mass", "must lie in (0, 1)"));
        }
        Ok(LoadModel {
            mean_users,
            truncation_mass,
        })
    }

    /// PPP intensity `λ_m` in users per m².
    pub fn density(&self, geometry: &NetworkGeometry) -> f64 {
        self.mean_users / (PI * geometry.circle_radius * geometry.circle_radius)
    }

    /// Mean number of users in the served annulus `[R_0m, R_m]`.
    pub fn served_mean(&self, geometry: &NetworkGeometry) -> f64 {
        let ratio = geometry.omega_min();
        self.mean_users * (1.0 - ratio * ratio)
    }

    /// Poisson pmf of the served user count, truncated at the smallest
    /// `k_max` that keeps at least `1 − δ` of the mass.
    pub fn served_pmf(&self, geometry: &NetworkGeometry) -> Result<Vec<f64>> {
        poisson_pmf_truncated(self.served_mean(geometry), self.truncation_mass)
    }
}

pub(crate) fn poisson_pmf_truncated(mean: f64, truncation_mass: f64) -> Result<Vec<f64>> {
    if mean == 0.0 {
        return Ok(vec![1.0]);
    }
    let ln_mean = mean.ln();
    let mut cap = (mean + 12.0 * mean.sqrt() + 30.0).ceil() as usize;
    for _attempt in 0..4 {
        let mut pmf = Vec::new();
        let mut ln_p = -mean;
        let mut total = 0.0;
        for k in 0..=cap {
            if k > 0 {
                ln_p += ln_mean - (k as f64).ln();
            }
            let p = ln_p.exp();
            pmf.push(p);
            total += p;
            if total >= 1.0 - truncation_mass && k as f64 >= mean {
                return Ok(pmf);
            }
        }
        cap *= 2;
    }
    Err(Error::Numerical {
        context: "Poisson truncation",
        detail: alloc::format!("could not capture 1 - {truncation_mass} of Poisson({mean}) mass"),
    })
}

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Binomial pmf `Binom(j; n, p)` for `j = 0..=n`, evaluated in log space.
pub(crate) fn binomial_pmf(n: usize, p: f64, ln_fact: &[f64]) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n)
        .map(|j| {
            (ln_fact[n] - ln_fact[j] - ln_fact[n - j] + j as f64 * lp + (n - j) as f64 * lq).exp()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Pf,
    Msinr,
    Rr,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 3] =
        [SchedulerKind::Pf, SchedulerKind::Msinr, SchedulerKind::Rr];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchedulerKind::Pf => "pf",
            SchedulerKind::Msinr => "msinr",
            SchedulerKind::Rr => "rr",
        }
    }
}

/// Numerical settings of the analytical engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Gauss–Legendre nodes for the distance average.
    pub distance_nodes: usize,
    /// Equally spaced user angles per 60° sector; 1 evaluates at `θ = 0`.
    pub angle_points: usize,
    /// Absolute tolerance of the CRA integral, in nats.
    pub cra_abs_tol: f64,
    pub cra_max_intervals: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            distance_nodes: 64,
            angle_points: 1,
            cra_abs_tol: 1e-9,
            cra_max_intervals: 4000,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        if self.distance_nodes == 0 {
            return Err(Error::param("distance_nodes", "must be at least 1"));
        }
        if self.angle_points == 0 {
            return Err(Error::param("angle_points", "must be at least 1"));
        }
        if !(self.cra_abs_tol > 0.0) {
            return Err(Error::param("cra_abs_tol", "must be positive"));
        }
        Ok(())
    }

    /// User angles in `[0, π/3)`; the two-ring layout and both interferer
    /// sets are invariant under 60° rotations.
    pub fn angles(&self) -> impl Iterator<Item = f64> {
        let q = self.angle_points;
        (0..q).map(move |i| i as f64 * PI / (3.0 * q as f64))
    }
}

/// Everything the analysis needs about the deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    pub radio: RadioParams,
    pub geometry: NetworkGeometry,
    pub options: AnalysisOptions,
}

impl SystemModel {
    pub fn new(
        radio: RadioParams,
        geometry: NetworkGeometry,
        options: AnalysisOptions,
    ) -> Result<Self> {
        radio.validate()?;
        options.validate()?;
        Ok(SystemModel {
            radio,
            geometry,
            options,
        })
    }

    /// Default LTE radio on a 500 m cell with a 35 m exclusion radius.
    pub fn lte_default() -> Self {
        SystemModel {
            radio: RadioParams::default(),
            geometry: NetworkGeometry::from_cell_radius(500.0, 35.0)
                .expect("default geometry is valid"),
            options: AnalysisOptions::default(),
        }
    }

    /// Position-averaged SINR model of `region`, or `None` if the region
    /// has zero area.
    pub fn region_cdf(
        &self,
        region: Region,
        partition: &FfrPartition,
    ) -> Result<Option<RegionCdf>> {
        RegionCdf::new(self, region, partition)
    }
}

/// Distance-and-angle quadrature of the SINR CDF over one FFR region.
#[derive(Debug, Clone)]
pub struct RegionCdf {
    pub bounds: RegionBounds,
    rb_bandwidth_hz: f64,
    weights: Vec<f64>,
    kernels: Vec<SinrKernel>,
    abs_tol: f64,
    max_intervals: usize,
}

impl RegionCdf {
    pub fn new(
        system: &SystemModel,
        region: Region,
        partition: &FfrPartition,
    ) -> Result<Option<Self>> {
        let bounds = system.geometry.region_bounds(region, partition.omega)?;
        if bounds.is_empty() {
            return Ok(None);
        }
        let pc = system.radio.per_subcarrier_power(partition)?;
        let opts = &system.options;
        let gl = GaussLegendre::new(opts.distance_nodes);
        let q = opts.angle_points as f64;
        let mut weights = Vec::with_capacity(gl.len() * opts.angle_points);
        let mut kernels = Vec::with_capacity(weights.capacity());
        for (d, w) in gl.mapped(bounds.lower, bounds.upper) {
            let wd = w * bounds.distance_pdf(d) / q;
            for theta in opts.angles() {
                let profile = profile_at(d, theta, region, &system.radio, &system.geometry, pc);
                weights.push(wd);
                kernels.push(profile.kernel());
            }
        }
        Ok(Some(RegionCdf {
            bounds,
            rb_bandwidth_hz: system.radio.rb_bandwidth_hz(),
            weights,
            kernels,
            abs_tol: opts.cra_abs_tol,
            max_intervals: opts.cra_max_intervals,
        }))
    }

    /// Region model from explicit position weights and SINR kernels.
    pub fn from_parts(
        bounds: RegionBounds,
        rb_bandwidth_hz: f64,
        weights: Vec<f64>,
        kernels: Vec<SinrKernel>,
        options: &AnalysisOptions,
    ) -> Result<Self> {
        if weights.len() != kernels.len() || weights.is_empty() {
            return Err(Error::param("weights", "need one weight per kernel"));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("weights", "must be non-negative and sum to 1"));
        }
        options.validate()?;
        Ok(RegionCdf {
            bounds,
            rb_bandwidth_hz,
            weights,
            kernels,
            abs_tol: options.cra_abs_tol,
            max_intervals: options.cra_max_intervals,
        })
    }

    pub fn region(&self) -> Region {
        self.bounds.region
    }

    fn position_cdfs(&self, x: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.kernels.iter().map(|k| k.cdf(x)));
    }

    /// Position-averaged single-user CDF `E_pos[F(x|pos)]`.
    pub fn average_cdf(&self, x: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.kernels)
            .map(|(w, k)| w * k.cdf(x))
            .sum()
    }

    /// `1 − F(x|k)` for `k = 1..=out.len()`.
    fn survival_by_count(
        &self,
        x: f64,
        scheduler: SchedulerKind,
        cdfs: &mut Vec<f64>,
        out: &mut [f64],
    ) {
        self.position_cdfs(x, cdfs);
        match scheduler {
            SchedulerKind::Pf => {
                let mut powers = cdfs.clone();
                for slot in out.iter_mut() {
                    let mut acc = 0.0;
                    for ((w, p), f) in self.weights.iter().zip(powers.iter_mut()).zip(cdfs.iter()) {
                        acc += w * (1.0 - *p);
                        *p *= f;
                    }
                    *slot = acc;
                }
            }
            SchedulerKind::Msinr => {
                let g: f64 = self
                    .weights
                    .iter()
                    .zip(cdfs.iter())
                    .map(|(w, f)| w * f)
                    .sum();
                let mut p = g;
                for slot in out.iter_mut() {
                    *slot = 1.0 - p;
                    p *= g;
                }
                // a single user is served whatever the rule; keep the tail
                // in survival form as for round robin
                if let Some(first) = out.first_mut() {
                    *first = self.average_survival(cdfs);
                }
            }
            SchedulerKind::Rr => out.fill(self.average_survival(cdfs)),
        }
    }

    fn average_survival(&self, cdfs: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(cdfs)
            .map(|(w, f)| w * (1.0 - f))
            .sum()
    }

    /// CDF of the scheduled user's SINR when `k ≥ 1` users share the region.
    pub fn cond_cdf(&self, x: f64, k: usize, scheduler: SchedulerKind) -> f64 {
        let mut cdfs = Vec::new();
        let mut out = vec![0.0; k];
        self.survival_by_count(x, scheduler, &mut cdfs, &mut out);
        (1.0 - out[k - 1]).clamp(0.0, 1.0)
    }

    /// Mean per-RB throughput for `k = 0..=k_max` users.
    pub fn rb_throughputs(
        &self,
        k_max: usize,
        scheduler: SchedulerKind,
        rate: &RateModel,
    ) -> Result<RbThroughputs> {
        let mut bps = vec![0.0; k_max + 1];
        let mut error = vec![0.0; k_max + 1];
        if k_max == 0 {
            return Ok(RbThroughputs { bps, error });
        }
        // RR does not depend on k, one component is enough
        let dim = if scheduler == SchedulerKind::Rr {
            1
        } else {
            k_max
        };
        match rate {
            RateModel::Dra(table) => {
                let thresholds = table.thresholds();
                let n_m = table.len();
                let mut cdfs = Vec::new();
                // F(Γ^(m) | k) for m = 1..=N_m, per k
                let mut at_threshold = vec![vec![0.0; dim]; n_m];
                for (m, row) in at_threshold.iter_mut().enumerate() {
                    self.survival_by_count(thresholds[m], scheduler, &mut cdfs, row);
                    for s in row.iter_mut() {
                        *s = 1.0 - *s;
                    }
                }
                for (k, slot) in bps.iter_mut().enumerate().skip(1) {
                    let c = if dim == 1 { 0 } else { k - 1 };
                    let mut acc = 0.0;
                    for m in 1..=n_m {
                        let lower = at_threshold[m - 1][c];
                        let upper = if m == n_m { 1.0 } else { at_threshold[m][c] };
                        acc += table.bits_per_symbol(m) * (upper - lower);
                    }
                    *slot = self.rb_bandwidth_hz * acc;
                }
            }
            RateModel::Cra(cra) => {
                let gap = cra.coding_gap;
                let mut cdfs = Vec::new();
                let opts = AdaptiveOptions {
                    abs_tol: self.abs_tol,
                    rel_tol: 0.0,
                    max_intervals: self.max_intervals,
                    initial_panels: 16,
                };
                // x = Λu/(1−u): dx/(Λ + x) = du/(1 − u)
                let integral = integrate_adaptive(
                    |u, out| {
                        if u >= 1.0 {
                            out.fill(0.0);
                            return;
                        }
                        let x = gap * u / (1.0 - u);
                        self.survival_by_count(x, scheduler, &mut cdfs, out);
                        let jac = 1.0 / (1.0 - u);
                        for v in out.iter_mut() {
                            *v *= jac;
                        }
                    },
                    dim,
                    0.0,
                    1.0,
                    &opts,
                )?;
                let scale = self.rb_bandwidth_hz * LOG2_E;
                for k in 1..=k_max {
                    let c = if dim == 1 { 0 } else { k - 1 };
                    bps[k] = scale * integral.value[c];
                    error[k] = scale * integral.error[c];
                }
            }
        }
        Ok(RbThroughputs { bps, error })
    }
}

/// Per-RB throughput table indexed by the number of users in the region.
#[derive(Debug, Clone, PartialEq)]
pub struct RbThroughputs {
    pub bps: Vec<f64>,
    /// Quadrature error estimate per entry (zero for discrete rates).
    pub error: Vec<f64>,
}

/// CDF of the scheduled user's SINR in `region` given `k ≥ 1` users.
pub fn cond_cdf(x: f64, k: usize, scheduler: SchedulerKind, region: &RegionCdf) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "conditional CDF needs at least one user"));
    }
    if !(x >= 0.0) {
        return Err(Error::param("x", "SINR must be non-negative"));
    }
    Ok(region.cond_cdf(x, k, scheduler))
}

/// Mean throughput of one RB of `region` shared by `k` users (bit/s), with
/// its quadrature error estimate.
pub fn rb_throughput(
    k: usize,
    scheduler: SchedulerKind,
    rate: &RateModel,
    region: &RegionCdf,
) -> Result<(f64, f64)> {
    if k == 0 {
        return Ok((0.0, 0.0));
    }
    let t = region.rb_throughputs(k, scheduler, rate)?;
    Ok((t.bps[k], t.error[k]))
}

/// Probability that a uniformly placed user falls in the centre region.
pub fn p_centre(omega: f64, geometry: &NetworkGeometry) -> Result<f64> {
    let omega = geometry.check_omega(omega)?;
    let r0 = geometry.min_distance;
    let rm = geometry.circle_radius;
    let rth = omega * rm;
    Ok(((rth * rth - r0 * r0) / (rm * rm - r0 * r0)).clamp(0.0, 1.0))
}

/// Where a report's numbers come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytical,
    Simulated,
}

/// Per-UE, per-RB throughput used by the fairness constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerUeTau {
    pub centre: f64,
    pub edge: f64,
    /// A region has zero probability mass and its value is a limit.
    pub degenerate: bool,
}

/// Per-UE throughput per RB (bit/s/Hz/RB) for the given region values.
///
/// PF and RR share each region's throughput among its expected users;
/// MSINR does not average over users.
pub fn per_ue_tau(
    scheduler: SchedulerKind,
    partition: &FfrPartition,
    load: &LoadModel,
    p_centre: f64,
    tau_centre: f64,
    tau_edge: f64,
) -> Result<PerUeTau> {
    let zeta = partition.zeta;
    let centre_share = zeta * tau_centre;
    let edge_share = (1.0 - zeta) * tau_edge / 3.0;
    if scheduler == SchedulerKind::Msinr {
        return Ok(PerUeTau {
            centre: centre_share,
            edge: edge_share,
            degenerate: false,
        });
    }
    if !(load.mean_users > 0.0) {
        return Err(Error::param("mean_users", "per-UE throughput needs M > 0"));
    }
    let guarded = |num: f64, den: f64| {
        if den > 0.0 {
            (num / den, false)
        } else if num > 0.0 {
            (f64::INFINITY, true)
        } else {
            (0.0, true)
        }
    };
    let (centre, dc) = guarded(centre_share, load.mean_users * p_centre);
    let (edge, de) = guarded(edge_share, load.mean_users * (1.0 - p_centre));
    Ok(PerUeTau {
        centre,
        edge,
        degenerate: dc || de,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub provenance: Provenance,
    pub scheduler: SchedulerKind,
    pub rate_model: alloc::string::String,
    pub mean_users: f64,
    pub omega: f64,
    pub zeta: f64,
    pub n_centre: usize,
    pub n_edge: usize,
    pub p_centre: f64,
    /// Average cell throughput (bit/s).
    pub eta_bps: f64,
    /// Cell throughput per RB and Hz, `η / (B_b·N_b)`.
    pub tau_bpshz_rb: f64,
    /// Average per-RB throughput of the centre band (bit/s/Hz).
    pub tau_centre: f64,
    pub tau_edge: f64,
    pub per_ue_tau_centre: f64,
    pub per_ue_tau_edge: f64,
    pub per_ue_degenerate: bool,
    pub truncation_k_max: usize,
    /// Error estimate of `tau_bpshz_rb` from the rate integral.
    pub quadrature_error: f64,
}

impl ThroughputReport {
    /// `ζ·τ^C + (1 − ζ)/3·τ^E`, which must agree with `tau_bpshz_rb`.
    pub fn tau_from_regions(&self) -> f64 {
        self.zeta * self.tau_centre + (1.0 - self.zeta) / 3.0 * self.tau_edge
    }

    /// Objective of the FFR design problems.
    pub fn objective(&self) -> f64 {
        self.tau_bpshz_rb
    }
}

/// Average cell throughput for a Poisson load and a given FFR partition.
pub fn cell_throughput(
    system: &SystemModel,
    load: &LoadModel,
    partition: &FfrPartition,
    scheduler: SchedulerKind,
    rate: &RateModel,
) -> Result<ThroughputReport> {
    if partition.n_rbs != system.radio.num_rbs {
        return Err(Error::Config(alloc::format!(
            "partition has {} RBs but the radio has {}",
            partition.n_rbs,
            system.radio.num_rbs
        )));
    }
    let geometry = &system.geometry;
    let pc = p_centre(partition.omega, geometry)?;
    let pmf = load.served_pmf(geometry)?;
    let k_max = pmf.len() - 1;

    let per_region = |region: Region| -> Result<RbThroughputs> {
        if partition.rbs(region) == 0 {
            return Ok(RbThroughputs {
                bps: vec![0.0; k_max + 1],
                error: vec![0.0; k_max + 1],
            });
        }
        match system.region_cdf(region, partition)? {
            Some(cdf) => cdf.rb_throughputs(k_max, scheduler, rate),
            None => Ok(RbThroughputs {
                bps: vec![0.0; k_max + 1],
                error: vec![0.0; k_max + 1],
            }),
        }
    };
    let centre = per_region(Region::Centre)?;
    let edge = per_region(Region::Edge)?;

    // Poisson over the cell count, binomial over its centre/edge split
    let ln_fact = ln_factorials(k_max);
    let (mut eta_c, mut eta_e, mut err_c, mut err_e) = (0.0, 0.0, 0.0, 0.0);
    for (k, &pk) in pmf.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let split = binomial_pmf(k, pc, &ln_fact);
        for (kc, &b) in split.iter().enumerate() {
            let w = pk * b;
            eta_c += w * centre.bps[kc];
            eta_e += w * edge.bps[k - kc];
            err_c += w * centre.error[kc];
            err_e += w * edge.error[k - kc];
        }
    }
    let nc = partition.n_centre as f64;
    let ne = partition.n_edge as f64;
    let bb = system.radio.rb_bandwidth_hz();
    let eta = nc * eta_c + ne * eta_e;
    let tau_centre = eta_c / bb;
    let tau_edge = eta_e / bb;
    let per_ue = per_ue_tau(scheduler, partition, load, pc, tau_centre, tau_edge);
    let per_ue = match per_ue {
        Ok(p) => p,
        // no users at all: nothing to share
        Err(_) => PerUeTau {
            centre: 0.0,
            edge: 0.0,
            degenerate: true,
        },
    };

    Ok(ThroughputReport {
        provenance: Provenance::Analytical,
        scheduler,
        rate_model: rate.name().into(),
        mean_users: load.mean_users,
        omega: partition.omega,
        zeta: partition.zeta,
        n_centre: partition.n_centre,
        n_edge: partition.n_edge,
        p_centre: pc,
        eta_bps: eta,
        tau_bpshz_rb: eta / (bb * partition.n_rbs as f64),
        tau_centre,
        tau_edge,
        per_ue_tau_centre: per_ue.centre,
        per_ue_tau_edge: per_ue.edge,
        per_ue_degenerate: per_ue.degenerate,
        truncation_k_max: k_max,
        quadrature_error: (nc * err_c + ne * err_e) / (bb * partition.n_rbs as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::{CraParams, McsTable};

    fn system() -> SystemModel {
        SystemModel::lte_default()
    }

    fn cra() -> RateModel {
        RateModel::Cra(CraParams::new(1.0, 66.7e-6).unwrap())
    }

    fn dra() -> RateModel {
        RateModel::Dra(McsTable::lte(0.1).unwrap())
    }

    #[test]
    fn partition_from_zeta() {
        let p = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
        assert_eq!((p.n_centre, p.n_edge), (52, 16));
        assert_eq!(p.rbs_in_use(), 68);
        let err = FfrPartition::from_zeta(0.7, 0.5, 100).unwrap_err();
        assert!(alloc::format!("{err}").contains("0.49"));
        assert_eq!(nearest_feasible_zeta(0.5, 100), 0.49);
        assert_eq!(nearest_feasible_zeta(0.53, 100), 0.52);
        assert!(FfrPartition::from_counts(0.7, 100, 34).is_err());
    }

    #[test]
    fn p_centre_examples() {
        let g = system().geometry;
        assert_eq!(p_centre(1.0, &g).unwrap(), 1.0);
        assert_eq!(p_centre(g.omega_min(), &g).unwrap(), 0.0);
        let p = p_centre(0.7, &g).unwrap();
        assert!((p - 121_275.0 / 248_775.0).abs() < 1e-12);
        assert!((p - 0.487_49).abs() < 1e-5);
        assert!(p_centre(1.2, &g).is_err());
    }

    #[test]
    fn poisson_truncation_keeps_mass() {
        for mean in [0.5, 8.0, 32.0, 128.0, 700.0, 2000.0] {
            let pmf = poisson_pmf_truncated(mean, 1e-6).unwrap();
            let total: f64 = pmf.iter().sum();
            assert!(
                (1.0 - 1e-6..=1.0 + 1e-12).contains(&total),
                "mean {mean}: {total}"
            );
            assert!(pmf.len() as f64 > mean);
        }
        assert_eq!(poisson_pmf_truncated(0.0, 1e-6).unwrap(), [1.0]);
    }

    #[test]
    fn binomial_pmf_is_normalised() {
        let lf = ln_factorials(200);
        for (n, p) in [(0, 0.3), (7, 0.49), (200, 0.99), (5, 0.0), (5, 1.0)] {
            let b = binomial_pmf(n, p, &lf);
            let s: f64 = b.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            let mean: f64 = b.iter().enumerate().map(|(j, v)| j as f64 * v).sum();
            assert!((mean - n as f64 * p).abs() < 1e-9);
        }
    }

    #[test]
    fn single_user_schedulers_coincide() {
        let s = system();
        let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
        let cdf = s.region_cdf(Region::Centre, &part).unwrap().unwrap();
        for x in [0.01, 0.5, 3.0, 40.0] {
            let pf = cond_cdf(x, 1, SchedulerKind::Pf, &cdf).unwrap();
            let ms = cond_cdf(x, 1, SchedulerKind::Msinr, &cdf).unwrap();
            let rr = cond_cdf(x, 1, SchedulerKind::Rr, &cdf).unwrap();
            assert!((pf - ms).abs() < 1e-15 && (ms - rr).abs() < 1e-15);
        }
        assert!(cond_cdf(1.0, 0, SchedulerKind::Pf, &cdf).is_err());
        assert!(cond_cdf(-1.0, 2, SchedulerKind::Pf, &cdf).is_err());
    }

    #[test]
    fn empty_region_and_no_users() {
        let s = system();
        let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
        let cdf = s.region_cdf(Region::Edge, &part).unwrap().unwrap();
        assert_eq!(
            rb_throughput(0, SchedulerKind::Pf, &cra(), &cdf).unwrap(),
            (0.0, 0.0)
        );
        let full = FfrPartition::from_zeta(1.0, 1.0, 100).unwrap();
        assert!(s.region_cdf(Region::Edge, &full).unwrap().is_none());
        let load = LoadModel::new(0.0).unwrap();
        let r = cell_throughput(&s, &load, &part, SchedulerKind::Pf, &cra()).unwrap();
        assert_eq!(r.eta_bps, 0.0);
    }

    #[test]
    fn dra_capped_by_top_rate() {
        let s = system();
        let part = FfrPartition::from_zeta(0.9, 0.52, 100).unwrap();
        let cdf = s.region_cdf(Region::Centre, &part).unwrap().unwrap();
        let t = cdf
            .rb_throughputs(60, SchedulerKind::Msinr, &dra())
            .unwrap();
        let cap = s.radio.rb_bandwidth_hz() * 5.55;
        assert!(t.bps.iter().all(|&v| v <= cap * (1.0 + 1e-12)));
        assert!(t.bps[60] > 0.9 * cap);
    }

    #[test]
    fn region_taus_recombine_to_cell_tau() {
        let s = system();
        let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
        let load = LoadModel::new(8.0).unwrap();
        for rate in [cra(), dra()] {
            let r = cell_throughput(&s, &load, &part, SchedulerKind::Pf, &rate).unwrap();
            assert!((r.tau_from_regions() - r.tau_bpshz_rb).abs() < 1e-12 * r.tau_bpshz_rb);
        }
    }

    #[test]
    fn full_reuse_tau_is_centre_tau() {
        let s = system();
        let part = FfrPartition::from_zeta(0.8, 1.0, 100).unwrap();
        let load = LoadModel::new(8.0).unwrap();
        let r = cell_throughput(&s, &load, &part, SchedulerKind::Rr, &cra()).unwrap();
        assert!((r.tau_bpshz_rb - r.tau_centre).abs() < 1e-12);
    }

    #[test]
    fn per_ue_definitions() {
        let part = FfrPartition::from_zeta(0.7, 1.0, 100).unwrap();
        let load = LoadModel::new(32.0).unwrap();
        let m = per_ue_tau(SchedulerKind::Msinr, &part, &load, 0.5, 3.0, 2.0).unwrap();
        assert_eq!(m.edge, 0.0);
        assert_eq!(m.centre, 3.0);
        // balanced PF case: ζ/P_C = (1−ζ)/(3(1−P_C)) with equal region taus
        let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
        let pc = 0.52 / (0.52 + 0.48 / 3.0);
        let p = per_ue_tau(SchedulerKind::Pf, &part, &load, pc, 2.5, 2.5).unwrap();
        assert!((p.centre - p.edge).abs() < 1e-12);
        let d = per_ue_tau(SchedulerKind::Rr, &part, &load, 1.0, 2.5, 0.0).unwrap();
        assert!(d.degenerate && d.edge == 0.0);
        let none = LoadModel::new(0.0).unwrap();
        assert!(per_ue_tau(SchedulerKind::Pf, &part, &none, 0.5, 1.0, 1.0).is_err());
    }
}
