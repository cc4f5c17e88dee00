//! FFR design problems.
//!
//! All three problems maximise the average cell throughput per RB
//! `τ(ω, ζ) = ζ·τ^C + (1 − ζ)/3·τ^E`:
//!
//! * FxD fixes `ζ` and searches `ω` (coarse grid, then golden section),
//! * ApD ties the two with `ω = √ζ` and searches the feasible `ζ` set,
//! * QoScD searches the `(ω, ζ)` grid subject to the per-UE fairness
//!   constraint `τ_u^E ≥ q·τ_u^C`.
//!
//! Ties are resolved towards the smaller `ω` (larger edge region).

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    cell_throughput, FfrPartition, LoadModel, SchedulerKind, SystemModel, ThroughputReport,
};
use crate::error::{Error, Result};
use crate::rate::RateModel;

/// Admissible spectrum allocation factors `(N_b − 3·N_E)/N_b`, ascending.
pub fn zeta_set(n_rbs: usize) -> Vec<f64> {
    let n_b = n_rbs as f64;
    (0..=n_rbs / 3)
        .rev()
        .map(|n_edge| (n_b - 3.0 * n_edge as f64) / n_b)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DesignKind {
    Fxd { zeta0: f64 },
    Apd,
    Qoscd { q: f64 },
}

impl DesignKind {
    pub fn name(&self) -> &'static str {
        match self {
            DesignKind::Fxd { .. } => "fxd",
            DesignKind::Apd => "apd",
            DesignKind::Qoscd { .. } => "qoscd",
        }
    }

    pub fn q(&self) -> Option<f64> {
        match self {
            DesignKind::Qoscd { q } => Some(*q),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProblem {
    pub scheduler: SchedulerKind,
    pub rate: RateModel,
    pub load: LoadModel,
    /// Points of the uniform `ω` grid over `[R_0m/R_m, 1]`.
    pub omega_grid_points: usize,
    /// Final bracket width of the golden-section refinement.
    pub omega_tol: f64,
}

impl DesignProblem {
    pub fn new(scheduler: SchedulerKind, rate: RateModel, load: LoadModel) -> Self {
        DesignProblem {
            scheduler,
            rate,
            load,
            omega_grid_points: 50,
            omega_tol: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.omega_grid_points < 2 {
            return Err(Error::param(
                "omega_grid_points",
                "need at least 2 grid points",
            ));
        }
        if !(self.omega_tol > 0.0) {
            return Err(Error::param("omega_tol", "must be positive"));
        }
        Ok(())
    }

    fn omega_grid(&self, system: &SystemModel) -> Vec<f64> {
        let lo = system.geometry.omega_min();
        let n = self.omega_grid_points;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    1.0
                } else {
                    lo + (1.0 - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    fn evaluate(&self, system: &SystemModel, omega: f64, zeta: f64) -> Result<ThroughputReport> {
        let partition = FfrPartition::from_zeta(omega, zeta, system.radio.num_rbs)?;
        cell_throughput(system, &self.load, &partition, self.scheduler, &self.rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub design: DesignKind,
    pub omega: f64,
    pub zeta: f64,
    pub tau: f64,
    pub feasible: bool,
    /// `τ_u^E − q·τ_u^C` at the optimum (QoScD only).
    pub constraint_slack: Option<f64>,
    /// The objective does not vary with `ω` (all RBs in the centre band).
    pub plateau: bool,
    pub evaluations: usize,
    pub report: ThroughputReport,
}

/// Fixed-spectrum design: best `ω` for a given `ζ_o`.
pub fn solve_fxd(
    system: &SystemModel,
    problem: &DesignProblem,
    zeta0: f64,
) -> Result<DesignSolution> {
    problem.validate()?;
    FfrPartition::from_zeta(1.0, zeta0, system.radio.num_rbs)?;
    let grid = problem.omega_grid(system);
    let mut reports = Vec::with_capacity(grid.len());
    for &w in &grid {
        reports.push(problem.evaluate(system, w, zeta0)?);
    }
    let mut best = 0;
    for (i, r) in reports.iter().enumerate() {
        if r.tau_bpshz_rb > reports[best].tau_bpshz_rb {
            best = i;
        }
    }
    let (lo_t, hi_t) = reports
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.tau_bpshz_rb), hi.max(r.tau_bpshz_rb))
        });
    let plateau = zeta0 >= 1.0 || hi_t - lo_t <= 1e-12 * hi_t.abs().max(1e-300);
    let mut evaluations = grid.len();
    let mut report = reports.swap_remove(best);

    if !plateau {
        let a = grid[best.saturating_sub(1)];
        let b = grid[(best + 1).min(grid.len() - 1)];
        let (refined, n) = golden_section_max(a, b, problem.omega_tol, |w| {
            problem.evaluate(system, w, zeta0)
        })?;
        evaluations += n;
        if refined.tau_bpshz_rb > report.tau_bpshz_rb
            || (refined.tau_bpshz_rb == report.tau_bpshz_rb && refined.omega < report.omega)
        {
            report = refined;
        }
    }

    Ok(DesignSolution {
        design: DesignKind::Fxd { zeta0 },
        omega: report.omega,
        zeta: report.zeta,
        tau: report.tau_bpshz_rb,
        feasible: true,
        constraint_slack: None,
        plateau,
        evaluations,
        report,
    })
}

fn golden_section_max<F>(
    mut a: f64,
    mut b: f64,
    tol: f64,
    mut f: F,
) -> Result<(ThroughputReport, usize)>
where
    F: FnMut(f64) -> Result<ThroughputReport>,
{
    let inv_phi = (5.0.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut n = 2;
    while b - a > tol {
        if fc.tau_bpshz_rb >= fd.tau_bpshz_rb {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        n += 1;
    }
    let best = if fd.tau_bpshz_rb > fc.tau_bpshz_rb {
        fd
    } else {
        fc
    };
    Ok((best, n))
}

/// Area-proportional design: `ω = √ζ`, exhaustive over the feasible `ζ`.
pub fn solve_apd(system: &SystemModel, problem: &DesignProblem) -> Result<DesignSolution> {
    problem.validate()?;
    let omega_min = system.geometry.omega_min();
    let mut best: Option<ThroughputReport> = None;
    let mut evaluations = 0;
    for zeta in zeta_set(system.radio.num_rbs) {
        let omega = zeta.sqrt();
        if omega < omega_min {
            continue;
        }
        let r = problem.evaluate(system, omega, zeta)?;
        evaluations += 1;
        if best
            .as_ref()
            .is_none_or(|b| r.tau_bpshz_rb > b.tau_bpshz_rb)
        {
            best = Some(r);
        }
    }
    let report = best.ok_or_else(|| {
        Error::Config("no admissible ζ gives ω = √ζ above the exclusion radius".into())
    })?;
    Ok(DesignSolution {
        design: DesignKind::Apd,
        omega: report.omega,
        zeta: report.zeta,
        tau: report.tau_bpshz_rb,
        feasible: true,
        constraint_slack: None,
        plateau: false,
        evaluations,
        report,
    })
}

/// Cell throughput tabulated over the `(ζ, ω)` design grid, reusable for
/// several fairness levels.
#[derive(Debug, Clone)]
pub struct DesignGrid {
    pub reports: Vec<ThroughputReport>,
}

impl DesignGrid {
    pub fn build(system: &SystemModel, problem: &DesignProblem) -> Result<Self> {
        problem.validate()?;
        let omegas = problem.omega_grid(system);
        let mut reports = Vec::new();
        for zeta in zeta_set(system.radio.num_rbs) {
            for &omega in &omegas {
                reports.push(problem.evaluate(system, omega, zeta)?);
            }
        }
        Ok(DesignGrid { reports })
    }

    /// Best grid point satisfying `τ_u^E ≥ q·τ_u^C`.
    pub fn solve_qoscd(&self, q: f64) -> Result<DesignSolution> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::param("q", "fairness fraction must lie in [0, 1]"));
        }
        let slack = |r: &ThroughputReport| r.per_ue_tau_edge - q * r.per_ue_tau_centre;
        let better = |r: &ThroughputReport, b: &ThroughputReport| {
            r.tau_bpshz_rb > b.tau_bpshz_rb
                || (r.tau_bpshz_rb == b.tau_bpshz_rb && r.omega < b.omega)
        };
        let mut best: Option<&ThroughputReport> = None;
        for r in &self.reports {
            if slack(r) >= -1e-12 && best.is_none_or(|b| better(r, b)) {
                best = Some(r);
            }
        }
        let (report, feasible) = match best {
            Some(r) => (r, true),
            // report the point closest to feasibility
            None => {
                let mut closest = &self.reports[0];
                for r in &self.reports {
                    if slack(r) > slack(closest) {
                        closest = r;
                    }
                }
                (closest, false)
            }
        };
        Ok(DesignSolution {
            design: DesignKind::Qoscd { q },
            omega: report.omega,
            zeta: report.zeta,
            tau: report.tau_bpshz_rb,
            feasible,
            constraint_slack: Some(slack(report)),
            plateau: false,
            evaluations: self.reports.len(),
            report: report.clone(),
        })
    }
}

/// QoS-constrained design over the joint `(ω, ζ)` grid.
pub fn solve_qoscd(
    system: &SystemModel,
    problem: &DesignProblem,
    q: f64,
) -> Result<DesignSolution> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param("q", "fairness fraction must lie in [0, 1]"));
    }
    DesignGrid::build(system, problem)?.solve_qoscd(q)
}

/// Dispatches on the design kind.
pub fn solve(
    system: &SystemModel,
    problem: &DesignProblem,
    design: DesignKind,
) -> Result<DesignSolution> {
    match design {
        DesignKind::Fxd { zeta0 } => solve_fxd(system, problem, zeta0),
        DesignKind::Apd => solve_apd(system, problem),
        DesignKind::Qoscd { q } => solve_qoscd(system, problem, q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_set_examples() {
        let s = zeta_set(100);
        assert_eq!(s.len(), 34);
        assert!((s[0] - 0.01).abs() < 1e-15 && (s[1] - 0.04).abs() < 1e-15);
        assert_eq!(*s.last().unwrap(), 1.0);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(zeta_set(3), [0.0, 1.0]);
        assert_eq!(zeta_set(1), [1.0]);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let mk = |w: f64| {
            let mut r = ThroughputReport {
                provenance: crate::analysis::Provenance::Analytical,
                scheduler: SchedulerKind::Rr,
                rate_model: "cra".into(),
                mean_users: 1.0,
                omega: w,
                zeta: 1.0,
                n_centre: 1,
                n_edge: 0,
                p_centre: 1.0,
                eta_bps: 0.0,
                tau_bpshz_rb: 0.0,
                tau_centre: 0.0,
                tau_edge: 0.0,
                per_ue_tau_centre: 0.0,
                per_ue_tau_edge: 0.0,
                per_ue_degenerate: false,
                truncation_k_max: 0,
                quadrature_error: 0.0,
            };
            r.tau_bpshz_rb = -(w - 0.613) * (w - 0.613);
            Ok(r)
        };
        let (r, _) = golden_section_max(0.5, 0.8, 1e-3, mk).unwrap();
        assert!((r.omega - 0.613).abs() < 1e-3);
    }

    #[test]
    fn fxd_rejects_infeasible_zeta() {
        let system = SystemModel::lte_default();
        let problem = DesignProblem::new(
            SchedulerKind::Rr,
            RateModel::Cra(crate::rate::CraParams::new(1.0, 66.7e-6).unwrap()),
            LoadModel::new(8.0).unwrap(),
        );
        let err = solve_fxd(&system, &problem, 0.5).unwrap_err();
        assert!(alloc::format!("{err}").contains("0.49"));
    }
}
