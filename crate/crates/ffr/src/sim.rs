//! Parallel drop execution on top of the core simulator.

use std::ops::Range;

use ffr_core::analysis::{FfrPartition, LoadModel, SchedulerKind, SystemModel};
use ffr_core::montecarlo::{simulate_drop, summarize, DropStats, SimConfig, SimReport};
use ffr_core::rate::RateModel;
use rayon::prelude::*;

use crate::error::Result;

/// One simulated configuration. Every rate model is measured in the same pass.
#[derive(Debug, Clone, Copy)]
pub struct SimJob<'a> {
    pub system: &'a SystemModel,
    pub config: &'a SimConfig,
    pub partition: &'a FfrPartition,
    pub scheduler: SchedulerKind,
    pub load: &'a LoadModel,
    pub rates: &'a [RateModel],
}

impl SimJob<'_> {
    /// Runs the given drops in parallel; results come back in drop order.
    pub fn run_drops(&self, drops: Range<u64>) -> Result<Vec<DropStats>> {
        let out: ffr_core::Result<Vec<DropStats>> = drops
            .into_par_iter()
            .map(|d| {
                simulate_drop(
                    self.system,
                    self.config,
                    self.partition,
                    self.scheduler,
                    self.load,
                    self.rates,
                    d,
                )
            })
            .collect();
        Ok(out?)
    }

    pub fn summarize(&self, drops: &[DropStats]) -> Vec<SimReport> {
        summarize(
            self.system,
            self.config,
            self.partition,
            self.scheduler,
            self.load,
            self.rates,
            drops,
        )
    }

    /// Runs `config.drops` drops.
    pub fn run(&self) -> Result<(Vec<SimReport>, Vec<DropStats>)> {
        self.config.validate()?;
        let drops = self.run_drops(0..self.config.drops as u64)?;
        Ok((self.summarize(&drops), drops))
    }

    /// Starts with `config.drops` drops and adds more until every rate
    /// model meets the CI target or `max_drops` is reached. The stopping
    /// rule only looks at completed drops, so the result is deterministic.
    pub fn run_to_target(&self, max_drops: usize) -> Result<(Vec<SimReport>, Vec<DropStats>)> {
        self.config.validate()?;
        let mut drops = self.run_drops(0..self.config.drops as u64)?;
        loop {
            let reports = self.summarize(&drops);
            let worst = reports
                .iter()
                .map(|r| r.tau.relative_ci())
                .fold(0.0f64, f64::max);
            let n = drops.len();
            if worst <= self.config.ci_target || n >= max_drops {
                return Ok((reports, drops));
            }
            let ratio = worst / self.config.ci_target;
            let wanted = ((n as f64 * ratio * ratio * 1.1).ceil() as usize)
                .max(n + n / 10 + 1)
                .min(max_drops);
            drops.extend(self.run_drops(n as u64..wanted as u64)?);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ffr_core::rate::CraParams;

    #[test]
    fn parallel_drops_match_sequential_run() {
        let system = SystemModel::lte_default();
        let part = FfrPartition::from_zeta(0.7, 0.52, 100).unwrap();
        let load = LoadModel::new(8.0).unwrap();
        let rates = [RateModel::Cra(CraParams::new(1.0, 66.7e-6).unwrap())];
        let config = SimConfig {
            drops: 12,
            slots_per_drop: 5,
            ci_target: 0.05,
            ..SimConfig::default()
        };
        let job = SimJob {
            system: &system,
            config: &config,
            partition: &part,
            scheduler: SchedulerKind::Rr,
            load: &load,
            rates: &rates,
        };
        let seq = ffr_core::montecarlo::simulate(
            &system,
            &config,
            &part,
            SchedulerKind::Rr,
            &load,
            &rates,
        )
        .unwrap();
        assert_eq!(job.run().unwrap(), seq);

        let (reports, drops) = job.run_to_target(200).unwrap();
        assert!(drops.len() >= 12 && drops.len() <= 200);
        assert!(reports[0].ci_met || drops.len() == 200);
        assert_eq!(drops[..12], seq.1[..]);
        assert_eq!(job.run_to_target(200).unwrap(), (reports, drops));
    }
}
