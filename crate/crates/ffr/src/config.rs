//! JSON run configuration.
//!
//! Every section is optional and defaults to the LTE reference scenario.
//! Powers are given in dBm and gains in dB; they are converted to linear
//! SI units when the configuration is resolved.

use std::path::{Path, PathBuf};

use ffr_core::analysis::{AnalysisOptions, FfrPartition, LoadModel, SchedulerKind, SystemModel};
use ffr_core::channel::{db_to_linear, dbm_to_watts, RadioParams};
use ffr_core::geometry::NetworkGeometry;
use ffr_core::montecarlo::SimConfig;
use ffr_core::optimizer::{DesignKind, DesignProblem};
use ffr_core::rate::{CraParams, McsTable, RateModel, LTE_MODES};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::mcs::read_mcs_csv;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub radio: RadioConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default = "all_schedulers")]
    pub schedulers: Vec<SchedulerKind>,
    #[serde(default = "all_rate_models")]
    pub rate_models: Vec<RateKind>,
    #[serde(default)]
    pub cra: CraConfig,
    #[serde(default)]
    pub dra: DraConfig,
    /// Mean number of users per cell, one run per entry.
    #[serde(default = "default_loads")]
    pub loads: Vec<f64>,
    /// Explicit distance threshold ratios; overrides `omega_points`.
    #[serde(default)]
    pub omegas: Option<Vec<f64>>,
    /// Uniform grid size over `[R_0m/R_m, 1]` when `omegas` is absent.
    #[serde(default = "default_omega_points")]
    pub omega_points: usize,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    #[serde(default)]
    pub design: DesignConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            radio: RadioConfig::default(),
            geometry: GeometryConfig::default(),
            analysis: AnalysisConfig::default(),
            schedulers: all_schedulers(),
            rate_models: all_rate_models(),
            cra: CraConfig::default(),
            dra: DraConfig::default(),
            loads: default_loads(),
            omegas: None,
            omega_points: default_omega_points(),
            zeta: default_zeta(),
            design: DesignConfig::default(),
            simulation: SimulationConfig::default(),
            seed: default_seed(),
            output_dir: None,
        }
    }
}

fn all_schedulers() -> Vec<SchedulerKind> {
    SchedulerKind::ALL.to_vec()
}

fn all_rate_models() -> Vec<RateKind> {
    vec![RateKind::Cra, RateKind::Dra]
}

fn default_loads() -> Vec<f64> {
    vec![8.0, 32.0, 128.0]
}

fn default_omega_points() -> usize {
    50
}

fn default_zeta() -> f64 {
    0.52
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateKind {
    Cra,
    Dra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    pub antenna_gain_db: f64,
    pub pathloss_k_db: f64,
    pub pathloss_exponent: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub subcarrier_spacing_hz: f64,
    pub subcarriers_per_rb: usize,
    pub symbol_time_s: f64,
    pub cp_time_s: f64,
    pub symbols_per_slot: usize,
    pub num_rbs: usize,
}

impl Default for RadioConfig {
    fn default() -> Self {
        let r = RadioParams::default();
        RadioConfig {
            tx_power_dbm: 46.0,
            antenna_gain_db: r.antenna_gain_db,
            pathloss_k_db: r.pathloss_k_db,
            pathloss_exponent: r.pathloss_exponent,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: r.noise_figure_db,
            subcarrier_spacing_hz: r.subcarrier_spacing_hz,
            subcarriers_per_rb: r.subcarriers_per_rb,
            symbol_time_s: r.symbol_time_s,
            cp_time_s: r.cp_time_s,
            symbols_per_slot: r.symbols_per_slot,
            num_rbs: r.num_rbs,
        }
    }
}

impl RadioConfig {
    pub fn to_params(&self) -> RadioParams {
        RadioParams {
            tx_power_w: dbm_to_watts(self.tx_power_dbm),
            antenna_gain_db: self.antenna_gain_db,
            pathloss_k_db: self.pathloss_k_db,
            pathloss_exponent: self.pathloss_exponent,
            noise_psd_w_hz: dbm_to_watts(self.noise_psd_dbm_hz),
            noise_figure_db: self.noise_figure_db,
            subcarrier_spacing_hz: self.subcarrier_spacing_hz,
            subcarriers_per_rb: self.subcarriers_per_rb,
            symbol_time_s: self.symbol_time_s,
            cp_time_s: self.cp_time_s,
            symbols_per_slot: self.symbols_per_slot,
            num_rbs: self.num_rbs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Radius `R_m` of the circle with the area of one hexagonal cell.
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            cell_radius_m: 500.0,
            min_distance_m: 35.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub distance_nodes: usize,
    pub angle_points: usize,
    pub cra_abs_tol: f64,
    pub truncation_mass: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let o = AnalysisOptions::default();
        AnalysisConfig {
            distance_nodes: o.distance_nodes,
            angle_points: o.angle_points,
            cra_abs_tol: o.cra_abs_tol,
            truncation_mass: LoadModel::DEFAULT_TRUNCATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CraConfig {
    /// Coding gap `Λ` in dB (0 dB is the Shannon bound).
    pub coding_gap_db: f64,
}

impl Default for CraConfig {
    fn default() -> Self {
        CraConfig { coding_gap_db: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DraConfig {
    pub target_bler: f64,
    /// CSV file replacing the built-in LTE MCS table.
    pub mcs_table: Option<PathBuf>,
}

impl Default for DraConfig {
    fn default() -> Self {
        DraConfig {
            target_bler: 0.1,
            mcs_table: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignName {
    Fxd,
    Apd,
    Qoscd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignConfig {
    pub kind: DesignName,
    pub zeta0: f64,
    pub q: f64,
    pub omega_grid_points: usize,
    pub omega_tol: f64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            kind: DesignName::Fxd,
            zeta0: 0.52,
            q: 0.02,
            omega_grid_points: 50,
            omega_tol: 1e-3,
        }
    }
}

impl DesignConfig {
    pub fn kind(&self) -> DesignKind {
        match self.kind {
            DesignName::Fxd => DesignKind::Fxd { zeta0: self.zeta0 },
            DesignName::Apd => DesignKind::Apd,
            DesignName::Qoscd => DesignKind::Qoscd { q: self.q },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub drops: usize,
    pub slots_per_drop: usize,
    pub pf_window: usize,
    pub warmup_slots: usize,
    pub ci_target: f64,
    /// Distance threshold ratios simulated by `simulate`.
    pub omegas: Vec<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let s = SimConfig::default();
        SimulationConfig {
            drops: s.drops,
            slots_per_drop: s.slots_per_drop,
            pf_window: s.pf_window,
            warmup_slots: s.warmup_slots,
            ci_target: s.ci_target,
            omegas: vec![0.7],
        }
    }
}

/// A configuration checked and converted to model objects.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub system: SystemModel,
    pub rates: Vec<RateModel>,
    pub loads: Vec<LoadModel>,
    pub omegas: Vec<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                CliError::Config(e.into_inner().to_string())
            } else {
                CliError::Config(format!("{path}: {}", e.into_inner()))
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Validates the configuration and builds the model objects. Relative
    /// paths (the MCS table) are taken relative to `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<Resolved> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            )));
        }
        let key = |k: &'static str| move |e: ffr_core::Error| CliError::Config(format!("{k}: {e}"));
        let radio = self.radio.to_params();
        radio.validate().map_err(key("radio"))?;
        let geometry = NetworkGeometry::from_cell_radius(
            self.geometry.cell_radius_m,
            self.geometry.min_distance_m,
        )
        .map_err(key("geometry"))?;
        let options = AnalysisOptions {
            distance_nodes: self.analysis.distance_nodes,
            angle_points: self.analysis.angle_points,
            cra_abs_tol: self.analysis.cra_abs_tol,
            ..AnalysisOptions::default()
        };
        let system = SystemModel::new(radio, geometry, options).map_err(key("analysis"))?;

        if self.schedulers.is_empty() {
            return Err(CliError::Config(
                "schedulers: at least one scheduler is required".into(),
            ));
        }
        if self.rate_models.is_empty() {
            return Err(CliError::Config(
                "rate_models: at least one rate model is required".into(),
            ));
        }
        let mut rates = Vec::new();
        for kind in &self.rate_models {
            rates.push(match kind {
                RateKind::Cra => RateModel::Cra(
                    CraParams::new(
                        db_to_linear(self.cra.coding_gap_db),
                        system.radio.symbol_time_s,
                    )
                    .map_err(key("cra.coding_gap_db"))?,
                ),
                RateKind::Dra => {
                    let modes = match &self.dra.mcs_table {
                        Some(p) => read_mcs_csv(&base_dir.join(p))?,
                        None => LTE_MODES.to_vec(),
                    };
                    RateModel::Dra(McsTable::new(modes, self.dra.target_bler).map_err(key("dra"))?)
                }
            });
        }

        if self.loads.is_empty() {
            return Err(CliError::Config(
                "loads: at least one mean user count is required".into(),
            ));
        }
        let loads = self
            .loads
            .iter()
            .map(|&m| LoadModel::with_truncation(m, self.analysis.truncation_mass))
            .collect::<Result<Vec<_>, _>>()
            .map_err(key("loads"))?;

        let omega_min = system.geometry.omega_min();
        let omegas = match &self.omegas {
            Some(v) => v.clone(),
            None => {
                let n = self.omega_points;
                if n < 2 {
                    return Err(CliError::Config(
                        "omega_points: need at least 2 points".into(),
                    ));
                }
                (0..n)
                    .map(|i| {
                        if i + 1 == n {
                            1.0
                        } else {
                            omega_min + (1.0 - omega_min) * i as f64 / (n - 1) as f64
                        }
                    })
                    .collect()
            }
        };
        for &w in omegas.iter().chain(&self.simulation.omegas) {
            if !(w >= omega_min - 1e-12 && w <= 1.0 + 1e-12) {
                return Err(CliError::Config(format!(
                    "omegas: {w} outside [{omega_min}, 1]"
                )));
            }
        }
        FfrPartition::from_zeta(1.0, self.zeta, system.radio.num_rbs).map_err(key("zeta"))?;
        if !(0.0..=1.0).contains(&self.design.q) {
            return Err(CliError::Config("design.q: must lie in [0, 1]".into()));
        }
        FfrPartition::from_zeta(1.0, self.design.zeta0, system.radio.num_rbs)
            .map_err(key("design.zeta0"))?;
        self.sim_config().validate().map_err(key("simulation"))?;

        Ok(Resolved {
            config: self.clone(),
            system,
            rates,
            loads,
            omegas,
        })
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            drops: self.simulation.drops,
            slots_per_drop: self.simulation.slots_per_drop,
            pf_window: self.simulation.pf_window,
            warmup_slots: self.simulation.warmup_slots,
            seed: self.seed,
            ci_target: self.simulation.ci_target,
        }
    }
}

impl Resolved {
    pub fn design_problem(
        &self,
        scheduler: SchedulerKind,
        rate: &RateModel,
        load: LoadModel,
    ) -> DesignProblem {
        DesignProblem {
            omega_grid_points: self.config.design.omega_grid_points,
            omega_tol: self.config.design.omega_tol,
            ..DesignProblem::new(scheduler, rate.clone(), load)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_reference_radio() {
        let r = RunConfig::default().resolve(Path::new("")).unwrap();
        let p = &r.system.radio;
        assert!((p.tx_power_w - 39.810717).abs() < 1e-5);
        assert!((p.noise_psd_w_hz - 3.981072e-21).abs() < 1e-26);
        assert_eq!(p.num_rbs, 100);
        assert_eq!(r.system.geometry.min_distance, 35.0);
        assert_eq!(r.omegas.len(), 50);
        assert_eq!(r.omegas[49], 1.0);
        assert!((r.omegas[0] - 0.07).abs() < 1e-12);
        assert_eq!(r.rates.len(), 2);
        assert_eq!(r.loads.len(), 3);
    }

    #[test]
    fn empty_sections_take_defaults() {
        let c = RunConfig::from_json(
            r#"{"schema_version": 1, "radio": {}, "simulation": {"drops": 9}}"#,
        )
        .unwrap();
        assert_eq!(c.radio, RadioConfig::default());
        assert_eq!(c.simulation.drops, 9);
        assert_eq!(c.simulation.slots_per_drop, 200);
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn coding_gap_is_converted_from_db() {
        let c = RunConfig::from_json(
            r#"{"schema_version": 1, "rate_models": ["cra"], "cra": {"coding_gap_db": 3}}"#,
        )
        .unwrap();
        let r = c.resolve(Path::new("")).unwrap();
        let RateModel::Cra(p) = &r.rates[0] else {
            panic!("expected CRA")
        };
        assert!((p.coding_gap - 1.995262).abs() < 1e-6);
    }

    #[test]
    fn invalid_values_name_their_key() {
        let check = |json: &str, key: &str| {
            let err = RunConfig::from_json(json)
                .and_then(|c| c.resolve(Path::new("")))
                .unwrap_err();
            assert_eq!(err.exit_code(), 2);
            assert!(err.to_string().contains(key), "{err}");
        };
        check(r#"{"schema_version": 1, "loads": [-1]}"#, "loads");
        check(r#"{"schema_version": 1, "omegas": [0.01]}"#, "omegas");
        check(r#"{"schema_version": 1, "zeta": 0.5}"#, "zeta");
        check(
            r#"{"schema_version": 1, "simulation": {"pf_window": 10}}"#,
            "simulation",
        );
        check(
            r#"{"schema_version": 1, "schedulers": ["fair"]}"#,
            "schedulers",
        );
        check(
            r#"{"schema_version": 1, "geometry": {"cell_radius_m": 10}}"#,
            "geometry",
        );
    }
}
