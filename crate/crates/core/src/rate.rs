//! SINR-to-rate mapping: the AMC staircase (discrete rates) and the
//! gap-to-capacity law (continuous rates).

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One modulation-and-coding scheme with its fitted BLER curve
/// `ε(γ) = κ1·exp(−κ2·γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsMode {
    /// Mode number as listed in the source table (not necessarily contiguous).
    pub label: u32,
    pub bits_per_symbol: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Onset of the fitted curve; below it the block is always lost (dB).
    pub gamma_floor_db: f64,
}

impl McsMode {
    pub fn gamma_floor(&self) -> f64 {
        10.0.powf(self.gamma_floor_db / 10.0)
    }
}

/// LTE BLER fits on an equivalent AWGN channel. Mode 3 has no published
/// fit and is absent.
pub const LTE_MODES: [McsMode; 14] = [
    mode(1, 0.15, 3.270e3, 53.678, -8.217),
    mode(2, 0.23, 4.067e4, 43.868, -6.163),
    mode(4, 0.60, 2.677e7, 26.549, -1.910),
    mode(5, 0.88, 1.005e9, 19.785, 0.202),
    mode(6, 1.18, 9.340e9, 13.888, 2.183),
    mode(7, 1.48, 1.160e10, 8.790, 4.210),
    mode(8, 1.91, 1.443e11, 6.358, 6.065),
    mode(9, 2.41, 1.000e10, 3.590, 8.071),
    mode(10, 2.73, 1.000e10, 2.373, 9.869),
    mode(11, 3.32, 1.000e10, 1.526, 11.790),
    mode(12, 3.90, 1.000e10, 0.991, 13.663),
    mode(13, 4.52, 1.000e10, 0.665, 15.396),
    mode(14, 5.12, 1.000e10, 0.426, 17.329),
    mode(15, 5.55, 1.000e10, 0.268, 19.333),
];

const fn mode(label: u32, bits: f64, kappa1: f64, kappa2: f64, floor_db: f64) -> McsMode {
    McsMode {
        label,
        bits_per_symbol: bits,
        kappa1,
        kappa2,
        gamma_floor_db: floor_db,
    }
}

pub const DEFAULT_TARGET_BLER: f64 = 0.1;

/// `Γ^(m) = ln(κ1/ε̌) / κ2` for every mode, followed by a `+∞` sentinel.
pub fn mcs_thresholds(modes: &[McsMode], target_bler: f64) -> Result<Vec<f64>> {
    let min_kappa1 = modes.iter().map(|m| m.kappa1).fold(f64::INFINITY, f64::min);
    if !(target_bler > 0.0 && target_bler < 1.0 && target_bler < min_kappa1) {
        return Err(Error::param(
            "target_bler",
            alloc::format!("must lie in (0, min(1, min κ1 = {min_kappa1}))"),
        ));
    }
    let mut out: Vec<f64> = modes
        .iter()
        .map(|m| (m.kappa1 / target_bler).ln() / m.kappa2)
        .collect();
    if let Some(i) = out.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::Config(alloc::format!(
            "MCS thresholds not strictly increasing between table rows {} and {} \
             (Γ = {} and {}) at target BLER {target_bler}",
            i + 1,
            i + 2,
            out[i],
            out[i + 1]
        )));
    }
    out.push(f64::INFINITY);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    modes: Vec<McsMode>,
    target_bler: f64,
    thresholds: Vec<f64>,
}

impl McsTable {
    pub fn new(modes: Vec<McsMode>, target_bler: f64) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::param("modes", "MCS table is empty"));
        }
        for m in &modes {
            let ok = m.bits_per_symbol > 0.0
                && m.kappa1 > 0.0
                && m.kappa2 > 0.0
                && m.bits_per_symbol.is_finite()
                && m.kappa1.is_finite()
                && m.kappa2.is_finite()
                && m.gamma_floor_db.is_finite();
            if !ok {
                return Err(Error::Config(alloc::format!(
                    "mode {}: rate and BLER constants must be positive and finite",
                    m.label
                )));
            }
        }
        if !modes
            .windows(2)
            .all(|w| w[0].bits_per_symbol < w[1].bits_per_symbol)
        {
            return Err(Error::Config(
                "MCS rates must be strictly increasing".into(),
            ));
        }
        let thresholds = mcs_thresholds(&modes, target_bler)?;
        Ok(McsTable {
            modes,
            target_bler,
            thresholds,
        })
    }

    pub fn lte(target_bler: f64) -> Result<Self> {
        Self::new(LTE_MODES.to_vec(), target_bler)
    }

    pub fn modes(&self) -> &[McsMode] {
        &self.modes
    }

    /// Number of transmitting modes `N_m`.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn target_bler(&self) -> f64 {
        self.target_bler
    }

    /// `Γ^(1) … Γ^(N_m)` plus the trailing `+∞`.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Bits per symbol of mode `m` (1-based position; 0 is silence).
    pub fn bits_per_symbol(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.modes[m - 1].bits_per_symbol
        }
    }

    pub fn max_bits_per_symbol(&self) -> f64 {
        self.modes.last().map_or(0.0, |m| m.bits_per_symbol)
    }

    /// Block error probability of mode `m` (1-based) at SINR `gamma`.
    ///
    /// Panics if `m` is not in `1..=N_m`.
    pub fn bler(&self, gamma: f64, m: usize) -> f64 {
        assert!(
            m >= 1 && m <= self.modes.len(),
            "mode {m} outside 1..={}",
            self.modes.len()
        );
        let mode = &self.modes[m - 1];
        if gamma < mode.gamma_floor() {
            1.0
        } else {
            (mode.kappa1 * (-mode.kappa2 * gamma).exp()).min(1.0)
        }
    }

    /// Highest mode whose threshold does not exceed `gamma`; 0 below `Γ^(1)`.
    pub fn select_mode(&self, gamma: f64) -> usize {
        self.thresholds[..self.modes.len()].partition_point(|&t| t <= gamma)
    }
}

/// Continuous-rate allocation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CraParams {
    /// Linear coding gap `Λ ≥ 1`.
    pub coding_gap: f64,
    /// Useful symbol duration `T_o` (s).
    pub symbol_time_s: f64,
}

impl CraParams {
    pub fn new(coding_gap: f64, symbol_time_s: f64) -> Result<Self> {
        if !(coding_gap >= 1.0 && coding_gap.is_finite()) {
            return Err(Error::param("coding_gap", "must be finite and >= 1"));
        }
        if !(symbol_time_s > 0.0 && symbol_time_s.is_finite()) {
            return Err(Error::param("symbol_time_s", "must be positive"));
        }
        Ok(CraParams {
            coding_gap,
            symbol_time_s,
        })
    }

    /// Rate per subcarrier `(1/T_o)·log2(1 + γ/Λ)` in bit/s.
    pub fn cra_rate(&self, gamma: f64) -> f64 {
        (gamma / self.coding_gap).ln_1p() / core::f64::consts::LN_2 / self.symbol_time_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RateModel {
    Cra(CraParams),
    Dra(McsTable),
}

impl RateModel {
    pub fn name(&self) -> &'static str {
        match self {
            RateModel::Cra(_) => "cra",
            RateModel::Dra(_) => "dra",
        }
    }
}
