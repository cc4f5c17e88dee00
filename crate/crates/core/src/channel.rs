//! Link budget and the distance-conditioned SINR distribution.
//!
//! The SINR on a subcarrier is `γ = γ̄₀|H₀|² / (N + Σ_b γ̄_b|H_b|²)` with
//! all `|H|²` unit-mean exponential (Rayleigh fading). Two evaluations of
//! its CDF are provided: the product form derived from the Laplace
//! transform of the interference, which is what the analysis uses, and the
//! sum-of-exponentials partial-fraction expansion, kept as an independent
//! route for cross-checking.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::analysis::FfrPartition;
use crate::error::{Error, Result};
use crate::geometry::{NetworkGeometry, Region};
use crate::quadrature::{integrate_scalar, AdaptiveOptions};

pub fn db_to_linear(db: f64) -> f64 {
    10.0.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Radio and OFDM numerology, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// Total BS transmit power `P_T` (W).
    pub tx_power_w: f64,
    pub antenna_gain_db: f64,
    /// Fixed path loss `K` (dB).
    pub pathloss_k_db: f64,
    /// Path-loss exponent `α`; the model is `K + 10α·log10(d)`.
    pub pathloss_exponent: f64,
    /// Noise power spectral density `N_0` (W/Hz).
    pub noise_psd_w_hz: f64,
    pub noise_figure_db: f64,
    pub subcarrier_spacing_hz: f64,
    pub subcarriers_per_rb: usize,
    /// Useful OFDM symbol duration `T_o` (s).
    pub symbol_time_s: f64,
    pub cp_time_s: f64,
    pub symbols_per_slot: usize,
    /// Total number of resource blocks `N_b`.
    pub num_rbs: usize,
}

impl Default for RadioParams {
    /// LTE 20 MHz downlink parameters.
    fn default() -> Self {
        RadioParams {
            tx_power_w: dbm_to_watts(46.0),
            antenna_gain_db: 14.0,
            pathloss_k_db: 15.3,
            pathloss_exponent: 3.76,
            noise_psd_w_hz: dbm_to_watts(-174.0),
            noise_figure_db: 7.0,
            subcarrier_spacing_hz: 15e3,
            subcarriers_per_rb: 12,
            symbol_time_s: 66.7e-6,
            cp_time_s: 4.69e-6,
            symbols_per_slot: 7,
            num_rbs: 100,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power_w", self.tx_power_w),
            ("pathloss_exponent", self.pathloss_exponent),
            ("noise_psd_w_hz", self.noise_psd_w_hz),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("symbol_time_s", self.symbol_time_s),
            ("cp_time_s", self.cp_time_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        for (name, v) in [
            ("antenna_gain_db", self.antenna_gain_db),
            ("pathloss_k_db", self.pathloss_k_db),
            ("noise_figure_db", self.noise_figure_db),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        for (name, v) in [
            ("subcarriers_per_rb", self.subcarriers_per_rb),
            ("symbols_per_slot", self.symbols_per_slot),
            ("num_rbs", self.num_rbs),
        ] {
            if v == 0 {
                return Err(Error::param(name, "must be at least 1"));
            }
        }
        Ok(())
    }

    /// RB bandwidth `B_b = N_sc·Δf` (Hz).
    pub fn rb_bandwidth_hz(&self) -> f64 {
        self.subcarriers_per_rb as f64 * self.subcarrier_spacing_hz
    }

    /// Slot duration `T_s = N_o·(T_o + T_cp)` (s).
    pub fn slot_time_s(&self) -> f64 {
        self.symbols_per_slot as f64 * (self.symbol_time_s + self.cp_time_s)
    }

    /// Receiver noise power per subcarrier, `F·N_0·Δf` (W).
    pub fn noise_power_w(&self) -> f64 {
        db_to_linear(self.noise_figure_db) * self.noise_psd_w_hz * self.subcarrier_spacing_hz
    }

    pub fn antenna_gain(&self) -> f64 {
        db_to_linear(self.antenna_gain_db)
    }

    pub fn pathloss_db(&self, d: f64) -> Result<f64> {
        if !(d > 0.0) {
            return Err(Error::param("d", "distance must be positive"));
        }
        Ok(self.pathloss_db_unchecked(d))
    }

    fn pathloss_db_unchecked(&self, d: f64) -> f64 {
        self.pathloss_k_db + 10.0 * self.pathloss_exponent * d.log10()
    }

    /// Linear channel gain (antenna gain over path loss) at distance `d`.
    pub(crate) fn link_gain(&self, d: f64) -> f64 {
        db_to_linear(self.antenna_gain_db - self.pathloss_db_unchecked(d))
    }

    /// Power per subcarrier `P_c` under uniform allocation over the
    /// `N_C + N_E` RBs the tagged BS actually uses.
    pub fn per_subcarrier_power(&self, partition: &FfrPartition) -> Result<f64> {
        per_subcarrier_power(
            self.tx_power_w,
            self.subcarriers_per_rb,
            partition.n_centre,
            partition.n_edge,
        )
    }
}

/// `P_c = P_T / (N_sc·(N_C + N_E))`.
pub fn per_subcarrier_power(
    tx_power_w: f64,
    subcarriers_per_rb: usize,
    n_centre: usize,
    n_edge: usize,
) -> Result<f64> {
    let used = n_centre + n_edge;
    if used == 0 || subcarriers_per_rb == 0 {
        return Err(Error::param("partition", "no resource blocks in use"));
    }
    Ok(tx_power_w / (subcarriers_per_rb * used) as f64)
}

/// Mean received powers seen by one user on one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvgPowerProfile {
    /// Mean received power from the tagged BS, `γ̄₀` (W).
    pub signal: f64,
    /// Mean received power from each interferer of the band, `γ̄_b` (W).
    pub interferers: Vec<f64>,
    /// Noise power per subcarrier (W).
    pub noise: f64,
}

/// Builds the mean-power profile of a user at `(d, θ)` on `band`.
pub fn avg_power_profile(
    d: f64,
    theta: f64,
    band: Region,
    radio: &RadioParams,
    geometry: &NetworkGeometry,
    partition: &FfrPartition,
) -> Result<AvgPowerProfile> {
    if !(d >= geometry.min_distance && d <= geometry.circle_radius * (1.0 + 1e-12)) {
        return Err(Error::param("d", "user distance must lie in [R_0m, R_m]"));
    }
    let pc = radio.per_subcarrier_power(partition)?;
    Ok(profile_at(d, theta, band, radio, geometry, pc))
}

pub(crate) fn profile_at(
    d: f64,
    theta: f64,
    band: Region,
    radio: &RadioParams,
    geometry: &NetworkGeometry,
    pc: f64,
) -> AvgPowerProfile {
    let interferers = geometry
        .interferers(band)
        .iter()
        .map(|&b| pc * radio.link_gain(geometry.interferer_distance_unchecked(d, theta, b)))
        .collect();
    AvgPowerProfile {
        signal: pc * radio.link_gain(d),
        interferers,
        noise: radio.noise_power_w(),
    }
}

impl AvgPowerProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.signal) || !ok(self.noise) || !self.interferers.iter().all(|&v| ok(v)) {
            return Err(Error::param("profile", "all mean powers must be positive"));
        }
        Ok(())
    }

    /// Normalised form used for fast repeated evaluation.
    pub fn kernel(&self) -> SinrKernel {
        SinrKernel {
            noise_ratio: self.noise / self.signal,
            interference_ratios: self.interferers.iter().map(|g| g / self.signal).collect(),
        }
    }

    /// `Pr{γ ≤ x}` for this profile.
    pub fn conditional_sinr_cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::param("x", "SINR must be non-negative"));
        }
        Ok(self.kernel().cdf(x))
    }

    /// `Pr{γ ≤ x}` through the sum-of-exponentials expansion of the
    /// interference.
    ///
    /// Interference rates that coincide within a relative `1e-9` are split
    /// by scaling the j-th member of each coincident group by `1 + j·1e-7`,
    /// which keeps the expansion finite at an error below `1e-6`.
    pub fn conditional_sinr_cdf_partial_fractions(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::param("x", "SINR must be non-negative"));
        }
        let k = self.kernel();
        let ratios = separate_repeated_rates(&k.interference_ratios);
        let n = ratios.len();
        let mut sum = 0.0;
        for b in 0..n {
            let rb = ratios[b];
            let mut term = x * rb / (x * rb + 1.0);
            for (bp, &rbp) in ratios.iter().enumerate() {
                if bp != b {
                    term *= rb / (rb - rbp);
                }
            }
            sum += term;
        }
        let e = (-x * k.noise_ratio).exp();
        Ok((1.0 - e + sum * e).clamp(0.0, 1.0))
    }

    /// Mean SINR `E{γ} = ∫₀^∞ (1 − F(x)) dx`.
    pub fn mean_sinr(&self) -> Result<f64> {
        self.kernel().mean()
    }
}

pub(crate) fn separate_repeated_rates(rates: &[f64]) -> Vec<f64> {
    const COLLISION: f64 = 1e-9;
    const JITTER: f64 = 1e-7;
    rates
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let j = rates[..i]
                .iter()
                .filter(|&&q| (q - r).abs() <= COLLISION * q.abs().max(r.abs()))
                .count();
            r * (1.0 + j as f64 * JITTER)
        })
        .collect()
}

/// Profile normalised by the serving power: `γ = |H₀|² / (s + Σ r_b|H_b|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrKernel {
    /// `s = N / γ̄₀`.
    pub noise_ratio: f64,
    /// `r_b = γ̄_b / γ̄₀`.
    pub interference_ratios: Vec<f64>,
}

impl SinrKernel {
    /// `1 − F(x) = e^{−x·s} / Π_b (1 + x·r_b)`.
    #[inline]
    pub fn survival(&self, x: f64) -> f64 {
        let denom: f64 = self
            .interference_ratios
            .iter()
            .map(|r| 1.0 + x * r)
            .product();
        (-x * self.noise_ratio).exp() / denom
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// One SINR realisation from unit-mean exponential fading powers.
    #[inline]
    pub fn sample(&self, signal_fade: f64, interferer_fades: &[f64]) -> f64 {
        let i: f64 = self
            .interference_ratios
            .iter()
            .zip(interferer_fades)
            .map(|(r, h)| r * h)
            .sum();
        signal_fade / (self.noise_ratio + i)
    }

    pub fn mean(&self) -> Result<f64> {
        // x = u / (1 − u) maps (0, ∞) onto (0, 1)
        let opts = AdaptiveOptions {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            ..Default::default()
        };
        let (v, _) = integrate_scalar(
            |u| {
                let x = u / (1.0 - u);
                self.survival(x) / ((1.0 - u) * (1.0 - u))
            },
            0.0,
            1.0,
            &opts,
        )?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::FfrPartition;

    fn setup() -> (RadioParams, NetworkGeometry, FfrPartition) {
        (
            RadioParams::default(),
            NetworkGeometry::from_cell_radius(500.0, 35.0).unwrap(),
            FfrPartition::from_zeta(0.7, 0.52, 100).unwrap(),
        )
    }

    #[test]
    fn pathloss_examples() {
        let r = RadioParams::default();
        assert!((r.pathloss_db(1.0).unwrap() - 15.3).abs() < 1e-12);
        assert!((r.pathloss_db(10.0).unwrap() - 52.9).abs() < 1e-12);
        assert!((r.pathloss_db(100.0).unwrap() - 90.5).abs() < 1e-12);
        assert!(r.pathloss_db(0.0).is_err());
        assert!(r.pathloss_db(-3.0).is_err());
    }

    #[test]
    fn per_subcarrier_power_examples() {
        let pt = dbm_to_watts(46.0);
        assert!((pt - 39.810_717).abs() < 1e-5);
        let pc = per_subcarrier_power(39.81, 12, 52, 16).unwrap();
        assert!((pc - 0.048_787).abs() < 1e-6);
        let full = per_subcarrier_power(pt, 12, 100, 0).unwrap();
        assert!((full - pt / 1200.0).abs() < 1e-15);
        let doubled = per_subcarrier_power(2.0 * pt, 12, 52, 16).unwrap();
        let single = per_subcarrier_power(pt, 12, 52, 16).unwrap();
        assert!((doubled - 2.0 * single).abs() < 1e-15);
        assert!(per_subcarrier_power(pt, 12, 0, 0).is_err());
    }

    #[test]
    fn default_numerology() {
        let r = RadioParams::default();
        r.validate().unwrap();
        assert_eq!(r.rb_bandwidth_hz(), 180e3);
        assert!((r.slot_time_s() - 7.0 * (66.7e-6 + 4.69e-6)).abs() < 1e-15);
        // -174 dBm/Hz + 7 dB + 10log10(15 kHz)
        let n_dbm = linear_to_db(r.noise_power_w()) + 30.0;
        assert!((n_dbm - (-174.0 + 7.0 + linear_to_db(15e3))).abs() < 1e-9);
    }

    #[test]
    fn interferer_counts_per_band() {
        let (r, g, p) = setup();
        let c = avg_power_profile(250.0, 0.0, Region::Centre, &r, &g, &p).unwrap();
        let e = avg_power_profile(250.0, 0.0, Region::Edge, &r, &g, &p).unwrap();
        assert_eq!(c.interferers.len(), 18);
        assert_eq!(e.interferers.len(), 6);
        c.validate().unwrap();
        assert!(avg_power_profile(20.0, 0.0, Region::Edge, &r, &g, &p).is_err());
    }

    #[test]
    fn cdf_limits() {
        let (r, g, p) = setup();
        let prof = avg_power_profile(250.0, 0.0, Region::Centre, &r, &g, &p).unwrap();
        assert_eq!(prof.conditional_sinr_cdf(0.0).unwrap(), 0.0);
        assert!(prof.conditional_sinr_cdf(1e12).unwrap() > 1.0 - 1e-15);
        assert!(prof.conditional_sinr_cdf(-1.0).is_err());
        assert!(prof.conditional_sinr_cdf_partial_fractions(-1.0).is_err());
    }

    #[test]
    fn rayleigh_only_profile() {
        let prof = AvgPowerProfile {
            signal: 2.0,
            interferers: Vec::new(),
            noise: 0.5,
        };
        for x in [0.0, 0.3, 1.0, 7.0] {
            let exact = 1.0 - (-x * 0.25f64).exp();
            assert!((prof.conditional_sinr_cdf(x).unwrap() - exact).abs() < 1e-15);
            assert!(
                (prof.conditional_sinr_cdf_partial_fractions(x).unwrap() - exact).abs() < 1e-15
            );
        }
        // E{γ} = γ̄₀ / N for pure Rayleigh
        assert!((prof.mean_sinr().unwrap() - 4.0).abs() < 1e-8);
    }

    #[test]
    fn symmetric_geometry_has_repeated_rates() {
        let (r, g, p) = setup();
        let prof = avg_power_profile(250.0, 0.0, Region::Centre, &r, &g, &p).unwrap();
        let n = prof.interferers.len();
        let mut pairs = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (prof.interferers[i], prof.interferers[j]);
                if (a - b).abs() <= 1e-9 * a.max(b) {
                    pairs += 1;
                }
            }
        }
        assert!(pairs >= 6, "expected mirror-image interferers, got {pairs}");
        for x in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let a = prof.conditional_sinr_cdf(x).unwrap();
            let b = prof.conditional_sinr_cdf_partial_fractions(x).unwrap();
            assert!((a - b).abs() < 1e-6, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn separation_is_deterministic() {
        let r = separate_repeated_rates(&[1.0, 2.0, 1.0, 1.0]);
        assert_eq!(r[0], 1.0);
        assert_eq!(r[1], 2.0);
        assert_eq!(r[2], 1.0 + 1e-7);
        assert_eq!(r[3], 1.0 + 2e-7);
    }

    #[test]
    fn mean_sinr_matches_survival_integral_by_substitution() {
        let k = SinrKernel {
            noise_ratio: 0.1,
            interference_ratios: alloc::vec![0.2, 0.05],
        };
        // E{γ} = ∫ e^{-0.1x} / ((1+0.2x)(1+0.05x)) dx, crude midpoint check
        let h = 1e-3;
        let crude: f64 = (0..200_000)
            .map(|i| k.survival((i as f64 + 0.5) * h) * h)
            .sum();
        assert!((k.mean().unwrap() - crude).abs() < 1e-5);
    }
}
