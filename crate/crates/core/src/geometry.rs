//! Two-ring hexagonal layout around the tagged base station.
//!
//! BS 0 sits at the origin. Ring 1 holds BSs 1..=6 at the inter-site
//! distance `√3·R_h`, at angles 0°, 60°, … . Ring 2 alternates between the
//! odd indices 7..=17 at `2√3·R_h` (angles 0°, 60°, …) and the even indices
//! 8..=18 at `3·R_h` (angles 30°, 90°, …). With a reuse-3 edge plan the even
//! second-ring sites are exactly the co-channel cells of the tagged cell's
//! edge band.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of base stations in the two-ring layout, tagged BS included.
pub const NUM_BS: usize = 19;

/// Ratio `R_m / R_h` of the area-preserving circle to the hexagon side.
pub fn circle_to_hex_ratio() -> f64 {
    (3.0 * 3.0.sqrt() / (2.0 * PI)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn from_polar(r: f64, theta: f64) -> Self {
        Point {
            x: r * theta.cos(),
            y: r * theta.sin(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// FFR region of the tagged cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Centre,
    Edge,
}

impl Region {
    pub const ALL: [Region; 2] = [Region::Centre, Region::Edge];

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Centre => "centre",
            Region::Edge => "edge",
        }
    }
}

/// Radial extent `[lower, upper]` of one FFR region, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBounds {
    pub region: Region,
    pub lower: f64,
    pub upper: f64,
}

impl RegionBounds {
    pub fn is_empty(&self) -> bool {
        self.upper <= self.lower
    }

    /// Radial density `2d / (R_U² − R_L²)` of a uniformly placed user.
    pub fn distance_pdf(&self, d: f64) -> f64 {
        if d < self.lower || d > self.upper || self.is_empty() {
            return 0.0;
        }
        2.0 * d / (self.upper * self.upper - self.lower * self.lower)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGeometry {
    pub hex_side: f64,
    pub circle_radius: f64,
    pub min_distance: f64,
    pub bs_positions: Vec<Point>,
    pub centre_interferers: Vec<usize>,
    pub edge_interferers: Vec<usize>,
}

impl NetworkGeometry {
    /// Builds the 19-cell layout for hexagon side `hex_side` and minimum
    /// BS-UE distance `min_distance`.
    pub fn build_layout(hex_side: f64, min_distance: f64) -> Result<Self> {
        if !(hex_side.is_finite() && hex_side > 0.0) {
            return Err(Error::param("hex_side", "must be positive and finite"));
        }
        let circle_radius = hex_side * circle_to_hex_ratio();
        if !(min_distance > 0.0 && min_distance < circle_radius) {
            return Err(Error::param(
                "min_distance",
                alloc::format!("must lie in (0, R_m = {circle_radius})"),
            ));
        }

        let mut bs_positions = Vec::with_capacity(NUM_BS);
        bs_positions.push(Point { x: 0.0, y: 0.0 });
        let isd = 3.0.sqrt() * hex_side;
        for j in 0..6 {
            bs_positions.push(Point::from_polar(isd, j as f64 * PI / 3.0));
        }
        for idx in 7..NUM_BS {
            let j = ((idx - 7) / 2) as f64;
            let p = if idx % 2 == 1 {
                Point::from_polar(2.0 * isd, j * PI / 3.0)
            } else {
                Point::from_polar(3.0 * hex_side, PI / 6.0 + j * PI / 3.0)
            };
            bs_positions.push(p);
        }

        Ok(NetworkGeometry {
            hex_side,
            circle_radius,
            min_distance,
            bs_positions,
            centre_interferers: (1..NUM_BS).collect(),
            edge_interferers: (8..NUM_BS).step_by(2).collect(),
        })
    }

    /// Builds the layout from the circular-cell radius `R_m`, back-deriving
    /// the hexagon side.
    pub fn from_cell_radius(circle_radius: f64, min_distance: f64) -> Result<Self> {
        if !(circle_radius.is_finite() && circle_radius > 0.0) {
            return Err(Error::param("cell_radius", "must be positive and finite"));
        }
        Self::build_layout(circle_radius / circle_to_hex_ratio(), min_distance)
    }

    /// Smallest admissible distance threshold ratio `R_0m / R_m`.
    pub fn omega_min(&self) -> f64 {
        self.min_distance / self.circle_radius
    }

    pub fn interferers(&self, band: Region) -> &[usize] {
        match band {
            Region::Centre => &self.centre_interferers,
            Region::Edge => &self.edge_interferers,
        }
    }

    /// Distance from a user at polar position `(d, θ)` around the tagged BS
    /// to interfering BS `bs_index`.
    pub fn interferer_distance(&self, d: f64, theta: f64, bs_index: usize) -> Result<f64> {
        if bs_index == 0 || bs_index >= NUM_BS {
            return Err(Error::param(
                "bs_index",
                alloc::format!("{bs_index} is not an interferer index (1..=18)"),
            ));
        }
        if !(d >= 0.0 && d <= self.circle_radius) {
            return Err(Error::param("d", "user distance must lie in [0, R_m]"));
        }
        Ok(self.interferer_distance_unchecked(d, theta, bs_index))
    }

    pub(crate) fn interferer_distance_unchecked(&self, d: f64, theta: f64, bs_index: usize) -> f64 {
        let p = &self.bs_positions[bs_index];
        let r = p.norm();
        let sq = d * d + r * r - 2.0 * d * r * (theta - p.angle()).cos();
        sq.max(0.0).sqrt()
    }

    /// Radial bounds of `region` for distance threshold ratio `omega`.
    pub fn region_bounds(&self, region: Region, omega: f64) -> Result<RegionBounds> {
        let omega = self.check_omega(omega)?;
        let threshold = omega * self.circle_radius;
        Ok(match region {
            Region::Centre => RegionBounds {
                region,
                lower: self.min_distance,
                upper: threshold,
            },
            Region::Edge => RegionBounds {
                region,
                lower: threshold,
                upper: self.circle_radius,
            },
        })
    }

    /// Validates `omega`, snapping values within rounding noise of the
    /// admissible range onto its end points.
    pub(crate) fn check_omega(&self, omega: f64) -> Result<f64> {
        const SLACK: f64 = 1e-12;
        let lo = self.omega_min();
        if !omega.is_finite() || omega < lo - SLACK || omega > 1.0 + SLACK {
            return Err(Error::param(
                "omega",
                alloc::format!("{omega} outside [{lo}, 1]"),
            ));
        }
        Ok(omega.clamp(lo, 1.0))
    }
}
