//! Run configuration: a single JSON document that expands into the scan
//! plan, the noise model, and the direct Bell-point plan.

use crate::apparatus::NoiseModel;
use crate::trials::{BellPlan, ScanPlan};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config field {field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

/// Everything a simulated run needs. All fields have physically sensible
/// defaults, so `{}` is a valid config; unknown fields are rejected to
/// catch typos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Fringe wavelength, nm.
    pub wavelength_nm: f64,
    /// Detected pair rate feeding the counters, Hz.
    pub pair_rate_hz: f64,
    pub duration_per_point_s: f64,
    /// Phase-scanner start position and step, µm.
    pub x_start_um: f64,
    pub x_step_um: f64,
    /// Scan points in each of the six regions (I, 4 × II, III).
    pub points_per_region: u32,
    /// Interferometric visibility.
    pub visibility: f64,
    /// Flat accidental coincidence probability per counter per pair window.
    pub accidental_fraction: f64,
    /// Total interferometer phase drift accumulated between the step-I and
    /// step-III region centers, degrees.
    pub drift_deg_total: f64,
    pub efficiency_det1: f64,
    pub efficiency_det2: f64,
    pub efficiency_det3: f64,
    /// Pol1 orientation in steps I/III, degrees.
    pub pol1_deg: f64,
    /// Expected pairs per counting cell in a direct Bell-point run.
    pub pairs_per_cell: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wavelength_nm: 708.6,
            pair_rate_hz: 3000.0,
            duration_per_point_s: 1.0,
            x_start_um: 26.0,
            x_step_um: 0.02,
            points_per_region: 80,
            visibility: 0.9381,
            accidental_fraction: 0.0,
            drift_deg_total: 0.0,
            efficiency_det1: 1.0,
            efficiency_det2: 1.0,
            efficiency_det3: 1.0,
            pol1_deg: -45.0,
            pairs_per_cell: 3000.0,
            seed: 1,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &'static str, message: String| Err(ConfigError::Invalid { field, message });
        let positive: [(&'static str, f64); 6] = [
            ("wavelength_nm", self.wavelength_nm),
            ("pair_rate_hz", self.pair_rate_hz),
            ("duration_per_point_s", self.duration_per_point_s),
            ("x_step_um", self.x_step_um),
            ("pairs_per_cell", self.pairs_per_cell),
            ("points_per_region", f64::from(self.points_per_region)),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(field, format!("{v} must be > 0 and finite"));
            }
        }
        if !self.x_start_um.is_finite() {
            return bad("x_start_um", format!("{} must be finite", self.x_start_um));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return bad("visibility", format!("{} outside [0, 1]", self.visibility));
        }
        if self.accidental_fraction < 0.0 || !self.accidental_fraction.is_finite() {
            return bad(
                "accidental_fraction",
                format!("{} must be ≥ 0", self.accidental_fraction),
            );
        }
        if !self.drift_deg_total.is_finite() {
            return bad(
                "drift_deg_total",
                format!("{} must be finite", self.drift_deg_total),
            );
        }
        for (field, eff) in [
            ("efficiency_det1", self.efficiency_det1),
            ("efficiency_det2", self.efficiency_det2),
            ("efficiency_det3", self.efficiency_det3),
        ] {
            if !(eff > 0.0 && eff <= 1.0) {
                return bad(field, format!("{eff} outside (0, 1]"));
            }
        }
        if !self.pol1_deg.is_finite() {
            return bad("pol1_deg", format!("{} must be finite", self.pol1_deg));
        }
        Ok(())
    }

    /// Per-point drift rate realizing `drift_deg_total` between the step-I
    /// and step-III region centers, which sit five regions apart in the
    /// six-region timeline.
    pub fn drift_deg_per_point(&self) -> f64 {
        self.drift_deg_total / (5.0 * f64::from(self.points_per_region))
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            visibility: self.visibility,
            accidental_fraction: self.accidental_fraction,
            drift_deg_per_point: self.drift_deg_per_point(),
            efficiency_det1: self.efficiency_det1,
            efficiency_det2: self.efficiency_det2,
            efficiency_det3: self.efficiency_det3,
        }
    }

    pub fn scan_plan(&self, seed: u64) -> ScanPlan {
        ScanPlan::paper_shaped(
            self.pair_rate_hz,
            self.duration_per_point_s,
            self.x_start_um,
            self.x_step_um,
            self.wavelength_nm,
            self.points_per_region,
            self.pol1_deg,
            seed,
        )
    }

    pub fn bell_plan(&self, seed: u64, x_origin_um: f64) -> BellPlan {
        BellPlan {
            lambda_nm: self.wavelength_nm,
            pairs_per_cell: self.pairs_per_cell,
            x_origin_um,
            seed,
        }
    }
}
