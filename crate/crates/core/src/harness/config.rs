use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_hex_layout, DEFAULT_MAX_ATTEMPTS, SECTORS_PER_SITE};
use crate::propagation::PropagationParams;
use crate::solvers::{PowerCaps, SolverMode};
use crate::units::{dbm_to_watts, sinr_for_rate, thermal_noise_watts};

/// How the learning phase ranks users for discarding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardMetric {
    /// Macro-only SINR with every sector at the learning power.
    #[default]
    Sinr,
    /// Serving macro link loss alone.
    PathLoss,
}

/// How users are paired with microcells in the learning phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MicroAssignment {
    /// Distinct microcells, strongest user-microcell pair first.
    #[default]
    Unique,
    /// Each user takes its strongest microcell; two users may share one.
    Best,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapsDbm {
    #[serde(rename = "macro")]
    pub macro_dbm: f64,
    #[serde(rename = "micro")]
    pub micro_dbm: f64,
    #[serde(rename = "pico")]
    pub pico_dbm: f64,
}

impl Default for CapsDbm {
    fn default() -> Self {
        CapsDbm {
            macro_dbm: 43.0,
            micro_dbm: 33.0,
            pico_dbm: 30.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub density_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            density_dbm_hz: -174.0,
            bandwidth_hz: 10e6,
            noise_figure_db: 9.0,
        }
    }
}

impl NoiseConfig {
    pub fn watts(&self) -> f64 {
        thermal_noise_watts(self.density_dbm_hz, self.bandwidth_hz, self.noise_figure_db)
    }
}

/// Every tunable of a drop campaign. Loaded from TOML; missing keys take
/// the reference values, unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub cell_count: usize,
    pub cell_radius_km: f64,
    pub overlay: bool,
    pub block_size_m: f64,
    pub street_width_m: f64,
    pub micro_assignment: MicroAssignment,
    pub learning_power_w: f64,
    pub rate_bps_hz: f64,
    /// Discard counts swept by a campaign, inclusive.
    pub discard_min: usize,
    pub discard_max: usize,
    pub discard_metric: DiscardMetric,
    pub drops: usize,
    pub base_seed: u64,
    pub max_placement_attempts: usize,
    pub solver: SolverMode,
    /// Macro transmitters below this power count as asleep.
    pub sleep_threshold_w: f64,
    /// Silence the macro link of every user whose micro link is stronger.
    pub force_macro_sleep: bool,
    pub caps_dbm: CapsDbm,
    pub noise: NoiseConfig,
    pub propagation: PropagationParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            cell_count: 19,
            cell_radius_km: 1.0,
            overlay: true,
            block_size_m: 200.0,
            street_width_m: 30.0,
            micro_assignment: MicroAssignment::Unique,
            learning_power_w: 5.0,
            rate_bps_hz: 1.0,
            discard_min: 3,
            discard_max: 10,
            discard_metric: DiscardMetric::Sinr,
            drops: 100,
            base_seed: 1,
            max_placement_attempts: DEFAULT_MAX_ATTEMPTS,
            solver: SolverMode::Auto,
            sleep_threshold_w: 1e-3,
            force_macro_sleep: false,
            caps_dbm: CapsDbm::default(),
            noise: NoiseConfig::default(),
            propagation: PropagationParams::default(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl ScenarioConfig {
    /// Parses a TOML document and validates it.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .unwrap_or("config")
                .to_string();
            Error::config(field, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Users per drop: one per macro sector.
    pub fn users(&self) -> usize {
        self.cell_count * SECTORS_PER_SITE
    }

    /// Linear SINR target for the configured rate.
    pub fn sinr_target(&self) -> f64 {
        sinr_for_rate(self.rate_bps_hz)
    }

    pub fn noise_w(&self) -> f64 {
        self.noise.watts()
    }

    pub fn caps(&self, layers: usize) -> PowerCaps {
        let dbm = [
            self.caps_dbm.macro_dbm,
            self.caps_dbm.micro_dbm,
            self.caps_dbm.pico_dbm,
        ];
        PowerCaps {
            per_layer_w: dbm[..layers].iter().map(|&d| dbm_to_watts(d)).collect(),
        }
    }

    pub fn discard_levels(&self) -> std::ops::RangeInclusive<usize> {
        self.discard_min..=self.discard_max
    }

    /// Percentage of users discarded at level `k`.
    pub fn outage_pct(&self, k: usize) -> f64 {
        100.0 * k as f64 / self.users() as f64
    }

    pub fn validate(&self) -> Result<()> {
        build_hex_layout(self.cell_count, 1.0)
            .map_err(|e| Error::config("cell_count", e.to_string()))?;
        positive("cell_radius_km", self.cell_radius_km)?;
        positive("learning_power_w", self.learning_power_w)?;
        positive("rate_bps_hz", self.rate_bps_hz)?;
        positive("sleep_threshold_w", self.sleep_threshold_w)?;
        positive("noise.bandwidth_hz", self.noise.bandwidth_hz)?;
        for (field, v) in [
            ("noise.density_dbm_hz", self.noise.density_dbm_hz),
            ("noise.noise_figure_db", self.noise.noise_figure_db),
            ("caps_dbm.macro", self.caps_dbm.macro_dbm),
            ("caps_dbm.micro", self.caps_dbm.micro_dbm),
            ("caps_dbm.pico", self.caps_dbm.pico_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::config(field, format!("must be finite, got {v}")));
            }
        }
        if self.overlay {
            positive("block_size_m", self.block_size_m)?;
            if !(self.street_width_m.is_finite() && self.street_width_m >= 0.0) {
                return Err(Error::config(
                    "street_width_m",
                    format!("must be non-negative, got {}", self.street_width_m),
                ));
            }
        }
        let n = self.users();
        if self.discard_max >= n {
            return Err(Error::config(
                "discard_max",
                format!(
                    "discard count {} must be below the user count {n}",
                    self.discard_max
                ),
            ));
        }
        if self.discard_min > self.discard_max {
            return Err(Error::config(
                "discard_min",
                format!(
                    "{} exceeds discard_max {}",
                    self.discard_min, self.discard_max
                ),
            ));
        }
        if self.drops == 0 {
            return Err(Error::config("drops", "at least one drop required"));
        }
        if self.max_placement_attempts == 0 {
            return Err(Error::config(
                "max_placement_attempts",
                "must be at least 1",
            ));
        }
        self.propagation.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_scenario() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        assert_eq!(c.users(), 57);
        assert_eq!(c.sinr_target(), 1.0);
        let caps = c.caps(2);
        assert!((caps.per_layer_w[0] - 19.952_623_149_688_8).abs() < 1e-9);
        assert!((caps.per_layer_w[1] - 1.995_262_314_968_88).abs() < 1e-9);
        assert!((crate::units::watts_to_dbm(c.noise_w()) + 95.0).abs() < 1e-9);
    }

    #[test]
    fn outage_axis() {
        let c = ScenarioConfig::default();
        let axis: Vec<f64> = c.discard_levels().map(|k| c.outage_pct(k)).collect();
        assert_eq!(axis.len(), 8);
        assert!((axis[0] - 5.263).abs() < 1e-3);
        assert!((axis[7] - 17.544).abs() < 1e-3);
    }

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(
            ScenarioConfig::from_toml("").unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = ScenarioConfig {
            drops: 7,
            discard_metric: DiscardMetric::PathLoss,
            ..Default::default()
        };
        c.caps_dbm.micro_dbm = 30.0;
        assert_eq!(ScenarioConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_field() {
        let field = |text: &str| match ScenarioConfig::from_toml(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(field("discard_max = 60"), "discard_max");
        assert_eq!(field("discard_min = 9\ndiscard_max = 4"), "discard_min");
        assert_eq!(field("drops = 0"), "drops");
        assert_eq!(field("cell_count = 5"), "cell_count");
        assert_eq!(field("learning_power_w = -5.0"), "learning_power_w");
        assert_eq!(field("dorps = 3"), "dorps");
        assert_eq!(field("[caps_dbm]\nmacor = 43.0"), "macor");
        assert_eq!(
            field("[propagation]\ncarrier_mhz = 900.0"),
            "propagation.macro_intercept_db"
        );
    }
}
