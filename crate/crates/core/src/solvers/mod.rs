//! Power allocation solvers.
//!
//! All solvers take a [`NormalizedSystem`](crate::gain_matrix::NormalizedSystem)
//! and return a [`PowerAllocation`] whose powers are stacked by layer: entry
//! `l * N + i` is the power of user `i`'s layer-`l` transmitter.

mod closed_form;
mod iterate;
mod lp;
mod select;
pub mod simplex;
mod spectral;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::gain_matrix::NormalizedSystem;
use crate::propagation::Layer;
use crate::units::{dbm_to_watts, watts_to_dbm};

pub use closed_form::{
    right_pseudo_inverse, solve_layered, solve_multi_layer, solve_single_layer, solve_two_layer,
    NEGATIVE_TOLERANCE,
};
pub use iterate::{iterate_distributed, IterationOptions, IterationOutcome};
pub use lp::{solve_lp, solve_lp_system};
pub use select::select_solver;
pub use spectral::{spectral_radius, spectral_radius_with, FeasibilityReport, SpectralOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Analytic,
    LpFallback,
    Lp,
    Iterative,
}

impl SolverPath {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverPath::Analytic => "analytic",
            SolverPath::LpFallback => "lp-fallback",
            SolverPath::Lp => "lp",
            SolverPath::Iterative => "iterative",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Analytic,
    Lp,
    #[default]
    Auto,
}

/// Maximum transmit power per layer (W); `f64::INFINITY` means uncapped.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerCaps {
    pub per_layer_w: Vec<f64>,
}

impl PowerCaps {
    pub fn from_dbm(dbm: &[f64]) -> Self {
        PowerCaps {
            per_layer_w: dbm.iter().map(|&d| dbm_to_watts(d)).collect(),
        }
    }

    pub fn uncapped(layers: usize) -> Self {
        PowerCaps {
            per_layer_w: vec![f64::INFINITY; layers],
        }
    }

    /// Cap of layer `l`; layers beyond the list are uncapped.
    pub fn layer(&self, l: usize) -> f64 {
        self.per_layer_w.get(l).copied().unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapViolation {
    pub layer: usize,
    pub user: usize,
    pub power_w: f64,
    pub cap_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerAllocation {
    pub layer_count: usize,
    /// Layer-stacked powers (W).
    pub powers_w: Vec<f64>,
    pub total_power_w: f64,
    /// Targets met with nonnegative powers and no cap violation.
    pub feasible: bool,
    pub cap_violations: Vec<CapViolation>,
    pub achieved_sinr: Vec<f64>,
    pub path: SolverPath,
    /// Spectral radius checked by the closed-form route, if it ran.
    pub spectral_radius: Option<f64>,
    /// `max_i |(M y - N y - u)_i|`.
    pub residual: f64,
    /// Total of the closed-form solution when the LP replaced it.
    pub analytic_total_w: Option<f64>,
}

impl PowerAllocation {
    pub(crate) fn from_solution(
        sys: &NormalizedSystem,
        y: DVector<f64>,
        path: SolverPath,
        spectral_radius: Option<f64>,
    ) -> Self {
        PowerAllocation {
            layer_count: sys.layer_count,
            total_power_w: y.sum(),
            feasible: true,
            cap_violations: Vec::new(),
            achieved_sinr: sys.achieved_sinr(&y).iter().copied().collect(),
            path,
            spectral_radius,
            residual: sys.residual(&y),
            analytic_total_w: None,
            powers_w: y.iter().copied().collect(),
        }
    }

    pub fn users(&self) -> usize {
        self.powers_w.len() / self.layer_count.max(1)
    }

    pub fn layer_powers(&self, l: usize) -> &[f64] {
        let n = self.users();
        &self.powers_w[l * n..(l + 1) * n]
    }

    pub fn layer_total(&self, l: usize) -> f64 {
        self.layer_powers(l).iter().sum()
    }

    /// Records every power above its layer cap and updates `feasible`.
    pub fn check_caps(&mut self, caps: &PowerCaps) {
        let n = self.users();
        self.cap_violations = self
            .powers_w
            .iter()
            .enumerate()
            .filter_map(|(k, &w)| {
                let (layer, user) = (k / n, k % n);
                let cap = caps.layer(layer);
                // relative slack so an LP vertex sitting on the cap is not flagged
                (w > cap * (1.0 + 1e-9)).then_some(CapViolation {
                    layer,
                    user,
                    power_w: w,
                    cap_w: cap,
                })
            })
            .collect();
        self.feasible = self.cap_violations.is_empty();
    }

    /// Macro transmitters below `threshold_w` are reported asleep.
    pub fn macro_asleep(&self, threshold_w: f64) -> Vec<bool> {
        self.layer_powers(0)
            .iter()
            .map(|&p| p < threshold_w)
            .collect()
    }

    pub fn to_record(&self, sleep_threshold_w: f64) -> AllocationRecord {
        let n = self.users();
        let transmitters = self
            .powers_w
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let (layer, user) = (k / n, k % n);
                TransmitterRecord {
                    layer: Layer::from_index(layer)
                        .map_or_else(|| format!("tier-{layer}"), |l| l.name().to_string()),
                    user,
                    power_w: w,
                    power_dbm: (w > 0.0).then(|| watts_to_dbm(w)),
                    asleep: layer == 0 && w < sleep_threshold_w,
                }
            })
            .collect();
        AllocationRecord {
            transmitters,
            achieved_sinr: self.achieved_sinr.clone(),
            total_power_w: self.total_power_w,
            feasible: self.feasible,
            cap_violations: self.cap_violations.clone(),
            solver_path: self.path,
            spectral_radius: self.spectral_radius,
            residual: self.residual,
            analytic_total_w: self.analytic_total_w,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransmitterRecord {
    pub layer: String,
    pub user: usize,
    pub power_w: f64,
    /// `None` for a silent transmitter.
    pub power_dbm: Option<f64>,
    pub asleep: bool,
}

/// JSON view of an allocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AllocationRecord {
    pub transmitters: Vec<TransmitterRecord>,
    pub achieved_sinr: Vec<f64>,
    pub total_power_w: f64,
    pub feasible: bool,
    pub cap_violations: Vec<CapViolation>,
    pub solver_path: SolverPath,
    pub spectral_radius: Option<f64>,
    pub residual: f64,
    pub analytic_total_w: Option<f64>,
}
