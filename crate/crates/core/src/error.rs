use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value; `field` names the offending key.
    #[error("invalid configuration `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("user placement failed for sector {sector} after {attempts} attempts")]
    Placement { sector: usize, attempts: usize },

    #[error("user {user} has no serving link (g_ii = 0)")]
    SingularServingLink { user: usize },

    /// SINR targets cannot be met: the relevant spectral radius is >= 1.
    #[error("infeasible SINR targets: spectral radius {spectral_radius:.6} >= 1")]
    Infeasible { spectral_radius: f64 },

    /// Linear program has an empty feasible set; `users` lists the SINR
    /// constraints that could not be satisfied.
    #[error("power LP infeasible (residual infeasibility {infeasibility:.3e}, users {users:?})")]
    LpInfeasible {
        infeasibility: f64,
        users: Vec<usize>,
    },

    /// Neither the closed form nor the capped LP meets the targets.
    #[error("targets unsatisfiable: closed form: {analytic}; LP infeasible for users {users:?}")]
    Unsatisfiable {
        analytic: String,
        spectral_radius: Option<f64>,
        infeasibility: f64,
        users: Vec<usize>,
    },

    /// Closed-form solution has a component below the validity threshold.
    #[error("closed-form solution invalid: component {index} = {value:.3e}")]
    NegativePower { index: usize, value: f64 },

    #[error(
        "fixed-point iteration diverged at iteration {iteration} (total power {total_power:.3e} W)"
    )]
    Divergence { iteration: usize, total_power: f64 },

    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        last_iterate: Vec<f64>,
        residual: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn numerical(message: impl Into<String>) -> Self {
        Error::Numerical {
            message: message.into(),
            last_iterate: Vec::new(),
            residual: f64::NAN,
        }
    }

    /// True for any "targets cannot be met" outcome, as opposed to a bug or
    /// numerical breakdown.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. }
                | Error::LpInfeasible { .. }
                | Error::Unsatisfiable { .. }
                | Error::NegativePower { .. }
                | Error::Divergence { .. }
        )
    }
}
