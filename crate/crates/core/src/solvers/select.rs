use super::{
    closed_form::{solve_layered, solve_single_layer},
    lp::solve_lp_system,
    PowerAllocation, PowerCaps, SolverMode, SolverPath,
};
use crate::error::{Error, Result};
use crate::gain_matrix::NormalizedSystem;

fn closed_form(sys: &NormalizedSystem) -> Result<PowerAllocation> {
    if sys.layer_count == 1 {
        solve_single_layer(sys)
    } else {
        solve_layered(sys)
    }
}

/// Closed form first; the capped LP when the closed form breaks a cap or
/// cannot meet the targets (`Auto`). `Analytic` and `Lp` force one route.
pub fn select_solver(
    sys: &NormalizedSystem,
    caps: &PowerCaps,
    mode: SolverMode,
) -> Result<PowerAllocation> {
    match mode {
        SolverMode::Analytic => {
            let mut alloc = closed_form(sys)?;
            alloc.check_caps(caps);
            Ok(alloc)
        }
        SolverMode::Lp => solve_lp_system(sys, caps),
        SolverMode::Auto => {
            let analytic = match closed_form(sys) {
                Ok(mut alloc) => {
                    alloc.check_caps(caps);
                    if alloc.feasible {
                        return Ok(alloc);
                    }
                    Ok(alloc)
                }
                Err(e) if e.is_infeasible() => Err(e),
                Err(e) => return Err(e),
            };
            match solve_lp_system(sys, caps) {
                Ok(mut lp) => {
                    lp.path = SolverPath::LpFallback;
                    if let Ok(a) = &analytic {
                        lp.analytic_total_w = Some(a.total_power_w);
                        lp.spectral_radius = a.spectral_radius;
                    } else if let Err(Error::Infeasible { spectral_radius }) = &analytic {
                        lp.spectral_radius = Some(*spectral_radius);
                    }
                    Ok(lp)
                }
                Err(Error::LpInfeasible {
                    infeasibility,
                    users,
                }) => Err(Error::Unsatisfiable {
                    analytic: match &analytic {
                        Ok(a) => format!(
                            "closed form exceeds caps at {} transmitter(s)",
                            a.cap_violations.len()
                        ),
                        Err(e) => e.to_string(),
                    },
                    spectral_radius: match &analytic {
                        Ok(a) => a.spectral_radius,
                        Err(Error::Infeasible { spectral_radius }) => Some(*spectral_radius),
                        Err(_) => None,
                    },
                    infeasibility,
                    users,
                }),
                Err(e) => Err(e),
            }
        }
    }
}
