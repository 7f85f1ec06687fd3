//! Minimum total power under SINR targets and per-layer power caps.
//!
//! The rate constraint `log2(1 + SINR_i) >= r_i` is equivalent to
//! `SINR_i >= gamma_i` with `gamma_i = 2^r_i - 1`, which is linear in the
//! powers. Dividing by `g_ii` gives the normalized rows `((M - N) y)_i >= u_i`.

use nalgebra::DVector;

use super::simplex::{self, Constraint, LinearProgram, LpOutcome, Relation, SimplexOptions};
use super::{PowerAllocation, PowerCaps, SolverPath};
use crate::error::{Error, Result};
use crate::gain_matrix::{build_multi_layer, LayeredGains, NormalizedSystem};

/// Solves the capped LP over every layer present in `gains`.
pub fn solve_lp(gains: &LayeredGains, caps: &PowerCaps) -> Result<PowerAllocation> {
    let sys = build_multi_layer(gains, gains.layer_count())?;
    solve_lp_system(&sys, caps)
}

pub fn solve_lp_system(sys: &NormalizedSystem, caps: &PowerCaps) -> Result<PowerAllocation> {
    let n = sys.users();
    let k = sys.unknowns();
    if let Some(c) = caps.per_layer_w.iter().find(|c| !(**c > 0.0)) {
        return Err(Error::config(
            "caps",
            format!("power caps must be > 0, got {c}"),
        ));
    }
    let balance = &sys.m - &sys.n;
    let mut constraints: Vec<Constraint> = (0..n)
        .map(|i| Constraint {
            coeffs: balance.row(i).iter().copied().collect(),
            relation: Relation::Ge,
            rhs: sys.u[i],
        })
        .collect();
    for v in 0..k {
        let cap = caps.layer(v / n);
        if cap.is_finite() {
            let mut coeffs = vec![0.0; k];
            coeffs[v] = 1.0;
            constraints.push(Constraint {
                coeffs,
                relation: Relation::Le,
                rhs: cap,
            });
        }
    }
    let lp = LinearProgram {
        objective: vec![1.0; k],
        constraints,
    };
    match simplex::solve(&lp, &SimplexOptions::default())? {
        LpOutcome::Optimal { x, .. } => {
            let mut alloc =
                PowerAllocation::from_solution(sys, DVector::from_vec(x), SolverPath::Lp, None);
            alloc.check_caps(caps);
            Ok(alloc)
        }
        LpOutcome::Infeasible {
            infeasibility,
            rows,
        } => Err(Error::LpInfeasible {
            infeasibility,
            users: rows.into_iter().filter(|&r| r < n).collect(),
        }),
        // the objective is bounded below by zero
        LpOutcome::Unbounded => Err(Error::numerical("power LP reported unbounded")),
    }
}
