//! Distributed fixed-point power updates `p <- F p + u`.
//!
//! Each base station only needs its own user's interference-plus-noise
//! measurement, so the update can run without a central processor.

use nalgebra::DVector;

use super::{PowerAllocation, SolverPath};
use crate::error::{Error, Result};
use crate::gain_matrix::NormalizedSystem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationOptions {
    pub max_iters: usize,
    /// Target relative error `|p - p*|_inf / |p|_inf` (estimated).
    pub tol: f64,
    /// Total power (W) beyond which the iteration is declared divergent.
    pub power_ceiling_w: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions {
            max_iters: 10_000,
            tol: 1e-9,
            power_ceiling_w: 1e6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationOutcome {
    pub allocation: PowerAllocation,
    /// Total power after each update.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Runs the update from `p0` until the estimated distance to the fixed point
/// drops below `tol` (relative, max-norm).
///
/// The distance is estimated from the contraction ratio of successive steps,
/// `|dp_n| r / (1 - r)` with `r = |dp_n| / |dp_{n-1}|`, and the plain step
/// `|dp_n|` must also be below `tol`.
pub fn iterate_distributed(
    sys: &NormalizedSystem,
    p0: &DVector<f64>,
    opts: IterationOptions,
) -> Result<IterationOutcome> {
    if sys.layer_count != 1 {
        return Err(Error::Domain(
            "distributed iteration runs on single-layer systems".into(),
        ));
    }
    if p0.len() != sys.users() || p0.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain(
            "initial powers must be nonnegative, one per user".into(),
        ));
    }
    let f = sys.f();
    let mut p = p0.clone();
    let mut trace = Vec::new();
    let mut prev_step: Option<f64> = None;
    for it in 1..=opts.max_iters {
        let next = &f * &p + &sys.u;
        let total = next.sum();
        trace.push(total);
        if !(total <= opts.power_ceiling_w) {
            return Err(Error::Divergence {
                iteration: it,
                total_power: total,
            });
        }
        let scale = next.amax().max(f64::MIN_POSITIVE);
        let step = (&next - &p).amax() / scale;
        let err_estimate = match prev_step {
            Some(prev) if prev > 0.0 && step < prev => {
                let r = step / prev;
                step * r / (1.0 - r)
            }
            Some(_) => f64::INFINITY,
            None => step,
        };
        p = next;
        if step < opts.tol && err_estimate < opts.tol {
            return Ok(IterationOutcome {
                allocation: PowerAllocation::from_solution(sys, p, SolverPath::Iterative, None),
                trace,
                iterations: it,
            });
        }
        prev_step = Some(step);
    }
    Err(Error::Numerical {
        message: format!(
            "fixed-point iteration not converged after {} steps",
            opts.max_iters
        ),
        residual: sys.residual(&p),
        last_iterate: p.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain_matrix::{build_single_layer, LayeredGains};
    use crate::solvers::solve_single_layer;
    use nalgebra::DMatrix;

    fn pair(eps: f64) -> NormalizedSystem {
        build_single_layer(
            &LayeredGains::new(
                vec![DMatrix::from_row_slice(2, 2, &[1.0, eps, eps, 1.0])],
                DVector::from_element(2, 1.0),
                DVector::from_element(2, 1.0),
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn starts_at_fixed_point() {
        let s = pair(0.5);
        let star = solve_single_layer(&s).unwrap();
        let out = iterate_distributed(
            &s,
            &DVector::from_vec(star.powers_w.clone()),
            IterationOptions::default(),
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn geometric_convergence_from_zero() {
        // p_n = sum_{k<n} 0.5^k -> 2
        let s = pair(0.5);
        let out = iterate_distributed(
            &s,
            &DVector::zeros(2),
            IterationOptions {
                tol: 1e-7,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.iterations <= 50, "{}", out.iterations);
        for p in &out.allocation.powers_w {
            assert!((p - 2.0).abs() < 1e-6);
        }
        assert!((out.trace[0] - 2.0).abs() < 1e-15);
        assert!((out.trace[1] - 3.0).abs() < 1e-15);
        assert!(out.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn diverges_above_unit_radius() {
        let s = pair(1.2);
        assert!(matches!(
            iterate_distributed(&s, &DVector::zeros(2), IterationOptions::default()),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn rejects_negative_start() {
        let s = pair(0.5);
        assert!(
            iterate_distributed(&s, &DVector::from_element(2, -1.0), Default::default()).is_err()
        );
    }
}
