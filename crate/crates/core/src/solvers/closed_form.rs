//! Closed-form allocations.
//!
//! Single layer: `p* = (I - F)^-1 u`, valid when `rho(F) < 1`.
//!
//! Two or more layers: the balance `M y = N y + u` has `N` equations and
//! `L N` unknowns. With the right pseudo-inverse `M+ = M^T (M M^T)^-1`
//! (so `M M+ = I`) write `N = M Ñ` with `Ñ = M+ N`; then
//! `y* = (I - Ñ)^-1 M+ u` satisfies the balance whenever `rho(Ñ) < 1`.
//! For `M = [I | C | D ...]` with nonnegative diagonal blocks, `M M^T` is
//! diagonal and positive, so `M+` is entrywise nonnegative and so is `y*`.

use nalgebra::{DMatrix, DVector};

use super::spectral::spectral_radius;
use super::{PowerAllocation, SolverPath};
use crate::error::{Error, Result};
use crate::gain_matrix::NormalizedSystem;

/// Components more negative than this fraction of the largest power are a
/// validity failure; anything above is floating-point noise and set to zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// Residual bound (relative to `max |u|`) below which a solve is accepted.
const SINGLE_RESIDUAL_TOL: f64 = 1e-6;
const LAYERED_RESIDUAL_TOL: f64 = 1e-8;

/// `A^T (A A^T)^-1` for a full-row-rank `A`.
pub fn right_pseudo_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = a * a.transpose();
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::numerical("M M^T is not positive definite (rank-deficient M)"))?;
    // (A A^T)^-1 A = (A^+)^T; solve instead of forming the inverse
    Ok(chol.solve(a).transpose())
}

fn clean_negatives(mut y: DVector<f64>) -> Result<DVector<f64>> {
    let scale = y.amax();
    for (index, v) in y.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -NEGATIVE_TOLERANCE * scale {
                return Err(Error::NegativePower { index, value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(y)
}

fn solve_square(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.lu()
        .solve(b)
        .ok_or_else(|| Error::numerical("singular linear system"))
}

fn check_residual(sys: &NormalizedSystem, y: &DVector<f64>, rel_tol: f64) -> Result<f64> {
    let residual = sys.residual(y);
    let scale = sys.u.amax().max(f64::MIN_POSITIVE);
    if residual > rel_tol * scale {
        return Err(Error::Numerical {
            message: format!("balance residual {residual:.3e} exceeds {rel_tol:e} * |u|"),
            last_iterate: y.iter().copied().collect(),
            residual,
        });
    }
    Ok(residual)
}

/// Minimum-power single-layer allocation `(I - F)^-1 u`.
pub fn solve_single_layer(sys: &NormalizedSystem) -> Result<PowerAllocation> {
    if sys.layer_count != 1 {
        return Err(Error::Domain(format!(
            "single-layer solve on a {}-layer system",
            sys.layer_count
        )));
    }
    let f = sys.f();
    let report = spectral_radius(&f)?;
    if !report.feasible {
        return Err(Error::Infeasible {
            spectral_radius: report.spectral_radius,
        });
    }
    let n = sys.users();
    let p = solve_square(DMatrix::identity(n, n) - f, &sys.u)?;
    check_residual(sys, &p, SINGLE_RESIDUAL_TOL)?;
    let p = clean_negatives(p)?;
    Ok(PowerAllocation::from_solution(
        sys,
        p,
        SolverPath::Analytic,
        Some(report.spectral_radius),
    ))
}

/// Pseudo-inverse allocation for any layer count.
pub fn solve_layered(sys: &NormalizedSystem) -> Result<PowerAllocation> {
    let m_plus = right_pseudo_inverse(&sys.m)?;
    let n_tilde = &m_plus * &sys.n;
    let report = spectral_radius(&n_tilde)?;
    if !report.feasible {
        return Err(Error::Infeasible {
            spectral_radius: report.spectral_radius,
        });
    }
    let k = sys.unknowns();
    let y = solve_square(DMatrix::identity(k, k) - n_tilde, &(&m_plus * &sys.u))?;
    check_residual(sys, &y, LAYERED_RESIDUAL_TOL)?;
    let y = clean_negatives(y)?;
    Ok(PowerAllocation::from_solution(
        sys,
        y,
        SolverPath::Analytic,
        Some(report.spectral_radius),
    ))
}

/// Macro + micro closed form `x* = (I - A+ B)^-1 A+ u`.
pub fn solve_two_layer(sys: &NormalizedSystem) -> Result<PowerAllocation> {
    if sys.layer_count != 2 {
        return Err(Error::Domain(format!(
            "two-layer solve on a {}-layer system",
            sys.layer_count
        )));
    }
    solve_layered(sys)
}

/// L-layer closed form `y* = (I - M+ N)^-1 M+ u`.
pub fn solve_multi_layer(sys: &NormalizedSystem) -> Result<PowerAllocation> {
    solve_layered(sys)
}
