//! Perron root of a nonnegative matrix by power iteration.
//!
//! Stopping uses the Collatz-Wielandt bracket
//! `min_i (A x)_i / x_i <= rho <= max_i (A x)_i / x_i` over the positive
//! iterate. If the bracket has not closed after a few hundred steps (periodic
//! matrices oscillate) the iteration switches to `A + alpha I` with `alpha`
//! at the current lower bound, which is primitive whenever `A` is irreducible.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SHIFT_AFTER: usize = 200;
/// Components this far below the largest are treated as decayed to zero.
const NEGLIGIBLE: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tol: 1e-10,
            max_iters: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub spectral_radius: f64,
    /// `rho < 1`.
    pub feasible: bool,
    /// Perron vector, unit 1-norm.
    pub dominant_eigenvector: DVector<f64>,
    pub iterations: usize,
}

pub fn spectral_radius(matrix: &DMatrix<f64>) -> Result<FeasibilityReport> {
    spectral_radius_with(matrix, SpectralOptions::default())
}

fn bracket(ax: &DVector<f64>, x: &DVector<f64>) -> (f64, f64) {
    let xmax = x.max();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (a, v) in ax.iter().zip(x.iter()) {
        if *v > NEGLIGIBLE * xmax {
            let r = a / v;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

pub fn spectral_radius_with(
    matrix: &DMatrix<f64>,
    opts: SpectralOptions,
) -> Result<FeasibilityReport> {
    if !matrix.is_square() {
        return Err(Error::Domain(format!(
            "spectral radius needs a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if let Some(v) = matrix.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Domain(format!(
            "matrix must be entrywise nonnegative, found {v}"
        )));
    }
    let n = matrix.nrows();
    if n == 0 {
        return Ok(FeasibilityReport {
            spectral_radius: 0.0,
            feasible: true,
            dominant_eigenvector: DVector::zeros(0),
            iterations: 0,
        });
    }

    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut shift = 0.0;
    let mut width = f64::INFINITY;
    for it in 1..=opts.max_iters {
        let ax = matrix * &x + &x * shift;
        let (lo, hi) = bracket(&ax, &x);
        width = hi - lo;
        if width <= opts.tol * hi {
            let rho = (0.5 * (lo + hi) - shift).max(0.0);
            return Ok(FeasibilityReport {
                spectral_radius: rho,
                feasible: rho < 1.0,
                dominant_eigenvector: x,
                iterations: it,
            });
        }
        let norm = ax.sum();
        x = ax / norm;
        if it == SHIFT_AFTER && shift == 0.0 {
            shift = if lo > 0.0 { lo } else { hi };
        }
    }
    Err(Error::Numerical {
        message: format!(
            "power iteration did not converge in {} iterations",
            opts.max_iters
        ),
        residual: width,
        last_iterate: x.iter().copied().collect(),
    })
}
