//! Random instance generators and independent oracles shared by the
//! integration tests. Oracles use nalgebra's dense routines only, never the
//! crate's solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use multilayer_power::gain_matrix::LayeredGains;

/// Spectral radius from the full complex spectrum.
pub fn eig_rho(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `[I | C]^+ [F | G]` built from raw gains with a plain inverse.
pub fn two_layer_btilde(gains: &LayeredGains) -> DMatrix<f64> {
    let (a, b, _) = two_layer_abu(gains);
    let inv = (&a * a.transpose())
        .try_inverse()
        .expect("A A^T invertible");
    a.transpose() * inv * b
}

/// `A`, `B`, `u` of the two-layer balance `A x = B x + u`, straight from the
/// gains.
pub fn two_layer_abu(gains: &LayeredGains) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let n = gains.users();
    let (g, h) = (&gains.layers[0], &gains.layers[1]);
    let mut a = DMatrix::zeros(n, 2 * n);
    let mut b = DMatrix::zeros(n, 2 * n);
    let mut u = DVector::zeros(n);
    for i in 0..n {
        let gi = gains.gamma[i];
        a[(i, i)] = 1.0;
        a[(i, n + i)] = h[(i, i)] / g[(i, i)];
        for j in (0..n).filter(|&j| j != i) {
            b[(i, j)] = gi * g[(i, j)] / g[(i, i)];
            b[(i, n + j)] = gi * h[(i, j)] / g[(i, i)];
        }
        u[i] = gi * gains.noise_w[i] / g[(i, i)];
    }
    (a, b, u)
}

/// SINR of every user computed from raw gains and stacked powers.
pub fn sinr(gains: &LayeredGains, powers: &[f64]) -> Vec<f64> {
    let n = gains.users();
    (0..n)
        .map(|i| {
            let mut signal = 0.0;
            let mut interference = gains.noise_w[i];
            for (l, m) in gains.layers.iter().enumerate() {
                for j in 0..n {
                    let term = m[(i, j)] * powers[l * n + j];
                    if j == i {
                        signal += term;
                    } else {
                        interference += term;
                    }
                }
            }
            signal / interference
        })
        .collect()
}

fn cross(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j || rng.random::<f64>() < sparsity {
            0.0
        } else {
            rng.random::<f64>()
        }
    })
}

/// Single-layer gains whose normalized matrix `F` has spectral radius
/// `target_rho` (measured by the eigen oracle).
pub fn single_layer(rng: &mut ChaCha8Rng, n: usize, target_rho: f64) -> LayeredGains {
    let gamma = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
    let noise = DVector::from_fn(n, |_, _| rng.random_range(0.1..1.0));
    let diag: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let off = cross(rng, n, 0.0);
    let f = DMatrix::from_fn(n, n, |i, j| gamma[i] * off[(i, j)] / diag[i]);
    let s = target_rho / eig_rho(&f);
    let g = DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { s * off[(i, j)] });
    LayeredGains::new(vec![g], gamma, noise).unwrap()
}

/// Two-layer gains whose `B~` has spectral radius `target_rho`.
pub fn two_layer(rng: &mut ChaCha8Rng, n: usize, target_rho: f64) -> LayeredGains {
    let gamma = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
    let noise = DVector::from_fn(n, |_, _| rng.random_range(0.1..1.0));
    let gd: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let hd: Vec<f64> = (0..n).map(|i| gd[i] * rng.random_range(0.1..3.0)).collect();
    let go = cross(rng, n, 0.0);
    let ho = cross(rng, n, 0.2);
    let build = |s: f64| {
        let g = DMatrix::from_fn(n, n, |i, j| if i == j { gd[i] } else { s * go[(i, j)] });
        let h = DMatrix::from_fn(n, n, |i, j| if i == j { hd[i] } else { s * ho[(i, j)] });
        LayeredGains::new(vec![g, h], gamma.clone(), noise.clone()).unwrap()
    };
    let rho1 = eig_rho(&two_layer_btilde(&build(1.0)));
    build(target_rho / rho1)
}

/// Random nonnegative square matrix with roughly `sparsity` zero entries.
pub fn nonnegative(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| {
        if rng.random::<f64>() < sparsity {
            0.0
        } else {
            rng.random::<f64>()
        }
    })
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Brute-force LP: minimize `c.x` subject to `rows[k].x >= rhs[k]` by trying
/// every basis of active constraints. Returns `None` when no vertex is
/// feasible.
pub fn vertex_enumeration(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Option<(f64, Vec<f64>)> {
    let d = c.len();
    let m = rows.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let a = DMatrix::from_fn(d, d, |r, k| rows[idx[r]][k]);
        let b = DVector::from_fn(d, |r, _| rhs[idx[r]]);
        if a.determinant().abs() > 1e-12 {
            if let Some(x) = a.lu().solve(&b) {
                let ok = rows.iter().zip(rhs).all(|(row, &r)| {
                    let lhs: f64 = row.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                    lhs >= r - 1e-9 * (1.0 + r.abs())
                });
                if ok {
                    let obj: f64 = c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                    if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                        best = Some((obj, x.iter().copied().collect()));
                    }
                }
            }
        }
        if !next_combination(&mut idx, m) {
            return best;
        }
    }
}

/// Advances `idx` to the next increasing `idx.len()`-subset of `0..m`.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let d = idx.len();
    for k in (0..d).rev() {
        if idx[k] < m - d + k {
            idx[k] += 1;
            for t in k + 1..d {
                idx[t] = idx[t - 1] + 1;
            }
            return true;
        }
    }
    false
}
