//! Normalized channel-gain systems.
//!
//! For user `i` with target `gamma_i`, dividing its SINR balance by the
//! serving macro gain `g_ii` gives one row of
//!
//! ```text
//! [I | C | D ...] y = [F | G | L ...] y + u
//! ```
//!
//! with `y = [p; q; s ...]` stacking per-layer powers. `F`, `G`, `L` hold the
//! normalized cross gains `gamma_i * x_ij / g_ii` (zero diagonal), `C`, `D`
//! the diagonal ratios `x_ii / g_ii`, and `u_i = gamma_i * noise_i / g_ii`.
//! The single-layer case is `p = F p + u`.

mod text;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use text::{parse_gains, parse_system, write_gains, write_system, GainsDocument};

/// Linear channel gains for `N` users across one or more layers.
///
/// `layers[l][(i, j)]` is the gain from user `j`'s layer-`l` transmitter to
/// user `i`; layer 0 is the macro layer. Each user is paired with exactly one
/// transmitter per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredGains {
    pub layers: Vec<DMatrix<f64>>,
    /// Linear SINR target per user.
    pub gamma: DVector<f64>,
    /// Noise power per user (W).
    pub noise_w: DVector<f64>,
}

impl LayeredGains {
    pub fn new(
        layers: Vec<DMatrix<f64>>,
        gamma: DVector<f64>,
        noise_w: DVector<f64>,
    ) -> Result<Self> {
        let g = LayeredGains {
            layers,
            gamma,
            noise_w,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.gamma.len();
        if self.layers.is_empty() {
            return Err(Error::Domain("at least one layer required".into()));
        }
        if self.noise_w.len() != n {
            return Err(Error::Domain(format!(
                "noise vector has {} entries for {n} users",
                self.noise_w.len()
            )));
        }
        for (l, m) in self.layers.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Domain(format!(
                    "layer {l} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if let Some(v) = m.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Domain(format!("layer {l} has invalid gain {v}")));
            }
        }
        if let Some(v) = self.gamma.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Domain(format!("SINR target must be > 0, got {v}")));
        }
        if let Some(v) = self.noise_w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("noise power must be >= 0, got {v}")));
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.gamma.len()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Keeps only the users in `keep` (in that order) in every layer.
    pub fn restrict(&self, keep: &[usize]) -> LayeredGains {
        let k = keep.len();
        LayeredGains {
            layers: self
                .layers
                .iter()
                .map(|m| DMatrix::from_fn(k, k, |a, b| m[(keep[a], keep[b])]))
                .collect(),
            gamma: DVector::from_fn(k, |a, _| self.gamma[keep[a]]),
            noise_w: DVector::from_fn(k, |a, _| self.noise_w[keep[a]]),
        }
    }

    /// The first `count` layers.
    pub fn truncated(&self, count: usize) -> LayeredGains {
        LayeredGains {
            layers: self.layers[..count.min(self.layers.len())].to_vec(),
            ..self.clone()
        }
    }

    fn check_serving(&self) -> Result<()> {
        let g = &self.layers[0];
        match (0..self.users()).find(|&i| g[(i, i)] <= 0.0) {
            Some(user) => Err(Error::SingularServingLink { user }),
            None => Ok(()),
        }
    }
}

/// The matrices of the normalized balance `M y = N y + u`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSystem {
    pub layer_count: usize,
    pub gamma: DVector<f64>,
    pub u: DVector<f64>,
    /// `[I | C | D ...]`, `N x (L N)`.
    pub m: DMatrix<f64>,
    /// `[F | G | L ...]`, `N x (L N)`.
    pub n: DMatrix<f64>,
}

impl NormalizedSystem {
    pub fn users(&self) -> usize {
        self.u.len()
    }

    pub fn unknowns(&self) -> usize {
        self.m.ncols()
    }

    /// Cross-gain block of layer `l` (`F` for 0, `G` for 1, `L` for 2).
    pub fn cross_block(&self, l: usize) -> DMatrix<f64> {
        let n = self.users();
        self.n.columns(l * n, n).into_owned()
    }

    /// Own-link block of layer `l` (`I` for 0, `C` for 1, `D` for 2).
    pub fn own_block(&self, l: usize) -> DMatrix<f64> {
        let n = self.users();
        self.m.columns(l * n, n).into_owned()
    }

    pub fn f(&self) -> DMatrix<f64> {
        self.cross_block(0)
    }

    /// Linear SINR each user sees under powers `y` (layer-stacked).
    pub fn achieved_sinr(&self, y: &DVector<f64>) -> DVector<f64> {
        // (M y)_i = signal / g_ii and ((N y)_i + u_i) / gamma_i = (interference + noise) / g_ii
        let signal = &self.m * y;
        let denom = &self.n * y + &self.u;
        DVector::from_fn(self.users(), |i, _| self.gamma[i] * signal[i] / denom[i])
    }

    /// `max_i |(M y - N y - u)_i|`.
    pub fn residual(&self, y: &DVector<f64>) -> f64 {
        (&self.m * y - &self.n * y - &self.u).amax()
    }

    /// Removes macro transmission for flagged users: their macro column is
    /// zeroed in both `M` and `N`, so their macro power drops out.
    pub fn with_forced_sleep(&self, asleep: &[bool]) -> NormalizedSystem {
        let mut out = self.clone();
        for (i, _) in asleep.iter().enumerate().filter(|(_, s)| **s) {
            out.m.column_mut(i).fill(0.0);
            out.n.column_mut(i).fill(0.0);
        }
        out
    }
}

/// `p = F p + u` from the macro layer alone.
pub fn build_single_layer(gains: &LayeredGains) -> Result<NormalizedSystem> {
    build_multi_layer(gains, 1)
}

/// `[I | C] x = [F | G] x + u` from the macro and micro layers.
pub fn build_two_layer(gains: &LayeredGains) -> Result<NormalizedSystem> {
    if gains.layer_count() < 2 {
        return Err(Error::Domain("two-layer system needs a micro layer".into()));
    }
    build_multi_layer(gains, 2)
}

/// `M y = N y + u` over the first `layer_count` layers.
pub fn build_multi_layer(gains: &LayeredGains, layer_count: usize) -> Result<NormalizedSystem> {
    gains.validate()?;
    if layer_count == 0 || layer_count > gains.layer_count() {
        return Err(Error::Domain(format!(
            "requested {layer_count} layers, gains carry {}",
            gains.layer_count()
        )));
    }
    gains.check_serving()?;
    let n = gains.users();
    let g = &gains.layers[0];
    let mut m = DMatrix::zeros(n, layer_count * n);
    let mut nm = DMatrix::zeros(n, layer_count * n);
    for (l, x) in gains.layers[..layer_count].iter().enumerate() {
        for i in 0..n {
            let gii = g[(i, i)];
            m[(i, l * n + i)] = x[(i, i)] / gii;
            for j in (0..n).filter(|&j| j != i) {
                nm[(i, l * n + j)] = gains.gamma[i] * x[(i, j)] / gii;
            }
        }
    }
    let u = DVector::from_fn(n, |i, _| gains.gamma[i] * gains.noise_w[i] / g[(i, i)]);
    Ok(NormalizedSystem {
        layer_count,
        gamma: gains.gamma.clone(),
        u,
        m,
        n: nm,
    })
}

/// Users whose paired micro link is stronger than their macro link.
pub fn microcell_association_mask(gains: &LayeredGains) -> Vec<bool> {
    let n = gains.users();
    match gains.layers.get(1) {
        Some(h) => (0..n)
            .map(|i| h[(i, i)] > gains.layers[0][(i, i)])
            .collect(),
        None => vec![false; n],
    }
}
