//! Downlink power control for multi-layer cellular networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: hexagonal site layout, wrap-around images, the Manhattan
//!   microcell overlay and constrained user drops.
//! - [`propagation`]: macro/micro path loss, the sector antenna pattern,
//!   shadowing and minimum coupling loss folded into linear link gains.
//! - [`gain_matrix`]: per-layer gain matrices and the normalized system
//!   (`F`, `C`, `G`, ... and the augmented `M`/`N` blocks) for a target SINR
//!   vector, plus a plain-text matrix format.
//! - [`solvers`]: Perron root, closed-form single/two/multi-layer allocations,
//!   the distributed fixed-point iteration and a capped linear program.
//! - [`harness`]: Monte Carlo drops comparing a macro-only baseline against
//!   the two-layer deployment.
//! - [`cli`]: the `multilayer-power` command line (`run`, `solve`, `layout`).
//!
//! See `examples/` for one runnable program per capability.

// `!(x > 0.0)` is the NaN-rejecting form used throughout input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod gain_matrix;
pub mod geometry;
pub mod harness;
pub mod propagation;
pub mod solvers;
pub mod units;

pub use error::{Error, Result};

/// Version string embedded in every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
