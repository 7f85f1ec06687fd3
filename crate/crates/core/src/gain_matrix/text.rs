//! Plain-text matrix files.
//!
//! Gains file (`#` starts a comment, whitespace separates values):
//!
//! ```text
//! users 2
//! layers 2
//! gamma          # optional; one target per user
//! 1 1
//! noise
//! 1 1
//! layer 0        # N rows of N gains, row i = receiving user i
//! 1.0 0.5
//! 0.5 1.0
//! layer 1
//! ...
//! ```
//!
//! Normalized-system dump: `normalized <N> <L>` header followed by `gamma`,
//! `u`, `M` and `N` sections, all row-major.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{LayeredGains, NormalizedSystem};
use crate::error::{Error, Result};

/// A parsed gains file; targets may be supplied later.
#[derive(Clone, Debug, PartialEq)]
pub struct GainsDocument {
    pub layers: Vec<DMatrix<f64>>,
    pub noise_w: DVector<f64>,
    pub gamma: Option<DVector<f64>>,
}

impl GainsDocument {
    /// Builds gains, using `gamma_override` for every user when given.
    pub fn into_gains(self, gamma_override: Option<f64>) -> Result<LayeredGains> {
        let n = self.noise_w.len();
        let gamma = match (gamma_override, self.gamma) {
            (Some(g), _) => DVector::from_element(n, g),
            (None, Some(g)) => g,
            (None, None) => {
                return Err(Error::config(
                    "gamma",
                    "no SINR targets in the file and none supplied",
                ))
            }
        };
        LayeredGains::new(self.layers, gamma, self.noise_w)
    }
}

type Tokens<'a> = Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>;

struct Lines<'a> {
    inner: std::iter::Peekable<Tokens<'a>>,
    /// Last line handed out; end-of-input errors point just past it.
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
                .map(|(i, l)| (i, l.split_whitespace().collect::<Vec<_>>()))
                .filter(|(_, t)| !t.is_empty()),
        );
        Lines {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        let item = self.inner.next();
        if let Some((line, _)) = &item {
            self.last = *line;
        }
        item
    }

    fn peek_keyword(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, t)| t[0])
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.next() {
            Some((line, t)) if t[0] == kw => Ok((line, t)),
            Some((line, t)) => Err(Error::Parse {
                line,
                message: format!("expected `{kw}`, found `{}`", t[0]),
            }),
            None => Err(Error::Parse {
                line: self.last + 1,
                message: format!("unexpected end of input, expected `{kw}`"),
            }),
        }
    }

    fn values(&mut self, count: usize) -> Result<Vec<f64>> {
        match self.next() {
            Some((line, t)) => {
                if t.len() != count {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {count} values, found {}", t.len()),
                    });
                }
                t.iter()
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| Error::Parse {
                            line,
                            message: format!("`{s}` is not a number"),
                        })
                    })
                    .collect()
            }
            None => Err(Error::Parse {
                line: self.last + 1,
                message: format!("unexpected end of input, expected {count} values"),
            }),
        }
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.values(cols)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }
}

fn header_usize(t: &[&str], line: usize, kw: &str, idx: usize) -> Result<usize> {
    t.get(idx)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("`{kw}` needs a non-negative integer"),
        })
}

pub fn parse_gains(text: &str) -> Result<GainsDocument> {
    let mut lines = Lines::new(text);
    let (line, t) = lines.expect_keyword("users")?;
    let n = header_usize(&t, line, "users", 1)?;
    let (line, t) = lines.expect_keyword("layers")?;
    let layer_count = header_usize(&t, line, "layers", 1)?;
    if n == 0 || layer_count == 0 {
        return Err(Error::Parse {
            line,
            message: "users and layers must be positive".into(),
        });
    }
    let gamma = if lines.peek_keyword() == Some("gamma") {
        lines.next();
        Some(DVector::from_vec(lines.values(n)?))
    } else {
        None
    };
    lines.expect_keyword("noise")?;
    let noise_w = DVector::from_vec(lines.values(n)?);
    let mut layers = Vec::with_capacity(layer_count);
    for l in 0..layer_count {
        let (line, t) = lines.expect_keyword("layer")?;
        if header_usize(&t, line, "layer", 1)? != l {
            return Err(Error::Parse {
                line,
                message: format!("expected `layer {l}`"),
            });
        }
        layers.push(lines.matrix(n, n)?);
    }
    if let Some((line, t)) = lines.next() {
        return Err(Error::Parse {
            line,
            message: format!("unexpected trailing content `{}`", t.join(" ")),
        });
    }
    Ok(GainsDocument {
        layers,
        noise_w,
        gamma,
    })
}

fn push_row(out: &mut String, values: impl Iterator<Item = f64>) {
    let row: Vec<String> = values.map(|v| format!("{v:e}")).collect();
    out.push_str(&row.join(" "));
    out.push('\n');
}

fn push_matrix(out: &mut String, m: &DMatrix<f64>) {
    for r in m.row_iter() {
        push_row(out, r.iter().copied());
    }
}

pub fn write_gains(gains: &LayeredGains) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "users {}", gains.users());
    let _ = writeln!(out, "layers {}", gains.layer_count());
    out.push_str("gamma\n");
    push_row(&mut out, gains.gamma.iter().copied());
    out.push_str("noise\n");
    push_row(&mut out, gains.noise_w.iter().copied());
    for (l, m) in gains.layers.iter().enumerate() {
        let _ = writeln!(out, "layer {l}");
        push_matrix(&mut out, m);
    }
    out
}

pub fn write_system(sys: &NormalizedSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "normalized {} {}", sys.users(), sys.layer_count);
    out.push_str("gamma\n");
    push_row(&mut out, sys.gamma.iter().copied());
    out.push_str("u\n");
    push_row(&mut out, sys.u.iter().copied());
    out.push_str("M\n");
    push_matrix(&mut out, &sys.m);
    out.push_str("N\n");
    push_matrix(&mut out, &sys.n);
    out
}

pub fn parse_system(text: &str) -> Result<NormalizedSystem> {
    let mut lines = Lines::new(text);
    let (line, t) = lines.expect_keyword("normalized")?;
    let n = header_usize(&t, line, "normalized", 1)?;
    let layer_count = header_usize(&t, line, "normalized", 2)?;
    lines.expect_keyword("gamma")?;
    let gamma = DVector::from_vec(lines.values(n)?);
    lines.expect_keyword("u")?;
    let u = DVector::from_vec(lines.values(n)?);
    lines.expect_keyword("M")?;
    let m = lines.matrix(n, n * layer_count)?;
    lines.expect_keyword("N")?;
    let nm = lines.matrix(n, n * layer_count)?;
    Ok(NormalizedSystem {
        layer_count,
        gamma,
        u,
        m,
        n: nm,
    })
}
