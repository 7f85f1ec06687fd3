//! Dense two-phase tableau simplex for small linear programs.
//!
//! Minimizes `c^T x` over `x >= 0` subject to rows `a^T x (<=|>=|=) b`.
//! Phase one minimizes the sum of artificial variables; a positive optimum is
//! an infeasibility certificate and the rows whose artificials stay positive
//! are reported. Pricing is Dantzig's rule, falling back to Bland's rule
//! after a run of degenerate pivots.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    /// Minimized.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        pivots: usize,
    },
    Infeasible {
        /// Phase-one optimum (sum of artificials).
        infeasibility: f64,
        /// Constraints left unsatisfied by the phase-one optimum.
        rows: Vec<usize>,
    },
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    pub max_pivots: usize,
    /// Reduced-cost optimality tolerance.
    pub tol: f64,
    pub pivot_tol: f64,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_pivots: 50_000,
            tol: 1e-9,
            pivot_tol: 1e-11,
            bland_after: 50,
        }
    }
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    /// Reduced costs, last entry is minus the objective.
    d: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn price(&mut self, cost: &[f64]) {
        let w = self.cols + 1;
        let mut d: Vec<f64> = (0..w)
            .map(|j| if j < self.cols { cost[j] } else { 0.0 })
            .collect();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (dj, tj) in d.iter_mut().zip(&self.t[r]) {
                    *dj -= cb * tj;
                }
            }
        }
        self.d = d;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v *= inv;
        }
        self.t[row][col] = 1.0;
        let pivot_row = self.t[row].clone();
        for (r, tr) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let k = tr[col];
            if k != 0.0 {
                for (v, p) in tr.iter_mut().zip(&pivot_row) {
                    *v -= k * p;
                }
                tr[col] = 0.0;
            }
        }
        let k = self.d[col];
        if k != 0.0 {
            for (v, p) in self.d.iter_mut().zip(&pivot_row) {
                *v -= k * p;
            }
            self.d[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs pivots until optimal over the columns `allowed` admits.
    /// Returns `false` if unbounded.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool, opts: &SimplexOptions) -> Result<bool> {
        let rhs = self.cols;
        let mut degenerate_run = 0;
        loop {
            if self.pivots >= opts.max_pivots {
                return Err(Error::Numerical {
                    message: format!("simplex stalled after {} pivots", self.pivots),
                    last_iterate: Vec::new(),
                    residual: f64::NAN,
                });
            }
            let bland = degenerate_run >= opts.bland_after;
            let mut enter = None;
            let mut best = -opts.tol;
            for j in (0..self.cols).filter(|&j| allowed(j)) {
                if self.d[j] < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = self.d[j];
                }
            }
            let Some(col) = enter else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, tr) in self.t.iter().enumerate() {
                let a = tr[col];
                if a > opts.pivot_tol {
                    let ratio = tr[rhs].max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12 * lratio.abs().max(1.0)
                                || (ratio <= lratio + 1e-12 * lratio.abs().max(1.0)
                                    && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leave else {
                return Ok(false);
            };
            degenerate_run = if ratio == 0.0 { degenerate_run + 1 } else { 0 };
            self.pivot(row, col);
        }
    }
}

pub fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpOutcome> {
    let n = lp.objective.len();
    let m = lp.constraints.len();
    if let Some(c) = lp.constraints.iter().find(|c| c.coeffs.len() != n) {
        return Err(Error::Domain(format!(
            "constraint has {} coefficients for {n} variables",
            c.coeffs.len()
        )));
    }

    // normalize to b >= 0
    let rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (c.coeffs.clone(), c.relation, c.rhs)
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_art = n + n_slack;
    let cols = first_art + n_art;

    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let mut art_row = Vec::with_capacity(n_art);
    let (mut s, mut a) = (n, first_art);
    for (r, (coeffs, rel, b)) in rows.iter().enumerate() {
        t[r][..n].copy_from_slice(coeffs);
        t[r][cols] = *b;
        match rel {
            Relation::Le => {
                t[r][s] = 1.0;
                basis[r] = s;
                s += 1;
            }
            Relation::Ge => {
                t[r][s] = -1.0;
                s += 1;
                t[r][a] = 1.0;
                basis[r] = a;
                art_row.push(r);
                a += 1;
            }
            Relation::Eq => {
                t[r][a] = 1.0;
                basis[r] = a;
                art_row.push(r);
                a += 1;
            }
        }
    }

    let mut tab = Tableau {
        t,
        basis,
        cols,
        d: Vec::new(),
        pivots: 0,
    };

    if n_art > 0 {
        let phase1: Vec<f64> = (0..cols)
            .map(|j| if j >= first_art { 1.0 } else { 0.0 })
            .collect();
        tab.price(&phase1);
        tab.optimize(&|_| true, opts)?;
        let infeasibility = -tab.d[cols];
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).sum::<f64>();
        if infeasibility > 1e-9 * scale {
            let mut bad: Vec<usize> = tab
                .basis
                .iter()
                .enumerate()
                .filter(|(r, &b)| b >= first_art && tab.t[*r][cols] > 1e-9 * scale)
                .map(|(_, &b)| art_row[b - first_art])
                .collect();
            bad.sort_unstable();
            return Ok(LpOutcome::Infeasible {
                infeasibility,
                rows: bad,
            });
        }
        // drive zero-valued artificials out of the basis where possible
        for r in 0..m {
            if tab.basis[r] >= first_art {
                if let Some(j) = (0..first_art).find(|&j| tab.t[r][j].abs() > 1e-9) {
                    tab.pivot(r, j);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    tab.price(&cost);
    if !tab.optimize(&|j| j < first_art, opts)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[r][cols].max(0.0);
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal {
        x,
        objective,
        pivots: tab.pivots,
    })
}
