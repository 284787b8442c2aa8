//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Solves `max cᵀx` subject to rows `aᵀx (≤ | ≥ | =) b` and `x ≥ 0`. Every
//! row owns one `+e_i` column (its slack, or its artificial for `≥`/`=`
//! rows); the objective-row entry of that column at optimality is the row's
//! dual multiplier.

use crate::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-9;
pub const MAX_PIVOTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coefficients: Vec<f64>,
    pub kind: RowKind,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, coefficients: Vec<f64>, kind: RowKind, rhs: f64) {
        debug_assert_eq!(coefficients.len(), self.objective.len());
        self.rows.push(Row {
            coefficients,
            kind,
            rhs,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per row, in the row's original orientation.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

struct Tableau {
    /// `m` constraint rows then the objective row; last column is the rhs.
    cells: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Columns allowed to enter.
    enterable: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.cells[0].len() - 1
    }

    fn obj(&self) -> usize {
        self.cells.len() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        if self.pivots >= MAX_PIVOTS {
            return Err(Error::PivotLimit(MAX_PIVOTS));
        }
        self.pivots += 1;
        let p = self.cells[row][col];
        for v in self.cells[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.cells[row].clone();
        for (r, cells) in self.cells.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = cells[col];
            if f != 0.0 {
                for (v, pv) in cells.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                cells[col] = 0.0;
            }
        }
        self.basis[row] = col;
        Ok(())
    }

    /// Maximise with the objective row holding reduced costs `z_j − c_j`.
    fn optimise(&mut self) -> Result<()> {
        let obj = self.obj();
        let rhs = self.rhs_col();
        loop {
            // Bland: lowest-index improving column.
            let Some(col) = (0..rhs).find(|&j| self.enterable[j] && self.cells[obj][j] < -PIVOT_TOL) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..obj {
                let a = self.cells[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.cells[r][rhs] / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - PIVOT_TOL
                                || (ratio <= bratio + PIVOT_TOL && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, col)?;
        }
    }

    /// Reset the objective row for costs `c` (indexed by column).
    fn set_objective(&mut self, costs: &[f64]) {
        let obj = self.obj();
        let width = self.cells[0].len();
        let mut row = vec![0.0; width];
        for (j, &c) in costs.iter().enumerate() {
            row[j] = -c;
        }
        for r in 0..obj {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for (v, a) in row.iter_mut().zip(&self.cells[r]) {
                    *v += cb * a;
                }
            }
        }
        self.cells[obj] = row;
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.objective.len();
    let m = lp.rows.len();
    let mut flipped = vec![false; m];
    let mut kinds = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        let mut kind = row.kind;
        if row.rhs < 0.0 {
            flipped[i] = true;
            kind = match kind {
                RowKind::Le => RowKind::Ge,
                RowKind::Ge => RowKind::Le,
                RowKind::Eq => RowKind::Eq,
            };
        }
        kinds.push(kind);
    }
    let surplus: Vec<usize> = (0..m).filter(|&i| kinds[i] == RowKind::Ge).collect();
    // Column layout: originals, one +e_i column per row, surplus columns, rhs.
    let unit0 = n;
    let surplus0 = n + m;
    let width = n + m + surplus.len() + 1;
    let mut cells = vec![vec![0.0; width]; m + 1];
    for (i, row) in lp.rows.iter().enumerate() {
        let s = if flipped[i] { -1.0 } else { 1.0 };
        for (j, &a) in row.coefficients.iter().enumerate() {
            cells[i][j] = s * a;
        }
        cells[i][unit0 + i] = 1.0;
        cells[i][width - 1] = s * row.rhs;
    }
    for (k, &i) in surplus.iter().enumerate() {
        cells[i][surplus0 + k] = -1.0;
    }
    let artificial: Vec<bool> = (0..width - 1)
        .map(|j| j >= unit0 && j < surplus0 && kinds[j - unit0] != RowKind::Le)
        .collect();
    let mut tab = Tableau {
        cells,
        basis: (0..m).map(|i| unit0 + i).collect(),
        enterable: vec![true; width - 1],
        pivots: 0,
    };

    if artificial.iter().any(|&a| a) {
        let costs: Vec<f64> = artificial.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        tab.set_objective(&costs);
        tab.optimise()?;
        let rhs = tab.rhs_col();
        let infeasibility = -tab.cells[tab.obj()][rhs];
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > 1e-9 * scale {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if artificial[tab.basis[r]] {
                if let Some(col) = (0..width - 1).find(|&j| !artificial[j] && tab.cells[r][j].abs() > PIVOT_TOL) {
                    tab.pivot(r, col)?;
                }
            }
        }
        for (j, &a) in artificial.iter().enumerate() {
            if a {
                tab.enterable[j] = false;
            }
        }
    }

    let mut costs = vec![0.0; width - 1];
    costs[..n].copy_from_slice(&lp.objective);
    tab.set_objective(&costs);
    tab.optimise()?;

    let rhs = tab.rhs_col();
    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.cells[r][rhs].max(0.0);
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let obj = tab.obj();
    let duals = (0..m)
        .map(|i| {
            let y = tab.cells[obj][unit0 + i];
            if flipped[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    Ok(LpOutcome {
        x,
        objective,
        duals,
        pivots: tab.pivots,
    })
}
