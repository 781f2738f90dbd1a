//! Dense-tableau primal simplex for `max cᵀx  s.t.  Ax ≤ b,  x ≥ 0`.
//!
//! Rows with `b_i < 0` get an artificial variable and a first phase that
//! drives them to zero. Pricing is Dantzig's rule until a run of degenerate
//! pivots, after which Bland's rule takes over for the rest of the solve.

use crate::error::CoverError;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Row multipliers: `y ≥ 0`, `Aᵀy ≥ c`, `bᵀy = cᵀx` at optimality.
    pub duals: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// `rows × (width + 1)`; last column is the right-hand side.
    t: Vec<f64>,
    obj: Vec<f64>,
    obj_value: f64,
    basis: Vec<usize>,
    pivots: usize,
    degenerate: usize,
    bland: bool,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width + 1;
        let p = self.t[r * w + col];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let prow: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + col];
            if f != 0.0 {
                for (j, pv) in prow.iter().enumerate() {
                    if *pv != 0.0 {
                        self.t[i * w + j] -= f * pv;
                    }
                }
                self.t[i * w + col] = 0.0;
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (j, pv) in prow.iter().enumerate().take(self.width) {
                self.obj[j] -= f * pv;
            }
            self.obj[col] = 0.0;
            self.obj_value += f * prow[self.width];
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    fn entering(&self, allowed: usize) -> Option<usize> {
        if self.bland {
            (0..allowed).find(|&j| self.obj[j] > COST_TOL)
        } else {
            let mut best = None;
            let mut best_val = COST_TOL;
            for j in 0..allowed {
                if self.obj[j] > best_val {
                    best_val = self.obj[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, col);
            if a > PIVOT_TOL {
                let ratio = self.rhs(i).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * br.abs().max(1.0);
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, allowed: usize, max_pivots: usize) -> Result<(), CoverError> {
        while let Some(col) = self.entering(allowed) {
            if self.pivots >= max_pivots {
                return Err(CoverError::PivotLimit(max_pivots));
            }
            let r = self.leaving(col).ok_or(CoverError::Unbounded)?;
            if self.rhs(r).abs() <= PIVOT_TOL {
                self.degenerate += 1;
                if self.degenerate >= DEGENERATE_RUN {
                    self.bland = true;
                }
            } else {
                self.degenerate = 0;
            }
            self.pivot(r, col);
        }
        Ok(())
    }
}

/// Solves `max cᵀx  s.t.  Ax ≤ b,  x ≥ 0` with `A` given by rows.
pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64], max_pivots: usize) -> Result<LpSolution, CoverError> {
    let rows = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|r| r.len() == n) && b.len() == rows);
    let flipped: Vec<bool> = b.iter().map(|&v| v < 0.0).collect();
    let n_art = flipped.iter().filter(|f| **f).count();
    let width = n + rows + n_art;
    let mut t = vec![0.0; rows * (width + 1)];
    let mut basis = vec![0; rows];
    let mut art = n + rows;
    for i in 0..rows {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        let row = &mut t[i * (width + 1)..(i + 1) * (width + 1)];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = sign;
        row[width] = sign * b[i];
        if flipped[i] {
            row[art] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut tab = Tableau { rows, width, t, obj: vec![0.0; width], obj_value: 0.0, basis, pivots: 0, degenerate: 0, bland: false };

    if n_art > 0 {
        // Phase one: maximize −Σ artificials.
        for j in n + rows..width {
            tab.obj[j] = -1.0;
        }
        for i in 0..rows {
            if flipped[i] {
                for j in 0..width {
                    tab.obj[j] += tab.at(i, j);
                }
                tab.obj_value -= tab.rhs(i);
            }
        }
        tab.run(width, max_pivots)?;
        let scale = b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        if tab.obj_value < -1e-9 * scale {
            return Err(CoverError::Infeasible);
        }
        for i in 0..rows {
            if tab.basis[i] >= n + rows {
                if let Some(j) = (0..n + rows).find(|&j| tab.at(i, j).abs() > PIVOT_TOL) {
                    tab.pivot(i, j);
                }
            }
        }
        for i in 0..rows {
            for j in n + rows..width {
                tab.t[i * (width + 1) + j] = 0.0;
            }
        }
    }

    // Phase two.
    tab.obj = vec![0.0; width];
    tab.obj[..n].copy_from_slice(c);
    tab.obj_value = 0.0;
    tab.degenerate = 0;
    for i in 0..rows {
        let cb = if tab.basis[i] < n { c[tab.basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                tab.obj[j] -= cb * tab.at(i, j);
            }
            tab.obj_value += cb * tab.rhs(i);
        }
    }
    tab.run(n + rows, max_pivots)?;

    let mut x = vec![0.0; n];
    for i in 0..rows {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    let duals: Vec<f64> = (0..rows).map(|i| -tab.obj[n + i]).collect();
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution { x, duals, value, pivots: tab.pivots })
}
