//! Restricted max-cut and fractional cut-covering over a sampled shore set.

mod simplex;

pub use simplex::{maximize, LpSolution};

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{CoverError, GraphError};
use crate::graph::{cut_incidence, cut_weight, Shore, SymMatrix, WeightedGraph};
use crate::sampling::ShoreSet;

pub const MAX_PIVOTS: usize = 200_000;

/// Edges with positive demand that no shore cuts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RliOutcome {
    pub uncovered: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Restricted<T> {
    Feasible(T),
    Rli(RliOutcome),
}

impl<T> Restricted<T> {
    pub fn feasible(self) -> Option<T> {
        match self {
            Restricted::Feasible(v) => Some(v),
            Restricted::Rli(_) => None,
        }
    }

    pub fn is_rli(&self) -> bool {
        matches!(self, Restricted::Rli(_))
    }
}

/// Fractional cut cover supported on shores of a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverSolution {
    /// `(index into the shore set, weight)`, weights positive.
    pub support: Vec<(usize, f64)>,
    /// `1ᵀy`.
    pub value: f64,
    /// Lower bound on the restricted optimum from the LP's packing solution.
    pub dual_bound: f64,
    pub pivots: usize,
}

impl CoverSolution {
    pub fn coverage(&self, g: &WeightedGraph, f: &ShoreSet) -> Result<Vec<f64>, GraphError> {
        let mut cov = vec![0.0; g.m()];
        for &(i, y) in &self.support {
            for (c, x) in cov.iter_mut().zip(cut_incidence(g, f.get(i))?) {
                *c += y * x;
            }
        }
        Ok(cov)
    }
}

/// Best cut in `F`; ties go to the earliest shore.
pub fn mc_restricted(f: &ShoreSet, g: &WeightedGraph, w: &[f64]) -> Result<(usize, f64), CoverError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in f.shores().iter().enumerate() {
        let v = cut_weight(g, w, s)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.ok_or(CoverError::EmptyShoreSet)
}

fn check_demand(g: &WeightedGraph, z: &[f64]) -> Result<Vec<usize>, CoverError> {
    g.check_len(z)?;
    if let Some(e) = z.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        let (u, v) = g.edges()[e];
        return Err(GraphError::BadWeight { u, v, w: z[e] }.into());
    }
    Ok((0..g.m()).filter(|&e| z[e] > 0.0).collect())
}

fn uncovered(f: &ShoreSet, g: &WeightedGraph, positive: &[usize]) -> Result<Vec<usize>, CoverError> {
    let mut covered = vec![false; g.m()];
    for s in f.shores() {
        for (c, x) in covered.iter_mut().zip(cut_incidence(g, s)?) {
            *c |= x > 0.0;
        }
    }
    Ok(positive.iter().copied().filter(|&e| !covered[e]).collect())
}

/// Indices of the first shore of each distinct nonempty cut.
fn distinct_cuts(f: &ShoreSet) -> Vec<usize> {
    let mut seen: HashMap<Shore, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, s) in f.shores().iter().enumerate() {
        let key = s.canonical();
        if !key.members().contains(&true) {
            continue;
        }
        if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(key) {
            slot.insert(i);
            out.push(i);
        }
    }
    out
}

/// Optimal fractional cover of `z` by cuts of `F`, or the uncovered edges.
///
/// Solves the packing dual `max zᵀu  s.t.  Σ_{e∈δ(S)} u_e ≤ 1` over the
/// distinct cuts of `F` and reads the cover off the row multipliers. The
/// multipliers are then nudged so coverage holds exactly on the floats.
pub fn fcc_restricted(f: &ShoreSet, g: &WeightedGraph, z: &[f64]) -> Result<Restricted<CoverSolution>, CoverError> {
    let positive = check_demand(g, z)?;
    if positive.is_empty() {
        return Ok(Restricted::Feasible(CoverSolution { support: vec![], value: 0.0, dual_bound: 0.0, pivots: 0 }));
    }
    let missing = uncovered(f, g, &positive)?;
    if !missing.is_empty() {
        return Ok(Restricted::Rli(RliOutcome { uncovered: missing }));
    }
    let cuts = distinct_cuts(f);
    let mut rows = Vec::new();
    let mut row_shore = Vec::new();
    for &i in &cuts {
        let inc = cut_incidence(g, f.get(i))?;
        let row: Vec<f64> = positive.iter().map(|&e| inc[e]).collect();
        if row.iter().any(|v| *v > 0.0) {
            rows.push(row);
            row_shore.push(i);
        }
    }
    let c: Vec<f64> = positive.iter().map(|&e| z[e]).collect();
    let lp = maximize(&rows, &vec![1.0; rows.len()], &c, MAX_PIVOTS)?;

    let mut y: Vec<f64> = lp.duals.iter().map(|v| v.max(0.0)).collect();
    let cover_of = |y: &[f64]| -> Vec<f64> {
        let mut cov = vec![0.0; positive.len()];
        for (row, yi) in rows.iter().zip(y) {
            if *yi > 0.0 {
                for (cv, a) in cov.iter_mut().zip(row) {
                    *cv += yi * a;
                }
            }
        }
        cov
    };
    for _ in 0..8 {
        let cov = cover_of(&y);
        let mut worst = 1.0_f64;
        for (k, cv) in cov.iter().enumerate() {
            if *cv <= 0.0 {
                let r = rows.iter().position(|row| row[k] > 0.0).expect("edge is covered by some cut");
                y[r] += c[k];
            } else {
                worst = worst.max(c[k] / cv);
            }
        }
        if worst <= 1.0 && cov.iter().zip(&c).all(|(cv, ck)| cv >= ck) {
            break;
        }
        let factor = worst * (1.0 + 1e-12);
        y.iter_mut().for_each(|v| *v *= factor);
    }
    let support: Vec<(usize, f64)> = row_shore.iter().zip(&y).filter(|(_, v)| **v > 0.0).map(|(&i, &v)| (i, v)).collect();
    let value = support.iter().map(|(_, v)| v).sum();

    let u: Vec<f64> = lp.x.iter().map(|v| v.max(0.0)).collect();
    let load = rows.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>()).fold(1.0_f64, f64::max);
    let dual_bound = c.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() / load;
    Ok(Restricted::Feasible(CoverSolution { support, value, dual_bound, pivots: lp.pivots }))
}

/// `min{λ : λ·p̂ ≥ z}` for the empirical cut frequencies `p̂` of `F`.
pub fn avg_scale(f: &ShoreSet, g: &WeightedGraph, z: &[f64]) -> Result<Restricted<f64>, CoverError> {
    let positive = check_demand(g, z)?;
    if positive.is_empty() {
        return Ok(Restricted::Feasible(0.0));
    }
    let mut counts = vec![0usize; g.m()];
    for s in f.shores() {
        for (c, x) in counts.iter_mut().zip(cut_incidence(g, s)?) {
            if x > 0.0 {
                *c += 1;
            }
        }
    }
    let missing: Vec<usize> = positive.iter().copied().filter(|&e| counts[e] == 0).collect();
    if !missing.is_empty() {
        return Ok(Restricted::Rli(RliOutcome { uncovered: missing }));
    }
    let t = f.len() as f64;
    Ok(Restricted::Feasible(positive.iter().map(|&e| z[e] * t / counts[e] as f64).fold(0.0, f64::max)))
}

/// The averaging cover: every shore of `F` gets weight `λ/T`, with `λ` from
/// [`avg_scale`] raised until coverage holds on the floats.
pub fn avg_cover(f: &ShoreSet, g: &WeightedGraph, z: &[f64]) -> Result<Restricted<CoverSolution>, CoverError> {
    let lambda = match avg_scale(f, g, z)? {
        Restricted::Feasible(v) => v,
        Restricted::Rli(r) => return Ok(Restricted::Rli(r)),
    };
    if lambda == 0.0 {
        return Ok(Restricted::Feasible(CoverSolution { support: vec![], value: 0.0, dual_bound: 0.0, pivots: 0 }));
    }
    let mut weight = lambda / f.len() as f64;
    let mut cover = CoverSolution { support: vec![], value: 0.0, dual_bound: 0.0, pivots: 0 };
    for _ in 0..8 {
        cover.support = (0..f.len()).map(|i| (i, weight)).collect();
        let cov = cover.coverage(g, f)?;
        let worst = z.iter().zip(&cov).filter(|(zv, _)| **zv > 0.0).map(|(zv, cv)| zv / cv).fold(0.0_f64, f64::max);
        if worst <= 1.0 {
            break;
        }
        weight *= worst * (1.0 + 1e-12);
    }
    cover.value = cover.support.iter().map(|(_, v)| v).sum();
    Ok(Restricted::Feasible(cover))
}

/// `max π·z_ij / arccos(Y_ij/μ)`, the limit of [`avg_scale`] under hyperplane sampling.
pub fn avg_asymptotic(g: &WeightedGraph, y: &SymMatrix, mu: f64, z: &[f64]) -> Result<Restricted<f64>, CoverError> {
    let positive = check_demand(g, z)?;
    if y.nrows() != g.n() || y.ncols() != g.n() {
        return Err(GraphError::DimensionMismatch { expected: g.n(), rows: y.nrows(), cols: y.ncols() }.into());
    }
    if !(mu > 0.0) {
        return Err(GraphError::DegenerateScale("mu").into());
    }
    let mut best = 0.0_f64;
    let mut missing = Vec::new();
    for &e in &positive {
        let (u, v) = g.edges()[e];
        let angle = (y[(u, v)] / mu).clamp(-1.0, 1.0).acos();
        if angle == 0.0 {
            missing.push(e);
        } else {
            best = best.max(PI * z[e] / angle);
        }
    }
    if missing.is_empty() {
        Ok(Restricted::Feasible(best))
    } else {
        Ok(Restricted::Rli(RliOutcome { uncovered: missing }))
    }
}

/// Human-readable listing of the restricted covering LP.
pub fn lp_listing(f: &ShoreSet, g: &WeightedGraph, z: &[f64]) -> Result<String, CoverError> {
    let positive = check_demand(g, z)?;
    let cuts = distinct_cuts(f);
    let mut out = String::from("minimize");
    for &i in &cuts {
        let _ = write!(out, " + y{}", i + 1);
    }
    out.push_str("\nsubject to\n");
    for &e in &positive {
        let (u, v) = g.edges()[e];
        let _ = write!(out, "  e{}_{}:", u + 1, v + 1);
        for &i in &cuts {
            let s = f.get(i);
            if s.contains(u) != s.contains(v) {
                let _ = write!(out, " + y{}", i + 1);
            }
        }
        let _ = writeln!(out, " >= {:?}", z[e]);
    }
    out.push_str("  y >= 0\n");
    Ok(out)
}
