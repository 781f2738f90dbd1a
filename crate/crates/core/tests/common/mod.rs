//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cutcert::graph::{Shore, WeightedGraph};
use cutcert::sampling::{ShoreSet, ShoreTag};

/// Every shore on `n` vertices.
pub fn all_shores(n: usize) -> ShoreSet {
    ShoreSet::from_shores((0..1u64 << n).map(|mask| Shore::from_mask(n, mask)).collect(), ShoreTag::Uniform)
}

/// Maximum cut by enumeration, vertex 0 pinned outside the shore.
pub fn brute_mc(g: &WeightedGraph, w: &[f64]) -> f64 {
    let n = g.n();
    let mut best = 0.0_f64;
    for mask in 0..1u64 << n.saturating_sub(1) {
        let side = |v: usize| v > 0 && mask >> (v - 1) & 1 == 1;
        let mut cut = 0.0;
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if side(u) != side(v) {
                cut += w[e];
            }
        }
        best = best.max(cut);
    }
    best
}

pub fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

/// Fractional cut cover value over every cut of `g`, in exact arithmetic.
///
/// Solves the packing LP `max zᵀu  s.t.  Σ_{e∈δ(S)} u_e ≤ 1,  u ≥ 0` by a
/// tableau simplex with Bland's rule; its optimum equals the cover optimum.
pub fn rational_fcc(g: &WeightedGraph, z: &[BigRational]) -> BigRational {
    let n = g.n();
    let edges: Vec<usize> = (0..g.m()).filter(|&e| z[e].is_positive()).collect();
    let k = edges.len();
    if k == 0 {
        return BigRational::zero();
    }
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for mask in 1..1u64 << n.saturating_sub(1) {
        let side = |v: usize| v > 0 && mask >> (v - 1) & 1 == 1;
        let row: Vec<BigRational> = edges
            .iter()
            .map(|&e| {
                let (u, v) = g.edges()[e];
                if side(u) != side(v) { BigRational::one() } else { BigRational::zero() }
            })
            .collect();
        if row.iter().any(|x| !x.is_zero()) {
            rows.push(row);
        }
    }
    let r = rows.len();
    let width = k + r;
    // Tableau rows: [A | I | 1]; objective row holds reduced costs.
    let mut t: Vec<Vec<BigRational>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.extend((0..r).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row.push(BigRational::one());
            row
        })
        .collect();
    let mut obj: Vec<BigRational> = edges.iter().map(|&e| z[e].clone()).chain((0..r).map(|_| BigRational::zero())).collect();
    let mut value = BigRational::zero();
    let mut basis: Vec<usize> = (k..width).collect();
    while let Some(col) = (0..width).find(|&j| obj[j].is_positive()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[col].is_positive() {
                let ratio = &row[width] / &row[col];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (p, _) = leave.expect("packing LP is bounded");
        let piv = t[p][col].clone();
        for x in t[p].iter_mut() {
            *x = &*x / &piv;
        }
        let prow = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != p && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x = &*x - &f * y;
                }
            }
        }
        let f = obj[col].clone();
        for (x, y) in obj.iter_mut().zip(&prow) {
            *x = &*x - &f * y;
        }
        value += &f * &prow[width];
        basis[p] = col;
    }
    value
}

pub fn to_f64(q: &BigRational) -> f64 {
    let (num, den) = (q.numer().clone(), q.denom().clone());
    let scale = BigInt::from(1u64 << 53);
    let scaled = (num * &scale) / den;
    let v: f64 = scaled.to_string().parse().expect("integer");
    v / (1u64 << 53) as f64
}

/// Erdős–Rényi graph with `p = 1/2`; vertices `0..n`.
pub fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> WeightedGraph {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<bool>() {
                pairs.push((u, v));
            }
        }
    }
    if pairs.is_empty() && n >= 2 {
        pairs.push((0, 1));
    }
    WeightedGraph::unweighted(n, pairs).unwrap()
}

/// Multiples of `1/8` in `[0, 2]`, exact in binary floating point.
pub fn dyadic(m: usize, rng: &mut ChaCha8Rng, allow_zero: bool) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(if allow_zero { 0 } else { 1 }..=16) as f64 / 8.0).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random bipartite graph with positive weights in `[1/2, 2]`; at least one edge.
pub fn random_bipartite(n: usize, rng: &mut ChaCha8Rng) -> WeightedGraph {
    let side: Vec<bool> = (0..n).map(|i| i == 0 || (i != 1 && rng.random::<bool>())).collect();
    let mut triples = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if side[u] != side[v] && (rng.random::<f64>() < 0.5 || (u, v) == (0, 1)) {
                triples.push((u, v, rng.random_range(4..=16) as f64 / 8.0));
            }
        }
    }
    WeightedGraph::new(n, triples).unwrap()
}

/// Petersen graph `Kn(5, 2)` built directly from its outer cycle, spokes and
/// inner pentagram.
pub fn petersen_by_hand() -> WeightedGraph {
    let mut pairs = Vec::new();
    for i in 0..5 {
        pairs.push((i, (i + 1) % 5));
        pairs.push((i, i + 5));
        pairs.push((5 + i, 5 + (i + 2) % 5));
    }
    let pairs: Vec<(usize, usize)> = pairs.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
    WeightedGraph::unweighted(10, pairs).unwrap()
}
