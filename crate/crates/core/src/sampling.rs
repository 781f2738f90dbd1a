//! Seeded shore generation.
//!
//! Streams come from ChaCha20 seeded with a 64-bit seed; normal variates use
//! the ziggurat sampler of `rand_distr`. The same seed gives the same shores
//! on every platform.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::GraphError;
use crate::graph::{EdgeVector, Shore, SymMatrix, WeightedGraph};

/// `min_{0<θ≤π} (2/π)·θ/(1 − cos θ)`.
pub const ALPHA_GW: f64 = 0.878_567_205_784_3;

pub const RNG_ALGORITHM: &str = "chacha20-ziggurat";

/// Seeded random source that counts its draws.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    draws: u64,
    inner: ChaCha20Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, draws: 0, inner: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn normal(&mut self) -> f64 {
        self.draws += 1;
        self.inner.sample(StandardNormal)
    }

    pub fn coin(&mut self) -> bool {
        self.draws += 1;
        self.inner.random::<bool>()
    }
}

/// Seed for run `index` of a batch: one splitmix64 step on `base` mixed with
/// the index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShoreTag {
    Hyperplane,
    Uniform,
}

/// Shores in sampling order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShoreSet {
    shores: Vec<Shore>,
    tags: Vec<ShoreTag>,
}

impl ShoreSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_shores(shores: Vec<Shore>, tag: ShoreTag) -> Self {
        let tags = vec![tag; shores.len()];
        Self { shores, tags }
    }

    pub fn push(&mut self, s: Shore, tag: ShoreTag) {
        debug_assert!(self.shores.first().is_none_or(|f| f.len() == s.len()));
        self.shores.push(s);
        self.tags.push(tag);
    }

    pub fn extend(&mut self, other: ShoreSet) {
        self.shores.extend(other.shores);
        self.tags.extend(other.tags);
    }

    pub fn len(&self) -> usize {
        self.shores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shores.is_empty()
    }

    pub fn shores(&self) -> &[Shore] {
        &self.shores
    }

    pub fn tags(&self) -> &[ShoreTag] {
        &self.tags
    }

    pub fn get(&self, i: usize) -> &Shore {
        &self.shores[i]
    }

    /// The first `t` shores.
    pub fn prefix(&self, t: usize) -> ShoreSet {
        let t = t.min(self.len());
        Self { shores: self.shores[..t].to_vec(), tags: self.tags[..t].to_vec() }
    }

    /// `n` rows by `T` columns of `±1`, comma separated.
    pub fn to_csv(&self) -> String {
        let n = self.shores.first().map_or(0, Shore::len);
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<&str> = self.shores.iter().map(|s| if s.contains(i) { "1" } else { "-1" }).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `{i : ⟨g, Re_i⟩ ≥ 0}`.
pub fn hyperplane_shore(r: &DMatrix<f64>, g: &[f64]) -> Result<Shore, GraphError> {
    if g.len() != r.nrows() {
        return Err(GraphError::LengthMismatch { expected: r.nrows(), got: g.len() });
    }
    let members = (0..r.ncols())
        .map(|i| r.column(i).iter().zip(g).map(|(a, b)| a * b).sum::<f64>() >= 0.0)
        .collect();
    Ok(Shore::from_members(members))
}

pub fn sample_hyperplane_shore(r: &DMatrix<f64>, rng: &mut Rng) -> Shore {
    let g: Vec<f64> = (0..r.nrows()).map(|_| rng.normal()).collect();
    hyperplane_shore(r, &g).expect("gaussian vector matches R")
}

pub fn sample_hyperplane_shores(r: &DMatrix<f64>, t: usize, rng: &mut Rng) -> ShoreSet {
    let shores = (0..t).map(|_| sample_hyperplane_shore(r, rng)).collect();
    ShoreSet::from_shores(shores, ShoreTag::Hyperplane)
}

pub fn sample_uniform_shore(n: usize, rng: &mut Rng) -> Shore {
    Shore::from_members((0..n).map(|_| rng.coin()).collect())
}

pub fn sample_uniform_shores(n: usize, t: usize, rng: &mut Rng) -> ShoreSet {
    let shores = (0..t).map(|_| sample_uniform_shore(n, rng)).collect();
    ShoreSet::from_shores(shores, ShoreTag::Uniform)
}

/// `arccos(Y_ij/μ)/π` per edge, with the ratio clamped to `[−1, 1]`.
pub fn edge_cover_probabilities(g: &WeightedGraph, y: &SymMatrix, mu: f64) -> Result<EdgeVector, GraphError> {
    if y.nrows() != g.n() || y.ncols() != g.n() {
        return Err(GraphError::DimensionMismatch { expected: g.n(), rows: y.nrows(), cols: y.ncols() });
    }
    if !(mu > 0.0) {
        return Err(GraphError::DegenerateScale("mu"));
    }
    Ok(g.edges().iter().map(|&(u, v)| (y[(u, v)] / mu).clamp(-1.0, 1.0).acos() / PI).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperplane_examples() {
        let r = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert_eq!(hyperplane_shore(&r, &[1.0]).unwrap().vertices(), vec![0]);
        assert_eq!(hyperplane_shore(&r, &[0.0]).unwrap().len(), 2);
        let id = DMatrix::identity(3, 3);
        assert_eq!(hyperplane_shore(&id, &[1.0, -1.0, 1.0]).unwrap().vertices(), vec![0, 2]);
        assert!(hyperplane_shore(&id, &[1.0]).is_err());
    }

    #[test]
    fn flipping_g_flips_the_shore() {
        let mut rng = Rng::new(9);
        let r = DMatrix::from_fn(3, 5, |_, _| rng.normal());
        let g: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        let a = hyperplane_shore(&r, &g).unwrap();
        let b = hyperplane_shore(&r, &neg).unwrap();
        assert_eq!(a.complement(), b);
    }

    #[test]
    fn same_seed_same_stream() {
        let r = DMatrix::identity(4, 4);
        let a = sample_hyperplane_shores(&r, 50, &mut Rng::new(1337));
        let b = sample_hyperplane_shores(&r, 50, &mut Rng::new(1337));
        assert_eq!(a, b);
        let c = sample_hyperplane_shores(&r, 50, &mut Rng::new(1338));
        assert_ne!(a, c);
        let mut rng = Rng::new(3);
        sample_uniform_shores(4, 10, &mut rng);
        assert_eq!(rng.draws(), 40);
        assert!(sample_uniform_shores(4, 0, &mut rng).is_empty());
    }

    #[test]
    fn cover_probabilities() {
        let g = WeightedGraph::complete(2);
        let p = |t: f64| edge_cover_probabilities(&g, &SymMatrix::from_row_slice(2, 2, &[1.0, t, t, 1.0]), 1.0).unwrap()[0];
        assert_eq!(p(-1.0), 1.0);
        assert!((p(0.0) - 0.5).abs() < 1e-15);
        assert!((p(-0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p(-1.0 - 1e-13), 1.0);
        assert!(edge_cover_probabilities(&g, &SymMatrix::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: Vec<u64> = (0..100).map(|i| derive_seed(1337, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_eq!(derive_seed(5, 2), derive_seed(5, 2));
    }

    #[test]
    fn csv_dump() {
        let set = ShoreSet::from_shores(vec![Shore::from_members(vec![true, false]), Shore::from_members(vec![false, false])], ShoreTag::Uniform);
        assert_eq!(set.to_csv(), "1,-1\n-1,-1\n");
    }
}
