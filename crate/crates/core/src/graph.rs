//! Weighted simple graphs, Laplacian operators and cut arithmetic.
//!
//! Vertices are 0-based internally; the file formats in [`crate::io`] use
//! 1-based numbering and convert at the boundary.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::GraphError;

/// Dense symmetric matrix. Only symmetric inputs are ever constructed by
/// this crate; the type alias keeps signatures readable.
pub type SymMatrix = DMatrix<f64>;

/// Values indexed by the edges of a [`WeightedGraph`], in the graph's edge order.
pub type EdgeVector = Vec<f64>;

/// A simple graph together with one nonnegative weight per edge.
///
/// Edges are kept sorted lexicographically with `u < v`, so every
/// [`EdgeVector`] built against the same graph lines up entry by entry.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: EdgeVector,
}

impl WeightedGraph {
    /// Builds a graph from 0-based `(u, v, w)` triples.
    ///
    /// Pairs may be given in either orientation; they are normalized to
    /// `u < v` and sorted. Self-loops, repeated pairs and negative or
    /// non-finite weights are rejected.
    pub fn new(n: usize, triples: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, GraphError> {
        let mut items: Vec<(usize, usize, f64)> = Vec::new();
        for (a, b, w) in triples {
            if a >= n || b >= n {
                return Err(GraphError::VertexOutOfRange { vertex: a.max(b), n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(GraphError::BadWeight { u: a.min(b), v: a.max(b), w });
            }
            items.push((a.min(b), a.max(b), w));
        }
        items.sort_by_key(|x| (x.0, x.1));
        for pair in items.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(GraphError::DuplicateEdge(pair[0].0, pair[0].1));
            }
        }
        let edges = items.iter().map(|&(u, v, _)| (u, v)).collect();
        let weights = items.iter().map(|&(_, _, w)| w).collect();
        Ok(Self { n, edges, weights })
    }

    /// Unit-weight graph on `n` vertices.
    pub fn unweighted(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        Self::new(n, pairs.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn complete(n: usize) -> Self {
        let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::unweighted(n, pairs).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        Self::unweighted(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle on n >= 3 vertices is simple")
    }

    /// The Petersen graph, i.e. the Kneser graph on 2-subsets of a 5-set.
    pub fn petersen() -> Self {
        kneser_graph(5)
    }

    /// Same topology, new weights.
    pub fn with_weights(&self, weights: EdgeVector) -> Result<Self, GraphError> {
        self.check_len(&weights)?;
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            let (u, v) = self.edges[i];
            return Err(GraphError::BadWeight { u, v, w });
        }
        Ok(Self { n: self.n, edges: self.edges.clone(), weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Position of edge `{u, v}` in the edge order, if present.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    /// Unweighted vertex degrees.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn check_len(&self, values: &[f64]) -> Result<(), GraphError> {
        if values.len() != self.m() {
            return Err(GraphError::LengthMismatch { expected: self.m(), got: values.len() });
        }
        Ok(())
    }
}

impl fmt::Display for WeightedGraph {
    /// Native instance format: `n m` then one `u v w` line per edge, 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.m())?;
        for (&(u, v), w) in self.edges.iter().zip(&self.weights) {
            writeln!(f, "{} {} {:?}", u + 1, v + 1, w)?;
        }
        Ok(())
    }
}

/// Kneser graph `Kn(n, 2)`: vertices are the 2-subsets of `{0..n}` in
/// lexicographic order, adjacent when disjoint.
pub fn kneser_graph(n: usize) -> WeightedGraph {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut edges = Vec::new();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for (b, &(k, l)) in pairs.iter().enumerate().skip(a + 1) {
            if i != k && i != l && j != k && j != l {
                edges.push((a, b));
            }
        }
    }
    WeightedGraph::unweighted(pairs.len(), edges).expect("Kneser graph is simple")
}

/// `Σ_{ij∈E} w_ij (e_i − e_j)(e_i − e_j)ᵀ`.
pub fn laplacian_apply(g: &WeightedGraph, w: &[f64]) -> Result<SymMatrix, GraphError> {
    g.check_len(w)?;
    let mut lap = SymMatrix::zeros(g.n(), g.n());
    for (&(u, v), &wij) in g.edges().iter().zip(w) {
        lap[(u, u)] += wij;
        lap[(v, v)] += wij;
        lap[(u, v)] -= wij;
        lap[(v, u)] -= wij;
    }
    Ok(lap)
}

/// Adjoint of [`laplacian_apply`]: `Y_ii + Y_jj − 2Y_ij` for every edge.
pub fn laplacian_adjoint(g: &WeightedGraph, y: &SymMatrix) -> Result<EdgeVector, GraphError> {
    if y.nrows() != g.n() || y.ncols() != g.n() {
        return Err(GraphError::DimensionMismatch { expected: g.n(), rows: y.nrows(), cols: y.ncols() });
    }
    Ok(g.edges().iter().map(|&(u, v)| y[(u, u)] + y[(v, v)] - 2.0 * y[(u, v)]).collect())
}

/// Membership vector of a cut shore.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shore {
    members: Vec<bool>,
}

impl Shore {
    pub fn from_members(members: Vec<bool>) -> Self {
        Self { members }
    }

    /// Shore from 0-based vertex indices.
    pub fn from_vertices(n: usize, vertices: &[usize]) -> Result<Self, GraphError> {
        let mut members = vec![false; n];
        for &v in vertices {
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
            members[v] = true;
        }
        Ok(Self { members })
    }

    pub fn empty(n: usize) -> Self {
        Self { members: vec![false; n] }
    }

    /// Shore encoded by the low `n` bits of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self { members: (0..n).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members[v]
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn complement(&self) -> Self {
        Self { members: self.members.iter().map(|b| !b).collect() }
    }

    /// Representative of `{S, V∖S}` that excludes vertex 0; both induce the same cut.
    pub fn canonical(&self) -> Self {
        if self.members.first().copied().unwrap_or(false) {
            self.complement()
        } else {
            self.clone()
        }
    }

    /// `±1` encoding: `+1` inside the shore.
    pub fn signs(&self) -> Vec<f64> {
        self.members.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect()
    }
}

/// Incidence vector of `δ(S)`.
pub fn cut_incidence(g: &WeightedGraph, s: &Shore) -> Result<EdgeVector, GraphError> {
    if s.len() != g.n() {
        return Err(GraphError::VertexOutOfRange { vertex: s.len().max(g.n()).saturating_sub(1), n: g.n().min(s.len()) });
    }
    Ok(g.edges().iter().map(|&(u, v)| if s.contains(u) != s.contains(v) { 1.0 } else { 0.0 }).collect())
}

/// `⟨w, χ^{δ(S)}⟩`.
pub fn cut_weight(g: &WeightedGraph, w: &[f64], s: &Shore) -> Result<f64, GraphError> {
    g.check_len(w)?;
    let chi = cut_incidence(g, s)?;
    Ok(chi.iter().zip(w).map(|(c, w)| c * w).sum())
}

/// Normalization applied to instance weights before solving.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleMode {
    /// Divide by `‖w‖₁`.
    W1Norm,
    /// Divide by `‖z‖∞`.
    ZInfNorm,
    None,
}

impl ScaleMode {
    pub fn name(self) -> &'static str {
        match self {
            ScaleMode::W1Norm => "w_1_norm",
            ScaleMode::ZInfNorm => "z_inf_norm",
            ScaleMode::None => "none",
        }
    }
}

/// Returns the scaled vector and the factor it was divided by.
pub fn scale_input(w: &[f64], mode: ScaleMode) -> Result<(EdgeVector, f64), GraphError> {
    let factor = match mode {
        ScaleMode::None => return Ok((w.to_vec(), 1.0)),
        ScaleMode::W1Norm => w.iter().map(|x| x.abs()).sum::<f64>(),
        ScaleMode::ZInfNorm => w.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())),
    };
    if factor == 0.0 || !factor.is_finite() {
        return Err(GraphError::DegenerateScale(mode.name()));
    }
    Ok((w.iter().map(|x| x / factor).collect(), factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.5), (1, 2, 2.5)]).unwrap()
    }

    #[test]
    fn laplacian_of_weighted_path() {
        let g = p3();
        let l = laplacian_apply(&g, g.weights()).unwrap();
        let expected = SymMatrix::from_row_slice(3, 3, &[1.5, -1.5, 0.0, -1.5, 4.0, -2.5, 0.0, -2.5, 2.5]);
        assert_eq!(l, expected);
    }

    #[test]
    fn laplacian_zero_and_single_edge() {
        let g = p3();
        assert_eq!(laplacian_apply(&g, &[0.0, 0.0]).unwrap(), SymMatrix::zeros(3, 3));
        let k2 = WeightedGraph::complete(2);
        let l = laplacian_apply(&k2, &[1.0]).unwrap();
        assert_eq!(l, SymMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert!(laplacian_apply(&g, &[1.0]).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let k3 = WeightedGraph::complete(3);
        assert_eq!(laplacian_adjoint(&k3, &SymMatrix::identity(3, 3)).unwrap(), vec![2.0; 3]);
        let y = SymMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { -0.5 });
        assert_eq!(laplacian_adjoint(&k3, &y).unwrap(), vec![3.0; 3]);
        assert!(laplacian_adjoint(&k3, &SymMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn cut_examples() {
        let g = p3();
        let s = Shore::from_vertices(3, &[1]).unwrap();
        assert_eq!(cut_incidence(&g, &s).unwrap(), vec![1.0, 1.0]);
        assert_eq!(cut_weight(&g, g.weights(), &s).unwrap(), 4.0);
        assert_eq!(cut_incidence(&g, &Shore::empty(3)).unwrap(), vec![0.0, 0.0]);
        assert_eq!(cut_incidence(&g, &Shore::empty(3).complement()).unwrap(), vec![0.0, 0.0]);
        let k3 = WeightedGraph::complete(3);
        assert_eq!(k3.edges(), &[(0, 1), (0, 2), (1, 2)]);
        let s1 = Shore::from_vertices(3, &[0]).unwrap();
        assert_eq!(cut_incidence(&k3, &s1).unwrap(), vec![1.0, 1.0, 0.0]);
        assert!(Shore::from_vertices(3, &[3]).is_err());
    }

    #[test]
    fn scaling_modes() {
        assert_eq!(scale_input(&[2.0, 2.0], ScaleMode::W1Norm).unwrap(), (vec![0.5, 0.5], 4.0));
        assert_eq!(scale_input(&[3.0, 0.75, 1.5], ScaleMode::ZInfNorm).unwrap(), (vec![1.0, 0.25, 0.5], 3.0));
        assert_eq!(scale_input(&[3.0, 1.0], ScaleMode::None).unwrap(), (vec![3.0, 1.0], 1.0));
        assert!(scale_input(&[0.0, 0.0], ScaleMode::W1Norm).is_err());
        assert!(scale_input(&[0.0], ScaleMode::None).is_ok());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(WeightedGraph::new(2, [(0, 0, 1.0)]), Err(GraphError::SelfLoop(0))));
        assert!(matches!(WeightedGraph::new(2, [(0, 1, 1.0), (1, 0, 2.0)]), Err(GraphError::DuplicateEdge(0, 1))));
        assert!(matches!(WeightedGraph::new(2, [(0, 1, -1.0)]), Err(GraphError::BadWeight { .. })));
        assert!(matches!(WeightedGraph::new(2, [(0, 2, 1.0)]), Err(GraphError::VertexOutOfRange { .. })));
    }

    #[test]
    fn kneser_sizes() {
        let p = WeightedGraph::petersen();
        assert_eq!((p.n(), p.m()), (10, 15));
        assert!(p.degrees().iter().all(|&d| d == 3));
        let k = kneser_graph(16);
        assert_eq!((k.n(), k.m()), (120, 5460));
    }

    #[test]
    fn display_is_native_format() {
        assert_eq!(p3().to_string(), "3 2\n1 2 1.5\n2 3 2.5\n");
    }
}
