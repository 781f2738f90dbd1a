use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;

use crate::error::SolverError;
use crate::graph::{laplacian_apply, WeightedGraph};
use crate::linalg::{svec, svec_index, svec_len};

/// Column-compressed sparse matrix. The Laplacian embeddings are very
/// sparse, so the constraint map is never stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct ColMatrix {
    nrows: usize,
    cols: Vec<Vec<(usize, f64)>>,
}

impl ColMatrix {
    pub fn new(nrows: usize, cols: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert!(cols.iter().flatten().all(|&(r, _)| r < nrows));
        Self { nrows, cols }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (col, &xj) in self.cols.iter().zip(x) {
            if xj != 0.0 {
                for &(r, a) in col {
                    out[r] += a * xj;
                }
            }
        }
    }

    pub fn mul_transpose(&self, y: &[f64], out: &mut [f64]) {
        for (o, col) in out.iter_mut().zip(&self.cols) {
            *o = col.iter().map(|&(r, a)| a * y[r]).sum();
        }
    }

    /// Dense `AᵀA`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.ncols();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for &(r, a) in col {
                rows[r].push((j, a));
            }
        }
        let mut g = DMatrix::zeros(n, n);
        for row in &rows {
            for &(i, ai) in row {
                for &(j, aj) in row {
                    g[(i, j)] += ai * aj;
                }
            }
        }
        g
    }

    pub fn scale(&mut self, row_scale: &[f64], col_scale: &[f64]) {
        for (col, &e) in self.cols.iter_mut().zip(col_scale) {
            for (r, a) in col.iter_mut() {
                *a *= row_scale[*r] * e;
            }
        }
    }
}

/// Cone `ℝ₊^{k₀} ⊕ ℝ₊^{k₁} ⊕ … ⊕ PSD(n)`; nonnegative blocks come first in
/// y-space, the PSD block (embedded) last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSpec {
    pub nonneg_blocks: Vec<usize>,
    pub psd_dim: usize,
}

impl ConeSpec {
    pub fn nonneg_len(&self) -> usize {
        self.nonneg_blocks.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.nonneg_len() + svec_len(self.psd_dim)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// What a [`ConicProblem`] encodes, so solutions can be mapped back.
#[derive(Clone, Debug, PartialEq)]
pub enum Formulation {
    /// `min 1ᵀx  s.t.  Diag(x) ⪰ ¼L(w)`; the dual carries the unit-diagonal `Y`.
    MaxCut,
    /// Polar relaxation with perturbation `eps` over variables `(w, x)`.
    Polar { m: usize, eps: f64, phi: f64, xi: f64, gamma_g: f64 },
}

/// `min ⟨c, x⟩  s.t.  A x + s = b,  s ∈ K`, dual `max −⟨b, y⟩  s.t.  −Aᵀy = c,  y ∈ K*`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProblem {
    pub a: ColMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cone: ConeSpec,
    pub formulation: Formulation,
    /// Strictly feasible primal point, when one is known.
    pub start: Option<Vec<f64>>,
}

impl ConicProblem {
    pub fn x_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn y_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = self.b.len() == self.y_dim()
            && self.c.len() == self.x_dim()
            && self.cone.len() == self.y_dim()
            && self.start.as_ref().is_none_or(|s| s.len() == self.x_dim());
        if ok {
            Ok(())
        } else {
            Err(SolverError::BadParameter("inconsistent problem dimensions".into()))
        }
    }
}

/// Max-cut relaxation: `A = −Diag`, `b = −¼L(w)`, `c = 1`, `K = PSD(n)`.
pub fn formulate_mc(g: &WeightedGraph, w: &[f64]) -> Result<ConicProblem, SolverError> {
    let n = g.n();
    let lap = laplacian_apply(g, w)? * -0.25;
    let mut b = vec![0.0; svec_len(n)];
    svec(&lap, &mut b);
    let cols = (0..n).map(|i| vec![(svec_index(n, i, i), -1.0)]).collect();
    Ok(ConicProblem {
        a: ColMatrix::new(svec_len(n), cols),
        b,
        c: vec![1.0; n],
        cone: ConeSpec { nonneg_blocks: vec![], psd_dim: n },
        formulation: Formulation::MaxCut,
        start: None,
    })
}

/// `1 + n + m`.
pub fn polar_scale(g: &WeightedGraph) -> f64 {
    (1 + g.n() + g.m()) as f64
}

/// Polar relaxation over `(w, x) ∈ ℝ^E ⊕ ℝ^V` with cone `ℝ₊ ⊕ ℝ₊^E ⊕ PSD(n)`.
///
/// `phi` tightens the slack constraint to `Diag(x) − ¼L(w) ⪰ γ_G·φ·I` and
/// `xi` lifts demands to `max(z_e, ξ‖z‖∞/2)`; both default to zero.
pub fn formulate_fcc(g: &WeightedGraph, z: &[f64], eps: f64, phi: f64, xi: f64) -> Result<ConicProblem, SolverError> {
    g.check_len(z)?;
    for (name, v) in [("eps", eps), ("phi", phi), ("xi", xi)] {
        if !(0.0..1.0).contains(&v) {
            return Err(SolverError::BadParameter(format!("{name} = {v} outside [0, 1)")));
        }
    }
    if z.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(SolverError::BadParameter("demands must be nonnegative".into()));
    }
    let (n, m) = (g.n(), g.m());
    let gamma_g = polar_scale(g);
    let psd0 = 1 + m;
    let rows = psd0 + svec_len(n);
    let zmax = z.iter().fold(0.0_f64, |a, &v| a.max(v));
    let z_hat: Vec<f64> = z.iter().map(|&v| v.max(0.5 * xi * zmax)).collect();

    let mut cols = Vec::with_capacity(m + n);
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let mut col = Vec::with_capacity(5);
        if eps > 0.0 {
            col.push((0, 0.5 * eps));
        }
        col.push((1 + e, -1.0));
        col.push((psd0 + svec_index(n, u, u), 0.25));
        col.push((psd0 + svec_index(n, v, v), 0.25));
        col.push((psd0 + svec_index(n, u, v), -0.25 * SQRT_2));
        cols.push(col);
    }
    for i in 0..n {
        let mut col = Vec::with_capacity(2);
        if eps < 1.0 {
            col.push((0, 1.0 - eps));
        }
        col.push((psd0 + svec_index(n, i, i), -1.0));
        cols.push(col);
    }
    let mut b = vec![0.0; rows];
    b[0] = gamma_g;
    if phi > 0.0 {
        for i in 0..n {
            b[psd0 + svec_index(n, i, i)] = -gamma_g * phi;
        }
    }
    let mut c = vec![0.0; m + n];
    for (ce, zh) in c.iter_mut().zip(&z_hat) {
        *ce = -zh;
    }
    let mut start = vec![1.0; m];
    start.extend(g.degrees().iter().map(|&d| 0.5 * d as f64 + 1.0));
    Ok(ConicProblem {
        a: ColMatrix::new(rows, cols),
        b,
        c,
        cone: ConeSpec { nonneg_blocks: vec![1, m], psd_dim: n },
        formulation: Formulation::Polar { m, eps, phi, xi, gamma_g },
        start: Some(start),
    })
}
