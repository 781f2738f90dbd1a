//! Turning raw solver output into certificates that hold exactly on the
//! stored floats.

use std::path::Path;

use nalgebra::DMatrix;

use crate::codec::{Encoding, Reader, Writer};
use crate::error::{CertFileError, GraphError, SanitizeError};
use crate::graph::{laplacian_apply, EdgeVector, SymMatrix, WeightedGraph};
use crate::linalg::{cholesky_upper, frobenius, min_eigenvalue, norm_inf, sym_eigen};

/// Default shift used by [`slack_sanitize`].
pub const SLACK_GAMMA: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SlackCertificate {
    pub rho: f64,
    pub x: Vec<f64>,
    /// Upper triangular, `BᵀB ≈ Diag(x) − ¼L(w)`.
    pub b: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub mu: f64,
    /// `k×n`; column `i` is the vector of vertex `i`.
    pub r: DMatrix<f64>,
}

fn slack_matrix(g: &WeightedGraph, w: &[f64], x: &[f64]) -> Result<SymMatrix, GraphError> {
    let mut m = laplacian_apply(g, w)? * -0.25;
    for (i, xi) in x.iter().enumerate() {
        m[(i, i)] += xi;
    }
    Ok(m)
}

/// `‖Diag(x) − ¼L(w) − BᵀB‖_F`.
pub fn slack_residual(g: &WeightedGraph, w: &[f64], x: &[f64], b: &DMatrix<f64>) -> Result<f64, GraphError> {
    if x.len() != g.n() {
        return Err(GraphError::LengthMismatch { expected: g.n(), got: x.len() });
    }
    if b.nrows() != g.n() || b.ncols() != g.n() {
        return Err(GraphError::DimensionMismatch { expected: g.n(), rows: b.nrows(), cols: b.ncols() });
    }
    let m = slack_matrix(g, w, x)?;
    Ok(frobenius(&(m - b.transpose() * b)))
}

/// Shift `x̃` until `Diag(x̃) − ¼L(w)` is positive semidefinite and factor it.
///
/// The shift `(γ − λ_min)·1` is applied when `λ_min < 0`, and also when the
/// slack matrix has a zero on its diagonal.
pub fn slack_sanitize(x_tilde: &[f64], g: &WeightedGraph, w: &[f64], gamma: f64) -> Result<SlackCertificate, SanitizeError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(SanitizeError::BadParameter(format!("gamma = {gamma} outside (0, 1)")));
    }
    if x_tilde.len() != g.n() {
        return Err(GraphError::LengthMismatch { expected: g.n(), got: x_tilde.len() }.into());
    }
    if x_tilde.iter().any(|v| !v.is_finite()) {
        return Err(SanitizeError::BadParameter("x has non-finite entries".into()));
    }
    let mut x = x_tilde.to_vec();
    let m = slack_matrix(g, w, &x)?;
    let lam = min_eigenvalue(&m);
    let zero_diag = (0..g.n()).any(|i| m[(i, i)] == 0.0);
    if lam < 0.0 || zero_diag {
        let shift = gamma - lam.min(0.0);
        x.iter_mut().for_each(|v| *v += shift);
    }
    let m = slack_matrix(g, w, &x)?;
    let b = cholesky_upper(&m).ok_or(SanitizeError::CholeskyFailed)?;
    let rho = x.iter().sum();
    Ok(SlackCertificate { rho, x, b })
}

fn check_unit_demand(z: &[f64]) -> Result<(), SanitizeError> {
    let zmax = norm_inf(z);
    if zmax == 0.0 {
        return Err(SanitizeError::ZeroDemand);
    }
    if (zmax - 1.0).abs() > 1e-9 || z.iter().any(|v| *v < 0.0) {
        return Err(SanitizeError::DemandNorm(zmax));
    }
    Ok(())
}

fn quarter_dist(r: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let d = r.column(i) - r.column(j);
    0.25 * d.norm_squared()
}

/// Gram representation of `Ỹ` whose scaled distances dominate `z` on every
/// edge with `z_ij > 0`.
///
/// Requires `‖z‖∞ = 1`. The result satisfies `¼‖Re_i − Re_j‖² ≥ z_ij`
/// exactly on the returned floats; `μ` absorbs whatever rescaling that
/// took.
pub fn representation_sanitize(y_tilde: &SymMatrix, g: &WeightedGraph, z: &[f64], gamma: f64) -> Result<Representation, SanitizeError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(SanitizeError::BadParameter(format!("gamma = {gamma} outside [0, 1)")));
    }
    g.check_len(z)?;
    let n = g.n();
    if y_tilde.nrows() != n || y_tilde.ncols() != n {
        return Err(GraphError::DimensionMismatch { expected: n, rows: y_tilde.nrows(), cols: y_tilde.ncols() }.into());
    }
    check_unit_demand(z)?;
    let mut h = vec![0.0; n];
    for (i, hi) in h.iter_mut().enumerate() {
        let d = y_tilde[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(SanitizeError::NonPositiveDiagonal { vertex: i, value: d });
        }
        *hi = 1.0 / d.sqrt();
    }
    let y0 = SymMatrix::from_fn(n, n, |i, j| h[i] * y_tilde[(i, j)] * h[j]);
    let (values, vectors) = sym_eigen(&y0);
    // Eigenvalues below the round-off level of the decomposition count as zero.
    let lam_max = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cutoff = gamma.max(n as f64 * f64::EPSILON * lam_max);
    let keep: Vec<usize> = (0..n).filter(|&k| values[k] > cutoff).collect();
    let mut r0 = DMatrix::zeros(keep.len(), n);
    for (row, &k) in keep.iter().enumerate() {
        let s = values[k].sqrt();
        for i in 0..n {
            r0[(row, i)] = s * vectors[(i, k)];
        }
    }

    let mut mu = 0.0_f64;
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if z[e] > 0.0 {
            let d = quarter_dist(&r0, u, v);
            if d == 0.0 {
                return Err(SanitizeError::ZeroDistance { u, v });
            }
            mu = mu.max(z[e] / d);
        }
    }
    if mu == 0.0 || !mu.is_finite() {
        return Err(SanitizeError::ZeroDemand);
    }
    let mut r = r0 * mu.sqrt();
    // Rounding in the rescale may leave an edge a few ulps short.
    loop {
        let mut worst = 1.0_f64;
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if z[e] > 0.0 {
                worst = worst.max(z[e] / quarter_dist(&r, u, v));
            }
        }
        if worst <= 1.0 {
            break;
        }
        let factor = worst * (1.0 + 4.0 * f64::EPSILON);
        r *= factor.sqrt();
        mu *= factor;
    }
    Ok(Representation { mu, r })
}

/// Sanitized SDP data for a pair `(w, z)` on a fixed graph.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpCertificate {
    pub graph: WeightedGraph,
    pub w: EdgeVector,
    pub z: EdgeVector,
    pub rho: f64,
    pub mu: f64,
    pub r: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub x: Vec<f64>,
    /// `‖Diag(x) − ¼L(w) − BᵀB‖_F / ρ`, recomputed from the other fields.
    pub tau: f64,
    /// `‖diag(RᵀR) − μ1‖₂`.
    pub diag_residual: f64,
}

const SDP_KIND: &str = "sdp-certificate";
const SDP_VERSION: u32 = 1;

impl SdpCertificate {
    pub fn new(g: &WeightedGraph, w: EdgeVector, z: EdgeVector, slack: SlackCertificate, rep: Representation) -> Result<Self, SanitizeError> {
        let mut cert = Self {
            graph: g.with_weights(w.clone())?,
            w,
            z,
            rho: slack.rho,
            mu: rep.mu,
            r: rep.r,
            b: slack.b,
            x: slack.x,
            tau: 0.0,
            diag_residual: 0.0,
        };
        cert.refresh()?;
        cert.check().map_err(SanitizeError::BadParameter)?;
        Ok(cert)
    }

    fn refresh(&mut self) -> Result<(), GraphError> {
        self.graph.check_len(&self.w)?;
        self.graph.check_len(&self.z)?;
        let res = slack_residual(&self.graph, &self.w, &self.x, &self.b)?;
        self.tau = if self.rho > 0.0 { res / self.rho } else if res == 0.0 { 0.0 } else { f64::INFINITY };
        let n = self.graph.n();
        self.diag_residual = if self.r.ncols() == n {
            (0..n).map(|i| (self.r.column(i).norm_squared() - self.mu).powi(2)).sum::<f64>().sqrt()
        } else {
            f64::INFINITY
        };
        Ok(())
    }

    /// Every invariant that must hold on the stored floats.
    pub fn check(&self) -> Result<(), String> {
        let n = self.graph.n();
        if self.r.ncols() != n || self.b.nrows() != n || self.b.ncols() != n || self.x.len() != n {
            return Err("dimension mismatch".into());
        }
        if self.w.len() != self.graph.m() || self.z.len() != self.graph.m() {
            return Err("edge vector length mismatch".into());
        }
        if self.w.iter().chain(&self.z).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err("w and z must be finite and nonnegative".into());
        }
        if !(self.rho >= 0.0 && self.mu >= 0.0) {
            return Err("rho and mu must be nonnegative".into());
        }
        let sum: f64 = self.x.iter().sum();
        if !(self.rho >= sum) {
            return Err(format!("rho = {} is below 1ᵀx = {sum}", self.rho));
        }
        for (e, &(u, v)) in self.graph.edges().iter().enumerate() {
            if self.z[e] > 0.0 && !(quarter_dist(&self.r, u, v) >= self.z[e]) {
                return Err(format!("edge ({}, {}) is not dominated by the representation", u + 1, v + 1));
            }
        }
        if !self.tau.is_finite() {
            return Err("slack residual is not finite".into());
        }
        Ok(())
    }

    pub fn to_bytes(&self, encoding: Encoding) -> Vec<u8> {
        let mut out = Writer::new(encoding, SDP_KIND, SDP_VERSION);
        write_sdp(&mut out, self);
        out.finish()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, CertFileError> {
        let mut input = Reader::new(data, SDP_KIND, SDP_VERSION)?;
        let cert = read_sdp(&mut input)?;
        input.finish()?;
        Ok(cert)
    }
}

pub(crate) fn write_sdp(out: &mut Writer, c: &SdpCertificate) {
    let (n, m, k) = (c.graph.n(), c.graph.m(), c.r.nrows());
    out.label("dims");
    out.u64(n as u64);
    out.u64(m as u64);
    out.u64(k as u64);
    out.label("edges");
    for &(u, v) in c.graph.edges() {
        out.u64(u as u64);
        out.u64(v as u64);
    }
    out.label("w");
    out.f64s(&c.w);
    out.label("z");
    out.f64s(&c.z);
    out.label("rho_mu");
    out.f64s(&[c.rho, c.mu]);
    out.label("x");
    out.f64s(&c.x);
    out.label("R");
    for i in 0..k {
        out.f64s(&c.r.row(i).iter().copied().collect::<Vec<_>>());
    }
    out.label("B");
    for i in 0..n {
        out.f64s(&c.b.row(i).iter().copied().collect::<Vec<_>>());
    }
}

const MAX_DIM: usize = 1 << 24;

pub(crate) fn read_sdp(input: &mut Reader) -> Result<SdpCertificate, CertFileError> {
    let n = input.len(1 << 16)?;
    let m = input.len(MAX_DIM)?;
    let k = input.len(n)?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let u = input.len(MAX_DIM)?;
        let v = input.len(MAX_DIM)?;
        edges.push((u, v));
    }
    let w = input.f64s(m)?;
    let z = input.f64s(m)?;
    let rho = input.f64()?;
    let mu = input.f64()?;
    let x = input.f64s(n)?;
    let r = DMatrix::from_row_slice(k, n, &input.f64s(k * n)?);
    let b = DMatrix::from_row_slice(n, n, &input.f64s(n * n)?);
    if edges.windows(2).any(|p| p[0] >= p[1]) {
        return Err(CertFileError::Corrupt("edges out of order".into()));
    }
    let graph = WeightedGraph::new(n, edges.iter().zip(&w).map(|(&(u, v), &wt)| (u, v, wt)))?;
    let mut cert = SdpCertificate { graph, w, z, rho, mu, r, b, x, tau: 0.0, diag_residual: 0.0 };
    cert.refresh()?;
    cert.check().map_err(CertFileError::Invalid)?;
    Ok(cert)
}

pub fn store_certificate(cert: &SdpCertificate, path: &Path, encoding: Encoding) -> Result<(), CertFileError> {
    std::fs::write(path, cert.to_bytes(encoding))?;
    Ok(())
}

pub fn load_certificate(path: &Path) -> Result<SdpCertificate, CertFileError> {
    SdpCertificate::from_bytes(&std::fs::read(path)?)
}
