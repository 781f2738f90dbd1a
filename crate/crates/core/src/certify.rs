//! β-certificates: assembly, independent verification and paired instances.

use std::path::Path;

use crate::codec::{Encoding, Reader, Writer};
use crate::conic::{formulate_mc, solve, RawSolution, SolverSettings};
use crate::cover::CoverSolution;
use crate::error::{CertFileError, CertifyError, Clause};
use crate::graph::{laplacian_adjoint, EdgeVector, Shore, WeightedGraph};
use crate::linalg::{norm_inf, unsvec};
use crate::sampling::ShoreSet;
use crate::sanitize::{read_sdp, representation_sanitize, slack_sanitize, write_sdp, SdpCertificate, SLACK_GAMMA};

/// Relative tolerance of the equality and inequality clauses in [`verify`].
pub const VERIFY_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityMeasures {
    pub sigma: f64,
    pub beta_mc: f64,
    /// `None` when the restricted cover LP was infeasible.
    pub beta_fcc: Option<f64>,
}

fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `σ = 1 − ⟨z,w⟩/(ρμ)`, `β_mc = mc/ρ`, `β_fcc = (1−σ)μ/fcc`.
pub fn quality(rho: f64, mu: f64, w: &[f64], z: &[f64], mc_val: f64, fcc_val: Option<f64>) -> Result<QualityMeasures, CertifyError> {
    let zero = w.iter().chain(z).all(|v| *v == 0.0);
    if zero && rho == 0.0 && mu == 0.0 {
        return Ok(QualityMeasures { sigma: 0.0, beta_mc: 1.0, beta_fcc: Some(1.0) });
    }
    if !(rho * mu > 0.0) {
        return Err(CertifyError::Degenerate(format!("rho·mu = {} on a nonzero instance", rho * mu)));
    }
    let wz = inner(w, z);
    let sigma = 1.0 - wz / (rho * mu);
    let beta_mc = mc_val / rho;
    let beta_fcc = fcc_val.map(|f| if f > 0.0 { (1.0 - sigma) * mu / f } else { f64::INFINITY });
    Ok(QualityMeasures { sigma, beta_mc, beta_fcc })
}

/// `(ρ, μ, S, y, x, B, τ)` together with the pair `(w, z)` it certifies.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaCertificate {
    /// Carries `w`, `z`, `ρ`, `x`, `B` and the representation used for sampling.
    pub sdp: SdpCertificate,
    /// `(1−σ)μ̃`, so that `ρμ = ⟨w, z⟩`.
    pub mu: f64,
    pub shore: Shore,
    pub cover: Vec<(Shore, f64)>,
    pub tau: f64,
    pub beta: f64,
}

impl BetaCertificate {
    pub fn rho(&self) -> f64 {
        self.sdp.rho
    }

    pub fn w(&self) -> &[f64] {
        &self.sdp.w
    }

    pub fn z(&self) -> &[f64] {
        &self.sdp.z
    }
}

/// Packages a sanitized certificate with the best sampled cut and the
/// restricted cover; `β = min(β_fcc, β_mc)` clamped to `[0, 1]`.
pub fn assemble(sdp: &SdpCertificate, f: &ShoreSet, mc_out: (usize, f64), cover: &CoverSolution) -> Result<BetaCertificate, CertifyError> {
    let q = quality(sdp.rho, sdp.mu, &sdp.w, &sdp.z, mc_out.1, Some(cover.value))?;
    let zero = sdp.rho == 0.0 && sdp.mu == 0.0;
    let (mu, beta) = if zero {
        (0.0, 1.0)
    } else {
        let beta = q.beta_fcc.unwrap_or(0.0).min(q.beta_mc).clamp(0.0, 1.0);
        ((1.0 - q.sigma) * sdp.mu, beta)
    };
    let shore = f.get(mc_out.0).clone();
    let cover = cover.support.iter().map(|&(i, y)| (f.get(i).clone(), y)).collect();
    Ok(BetaCertificate { sdp: sdp.clone(), mu, shore, cover, tau: sdp.tau, beta })
}

fn fail(clause: Clause, detail: impl Into<String>) -> CertifyError {
    CertifyError::Verify { clause, detail: detail.into() }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VERIFY_RTOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Re-checks every clause from `(g, w, z)` and the stored fields alone and
/// returns `(β, β/(1 + τn))` with `τ` recomputed.
pub fn verify(cert: &BetaCertificate, g: &WeightedGraph) -> Result<(f64, f64), CertifyError> {
    let n = g.n();
    let m = g.m();
    let sdp = &cert.sdp;
    let (w, z) = (&sdp.w, &sdp.z);
    let rho = sdp.rho;
    let mu = cert.mu;
    let beta = cert.beta;

    if sdp.graph.n() != n || sdp.graph.edges() != g.edges() {
        return Err(fail(Clause::Shape, "certificate is for a different graph"));
    }
    if w.len() != m || z.len() != m || sdp.x.len() != n || sdp.b.nrows() != n || sdp.b.ncols() != n {
        return Err(fail(Clause::Shape, "dimension mismatch"));
    }
    if w.iter().chain(z).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(fail(Clause::Shape, "w and z must be finite and nonnegative"));
    }
    if !(rho >= 0.0 && mu >= 0.0 && rho.is_finite() && mu.is_finite()) {
        return Err(fail(Clause::Shape, "rho and mu must be finite and nonnegative"));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(fail(Clause::Shape, format!("beta = {beta} outside [0, 1]")));
    }
    if cert.shore.len() != n || cert.cover.iter().any(|(s, y)| s.len() != n || !(y.is_finite() && *y >= 0.0)) {
        return Err(fail(Clause::Shape, "malformed shore or cover"));
    }

    let zero_instance = w.iter().chain(z).all(|v| *v == 0.0);
    if (rho == 0.0 && mu == 0.0) != zero_instance {
        return Err(fail(Clause::ZeroConvention, "rho = mu = 0 must hold exactly when w = z = 0"));
    }

    let wz: f64 = w.iter().zip(z).map(|(a, b)| a * b).sum();
    if !zero_instance && !close(rho * mu, wz) {
        return Err(fail(Clause::Product, format!("rho·mu = {} but <w, z> = {wz}", rho * mu)));
    }

    let mut cut = 0.0;
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if cert.shore.contains(u) != cert.shore.contains(v) {
            cut += w[e];
        }
    }
    if cut < beta * rho * (1.0 - VERIFY_RTOL) {
        return Err(fail(Clause::Cut, format!("shore cuts {cut} < beta·rho = {}", beta * rho)));
    }

    let mut covered = vec![0.0; m];
    let mut mass = 0.0;
    for (s, y) in &cert.cover {
        mass += y;
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if s.contains(u) != s.contains(v) {
                covered[e] += y;
            }
        }
    }
    if let Some(e) = (0..m).find(|&e| covered[e] < z[e]) {
        let (u, v) = g.edges()[e];
        return Err(fail(Clause::Cover, format!("edge ({}, {}) covered {} < demand {}", u + 1, v + 1, covered[e], z[e])));
    }
    if mass * beta > mu * (1.0 + VERIFY_RTOL) {
        return Err(fail(Clause::Cover, format!("cover mass {mass} exceeds mu/beta = {}", mu / beta)));
    }

    let sum_x: f64 = sdp.x.iter().sum();
    if !(rho >= sum_x) {
        return Err(fail(Clause::Slack, format!("rho = {rho} < 1ᵀx = {sum_x}")));
    }
    let mut slack = vec![vec![0.0; n]; n];
    for (i, xi) in sdp.x.iter().enumerate() {
        slack[i][i] = *xi;
    }
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let q = 0.25 * w[e];
        slack[u][u] -= q;
        slack[v][v] -= q;
        slack[u][v] += q;
        slack[v][u] += q;
    }
    let mut fro = 0.0;
    for i in 0..n {
        for j in 0..n {
            let btb: f64 = (0..n).map(|k| sdp.b[(k, i)] * sdp.b[(k, j)]).sum();
            let d = slack[i][j] - btb;
            fro += d * d;
        }
    }
    let residual = fro.sqrt();
    let scale = sum_x.abs() + w.iter().sum::<f64>();
    let roundoff = 64.0 * f64::EPSILON * scale;
    let allowed = if rho > 0.0 { cert.tau * rho * (1.0 + VERIFY_RTOL) + roundoff } else { 0.0 };
    if !(residual <= allowed) {
        return Err(fail(Clause::Slack, format!("residual {residual} exceeds tau·rho = {}", cert.tau * rho)));
    }
    let tau = if rho > 0.0 { residual / rho } else { 0.0 };
    Ok((beta, beta / (1.0 + tau * n as f64)))
}

const BETA_KIND: &str = "beta-certificate";
const BETA_VERSION: u32 = 1;

fn write_shore(out: &mut Writer, s: &Shore) {
    for &b in s.members() {
        out.u64(b as u64);
    }
}

fn read_shore(input: &mut Reader, n: usize) -> Result<Shore, CertFileError> {
    let mut members = Vec::with_capacity(n);
    for _ in 0..n {
        members.push(match input.u64()? {
            0 => false,
            1 => true,
            v => return Err(CertFileError::Corrupt(format!("shore entry {v}"))),
        });
    }
    Ok(Shore::from_members(members))
}

impl BetaCertificate {
    pub fn to_bytes(&self, encoding: Encoding) -> Vec<u8> {
        let mut out = Writer::new(encoding, BETA_KIND, BETA_VERSION);
        write_sdp(&mut out, &self.sdp);
        out.label("mu_tau_beta");
        out.f64s(&[self.mu, self.tau, self.beta]);
        out.label("shore");
        write_shore(&mut out, &self.shore);
        out.label("cover");
        out.u64(self.cover.len() as u64);
        for (s, y) in &self.cover {
            out.f64(*y);
            write_shore(&mut out, s);
        }
        out.finish()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, CertFileError> {
        let mut input = Reader::new(data, BETA_KIND, BETA_VERSION)?;
        let sdp = read_sdp(&mut input)?;
        let n = sdp.graph.n();
        let mu = input.f64()?;
        let tau = input.f64()?;
        let beta = input.f64()?;
        let shore = read_shore(&mut input, n)?;
        let p = input.len(1 << 24)?;
        let mut cover = Vec::with_capacity(p);
        for _ in 0..p {
            let y = input.f64()?;
            cover.push((read_shore(&mut input, n)?, y));
        }
        input.finish()?;
        Ok(Self { sdp, mu, shore, cover, tau, beta })
    }
}

pub fn store_beta_certificate(cert: &BetaCertificate, path: &Path, encoding: Encoding) -> Result<(), CertFileError> {
    std::fs::write(path, cert.to_bytes(encoding))?;
    Ok(())
}

pub fn load_beta_certificate(path: &Path) -> Result<BetaCertificate, CertFileError> {
    BetaCertificate::from_bytes(&std::fs::read(path)?)
}

/// Solver tolerance used for pairing.
pub const PAIRING_TOLERANCE: f64 = 1e-8;
/// Allowed deviation of the sanitized `μ` from 1.
pub const PAIRING_MU_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct PairedInstance {
    pub z: EdgeVector,
    /// Sanitized max-cut bound for `w`.
    pub rho: f64,
    /// Sanitized value, scaled back to the unnormalized `z̃`; close to 1.
    pub mu: f64,
    pub solve: Option<RawSolution>,
}

/// Fractional cut-covering instance paired with `(G, w)`: `z̃ = ¼L*(Ỹ)` for
/// a near-optimal max-cut `Ỹ`, with entries at most `γ‖z̃‖∞` zeroed.
pub fn make_paired_instance(g: &WeightedGraph, w: &[f64], gamma: f64, settings: &SolverSettings) -> Result<PairedInstance, CertifyError> {
    g.check_len(w)?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(CertifyError::Degenerate(format!("gamma = {gamma} outside [0, 1)")));
    }
    if w.iter().all(|v| *v == 0.0) {
        return Ok(PairedInstance { z: vec![0.0; g.m()], rho: 0.0, mu: 0.0, solve: None });
    }
    let p = formulate_mc(g, w)?;
    let sol = solve(&p, settings)?;
    let y = unsvec(&sol.y, g.n());
    let z_tilde: Vec<f64> = laplacian_adjoint(g, &y)?.iter().map(|v| 0.25 * v).collect();
    let slack = slack_sanitize(&sol.x, g, w, SLACK_GAMMA)?;
    let zmax = norm_inf(&z_tilde);
    if !(zmax > 0.0) {
        return Err(CertifyError::Degenerate("relaxation produced no positive demand".into()));
    }
    let unit: Vec<f64> = z_tilde.iter().map(|v| v.max(0.0) / zmax).collect();
    let rep = representation_sanitize(&y, g, &unit, 0.0)?;
    let mu = rep.mu * zmax;
    if (mu - 1.0).abs() > PAIRING_MU_TOLERANCE {
        return Err(CertifyError::PairingMu(mu));
    }
    let z = z_tilde.iter().map(|&v| if v > gamma * zmax { v } else { 0.0 }).collect();
    Ok(PairedInstance { z, rho: slack.rho, mu, solve: Some(sol) })
}
