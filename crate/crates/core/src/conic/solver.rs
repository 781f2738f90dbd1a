use nalgebra::{DMatrix, DVector};

use super::problem::{ColMatrix, ConeSpec, ConicProblem};
use crate::error::SolverError;
use crate::linalg::{dot, norm_inf, project_psd, svec, svec_len, unsvec};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    /// Over-relaxation parameter in `(0, 2)`.
    pub alpha: f64,
    /// Initial penalty; adapted during the run.
    pub rho: f64,
    pub ruiz_iters: usize,
    /// Improving-ray threshold; `None` disables the test.
    pub eps_inf: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { eps_abs: 1e-4, eps_rel: 1e-4, max_iter: 100_000, alpha: 1.5, rho: 0.1, ruiz_iters: 15, eps_inf: None }
    }
}

impl SolverSettings {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { eps_abs: tol, eps_rel: tol, ..Self::default() }
    }

    fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::BadParameter(what.to_string()));
        if !(self.eps_abs > 0.0 && self.eps_abs < 1.0) || !(self.eps_rel > 0.0 && self.eps_rel < 1.0) {
            return bad("tolerances must lie in (0, 1)");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return bad("alpha must lie in (0, 2)");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho must be positive");
        }
        if matches!(self.eps_inf, Some(e) if !(e > 0.0)) {
            return bad("eps_inf must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    MaxIter,
    /// The dual side exhibited an improving ray (primal infeasibility).
    Unbounded,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Solved => "solved",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Unbounded => "unbounded_flag",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawSolution {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub status: SolveStatus,
    pub residuals: Residuals,
    pub iterations: usize,
    /// `⟨c, x⟩`.
    pub primal_objective: f64,
    /// `−⟨b, y⟩`.
    pub dual_objective: f64,
}

/// Projection onto the cone (self-dual, so also onto `K*`).
pub fn project_cone(cone: &ConeSpec, v: &mut [f64]) {
    let k = cone.nonneg_len();
    for t in &mut v[..k] {
        *t = t.max(0.0);
    }
    let n = cone.psd_dim;
    if n > 0 {
        let block = &mut v[k..k + svec_len(n)];
        let p = project_psd(&unsvec(block, n));
        svec(&p, block);
    }
}

struct Scaling {
    d: Vec<f64>,
    e: Vec<f64>,
    sb: f64,
    sc: f64,
}

fn equilibrate(a: &mut ColMatrix, cone: &ConeSpec, iters: usize) -> (Vec<f64>, Vec<f64>) {
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut d = vec![1.0; rows];
    let mut e = vec![1.0; cols];
    let k = cone.nonneg_len();
    for _ in 0..iters {
        let mut rn = vec![0.0_f64; rows];
        let mut cn = vec![0.0_f64; cols];
        for j in 0..cols {
            for &(r, v) in a.col(j) {
                rn[r] = rn[r].max(v.abs());
                cn[j] = cn[j].max(v.abs());
            }
        }
        if rows > k {
            let block = rn[k..].iter().fold(0.0_f64, |acc, v| acc.max(*v));
            rn[k..].iter_mut().for_each(|v| *v = block);
        }
        let dr: Vec<f64> = rn.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        let ec: Vec<f64> = cn.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        a.scale(&dr, &ec);
        d.iter_mut().zip(&dr).for_each(|(x, f)| *x *= f);
        e.iter_mut().zip(&ec).for_each(|(x, f)| *x *= f);
    }
    (d, e)
}

fn residuals(p: &ConicProblem, x: &[f64], s: &[f64], y: &[f64], ax: &mut [f64], aty: &mut [f64]) -> (Residuals, [f64; 3]) {
    p.a.mul(x, ax);
    p.a.mul_transpose(y, aty);
    let rp: Vec<f64> = (0..ax.len()).map(|i| ax[i] + s[i] - p.b[i]).collect();
    let rd: Vec<f64> = (0..aty.len()).map(|i| aty[i] + p.c[i]).collect();
    let cx = dot(&p.c, x);
    let by = dot(&p.b, y);
    let res = Residuals { primal: norm_inf(&rp), dual: norm_inf(&rd), gap: (cx + by).abs() };
    let scales = [
        norm_inf(ax).max(norm_inf(s)).max(norm_inf(&p.b)),
        norm_inf(aty).max(norm_inf(&p.c)),
        cx.abs().max(by.abs()),
    ];
    (res, scales)
}

/// Operator-splitting solve of `min ⟨c,x⟩ s.t. Ax + s = b, s ∈ K`.
///
/// Runs over-relaxed ADMM on the Ruiz-equilibrated data and checks the
/// termination inequalities on the unscaled iterates in the ∞-norm. The
/// improving-ray test is evaluated only when `eps_inf` is set.
pub fn solve(p: &ConicProblem, settings: &SolverSettings) -> Result<RawSolution, SolverError> {
    p.validate()?;
    settings.validate()?;
    let (nx, ny) = (p.x_dim(), p.y_dim());

    let mut a = p.a.clone();
    let (d, e) = if settings.ruiz_iters > 0 {
        equilibrate(&mut a, &p.cone, settings.ruiz_iters)
    } else {
        (vec![1.0; ny], vec![1.0; nx])
    };
    let mut b: Vec<f64> = p.b.iter().zip(&d).map(|(v, s)| v * s).collect();
    let mut c: Vec<f64> = p.c.iter().zip(&e).map(|(v, s)| v * s).collect();
    let sb = if norm_inf(&b) > 0.0 { norm_inf(&b) } else { 1.0 };
    let sc = if norm_inf(&c) > 0.0 { norm_inf(&c) } else { 1.0 };
    b.iter_mut().for_each(|v| *v /= sb);
    c.iter_mut().for_each(|v| *v /= sc);
    let sc_ = Scaling { d, e, sb, sc };

    let chol = a.gram().cholesky().ok_or(SolverError::Factorization)?;

    let mut xh = vec![0.0; nx];
    if let Some(start) = &p.start {
        for j in 0..nx {
            xh[j] = start[j] / (sc_.e[j] * sc_.sb);
        }
    }
    let mut ax = vec![0.0; ny];
    a.mul(&xh, &mut ax);
    let mut sh: Vec<f64> = (0..ny).map(|i| b[i] - ax[i]).collect();
    project_cone(&p.cone, &mut sh);
    let mut yh = vec![0.0; ny];
    let mut rho = settings.rho;

    let mut work = vec![0.0; ny];
    let mut rhs = vec![0.0; nx];
    let mut ux = vec![0.0; nx];
    let mut us = vec![0.0; ny];
    let mut uy = vec![0.0; ny];
    let mut uax = vec![0.0; ny];
    let mut uaty = vec![0.0; nx];
    let mut sat = vec![0.0; nx];

    let mut best: Option<(f64, RawSolution)> = None;
    let adapt_every = 25;

    for iter in 1..=settings.max_iter {
        for i in 0..ny {
            work[i] = b[i] - sh[i] - yh[i] / rho;
        }
        a.mul_transpose(&work, &mut rhs);
        for j in 0..nx {
            rhs[j] -= c[j] / rho;
        }
        let sol = chol.solve(&DVector::from_column_slice(&rhs));
        xh.copy_from_slice(sol.as_slice());
        a.mul(&xh, &mut ax);
        for i in 0..ny {
            let relaxed = settings.alpha * ax[i] + (1.0 - settings.alpha) * (b[i] - sh[i]);
            work[i] = relaxed;
            sh[i] = b[i] - relaxed - yh[i] / rho;
        }
        project_cone(&p.cone, &mut sh);
        for i in 0..ny {
            yh[i] += rho * (work[i] + sh[i] - b[i]);
        }

        for j in 0..nx {
            ux[j] = sc_.sb * sc_.e[j] * xh[j];
        }
        for i in 0..ny {
            us[i] = sc_.sb * sh[i] / sc_.d[i];
            uy[i] = sc_.sc * sc_.d[i] * yh[i];
        }
        let (res, scales) = residuals(p, &ux, &us, &uy, &mut uax, &mut uaty);
        let tol = |scale: f64| settings.eps_abs + settings.eps_rel * scale;
        let merit = (res.primal / tol(scales[0])).max(res.dual / tol(scales[1])).max(res.gap / tol(scales[2]));
        let make = |status| RawSolution {
            x: ux.clone(),
            s: us.clone(),
            y: uy.clone(),
            status,
            residuals: res,
            iterations: iter,
            primal_objective: dot(&p.c, &ux),
            dual_objective: -dot(&p.b, &uy),
        };
        if let Some(eps_inf) = settings.eps_inf {
            let by = -dot(&p.b, &uy);
            if by > 0.0 && norm_inf(&uaty) / by < eps_inf {
                return Ok(make(SolveStatus::Unbounded));
            }
        }
        if merit <= 1.0 {
            return Ok(make(SolveStatus::Solved));
        }
        if best.as_ref().is_none_or(|(m, _)| merit < *m) {
            best = Some((merit, make(SolveStatus::MaxIter)));
        }

        if iter % adapt_every == 0 {
            // Balance relative residuals in the scaled space.
            a.mul_transpose(&yh, &mut sat);
            let rp: f64 = (0..ny).map(|i| (ax[i] + sh[i] - b[i]).abs()).fold(0.0, f64::max);
            let rd: f64 = (0..nx).map(|j| (sat[j] + c[j]).abs()).fold(0.0, f64::max);
            let pn = norm_inf(&ax).max(norm_inf(&sh)).max(norm_inf(&b)).max(1e-12);
            let dn = norm_inf(&sat).max(norm_inf(&c)).max(1e-12);
            if rp > 0.0 && rd > 0.0 {
                let ratio = ((rp / pn) / (rd / dn)).sqrt();
                if !(0.2..=5.0).contains(&ratio) {
                    rho = (rho * ratio).clamp(1e-6, 1e6);
                }
            }
        }
    }
    let (_, mut sol) = best.expect("at least one iteration ran");
    sol.iterations = settings.max_iter;
    Ok(sol)
}

/// Dense copy of the constraint map, for tests and diagnostics.
pub fn dense_a(p: &ConicProblem) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(p.y_dim(), p.x_dim());
    for j in 0..p.x_dim() {
        for &(r, v) in p.a.col(j) {
            m[(r, j)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::problem::{formulate_fcc, formulate_mc};
    use crate::graph::WeightedGraph;

    #[test]
    fn single_edge_value() {
        let g = WeightedGraph::complete(2);
        let p = formulate_mc(&g, &[1.0]).unwrap();
        let sol = solve(&p, &SolverSettings::with_tolerance(1e-6)).unwrap();
        assert_eq!(sol.status, SolveStatus::Solved);
        assert!((sol.primal_objective - 1.0).abs() < 1e-5, "{}", sol.primal_objective);
    }

    #[test]
    fn triangle_value() {
        let g = WeightedGraph::complete(3);
        let p = formulate_mc(&g, g.weights()).unwrap();
        let sol = solve(&p, &SolverSettings::with_tolerance(1e-5)).unwrap();
        assert_eq!(sol.status, SolveStatus::Solved);
        assert!((sol.primal_objective - 2.25).abs() < 1e-3);
        assert!((sol.dual_objective - 2.25).abs() < 1e-3);
    }

    #[test]
    fn huge_weights_trigger_ray_test() {
        let g = WeightedGraph::complete(3);
        let w = vec![1e9; 3];
        let p = formulate_mc(&g, &w).unwrap();
        let settings = SolverSettings { eps_inf: Some(1e-7), max_iter: 20_000, ..SolverSettings::default() };
        let sol = solve(&p, &settings).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
        let scaled = vec![1.0 / 3.0; 3];
        let p = formulate_mc(&g, &scaled).unwrap();
        let sol = solve(&p, &settings).unwrap();
        assert_eq!(sol.status, SolveStatus::Solved);
    }

    #[test]
    fn polar_triangle_value() {
        let g = WeightedGraph::complete(3);
        let p = formulate_fcc(&g, &[0.75; 3], 0.0, 0.0, 0.0).unwrap();
        let sol = solve(&p, &SolverSettings::with_tolerance(1e-6)).unwrap();
        assert_eq!(sol.status, SolveStatus::Solved);
        let mu = sol.y[0];
        assert!((mu - 1.0).abs() < 1e-4, "mu = {mu}");
        assert!((sol.primal_objective + 7.0 * mu).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_settings() {
        let g = WeightedGraph::complete(2);
        let p = formulate_mc(&g, &[1.0]).unwrap();
        let s = SolverSettings { eps_abs: 0.0, ..SolverSettings::default() };
        assert!(solve(&p, &s).is_err());
        let s = SolverSettings { max_iter: 0, ..SolverSettings::default() };
        assert!(solve(&p, &s).is_err());
    }

    #[test]
    fn dense_copy_shape() {
        let g = WeightedGraph::complete(3);
        let p = formulate_mc(&g, g.weights()).unwrap();
        let a = dense_a(&p);
        assert_eq!((a.nrows(), a.ncols()), (6, 3));
        assert_eq!((a.transpose() * &a), DMatrix::identity(3, 3));
    }
}
