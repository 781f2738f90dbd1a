//! Solve, sample, cover and certify; the stopping-time tracer; the sample
//! bound; the Kneser cut oracle.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::certify::{assemble, quality, store_beta_certificate, verify, BetaCertificate, QualityMeasures};
use crate::codec::Encoding;
use crate::conic::{formulate_fcc, formulate_mc, perturb_fcc, perturb_mc, solve, SolveStatus, SolverSettings};
use crate::cover::{avg_asymptotic, avg_cover, fcc_restricted, mc_restricted, CoverSolution, Restricted};
use crate::error::{GraphError, ParseError, PipelineError, SolverError};
use crate::graph::{laplacian_adjoint, scale_input, ScaleMode, Shore, SymMatrix, WeightedGraph};
use crate::io::{parse_config, parse_edge_values, parse_instance, Coverer, PipelineConfig, Presampler, ReportRow, SolverMode, REPORT_HEADER};
use crate::linalg::{norm_inf, unsvec};
use crate::sampling::{sample_hyperplane_shores, sample_uniform_shores, Rng, ShoreSet};
use crate::sanitize::{load_certificate, representation_sanitize, slack_sanitize, store_certificate, Representation, SdpCertificate, SlackCertificate, SLACK_GAMMA};

/// Improving-ray threshold used when the input is not rescaled.
pub const EPS_INF: f64 = 1e-7;
/// Smallest sample count, used when `⌈C ln m⌉` is tiny.
pub const MIN_SAMPLES: usize = 8;

fn stage<E: std::error::Error + Send + Sync + 'static>(name: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::new(name, e)
}

/// `ln m`, taken as 0 for `m ≤ 1`.
pub fn ln_edges(m: usize) -> f64 {
    if m <= 1 { 0.0 } else { (m as f64).ln() }
}

/// `max(⌈C ln m⌉, 8)`.
pub fn sample_count(c: f64, m: usize) -> usize {
    ((c * ln_edges(m)).ceil() as usize).max(MIN_SAMPLES)
}

/// Samples after which every edge is cut with probability at least
/// `1 − target` when each edge is cut with probability `≥ √(2ε)/π`:
/// `(ln m + ln(1/target)) / (−ln(1 − √(2ε)/π))` and its ceiling.
pub fn sample_count_bound(m: usize, eps: f64, target: f64) -> Result<(f64, u64), SolverError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SolverError::BadParameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(target > 0.0 && target < 1.0) || m == 0 {
        return Err(SolverError::BadParameter("need m ≥ 1 and target in (0, 1)".into()));
    }
    let p = (2.0 * eps).sqrt() / std::f64::consts::PI;
    let raw = ((m as f64).ln() + (1.0 / target).ln()) / -(1.0 - p).ln();
    Ok((raw, raw.ceil() as u64))
}

/// Best of the `n` cuts `{S ∈ C([n], 2) : S ∩ [p] ≠ ∅}` of `Kn(n, 2)`,
/// counted over the three perfect matchings of every 4-subset.
pub fn kneser_mc(n: usize) -> Result<u64, GraphError> {
    if n < 4 {
        return Err(GraphError::DegenerateScale("Kneser graph needs n ≥ 4"));
    }
    let mut cut = vec![0u64; n + 1];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    for (a, b) in [((i, j), (k, l)), ((i, k), (j, l)), ((i, l), (j, k))] {
                        let (lo, hi) = (a.0.min(b.0), a.0.max(b.0));
                        // The pair with the smaller minimum is in the shore for p > lo, the other for p > hi.
                        for c in cut.iter_mut().take(hi + 1).skip(lo + 1) {
                            *c += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(cut[1..].iter().copied().max().unwrap_or(0))
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: ReportRow,
    pub sdp: SdpCertificate,
    pub shores: ShoreSet,
    pub quality: Option<QualityMeasures>,
    /// `None` for RLI runs and for `store_only`.
    pub certificate: Option<BetaCertificate>,
    pub beta_tilde: Option<f64>,
    pub solve_status: Option<SolveStatus>,
    pub solve_iterations: usize,
    pub hyperplane_samples: usize,
    pub uniform_samples: usize,
    pub uncovered: Vec<usize>,
}

impl RunOutcome {
    pub fn is_rli(&self) -> bool {
        self.report.rli
    }
}

/// Loads the instance (and demands) named by `cfg`, runs it, and writes the
/// requested outputs.
pub fn run(cfg: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    cfg.validate().map_err(stage("config"))?;
    let text = std::fs::read_to_string(&cfg.instance).map_err(|e| PipelineError::new("load", ParseError::Io(e)))?;
    let g = parse_instance(&text).map_err(stage("load"))?;
    let demands = match &cfg.demands {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| PipelineError::new("load", ParseError::Io(e)))?;
            Some(parse_edge_values(&text, g.m()).map_err(stage("load"))?)
        }
        None => None,
    };
    let name = cfg.instance.file_name().map_or_else(|| cfg.instance.display().to_string(), |s| s.to_string_lossy().into_owned());
    let out = run_graph(&g, demands.as_deref(), cfg, &name)?;
    write_outputs(cfg, &out)?;
    Ok(out)
}

/// [`run`] on a config file.
pub fn run_file(path: &Path) -> Result<RunOutcome, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::new("config", ParseError::Io(e)))?;
    let cfg = parse_config(&text).map_err(stage("config"))?;
    run(&cfg)
}

fn write_outputs(cfg: &PipelineConfig, out: &RunOutcome) -> Result<(), PipelineError> {
    if let (Some(path), true) = (&cfg.certificate, cfg.solver != SolverMode::FromFile) {
        store_certificate(&out.sdp, path, Encoding::Binary).map_err(stage("store"))?;
    }
    if let (Some(path), Some(cert)) = (&cfg.beta_certificate, &out.certificate) {
        store_beta_certificate(cert, path, Encoding::Binary).map_err(stage("store"))?;
    }
    if let Some(path) = &cfg.output {
        append_report(path, &out.report).map_err(|e| PipelineError::new("report", ParseError::Io(e)))?;
    }
    Ok(())
}

/// Appends one row, writing the header first when the file is new or empty.
pub fn append_report(path: &Path, row: &ReportRow) -> std::io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if file.metadata()?.len() == 0 {
        writeln!(file, "{REPORT_HEADER}")?;
    }
    writeln!(file, "{}", row.to_csv())
}

fn zero_certificate(g: &WeightedGraph) -> Result<SdpCertificate, PipelineError> {
    let n = g.n();
    let slack = SlackCertificate { rho: 0.0, x: vec![0.0; n], b: DMatrix::zeros(n, n) };
    let rep = Representation { mu: 0.0, r: DMatrix::zeros(1, n) };
    SdpCertificate::new(g, vec![0.0; g.m()], vec![0.0; g.m()], slack, rep).map_err(stage("sanitize"))
}

fn clamp_unit(v: &[f64]) -> Result<Vec<f64>, GraphError> {
    let clamped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    let top = norm_inf(&clamped);
    if !(top > 0.0) {
        return Err(GraphError::DegenerateScale("z_inf_norm"));
    }
    Ok(clamped.iter().map(|x| x / top).collect())
}

struct Solved {
    sdp: SdpCertificate,
    status: Option<SolveStatus>,
    iterations: usize,
}

fn solve_and_sanitize(g: &WeightedGraph, input: &[f64], cfg: &PipelineConfig) -> Result<Solved, PipelineError> {
    let settings = SolverSettings {
        eps_abs: cfg.eps_abs,
        eps_rel: cfg.eps_rel,
        eps_inf: (cfg.scaler == ScaleMode::None).then_some(EPS_INF),
        ..SolverSettings::default()
    };
    let n = g.n();
    match cfg.solver {
        SolverMode::AdmmMc => {
            let w = input;
            let p = formulate_mc(g, w).map_err(stage("formulate"))?;
            let sol = solve(&p, &settings).map_err(stage("solve"))?;
            if sol.status == SolveStatus::Unbounded {
                return Err(PipelineError::new("solve", SolverError::BadParameter("improving ray detected; rescale the input".into())));
            }
            let y = perturb_mc(&unsvec(&sol.y, n), cfg.round_eps).map_err(stage("perturb"))?;
            let z_eps: Vec<f64> = laplacian_adjoint(g, &y).map_err(stage("perturb"))?.iter().map(|v| 0.25 * v).collect();
            let z = clamp_unit(&z_eps).map_err(stage("sanitize"))?;
            let slack = slack_sanitize(&sol.x, g, w, SLACK_GAMMA).map_err(stage("sanitize"))?;
            let rep = representation_sanitize(&y, g, &z, cfg.rank_cutoff).map_err(stage("sanitize"))?;
            let sdp = SdpCertificate::new(g, w.to_vec(), z, slack, rep).map_err(stage("sanitize"))?;
            Ok(Solved { sdp, status: Some(sol.status), iterations: sol.iterations })
        }
        SolverMode::AdmmFcc => {
            let m = g.m();
            let z = clamp_unit(input).map_err(stage("formulate"))?;
            let p = formulate_fcc(g, &z, cfg.round_eps, 0.0, 0.0).map_err(stage("formulate"))?;
            let sol = solve(&p, &settings).map_err(stage("solve"))?;
            if sol.status == SolveStatus::Unbounded {
                return Err(PipelineError::new("solve", SolverError::BadParameter("improving ray detected; rescale the input".into())));
            }
            let mu_tilde = sol.y[0];
            let y_tilde = unsvec(&sol.y[1 + m..], n);
            let y = perturb_fcc(&y_tilde, mu_tilde, cfg.round_eps).map_err(stage("perturb"))?;
            let w: Vec<f64> = sol.x[..m].iter().map(|v| v.max(0.0)).collect();
            let slack = slack_sanitize(&sol.x[m..], g, &w, SLACK_GAMMA).map_err(stage("sanitize"))?;
            let rep = representation_sanitize(&y, g, &z, cfg.rank_cutoff).map_err(stage("sanitize"))?;
            let sdp = SdpCertificate::new(g, w, z, slack, rep).map_err(stage("sanitize"))?;
            Ok(Solved { sdp, status: Some(sol.status), iterations: sol.iterations })
        }
        SolverMode::FromFile => {
            let path = cfg.certificate.as_ref().ok_or_else(|| PipelineError::new("config", ParseError::Missing("certificate")))?;
            let sdp = load_certificate(path).map_err(stage("load"))?;
            if sdp.graph.n() != n || sdp.graph.edges() != g.edges() {
                return Err(PipelineError::new("load", GraphError::LengthMismatch { expected: g.m(), got: sdp.graph.m() }));
            }
            Ok(Solved { sdp, status: None, iterations: 0 })
        }
    }
}

/// Runs one configured experiment on an in-memory graph. `demands` is the
/// cover instance in `admm_fcc` mode; it defaults to the graph weights.
pub fn run_graph(g: &WeightedGraph, demands: Option<&[f64]>, cfg: &PipelineConfig, name: &str) -> Result<RunOutcome, PipelineError> {
    cfg.validate().map_err(stage("config"))?;
    let start = Instant::now();
    let raw = match cfg.solver {
        SolverMode::AdmmFcc => demands.unwrap_or(g.weights()).to_vec(),
        _ => g.weights().to_vec(),
    };
    g.check_len(&raw).map_err(stage("load"))?;

    let solved = if cfg.solver != SolverMode::FromFile && raw.iter().all(|v| *v == 0.0) {
        Solved { sdp: zero_certificate(g)?, status: None, iterations: 0 }
    } else {
        let input = match cfg.solver {
            SolverMode::FromFile => raw,
            _ => scale_input(&raw, cfg.scaler).map_err(stage("scale"))?.0,
        };
        solve_and_sanitize(g, &input, cfg)?
    };
    let sdp = solved.sdp;
    let t_sdp = start.elapsed().as_secs_f64();

    let sample_start = Instant::now();
    let m = g.m();
    let total = sample_count(cfg.sampler_c, m);
    let uniform = match cfg.presampler {
        Presampler::Uniform => ((cfg.presampler_q * ln_edges(m)).ceil() as usize).min(total),
        Presampler::Null => 0,
    };
    let mut rng = Rng::new(cfg.sampler_seed);
    let mut shores = sample_uniform_shores(g.n(), uniform, &mut rng);
    shores.extend(sample_hyperplane_shores(&sdp.r, total - uniform, &mut rng));
    let t_sample = sample_start.elapsed().as_secs_f64();

    let lp_start = Instant::now();
    let mut report = ReportRow {
        instance: name.to_string(),
        solver: cfg.solver.name().to_string(),
        eps: cfg.round_eps,
        c: cfg.sampler_c,
        seed: cfg.sampler_seed,
        sigma: 0.0,
        beta_mc: None,
        beta_fcc: None,
        rli: false,
        tau: sdp.tau,
        t_sdp_s: t_sdp,
        t_sample_s: t_sample,
        t_lp_s: 0.0,
        t_total_s: 0.0,
    };
    let mut outcome = RunOutcome {
        report: report.clone(),
        sdp: sdp.clone(),
        shores: ShoreSet::new(),
        quality: None,
        certificate: None,
        beta_tilde: None,
        solve_status: solved.status,
        solve_iterations: solved.iterations,
        hyperplane_samples: total - uniform,
        uniform_samples: uniform,
        uncovered: vec![],
    };

    let base = quality(sdp.rho, sdp.mu, &sdp.w, &sdp.z, 0.0, None).map_err(stage("quality"))?;
    report.sigma = base.sigma;
    if cfg.coverer != Coverer::StoreOnly {
        let mc = mc_restricted(&shores, g, &sdp.w).map_err(stage("cover"))?;
        let cover = match cfg.coverer {
            Coverer::AvgScale => avg_cover(&shores, g, &sdp.z),
            _ => fcc_restricted(&shores, g, &sdp.z),
        }
        .map_err(stage("cover"))?;
        match cover {
            Restricted::Feasible(cover) => {
                let q = quality(sdp.rho, sdp.mu, &sdp.w, &sdp.z, mc.1, Some(cover.value)).map_err(stage("quality"))?;
                let cert = assemble(&sdp, &shores, mc, &cover).map_err(stage("assemble"))?;
                let (_, beta_tilde) = verify(&cert, g).map_err(stage("verify"))?;
                report.beta_mc = Some(q.beta_mc);
                report.beta_fcc = q.beta_fcc;
                outcome.quality = Some(q);
                outcome.certificate = Some(cert);
                outcome.beta_tilde = Some(beta_tilde);
            }
            Restricted::Rli(r) => {
                let q = quality(sdp.rho, sdp.mu, &sdp.w, &sdp.z, mc.1, None).map_err(stage("quality"))?;
                report.beta_mc = Some(q.beta_mc);
                report.rli = true;
                outcome.quality = Some(q);
                outcome.uncovered = r.uncovered;
            }
        }
    }
    report.t_lp_s = lp_start.elapsed().as_secs_f64();
    report.t_total_s = start.elapsed().as_secs_f64();
    outcome.report = report;
    outcome.shores = shores;
    Ok(outcome)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub t: usize,
    /// `None` while the restricted LP is infeasible.
    pub fcc: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceSeries {
    pub points: Vec<TracePoint>,
    /// First `t` with a feasible restricted LP.
    pub f: Option<usize>,
    /// First `t` with `(1−σ)·avg ≥ fcc_t`.
    pub a: Option<usize>,
    /// Averaging-and-scaling value in the limit; `None` if some demand is uncoverable.
    pub avg_asymptotic: Option<f64>,
    pub sigma: f64,
    pub t_max: usize,
    pub ln_m: f64,
    pub shores: ShoreSet,
    pub lp_solves: usize,
}

impl TraceSeries {
    /// `min(F, T)/ln m`.
    pub fn f_tilde(&self) -> f64 {
        self.f.unwrap_or(self.t_max).min(self.t_max) as f64 / self.ln_m
    }

    /// `min(A, T)/ln m`.
    pub fn a_tilde(&self) -> f64 {
        self.a.unwrap_or(self.t_max).min(self.t_max) as f64 / self.ln_m
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,fcc_value_or_inf,beta_t,avg_asymptotic\n");
        let avg = self.avg_asymptotic.map_or_else(|| "inf".to_string(), |v| format!("{v:?}"));
        for p in &self.points {
            let fcc = p.fcc.map_or_else(|| "inf".to_string(), |v| format!("{v:?}"));
            let beta = p.beta.map_or_else(|| "0.0".to_string(), |v| format!("{v:?}"));
            out += &format!("{},{fcc},{beta},{avg}\n", p.t);
        }
        out
    }
}

/// Relative slack allowed when testing `(1−σ)·avg ≥ fcc_t`; above the
/// `σ ≈ nγ/ρ` floor left by the slack shift.
pub const A_TOLERANCE: f64 = 1e-6;

/// Samples `t_max` hyperplane shores from the certificate one at a time and
/// records the restricted cover value after each. The LP is re-solved only
/// when a sample adds a cut not seen before.
pub fn trace(cert: &SdpCertificate, t_max: usize, seed: u64) -> Result<TraceSeries, PipelineError> {
    let g = &cert.graph;
    let n = g.n();
    if cert.z.iter().all(|v| *v == 0.0) {
        return Err(PipelineError::new("trace", GraphError::DegenerateScale("z")));
    }
    let sigma = quality(cert.rho, cert.mu, &cert.w, &cert.z, 0.0, None).map_err(stage("trace"))?.sigma;

    let gram = cert.r.transpose() * &cert.r;
    let norms: Vec<f64> = (0..n).map(|i| gram[(i, i)].sqrt()).collect();
    let unit = SymMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if norms[i] > 0.0 && norms[j] > 0.0 {
            gram[(i, j)] / (norms[i] * norms[j])
        } else {
            1.0
        }
    });
    let avg = avg_asymptotic(g, &unit, 1.0, &cert.z).map_err(stage("trace"))?.feasible();

    let mut rng = Rng::new(seed);
    let mut shores = ShoreSet::new();
    let mut seen = std::collections::HashSet::<Shore>::new();
    let mut points = Vec::with_capacity(t_max);
    let mut current: Option<CoverSolution> = None;
    let (mut f, mut a) = (None, None);
    let mut lp_solves = 0;
    for t in 1..=t_max {
        let s = crate::sampling::sample_hyperplane_shore(&cert.r, &mut rng);
        let fresh = seen.insert(s.canonical());
        shores.push(s, crate::sampling::ShoreTag::Hyperplane);
        if fresh {
            lp_solves += 1;
            let fresh = fcc_restricted(&shores, g, &cert.z).map_err(stage("trace"))?.feasible();
            // A cover over fewer shores stays feasible, so keep it if the re-solve rounds worse.
            current = match (current, fresh) {
                (Some(old), Some(new)) if old.value <= new.value => Some(old),
                (old, new) => new.or(old),
            };
        }
        let fcc = current.as_ref().map(|c| c.value);
        let beta = fcc.map(|v| (1.0 - sigma) * cert.mu / v);
        if fcc.is_some() && f.is_none() {
            f = Some(t);
        }
        if let (Some(v), Some(avg), None) = (fcc, avg, a) {
            if (1.0 - sigma) * avg >= v * (1.0 - A_TOLERANCE) {
                a = Some(t);
            }
        }
        points.push(TracePoint { t, fcc, beta });
    }
    Ok(TraceSeries { points, f, a, avg_asymptotic: avg, sigma, t_max, ln_m: ln_edges(g.m()), shores, lp_solves })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kneser_values() {
        assert_eq!(kneser_mc(4).unwrap(), 3);
        assert_eq!(kneser_mc(5).unwrap(), 12);
        assert!(kneser_mc(3).is_err());
    }

    #[test]
    fn bound_values() {
        let (raw, t) = sample_count_bound(7140, 1.0 / 32.0, 0.05).unwrap();
        assert!((raw / 7140f64.ln() - 16.1308).abs() <= 1e-4, "{}", raw / 7140f64.ln());
        assert_eq!(t, raw.ceil() as u64);
        let (big, _) = sample_count_bound(126_253, 1.0 / 16.0, 0.05).unwrap();
        assert!((big / 126_253f64.ln() - 10.51).abs() <= 0.01);
        let (raw1, _) = sample_count_bound(1, 0.25, 0.05).unwrap();
        let p = 0.5f64.sqrt() / std::f64::consts::PI;
        assert!((raw1 - 20f64.ln() / -(1.0 - p).ln()).abs() < 1e-12);
        assert!(sample_count_bound(10, 0.0, 0.05).is_err());
    }

    #[test]
    fn sample_floor() {
        assert_eq!(sample_count(128.0, 1), 8);
        assert_eq!(sample_count(128.0, 3), (128.0 * 3f64.ln()).ceil() as usize);
    }

    fn k3_config(eps: f64, seed: u64) -> PipelineConfig {
        let mut cfg = PipelineConfig::new("k3");
        cfg.scaler = ScaleMode::W1Norm;
        cfg.round_eps = eps;
        cfg.sampler_seed = seed;
        cfg
    }

    #[test]
    fn k3_run_certifies() {
        let g = WeightedGraph::complete(3);
        let out = run_graph(&g, None, &k3_config(1.0 / 64.0, 7), "k3").unwrap();
        let q = out.quality.unwrap();
        assert!((q.beta_mc - 8.0 / 9.0).abs() < 0.02, "{q:?}");
        assert!(q.beta_fcc.unwrap() <= q.beta_mc + 1e-12);
        let cert = out.certificate.unwrap();
        verify(&cert, &g).unwrap();
    }

    #[test]
    fn zero_instance_is_trivially_certified() {
        let g = WeightedGraph::complete(3).with_weights(vec![0.0; 3]).unwrap();
        let out = run_graph(&g, None, &k3_config(0.0, 1), "zero").unwrap();
        assert_eq!(out.certificate.as_ref().unwrap().beta, 1.0);
        verify(out.certificate.as_ref().unwrap(), &g).unwrap();
    }

    #[test]
    fn trace_k3_hits_a_with_f() {
        let g = WeightedGraph::complete(3);
        let out = run_graph(&g, None, &k3_config(0.0, 3), "k3").unwrap();
        let tr = trace(&out.sdp, 40, 11).unwrap();
        let mut distinct = std::collections::HashSet::new();
        let all_three = tr.shores.shores().iter().position(|s| {
            distinct.insert(s.canonical());
            distinct.len() == 3
        });
        assert_eq!(tr.a, all_three.map(|i| i + 1));
        assert!(tr.f.unwrap() <= tr.a.unwrap());
        assert!((tr.points.last().unwrap().fcc.unwrap() - 1.5).abs() < 1e-9);
        for w in tr.points.windows(2) {
            if let (Some(a), Some(b)) = (w[0].fcc, w[1].fcc) {
                assert!(b <= a);
            }
        }
        assert!(tr.lp_solves <= 4);
    }
}
