//! Instance, Matrix Market, TSPLIB and configuration parsers, plus the CSV
//! report row.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use crate::error::ParseError;
use crate::graph::{ScaleMode, WeightedGraph};

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| err(line, format!("bad {what} '{tok}'")))
}

/// Native format: `n m`, then `m` lines `u v w` with `1 ≤ u < v ≤ n`.
pub fn parse_instance(text: &str) -> Result<WeightedGraph, ParseError> {
    let mut lines = content_lines(text);
    let (l0, header) = lines.next().ok_or_else(|| err(1, "empty instance"))?;
    let mut toks = header.split_whitespace();
    let n: usize = parse_num(toks.next(), l0, "vertex count")?;
    let m: usize = parse_num(toks.next(), l0, "edge count")?;
    if toks.next().is_some() {
        return Err(err(l0, "header must be 'n m'"));
    }
    let mut triples = Vec::with_capacity(m);
    for (ln, line) in lines {
        let mut toks = line.split_whitespace();
        let u: usize = parse_num(toks.next(), ln, "vertex")?;
        let v: usize = parse_num(toks.next(), ln, "vertex")?;
        let w: f64 = parse_num(toks.next(), ln, "weight")?;
        if toks.next().is_some() {
            return Err(err(ln, "edge line must be 'u v w'"));
        }
        if !(1 <= u && u < v && v <= n) {
            return Err(err(ln, format!("edge ({u}, {v}) needs 1 ≤ u < v ≤ {n}")));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(err(ln, format!("weight {w} must be finite and nonnegative")));
        }
        triples.push((u - 1, v - 1, w));
    }
    if triples.len() != m {
        return Err(ParseError::EdgeCount { expected: m, got: triples.len() });
    }
    Ok(WeightedGraph::new(n, triples)?)
}

/// Inverse of [`parse_instance`]; weights use the shortest round-tripping form.
pub fn write_instance(g: &WeightedGraph) -> String {
    g.to_string()
}

/// `coordinate {pattern|real} symmetric`; pattern entries get weight 1 and
/// diagonal entries are dropped.
pub fn parse_matrix_market(text: &str) -> Result<WeightedGraph, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, banner) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") || words.get(1).map(String::as_str) != Some("matrix") {
        return Err(err(1, "missing %%MatrixMarket matrix banner"));
    }
    let pattern = match (words.get(2).map(String::as_str), words.get(3).map(String::as_str), words.get(4).map(String::as_str)) {
        (Some("coordinate"), Some("pattern"), Some("symmetric")) => true,
        (Some("coordinate"), Some("real"), Some("symmetric")) => false,
        _ => return Err(ParseError::Unsupported(words[2..].join(" "))),
    };
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (ls, size) = body.next().ok_or_else(|| err(2, "missing size line"))?;
    let mut toks = size.split_whitespace();
    let rows: usize = parse_num(toks.next(), ls, "row count")?;
    let cols: usize = parse_num(toks.next(), ls, "column count")?;
    let nnz: usize = parse_num(toks.next(), ls, "entry count")?;
    if rows != cols {
        return Err(err(ls, "symmetric matrix must be square"));
    }
    let mut seen = HashSet::new();
    let mut triples = Vec::new();
    let mut count = 0;
    for (ln, line) in body {
        count += 1;
        let mut toks = line.split_whitespace();
        let i: usize = parse_num(toks.next(), ln, "row")?;
        let j: usize = parse_num(toks.next(), ln, "column")?;
        let w: f64 = if pattern { 1.0 } else { parse_num(toks.next(), ln, "value")? };
        if !(1..=rows).contains(&i) || !(1..=rows).contains(&j) {
            return Err(err(ln, format!("entry ({i}, {j}) out of range")));
        }
        if i == j {
            continue;
        }
        let (u, v) = (i.min(j), i.max(j));
        if !seen.insert((u, v)) {
            return Err(ParseError::Duplicate(u, v));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(err(ln, format!("weight {w} must be finite and nonnegative")));
        }
        triples.push((u - 1, v - 1, w));
    }
    if count != nnz {
        return Err(ParseError::EdgeCount { expected: nnz, got: count });
    }
    triples.sort_by_key(|&(u, v, _)| (u, v));
    Ok(WeightedGraph::new(rows, triples)?)
}

/// Constant used by the TSPLIB reference distance code.
#[allow(clippy::approx_constant)]
pub const TSPLIB_PI: f64 = 3.141592;
const RRR: f64 = 6378.388;

fn geo_radians(x: f64) -> f64 {
    let deg = x.trunc();
    let min = x - deg;
    TSPLIB_PI * (deg + 5.0 * min / 3.0) / 180.0
}

/// Great-circle TSPLIB `GEO` distance with truncated degrees.
pub fn geo_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat_a, lon_a) = (geo_radians(a.0), geo_radians(a.1));
    let (lat_b, lon_b) = (geo_radians(b.0), geo_radians(b.1));
    let q1 = (lon_a - lon_b).cos();
    let q2 = (lat_a - lat_b).cos();
    let q3 = (lat_a + lat_b).cos();
    let arg = (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).clamp(-1.0, 1.0);
    (RRR * arg.acos() + 1.0).trunc()
}

/// Nearest-integer Euclidean distance.
pub fn euc_2d_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).hypot(a.1 - b.1) + 0.5).floor()
}

enum Section {
    None,
    Coords,
    Weights,
}

/// Complete graph from a TSPLIB file with `EDGE_WEIGHT_TYPE` `GEO`, `EUC_2D`
/// or `EXPLICIT` (`FULL_MATRIX`, `UPPER_ROW`, `LOWER_DIAG_ROW`).
pub fn parse_tsplib(text: &str) -> Result<WeightedGraph, ParseError> {
    let mut spec = BTreeMap::new();
    let mut coords = BTreeMap::new();
    let mut numbers = Vec::new();
    let mut section = Section::None;
    for (ln, line) in content_lines(text) {
        if line == "EOF" {
            break;
        }
        let upper = line.to_ascii_uppercase();
        if upper.starts_with("NODE_COORD_SECTION") {
            section = Section::Coords;
            continue;
        }
        if upper.starts_with("EDGE_WEIGHT_SECTION") {
            section = Section::Weights;
            continue;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.trim().chars().all(|c| c.is_ascii_uppercase() || c == '_') {
                spec.insert(k.trim().to_string(), v.trim().to_string());
                section = Section::None;
                continue;
            }
        }
        if upper.ends_with("_SECTION") {
            section = Section::None;
            continue;
        }
        match section {
            Section::Coords => {
                let mut toks = line.split_whitespace();
                let id: usize = parse_num(toks.next(), ln, "node id")?;
                let x: f64 = parse_num(toks.next(), ln, "coordinate")?;
                let y: f64 = parse_num(toks.next(), ln, "coordinate")?;
                if coords.insert(id, (x, y)).is_some() {
                    return Err(err(ln, format!("node {id} listed twice")));
                }
            }
            Section::Weights => {
                for tok in line.split_whitespace() {
                    numbers.push(parse_num::<f64>(Some(tok), ln, "edge weight")?);
                }
            }
            Section::None => {
                let key = line.split_whitespace().next().unwrap_or_default();
                spec.insert(key.to_string(), String::new());
            }
        }
    }
    let n: usize = match spec.get("DIMENSION") {
        Some(d) => d.parse().map_err(|_| err(0, format!("bad DIMENSION '{d}'")))?,
        None => return Err(ParseError::MissingSection("DIMENSION")),
    };
    let kind = spec.get("EDGE_WEIGHT_TYPE").ok_or(ParseError::MissingSection("EDGE_WEIGHT_TYPE"))?;
    let mut dist = vec![vec![0.0; n]; n];
    match kind.as_str() {
        "GEO" | "EUC_2D" => {
            if coords.is_empty() {
                return Err(ParseError::MissingSection("NODE_COORD_SECTION"));
            }
            let pts: Vec<(f64, f64)> = coords.values().copied().collect();
            if pts.len() != n || coords.keys().copied().ne(1..=n) {
                return Err(err(0, format!("expected node ids 1..={n}")));
            }
            let f = if kind == "GEO" { geo_distance } else { euc_2d_distance };
            for i in 0..n {
                for j in i + 1..n {
                    dist[i][j] = f(pts[i], pts[j]);
                }
            }
        }
        "EXPLICIT" => {
            if numbers.is_empty() && n > 1 {
                return Err(ParseError::MissingSection("EDGE_WEIGHT_SECTION"));
            }
            let format = spec.get("EDGE_WEIGHT_FORMAT").map(String::as_str).unwrap_or("FULL_MATRIX");
            let cells: Vec<(usize, usize)> = match format {
                "FULL_MATRIX" => (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect(),
                "UPPER_ROW" => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
                "LOWER_DIAG_ROW" => (0..n).flat_map(|i| (0..=i).map(move |j| (j, i))).collect(),
                other => return Err(ParseError::Unsupported(format!("EDGE_WEIGHT_FORMAT {other}"))),
            };
            if cells.len() != numbers.len() {
                return Err(ParseError::EdgeCount { expected: cells.len(), got: numbers.len() });
            }
            for (&(i, j), &d) in cells.iter().zip(&numbers) {
                if i < j {
                    dist[i][j] = d;
                }
            }
        }
        other => return Err(ParseError::Unsupported(format!("EDGE_WEIGHT_TYPE {other}"))),
    }
    let mut triples = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let d = dist[i][j];
            if !(d.is_finite() && d >= 0.0) {
                return Err(err(0, format!("distance {d} between {} and {}", i + 1, j + 1)));
            }
            triples.push((i, j, d));
        }
    }
    Ok(WeightedGraph::new(n, triples)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMode {
    AdmmMc,
    AdmmFcc,
    FromFile,
}

impl SolverMode {
    pub fn name(self) -> &'static str {
        match self {
            SolverMode::AdmmMc => "admm_mc",
            SolverMode::AdmmFcc => "admm_fcc",
            SolverMode::FromFile => "from_file",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverer {
    Simplex,
    AvgScale,
    StoreOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Presampler {
    Null,
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub instance: PathBuf,
    pub scaler: ScaleMode,
    pub solver: SolverMode,
    pub coverer: Coverer,
    pub presampler: Presampler,
    pub eps_rel: f64,
    pub eps_abs: f64,
    pub round_eps: f64,
    pub rank_cutoff: f64,
    pub sampler_c: f64,
    pub sampler_seed: u64,
    pub presampler_q: f64,
    /// Where `from_file` reads, and every other mode writes, the SDP certificate.
    pub certificate: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub beta_certificate: Option<PathBuf>,
    /// Cover demands for `admm_fcc`; one value per edge, `1` when absent.
    pub demands: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(instance: impl Into<PathBuf>) -> Self {
        Self {
            instance: instance.into(),
            scaler: ScaleMode::None,
            solver: SolverMode::AdmmMc,
            coverer: Coverer::Simplex,
            presampler: Presampler::Null,
            eps_rel: 1e-4,
            eps_abs: 1e-4,
            round_eps: 0.0,
            rank_cutoff: 1e-8,
            sampler_c: 128.0,
            sampler_seed: 0,
            presampler_q: 0.0,
            certificate: None,
            output: None,
            beta_certificate: None,
            demands: None,
        }
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        let open_unit = |key: &'static str, v: f64| {
            if v > 0.0 && v < 1.0 { Ok(()) } else { Err(ParseError::Range { key, value: v.to_string() }) }
        };
        open_unit("eps_rel", self.eps_rel)?;
        open_unit("eps_abs", self.eps_abs)?;
        open_unit("rank_cutoff", self.rank_cutoff)?;
        if !(0.0..1.0).contains(&self.round_eps) {
            return Err(ParseError::Range { key: "round_eps", value: self.round_eps.to_string() });
        }
        if !(self.sampler_c > 0.0 && self.sampler_c.is_finite()) {
            return Err(ParseError::Range { key: "sampler_C", value: self.sampler_c.to_string() });
        }
        if !(self.presampler_q >= 0.0 && self.presampler_q <= self.sampler_c) {
            return Err(ParseError::Range { key: "presampler_Q", value: self.presampler_q.to_string() });
        }
        if self.solver == SolverMode::FromFile && self.certificate.is_none() {
            return Err(ParseError::Missing("certificate"));
        }
        Ok(())
    }

    /// `key = value` lines in canonical key order.
    pub fn to_text(&self) -> String {
        let mut out = format!("instance = {}\n", self.instance.display());
        out += &format!("scaler = {}\n", self.scaler.name());
        out += &format!("solver = {}\n", self.solver.name());
        out += &format!(
            "coverer = {}\n",
            match self.coverer {
                Coverer::Simplex => "simplex",
                Coverer::AvgScale => "avg_scale",
                Coverer::StoreOnly => "store_only",
            }
        );
        out += "sampler = hyperplane\n";
        out += &format!("presampler = {}\n", if self.presampler == Presampler::Uniform { "uniform" } else { "null" });
        out += &format!("eps_rel = {:?}\neps_abs = {:?}\n", self.eps_rel, self.eps_abs);
        out += &format!("round_eps = {:?}\nrank_cutoff = {:?}\n", self.round_eps, self.rank_cutoff);
        out += &format!("sampler_C = {:?}\nsampler_seed = {}\npresampler_Q = {:?}\n", self.sampler_c, self.sampler_seed, self.presampler_q);
        for (key, path) in [
            ("certificate", &self.certificate),
            ("output", &self.output),
            ("beta_certificate", &self.beta_certificate),
            ("demands", &self.demands),
        ] {
            if let Some(p) = path {
                out += &format!("{key} = {}\n", p.display());
            }
        }
        out
    }
}

/// `key = value` lines with `#` comments. Keys `scs_eps_rel`, `scs_eps_abs`
/// and `scs_pert_eps` are accepted as aliases; solver names `nu_scs` and
/// `scs` mean `admm_mc`.
pub fn parse_config(text: &str) -> Result<PipelineConfig, ParseError> {
    let mut cfg = PipelineConfig::new("");
    let mut instance = None;
    let mut seen = HashSet::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| err(ln, "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        let canonical = match key {
            "scs_eps_rel" => "eps_rel",
            "scs_eps_abs" => "eps_abs",
            "scs_pert_eps" => "pert_eps",
            "coverer" | "eps_rel" | "eps_abs" | "round_eps" | "rank_cutoff" | "sampler_C" | "sampler_seed" | "presampler_Q" | "instance"
            | "scaler" | "solver" | "sampler" | "presampler" | "certificate" | "output" | "beta_certificate" | "demands" => key,
            _ => return Err(ParseError::UnknownKey(key.to_string())),
        };
        if !seen.insert(canonical) {
            return Err(err(ln, format!("'{key}' given twice")));
        }
        let bad = || ParseError::Value { key: key.to_string(), value: value.to_string() };
        let float = || value.parse::<f64>().map_err(|_| bad());
        match canonical {
            "instance" => instance = Some(PathBuf::from(value)),
            "certificate" => cfg.certificate = Some(PathBuf::from(value)),
            "output" => cfg.output = Some(PathBuf::from(value)),
            "beta_certificate" => cfg.beta_certificate = Some(PathBuf::from(value)),
            "demands" => cfg.demands = Some(PathBuf::from(value)),
            "scaler" => {
                cfg.scaler = match value {
                    "w_1_norm" => ScaleMode::W1Norm,
                    "z_inf_norm" => ScaleMode::ZInfNorm,
                    "none" | "null" => ScaleMode::None,
                    _ => return Err(bad()),
                }
            }
            "solver" => {
                cfg.solver = match value {
                    "admm_mc" | "nu_scs" | "scs" => SolverMode::AdmmMc,
                    "admm_fcc" => SolverMode::AdmmFcc,
                    "from_file" => SolverMode::FromFile,
                    _ => return Err(bad()),
                }
            }
            "coverer" => {
                cfg.coverer = match value {
                    "simplex" | "gurobi" => Coverer::Simplex,
                    "avg_scale" => Coverer::AvgScale,
                    "store_only" => Coverer::StoreOnly,
                    _ => return Err(bad()),
                }
            }
            "sampler" => {
                if value != "hyperplane" {
                    return Err(bad());
                }
            }
            "presampler" => {
                cfg.presampler = match value {
                    "null" => Presampler::Null,
                    "uniform" => Presampler::Uniform,
                    _ => return Err(bad()),
                }
            }
            "eps_rel" => cfg.eps_rel = float()?,
            "eps_abs" => cfg.eps_abs = float()?,
            "pert_eps" => {
                if float()? != 0.0 {
                    return Err(ParseError::Range { key: "scs_pert_eps", value: value.to_string() });
                }
            }
            "round_eps" => cfg.round_eps = float()?,
            "rank_cutoff" => cfg.rank_cutoff = float()?,
            "sampler_C" => cfg.sampler_c = float()?,
            "presampler_Q" => cfg.presampler_q = float()?,
            "sampler_seed" => cfg.sampler_seed = value.parse().map_err(|_| bad())?,
            _ => unreachable!(),
        }
    }
    cfg.instance = instance.ok_or(ParseError::Missing("instance"))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Column order of [`ReportRow::to_csv`].
pub const REPORT_HEADER: &str = "instance,solver,eps,C,seed,sigma,beta_mc,beta_fcc,rli,tau,t_sdp_s,t_sample_s,t_lp_s,t_total_s";

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub instance: String,
    pub solver: String,
    pub eps: f64,
    pub c: f64,
    pub seed: u64,
    pub sigma: f64,
    pub beta_mc: Option<f64>,
    pub beta_fcc: Option<f64>,
    pub rli: bool,
    pub tau: f64,
    pub t_sdp_s: f64,
    pub t_sample_s: f64,
    pub t_lp_s: f64,
    pub t_total_s: f64,
}

impl ReportRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:?}"));
        format!(
            "{},{},{:?},{:?},{},{:?},{},{},{},{:?},{:.6},{:.6},{:.6},{:.6}",
            csv_field(&self.instance),
            csv_field(&self.solver),
            self.eps,
            self.c,
            self.seed,
            self.sigma,
            opt(self.beta_mc),
            opt(self.beta_fcc),
            self.rli as u8,
            self.tau,
            self.t_sdp_s,
            self.t_sample_s,
            self.t_lp_s,
            self.t_total_s
        )
    }

    /// The row without its four timing columns.
    pub fn without_timings(&self) -> String {
        let row = self.to_csv();
        row.rsplitn(5, ',').last().unwrap_or_default().to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One value per line; blank lines and `#` comments ignored.
pub fn parse_edge_values(text: &str, m: usize) -> Result<Vec<f64>, ParseError> {
    let mut out = Vec::with_capacity(m);
    for (ln, line) in content_lines(text) {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = parse_num(Some(line), ln, "edge value")?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(err(ln, format!("value {v} must be finite and nonnegative")));
        }
        out.push(v);
    }
    if out.len() != m {
        return Err(ParseError::EdgeCount { expected: m, got: out.len() });
    }
    Ok(out)
}
