use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use cutcert::certify::{load_beta_certificate, make_paired_instance, verify, PAIRING_TOLERANCE};
use cutcert::conic::SolverSettings;
use cutcert::error::{CertFileError, CertifyError, ParseError, PipelineError, SanitizeError};
use cutcert::graph::kneser_graph;
use cutcert::io::{parse_instance, parse_matrix_market, parse_tsplib, write_instance, REPORT_HEADER};
use cutcert::pipeline::{kneser_mc, run_file, sample_count_bound, trace};
use cutcert::sanitize::load_certificate;

const EXIT_OTHER: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_RLI: u8 = 3;
const EXIT_SANITIZE: u8 = 4;

#[derive(Parser)]
#[command(name = "cutcert", version, about = "Certified max-cut and fractional cut-cover bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and print its report row.
    SolveRun {
        config: PathBuf,
        /// Print the CSV header before the row.
        #[arg(long)]
        header: bool,
    },
    /// Sample shores one at a time from a stored SDP certificate.
    Trace {
        certificate: PathBuf,
        #[arg(short = 't', long, default_value_t = 1000)]
        samples: usize,
        #[arg(short, long, default_value_t = 0)]
        seed: u64,
        /// Write the per-sample CSV here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Re-check a β-certificate and print β and β̃.
    Verify {
        certificate: PathBuf,
        /// Check against this instance instead of the graph stored in the certificate.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Convert Matrix Market files to `<file>.in`.
    ConvertMm { files: Vec<PathBuf> },
    /// Convert TSPLIB files to `<file>.in`.
    ConvertTsp { files: Vec<PathBuf> },
    /// Write the cover instance paired with a max-cut instance.
    Paired {
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        gamma: f64,
        /// Defaults to `<instance>.paired`.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Samples needed to cut every edge with probability 1 − target.
    Bound {
        #[arg(short, long)]
        m: usize,
        #[arg(short, long)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        target: f64,
    },
    /// Best Poljak–Tuza cut of Kn(n, 2).
    Kneser {
        n: usize,
        /// Also write the graph in native format.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(p) = cause.downcast_ref::<PipelineError>() {
            if p.is_parse() {
                return EXIT_PARSE;
            }
            if p.is_sanitize() {
                return EXIT_SANITIZE;
            }
        }
        if cause.is::<ParseError>() {
            return EXIT_PARSE;
        }
        if cause.is::<SanitizeError>() || matches!(cause.downcast_ref::<CertFileError>(), Some(CertFileError::Invalid(_))) {
            return EXIT_SANITIZE;
        }
        if matches!(cause.downcast_ref::<CertifyError>(), Some(CertifyError::Sanitize(_))) {
            return EXIT_SANITIZE;
        }
    }
    EXIT_OTHER
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(ParseError::Io).with_context(|| format!("reading {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::SolveRun { config, header } => {
            let out = run_file(&config)?;
            if header {
                println!("{REPORT_HEADER}");
            }
            println!("{}", out.report.to_csv());
            if out.is_rli() {
                eprintln!("restricted LP infeasible: {} positive-demand edges uncovered", out.uncovered.len());
                return Ok(EXIT_RLI);
            }
        }
        Command::Trace { certificate, samples, seed, out } => {
            let cert = load_certificate(&certificate).with_context(|| format!("loading {}", certificate.display()))?;
            let series = trace(&cert, samples, seed)?;
            let fmt = |v: Option<usize>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
            eprintln!(
                "F = {}  A = {}  F~ = {:.4}  A~ = {:.4}  avg = {}",
                fmt(series.f),
                fmt(series.a),
                series.f_tilde(),
                series.a_tilde(),
                series.avg_asymptotic.map_or_else(|| "inf".to_string(), |v| format!("{v}"))
            );
            match out {
                Some(path) => std::fs::write(&path, series.to_csv()).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{}", series.to_csv()),
            }
            if series.f.is_none() {
                return Ok(EXIT_RLI);
            }
        }
        Command::Verify { certificate, instance } => {
            let cert = load_beta_certificate(&certificate).with_context(|| format!("loading {}", certificate.display()))?;
            let g = match instance {
                Some(path) => parse_instance(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?,
                None => cert.sdp.graph.clone(),
            };
            let (beta, beta_tilde) = verify(&cert, &g)?;
            println!("beta = {beta:?}");
            println!("beta_tilde = {beta_tilde:?}");
        }
        Command::ConvertMm { files } => convert(&files, parse_matrix_market)?,
        Command::ConvertTsp { files } => convert(&files, parse_tsplib)?,
        Command::Paired { instance, gamma, out } => {
            let g = parse_instance(&read(&instance)?).with_context(|| format!("parsing {}", instance.display()))?;
            let paired = make_paired_instance(&g, g.weights(), gamma, &SolverSettings::with_tolerance(PAIRING_TOLERANCE))?;
            let target = out.unwrap_or_else(|| with_suffix(&instance, ".paired"));
            let h = g.with_weights(paired.z)?;
            std::fs::write(&target, write_instance(&h)).with_context(|| format!("writing {}", target.display()))?;
            println!("rho = {:?}", paired.rho);
            println!("mu = {:?}", paired.mu);
            println!("wrote {}", target.display());
        }
        Command::Bound { m, eps, target } => {
            let (raw, t) = sample_count_bound(m, eps, target)?;
            println!("T = {t}");
            println!("raw = {raw:?}");
            if m > 1 {
                println!("T/ln m = {:.4}", raw / (m as f64).ln());
            }
        }
        Command::Kneser { n, write } => {
            let value = kneser_mc(n)?;
            println!("{value}");
            if let Some(path) = write {
                std::fs::write(&path, write_instance(&kneser_graph(n))).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(0)
}

fn convert(files: &[PathBuf], parse: fn(&str) -> Result<cutcert::graph::WeightedGraph, ParseError>) -> Result<()> {
    if files.is_empty() {
        bail!("no input files");
    }
    for file in files {
        let g = parse(&read(file)?).with_context(|| format!("parsing {}", file.display()))?;
        let target = with_suffix(file, ".in");
        std::fs::write(&target, write_instance(&g)).with_context(|| format!("writing {}", target.display()))?;
        println!("{} -> {} ({} vertices, {} edges)", file.display(), target.display(), g.n(), g.m());
    }
    Ok(())
}
