use std::path::Path;
use std::process::{Command, Output};

use cutcert::graph::{SymMatrix, WeightedGraph};
use cutcert::sanitize::{representation_sanitize, slack_sanitize, SdpCertificate, SLACK_GAMMA};
use cutcert::Encoding;

fn cutcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutcert")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const K3: &str = "3 3\n1 2 1.0\n1 3 1.0\n2 3 1.0\n";

fn k3_config(dir: &Path, extra: &str) -> String {
    let instance = write(dir, "k3.in", K3);
    let text = format!(
        "instance = {instance}\nscaler = w_1_norm\nsolver = admm_mc\ncoverer = simplex\nsampler = hyperplane\nround_eps = 0.015625\nsampler_seed = 5\n{extra}"
    );
    write(dir, "k3.cfg", &text)
}

#[test]
fn solve_run_appends_a_row_and_verify_accepts_the_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let beta = dir.path().join("k3.beta");
    let sdp = dir.path().join("k3.sdp");
    let extra = format!("output = {}\nbeta_certificate = {}\ncertificate = {}\n", report.display(), beta.display(), sdp.display());
    let cfg = k3_config(dir.path(), &extra);

    for _ in 0..2 {
        let out = cutcert(&["solve-run", &cfg]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).starts_with("k3.in,admm_mc,0.015625,128.0,5,"));
    }
    let csv = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("instance,solver,eps,C,seed,sigma"));

    let out = cutcert(&["verify", beta.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("beta = ") && text.contains("beta_tilde = "), "{text}");

    let out = cutcert(&["verify", beta.to_str().unwrap(), "--instance", &dir.path().join("k3.in").to_string_lossy()]);
    assert!(out.status.success());

    let out = cutcert(&["trace", sdp.to_str().unwrap(), "-t", "60", "-s", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("t,fcc_value_or_inf,beta_t,avg_asymptotic\n"));
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn from_file_replays_a_stored_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let sdp = dir.path().join("k3.sdp");
    let cfg = k3_config(dir.path(), &format!("certificate = {}\n", sdp.display()));
    assert!(cutcert(&["solve-run", &cfg]).status.success());
    let replay = write(
        dir.path(),
        "replay.cfg",
        &format!("instance = {}\nsolver = from_file\ncertificate = {}\nsampler_seed = 9\n", dir.path().join("k3.in").display(), sdp.display()),
    );
    let out = cutcert(&["solve-run", &replay]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains(",from_file,"));
}

#[test]
fn converters_write_native_files() {
    let dir = tempfile::tempdir().unwrap();
    let tsp = write(dir.path(), "x.tsp", "NAME: x\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\n3 0 4\nEOF\n");
    let out = cutcert(&["convert-tsp", &tsp]);
    assert!(out.status.success());
    let native = std::fs::read_to_string(dir.path().join("x.tsp.in")).unwrap();
    assert_eq!(native, "3 3\n1 2 5.0\n1 3 4.0\n2 3 3.0\n");

    let mm = write(dir.path(), "s.mtx", "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 1\n");
    assert!(cutcert(&["convert-mm", &mm]).status.success());
    let native = std::fs::read_to_string(dir.path().join("s.mtx.in")).unwrap();
    assert_eq!(native, "3 2\n1 2 1.0\n1 3 1.0\n");
}

#[test]
fn paired_writes_the_cover_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "k3.in", K3);
    let out = cutcert(&["paired", &inst]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("k3.in.paired")).unwrap();
    let g = cutcert::io::parse_instance(&text).unwrap();
    for z in g.weights() {
        assert!((z - 0.75).abs() < 1e-6, "{text}");
    }
}

#[test]
fn bound_and_kneser() {
    let out = cutcert(&["bound", "-m", "126253", "-e", "0.0625"]);
    assert!(stdout(&out).contains("T/ln m = 10.51"), "{}", stdout(&out));
    let out = cutcert(&["kneser", "5"]);
    assert_eq!(stdout(&out).trim(), "12");
    assert!(!cutcert(&["kneser", "3"]).status.success());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.in", "2 1\n2 1 1.0\n");
    let cfg = write(dir.path(), "bad.cfg", &format!("instance = {bad}\n"));
    assert_eq!(cutcert(&["solve-run", &cfg]).status.code(), Some(2));
    let typo = write(dir.path(), "typo.cfg", "instance = x\nsampler_c = 3\n");
    assert_eq!(cutcert(&["solve-run", &typo]).status.code(), Some(2));
    assert_eq!(cutcert(&["convert-mm", &bad]).status.code(), Some(2));

    let sdp = dir.path().join("k3.sdp");
    let cfg = k3_config(dir.path(), &format!("certificate = {}\n", sdp.display()));
    assert!(cutcert(&["solve-run", &cfg]).status.success());
    assert_eq!(cutcert(&["trace", sdp.to_str().unwrap(), "-t", "1"]).status.code(), Some(3));

    let g = WeightedGraph::complete(2);
    let slack = slack_sanitize(&[0.5, 0.5], &g, &[1.0], SLACK_GAMMA).unwrap();
    let y = SymMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
    let rep = representation_sanitize(&y, &g, &[1.0], 0.0).unwrap();
    let mut cert = SdpCertificate::new(&g, vec![1.0], vec![1.0], slack, rep).unwrap();
    cert.z[0] = 4.0;
    let tampered = dir.path().join("tampered.sdp");
    std::fs::write(&tampered, cert.to_bytes(Encoding::Binary)).unwrap();
    let k2 = write(dir.path(), "k2.in", "2 1\n1 2 1.0\n");
    let replay = write(dir.path(), "t.cfg", &format!("instance = {k2}\nsolver = from_file\ncertificate = {}\n", tampered.display()));
    assert_eq!(cutcert(&["solve-run", &replay]).status.code(), Some(4));
    assert_eq!(cutcert(&["trace", tampered.to_str().unwrap()]).status.code(), Some(4));
}
