use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dcsflow::cli::{RunReport, SurfaceDocument};
use dcsflow::curvature::{curvature_k, residual_inf};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn dcsflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcsflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(o: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    )
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_tetra() {
    let o = dcsflow(&["validate", &path(fixture("tetra_dcs1.json"))]);
    let t = text(&o);
    assert_eq!(o.status.code(), Some(0), "{t}");
    assert!(t.contains("N=4 |E|=6 |F|=4 chi=2"), "{t}");
    assert!(t.contains("chi(Sigma)=-2"), "{t}");
}

#[test]
fn validate_names_violated_constraint() {
    let o = dcsflow(&["validate", &path(fixture("tetra_dcs3_bad_eta.json"))]);
    let t = text(&o);
    assert_eq!(o.status.code(), Some(1), "{t}");
    assert!(t.contains("edges[0]") && t.contains("alpha_i*alpha_j"), "{t}");
}

#[test]
fn validate_reports_parse_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{\n  \"scheme\": \"DCS1\",\n  \"boundaries\": [,]\n}");
    let o = dcsflow(&["validate", &p]);
    let t = text(&o);
    assert_eq!(o.status.code(), Some(1), "{t}");
    assert!(t.contains("line 3"), "{t}");
}

#[test]
fn curvature_at_solution() {
    let o = dcsflow(&[
        "curvature",
        &path(fixture("tetra_dcs1.json")),
        &path(fixture("tetra_dcs1_solution.json")),
    ]);
    let t = text(&o);
    assert_eq!(o.status.code(), Some(0), "{t}");
    assert_eq!(t.matches("3.95087369077445").count(), 4, "{t}");
    assert!(t.contains("admissibility: admissible"));
}

#[test]
fn curvature_inadmissible_names_edge() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "u.json", r#"{"coords":"u","values":[-1.3,-1.3,-0.5,-0.5]}"#);
    let o = dcsflow(&["curvature", &path(fixture("tetra_dcs1.json")), &p]);
    let t = text(&o);
    assert_eq!(o.status.code(), Some(3), "{t}");
    assert!(t.contains("(0,1)"), "{t}");
    assert!(!t.contains("(0,2)"), "{t}");
}

#[test]
fn curvature_wrong_length() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "u.json", r#"{"coords":"u","values":[-1,-1,-1]}"#);
    let o = dcsflow(&["curvature", &path(fixture("tetra_dcs1.json")), &p]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
}

#[test]
fn flow_newton_writes_consistent_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let report = dir.path().join("report.json");
    let surface = path(fixture("tetra_dcs1.json"));
    let o = dcsflow(&[
        "flow",
        &surface,
        &path(fixture("tetra_target.json")),
        "--method",
        "newton",
        "--seed",
        "7",
        "--trace",
        trace.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));

    let rep: RunReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep.outcome, "CONVERGED");
    assert!(rep.steps <= 10);
    assert!(rep.u.iter().all(|x| (x + 1.0).abs() < 1e-8));

    let s = SurfaceDocument::load(Path::new(&surface)).unwrap().build().unwrap();
    let mut rd = csv::Reader::from_path(&trace).unwrap();
    let headers = rd.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["step", "t", "dt", "residual", "E", "C", "u_0", "u_1", "u_2", "u_3"]
    );
    let mut last = None;
    for rec in rd.records() {
        let rec = rec.unwrap();
        let v: Vec<f64> = rec.iter().map(|x| x.parse().unwrap()).collect();
        let u = &v[6..];
        let k = curvature_k(&s.cfg, &s.tri, u).unwrap();
        assert!((residual_inf(&k, &rep.kbar) - v[3]).abs() <= 1e-12);
        last = Some(v);
    }
    let last = last.unwrap();
    assert_eq!(last[0] as usize, rep.steps);
    assert_eq!(&last[6..], rep.u.as_slice());
    assert_eq!(last[3], rep.residual);
    assert_eq!(last[4], rep.energy_e);
}

#[test]
fn flow_rejects_zero_target() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "k.json", r#"{"kbar":[3.9,0,3.9,3.9]}"#);
    let o = dcsflow(&["flow", &path(fixture("tetra_dcs1.json")), &p]);
    let t = text(&o);
    assert_eq!(o.status.code(), Some(1), "{t}");
    assert!(t.contains("kbar[1]"), "{t}");
}

#[test]
fn flow_max_steps_exit_code() {
    let o = dcsflow(&[
        "flow",
        &path(fixture("tetra_dcs1.json")),
        &path(fixture("tetra_target.json")),
        "--method",
        "ricci",
        "--max-steps",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn flow_from_inadmissible_start_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "u.json", r#"{"coords":"u","values":[-1.3,-1.3,-0.5,-0.5]}"#);
    let o = dcsflow(&[
        "flow",
        &path(fixture("tetra_dcs1.json")),
        &path(fixture("tetra_target.json")),
        "--start",
        &p,
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o));
}

#[test]
fn flow_seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let t = dir.path().join(name);
        let o = dcsflow(&[
            "flow",
            &path(fixture("tetra_dcs1.json")),
            &path(fixture("tetra_target.json")),
            "--method",
            "calabi",
            "--seed",
            "11",
            "--trace",
            t.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        fs::read_to_string(t).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn check_fixture_passes() {
    for (s, u) in [
        ("tetra_dcs1.json", "tetra_dcs1_generic.json"),
        ("tetra_new1.json", "tetra_new1_solution.json"),
        ("tetra_mixed1.json", "tetra_mixed1_solution.json"),
        ("tetra_mixed2.json", "tetra_mixed2_solution.json"),
        ("tetra_mixed3.json", "tetra_mixed3_solution.json"),
    ] {
        let o = dcsflow(&["check", &path(fixture(s)), &path(fixture(u))]);
        assert_eq!(o.status.code(), Some(0), "{s}: {}", text(&o));
    }
}

#[test]
fn check_detects_corrupted_chart() {
    let o = dcsflow(&[
        "check",
        &path(fixture("tetra_dcs1.json")),
        &path(fixture("tetra_dcs1_generic.json")),
        "--corrupt-chart",
        "0.5",
    ]);
    let t = text(&o);
    assert_eq!(o.status.code(), Some(1), "{t}");
    assert!(t.contains("FAILED: symmetry residual"), "{t}");
}

#[test]
fn check_inadmissible_factors() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "u.json", r#"{"coords":"u","values":[-1.3,-1.3,-0.5,-0.5]}"#);
    let o = dcsflow(&["check", &path(fixture("tetra_dcs1.json")), &p]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o));
}
