use std::process::{Command, Output};

use sigma_closure::cli::report::Report;
use sigma_closure::cli::scan::read_csv;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigma-closure"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn closure_json_at_two() {
    let o = bin(&["closure", "--r", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rep = Report::from_json(&stdout(&o)).unwrap();
    assert_eq!((rep.ell, rep.j0, rep.j_prime), (3, 2, 5));
    assert_eq!(rep.r, "2");
    rep.check().unwrap();
    let d: Vec<_> = rep
        .intervals
        .iter()
        .map(|iv| format!("{}/{}", iv.density.num, iv.density.den))
        .collect();
    assert_eq!(d, ["1/3", "1/6", "1/2"]);
    assert_eq!(
        rep.intervals[1].hi.closed_form.as_deref(),
        Some("3/4*zeta(2)")
    );
}

#[test]
fn closure_non_integer_report_checks() {
    let o = bin(&["closure", "--r", "3.5", "--prec", "256"]);
    assert_eq!(o.status.code(), Some(0));
    let rep = Report::from_json(&stdout(&o)).unwrap();
    assert_eq!(rep.r, "3.5");
    assert!(rep.ell >= 3);
    assert!(rep.intervals.iter().all(|iv| iv.lo.closed_form.is_none()));
    rep.check().unwrap();
}

#[test]
fn closure_text_and_symbolic() {
    let o = bin(&["closure", "--r", "2", "--format", "text"]);
    let text = stdout(&o);
    assert!(text.contains("sigma(3^1) = 10/9"), "{text}");
    assert!(text.contains("density 1/2"));
    let o = bin(&["closure", "--r", "7/2", "--format", "symbolic"]);
    assert!(stdout(&o).starts_with("r = 7/2\n"));
}

#[test]
fn domain_and_argument_errors_exit_2() {
    for args in [
        &["closure", "--r", "1"][..],
        &["closure", "--r", "0.3"],
        &["closure", "--r", "x"],
        &["closure"],
        &["verify", "--r", "2", "--limit", "2000000"],
    ] {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn tiny_precision_cap_is_a_comparison_error() {
    // With no room to escalate, the first close call cannot be decided.
    let o = bin(&["closure", "--r", "4", "--prec", "8", "--max-prec", "8"]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sigma(") || err.contains("T_"), "{err}");
}

#[test]
fn scan_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let o = bin(&[
        "scan",
        "--r-min",
        "1.8",
        "--r-max",
        "2.2",
        "--step",
        "0.1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    let rs: Vec<_> = rows.iter().map(|r| r.r.as_str()).collect();
    assert_eq!(rs, ["1.8", "1.9", "2", "2.1", "2.2"]);
    assert_eq!(rows[0].ell, Some(1));
    assert_eq!(rows[0].endpoints, [0.0, 1.0]);
    assert_eq!(rows[2].densities, ["1/3", "1/6", "1/2"]);

    let pgm = dir.path().join("fig.pgm");
    let o = bin(&[
        "plot",
        "--scan",
        csv.to_str().unwrap(),
        "--width",
        "50",
        "--out",
        pgm.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let img = std::fs::read(&pgm).unwrap();
    assert!(img.starts_with(b"P5\n50 5\n255\n"));
    assert_eq!(img.len(), b"P5\n50 5\n255\n".len() + 250);

    let svg = dir.path().join("fig.svg");
    let o = bin(&[
        "plot",
        "--scan",
        csv.to_str().unwrap(),
        "--width",
        "400",
        "--height",
        "300",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let o = bin(&[
        "plot",
        "--scan",
        "/nonexistent/scan.csv",
        "--out",
        pgm.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn empty_scan_cannot_be_plotted() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "r,ell,endpoints,densities,error\n").unwrap();
    let out = dir.path().join("x.pgm");
    let o = bin(&[
        "plot",
        "--scan",
        csv.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn scan_row_matches_closure() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    bin(&[
        "scan",
        "--r-min",
        "2.5",
        "--r-max",
        "2.5001",
        "--step",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    let rep = Report::from_json(&stdout(&bin(&["closure", "--r", "2.5"]))).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].ell, Some(rep.ell));
    let d: Vec<_> = rep
        .intervals
        .iter()
        .map(|iv| format!("{}/{}", iv.density.num, iv.density.den))
        .collect();
    assert_eq!(rows[0].densities, d);
}

#[test]
fn verify_passes_and_sabotage_fails() {
    let o = bin(&["verify", "--r", "2", "--limit", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("PASS\n"));

    let o = bin(&["verify", "--r", "2", "--limit", "1"]);
    assert_eq!(o.status.code(), Some(0));

    let mut rep = Report::from_json(&stdout(&bin(&["closure", "--r", "2"]))).unwrap();
    rep.intervals[2].lo.expr = "1.3".into();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, rep.to_json()).unwrap();
    let o = bin(&[
        "verify",
        "--r",
        "2",
        "--limit",
        "1000",
        "--intervals-override",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn eta_bracket() {
    let o = bin(&["eta", "--tol", "1e-6"]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "scientific notation is not accepted"
    );
    let o = bin(&["eta", "--tol", "0.000001"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let inner = line
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("eta in [")
        .trim_end_matches(']');
    let (lo, hi) = inner.split_once(", ").unwrap();
    let (lo, hi): (f64, f64) = (lo.parse().unwrap(), hi.parse().unwrap());
    assert!(lo <= 1.8877909 && 1.8877909 <= hi && hi - lo <= 1e-6);
}
