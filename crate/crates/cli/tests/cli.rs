use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture_dir() -> PathBuf {
    manifest_dir().join("tests/fixtures/seed42")
}

fn glsn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glsn"))
        .args(args)
        .env("GLSN_THREADS", "2")
        .output()
        .expect("spawn glsn")
}

fn ok(args: &[&str]) -> Output {
    let out = glsn(args);
    assert!(
        out.status.success(),
        "glsn {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn err(args: &[&str]) -> String {
    let out = glsn(args);
    assert!(!out.status.success(), "glsn {args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a CSV output with the header comment removed.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(
        text.starts_with("# glsn "),
        "{} lacks a provenance header",
        path.display()
    );
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .from_reader(text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> Vec<String> {
    let i = table[0].iter().position(|h| h == name).unwrap();
    table[1..].iter().map(|r| r[i].clone()).collect()
}

#[test]
fn fixture_regenerates_byte_identically() {
    let tmp = TempDir::new().unwrap();
    ok(&["gen-fixture", "--seed", "42", "--out", s(tmp.path())]);
    for entry in fs::read_dir(fixture_dir()).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap();
        assert_eq!(
            fs::read(&p).unwrap(),
            fs::read(tmp.path().join(name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn seeds_give_different_datasets() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["gen-fixture", "--seed", "1", "--out", s(&a)]);
    ok(&["gen-fixture", "--seed", "2", "--out", s(&b)]);
    assert_ne!(
        fs::read(a.join("routes.csv")).unwrap(),
        fs::read(b.join("routes.csv")).unwrap()
    );
}

#[test]
fn single_country_fixture_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let msg = err(&["gen-fixture", "--n-countries", "1", "--out", s(tmp.path())]);
    assert!(msg.contains("at least 2 countries"), "{msg}");
    err(&["gen-fixture", "--n-countries", "0", "--out", s(tmp.path())]);
}

#[test]
fn build_reports_fixture_size() {
    let tmp = TempDir::new().unwrap();
    ok(&[
        "build",
        "--data",
        s(&fixture_dir()),
        "--weighting",
        "none,cap_n1",
        "--out",
        s(tmp.path()),
    ]);
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["nodes"], 30);
    assert_eq!(stats["edges"], 90);
    assert_eq!(stats["provenance"]["tool"], "glsn");
    let none = rows(&tmp.path().join("edges_none.csv"));
    let cap = rows(&tmp.path().join("edges_cap_n1.csv"));
    assert_eq!(none.len(), 91);
    assert_eq!(column(&none, "port_u"), column(&cap, "port_u"));
}

#[test]
fn capacity_scheme_without_capacities_names_the_scheme() {
    let tmp = TempDir::new().unwrap();
    let f = fixture_dir();
    let msg = err(&[
        "build",
        "--ports",
        s(&f.join("ports.csv")),
        "--routes",
        s(&f.join("routes.csv")),
        "--weighting",
        "cap_n1",
        "--out",
        s(tmp.path()),
    ]);
    assert!(msg.contains("cap_n1"), "{msg}");
}

#[test]
fn empty_route_file_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let routes = tmp.path().join("routes.csv");
    fs::write(&routes, "route_id,seq,port_id\n").unwrap();
    let msg = err(&[
        "build",
        "--ports",
        s(&fixture_dir().join("ports.csv")),
        "--routes",
        s(&routes),
        "--out",
        s(&tmp.path().join("out")),
    ]);
    assert!(msg.contains("no retained routes"), "{msg}");
}

#[test]
fn parse_errors_carry_file_and_line() {
    let tmp = TempDir::new().unwrap();
    let routes = tmp.path().join("routes.csv");
    fs::write(&routes, "route_id,seq,port_id\nR1,1,P01\nR1,x,P02\n").unwrap();
    let msg = err(&[
        "build",
        "--ports",
        s(&fixture_dir().join("ports.csv")),
        "--routes",
        s(&routes),
        "--out",
        s(&tmp.path().join("out")),
    ]);
    assert!(msg.contains("routes.csv") && msg.contains("line 3"), "{msg}");
}

fn two_country_world(dir: &Path, extra_route: Option<&str>) {
    fs::write(
        dir.join("ports.csv"),
        "port_id,name,country_code\nA1,a,AAA\nB1,b,BBB\nA2,c,AAA\n",
    )
    .unwrap();
    let mut routes = "route_id,seq,port_id\nR1,1,A1\nR1,2,B1\n".to_string();
    if let Some(r) = extra_route {
        routes.push_str(r);
    }
    fs::write(dir.join("routes.csv"), routes).unwrap();
}

#[test]
fn two_countries_one_edge() {
    let tmp = TempDir::new().unwrap();
    two_country_world(tmp.path(), None);
    let out = tmp.path().join("out");
    ok(&[
        "indices",
        "--data",
        s(tmp.path()),
        "--lmax",
        "2,3,4,5",
        "--out",
        s(&out),
    ]);
    let t = rows(&out.join("indices.csv"));
    for name in ["gb_l2", "gb_l3", "gb_l4", "gb_l5"] {
        assert!(column(&t, name).iter().all(|v| v == "0"), "{name}");
    }
    assert_eq!(column(&t, "gc"), vec!["1", "1"]);
}

#[test]
fn domestic_route_warns_or_fails_under_strict() {
    let tmp = TempDir::new().unwrap();
    two_country_world(tmp.path(), Some("R2,1,A1\nR2,2,A2\n"));
    let out = tmp.path().join("out");
    let o = ok(&["indices", "--data", s(tmp.path()), "--out", s(&out)]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("route R2 dropped: domestic"));
    let msg = err(&["indices", "--data", s(tmp.path()), "--strict", "--out", s(&out)]);
    assert!(msg.contains("R2"), "{msg}");
}

#[test]
fn json_routes_are_accepted() {
    let tmp = TempDir::new().unwrap();
    two_country_world(tmp.path(), None);
    let json = tmp.path().join("routes.json");
    fs::write(
        &json,
        r#"[{"route_id": "R1", "capacity_teu": 800, "ports": ["A1", "B1", "A2"]}]"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    ok(&[
        "build",
        "--ports",
        s(&tmp.path().join("ports.csv")),
        "--routes",
        s(&json),
        "--weighting",
        "cap_pairs",
        "--out",
        s(&out),
    ]);
    let edges = rows(&out.join("edges_cap_pairs.csv"));
    assert_eq!(column(&edges, "weight"), vec!["266.6666666666667"; 3]);
}

#[test]
fn regress_fits_fifteen_subsets() {
    let tmp = TempDir::new().unwrap();
    ok(&["regress", "--data", s(&fixture_dir()), "--out", s(tmp.path())]);
    let t = rows(&tmp.path().join("regression_report.csv"));
    assert_eq!(t.len(), 16);
    assert_eq!(t[0], vec!["variables", "adjusted_r2", "aic", "max_vif", "admissible"]);
    let coefs = rows(&tmp.path().join("coefficients.csv"));
    assert_eq!(coefs[1][0], "(intercept)");
    assert!(fs::read_to_string(tmp.path().join("summary.txt"))
        .unwrap()
        .contains("verdict:"));
}

#[test]
fn every_dependent_runs_where_data_allow() {
    let tmp = TempDir::new().unwrap();
    for dep in ["trade", "export", "import", "net_export", "gdp"] {
        ok(&[
            "regress",
            "--data",
            s(&fixture_dir()),
            "--dependent",
            dep,
            "--out",
            s(tmp.path()),
        ]);
    }
    ok(&[
        "regress",
        "--data",
        s(&fixture_dir()),
        "--log-response",
        "--out",
        s(tmp.path()),
    ]);
    ok(&[
        "regress",
        "--data",
        s(&fixture_dir()),
        "--raw",
        "--vif-threshold",
        "3.3",
        "--out",
        s(tmp.path()),
    ]);
    // Five candidates need seven countries; the fixture has six.
    let msg = err(&[
        "regress",
        "--data",
        s(&fixture_dir()),
        "--dependent",
        "trade_change",
        "--out",
        s(tmp.path()),
    ]);
    assert!(msg.contains("at least 7 countries"), "{msg}");
}

#[test]
fn planted_regressors_are_selected_on_a_larger_fixture() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    ok(&[
        "gen-fixture",
        "--seed",
        "42",
        "--ports",
        "200",
        "--n-countries",
        "40",
        "--n-routes",
        "60",
        "--out",
        s(&data),
    ]);
    let truth: serde_json::Value = serde_json::from_str(&fs::read_to_string(data.join("truth.json")).unwrap()).unwrap();
    let planted: Vec<&str> = truth["trade_value_usd"]["planted_regressors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let out = tmp.path().join("out");
    ok(&["regress", "--data", s(&data), "--out", s(&out)]);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(
        summary.contains(&format!("verdict: {} ", planted.join(";"))),
        "{summary}"
    );

    let out = tmp.path().join("change");
    ok(&[
        "regress",
        "--data",
        s(&data),
        "--dependent",
        "trade_change",
        "--out",
        s(&out),
    ]);
    assert_eq!(rows(&out.join("regression_report.csv")).len(), 32);
}

#[test]
fn gravity_reports_one_family() {
    let tmp = TempDir::new().unwrap();
    ok(&[
        "gravity",
        "--data",
        s(&fixture_dir()),
        "--variant",
        "+GC",
        "--out",
        s(tmp.path()),
    ]);
    let t = rows(&tmp.path().join("gravity_report.csv"));
    assert_eq!(t[0], vec!["variant", "adjusted_r2", "aic", "max_vif"]);
    assert_eq!(column(&t, "variant"), vec!["base", "lsbci", "gc", "lsbci_gc"]);
    let preds = rows(&tmp.path().join("pair_predictions.csv"));
    assert_eq!(preds[0], vec!["country_i", "country_j", "ln_btv_emp", "ln_btv_pred"]);
}

#[test]
fn noiseless_fixture_fits_base_exactly() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    ok(&["gen-fixture", "--noise", "0", "--out", s(&data)]);
    let out = tmp.path().join("out");
    ok(&["gravity", "--data", s(&data), "--out", s(&out)]);
    let t = rows(&out.join("gravity_report.csv"));
    let base: f64 = column(&t, "adjusted_r2")[0].parse().unwrap();
    assert!((base - 1.0).abs() < 1e-8, "{base}");
}

#[test]
fn bad_options_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let d = fixture_dir();
    for args in [
        vec!["regress", "--vif-threshold", "1"],
        vec!["gravity", "--coverage", "1.5"],
        vec!["indices", "--lmax", "1"],
        vec!["indices", "--weighting", "heavy"],
        vec!["gravity", "--variant", "nope"],
    ] {
        let mut a = args.clone();
        a.extend(["--data", s(&d), "--out", s(tmp.path())]);
        err(&a);
    }
    let out = Command::new(env!("CARGO_BIN_EXE_glsn"))
        .args(["indices", "--data", s(&d), "--out", s(tmp.path())])
        .env("GLSN_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn report_matches_golden_files() {
    let tmp = TempDir::new().unwrap();
    ok(&["report", "--data", s(&fixture_dir()), "--out", s(tmp.path())]);
    let golden = manifest_dir().join("tests/golden/seed42");
    let mut names: Vec<_> = fs::read_dir(&golden).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let mut produced: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    produced.sort();
    assert_eq!(names, produced);
    for name in names {
        assert_eq!(
            fs::read(golden.join(&name)).unwrap(),
            fs::read(tmp.path().join(&name)).unwrap(),
            "{name:?} differs from golden"
        );
    }
}
