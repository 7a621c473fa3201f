use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const THREE_CYCLE: &str =
    r#"{"type":"finite","map":[1,2,0],"cycle_weights":["1/3"],"f":["3","-1","-1"],"lambda":["0"]}"#;
const GOLDEN: &str = r#"{"type":"rotation","alpha":"golden","x0":"0","f":{"kind":"cosine"}}"#;

fn ergo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergo"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup(files: &[(&str, &str)]) -> TempDir {
    let dir = TempDir::new().unwrap();
    for (name, body) in files {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn read(dir: &TempDir, name: &str) -> String {
    std::fs::read_to_string(dir.path().join(name)).unwrap()
}

fn json(dir: &TempDir, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

fn stripped_report(dir: &TempDir, name: &str) -> serde_json::Value {
    let mut v = json(dir, name);
    v.as_object_mut().unwrap().remove("duration_ms");
    v
}

#[test]
fn verify_maximal_reports_every_horizon() {
    let dir = setup(&[("sys.json", THREE_CYCLE)]);
    let out = ergo(
        dir.path(),
        &[
            "verify-maximal",
            "--system",
            "sys.json",
            "--n-range",
            "1..4",
            "--out",
            "r.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir, "r.json");
    assert_eq!(r["command"][0], "ergo");
    assert_eq!(r["summary"]["failed"], 0);
    let cases = r["cases"].as_array().unwrap();
    let integrals: Vec<&str> = cases[..4].iter().map(|c| c["integral"].as_str().unwrap()).collect();
    // E_1 = {0}, E_2 = {0, 2}, E_N = X from N = 3 on
    assert_eq!(integrals, ["1", "2/3", "1/3", "1/3"]);
    assert!(cases.iter().any(|c| c["id"] == "nested" && c["passed"] == true));
    assert!(r["duration_ms"].is_u64());
}

#[test]
fn verify_maximal_lambda_grid_and_constant() {
    let dir = setup(&[("sys.json", THREE_CYCLE)]);
    let out = ergo(
        dir.path(),
        &[
            "verify-maximal",
            "--system",
            "sys.json",
            "--lambda",
            "grid",
            "--n-range",
            "1..3",
            "--out",
            "g.json",
        ],
    );
    assert!(out.status.success());
    assert!(json(&dir, "g.json")["summary"]["cases"].as_u64().unwrap() >= 15);

    let out = ergo(
        dir.path(),
        &[
            "verify-maximal",
            "--system",
            "sys.json",
            "--lambda",
            "1/2",
            "--n-range",
            "3..3",
            "--out",
            "c.json",
        ],
    );
    assert!(out.status.success());
    let c = json(&dir, "c.json");
    assert_eq!(c["cases"][0]["lambda"][0], "1/2");
}

#[test]
fn decompose_then_verify_round_trip() {
    let dir = setup(&[("sys.json", THREE_CYCLE)]);
    let out = ergo(
        dir.path(),
        &[
            "decompose",
            "--system",
            "sys.json",
            "--x",
            "0",
            "--N",
            "3",
            "--m",
            "8",
            "--emit",
            "cert.json",
        ],
    );
    assert!(out.status.success());
    let cert = json(&dir, "cert.json");
    assert_eq!(cert["blocks"], serde_json::json!([[0, 1], [1, 3], [4, 3]]));
    assert_eq!(cert["tail_start"], 7);
    assert_eq!(cert["total_sum"], "4");
    assert_eq!(cert["lower_bound"], "-9");

    let out = ergo(
        dir.path(),
        &["verify-cert", "--cert", "cert.json", "--system", "sys.json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corrupted_certificate_names_clause_a() {
    let corrupted =
        r#"{"x":0,"m":8,"N":3,"blocks":[[0,1],[1,1],[2,2],[4,3]],"tail_start":7,"total_sum":"4","lower_bound":"-9"}"#;
    let dir = setup(&[("sys.json", THREE_CYCLE), ("bad.json", corrupted)]);
    let out = ergo(
        dir.path(),
        &[
            "verify-cert",
            "--cert",
            "bad.json",
            "--system",
            "sys.json",
            "--out",
            "v.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("clause (a) failed"), "{stderr}");
    let v = json(&dir, "v.json");
    assert!(v["cases"].as_array().unwrap().iter().any(|c| c["id"] == "(a)"));
}

#[test]
fn birkhoff_csv_is_versioned_and_exact() {
    let dir = setup(&[("sys.json", THREE_CYCLE)]);
    let out = ergo(
        dir.path(),
        &[
            "birkhoff", "--system", "sys.json", "--x", "1", "--k", "3", "--out", "a.csv",
        ],
    );
    assert!(out.status.success());
    let text = read(&dir, "a.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# ergo-csv v1 birkhoff");
    assert_eq!(lines[1], "k,A_k,A_k_decimal");
    assert_eq!(lines[2], "1,-1,-1");
    assert_eq!(lines[3], "2,-1,-1");
    assert_eq!(lines[4], "3,1/3,0.3333333333333333");
}

#[test]
fn converge_rows_respect_rotation_bound() {
    let dir = setup(&[("rot.json", GOLDEN)]);
    let out = ergo(
        dir.path(),
        &[
            "converge", "--system", "rot.json", "--out", "c.csv", "--report", "r.json",
        ],
    );
    assert!(out.status.success());
    let text = read(&dir, "c.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# ergo-csv v1 converge"));
    assert_eq!(lines.next(), Some("k,A_k,abs_dev"));
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let sin = (std::f64::consts::PI * alpha).sin();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 17);
    for (e, row) in (4..=20).zip(&rows) {
        let k = (1u64 << e) as f64;
        assert_eq!(row[0], k);
        assert!(row[1].abs() <= 1.0 / (k * sin) * (1.0 + 1e-9) + 1e-12, "k = {k}");
        assert_eq!(row[2], row[1].abs());
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = setup(&[("sys.json", THREE_CYCLE), ("rot.json", GOLDEN)]);
    for tag in ["1", "2"] {
        let csv = format!("b{tag}.csv");
        let rep = format!("r{tag}.json");
        let conv = format!("c{tag}.csv");
        assert!(ergo(
            dir.path(),
            &["birkhoff", "--system", "sys.json", "--k", "50", "--out", &csv]
        )
        .status
        .success());
        assert!(ergo(
            dir.path(),
            &["converge", "--system", "rot.json", "--max-exp", "12", "--out", &conv]
        )
        .status
        .success());
        let out = ergo(
            dir.path(),
            &[
                "fuzz", "--seeds", "1..30", "--n-max", "8", "--checks", "all", "--out", "f", "--report", &rep,
            ],
        );
        assert!(out.status.success());
    }
    assert_eq!(read(&dir, "b1.csv"), read(&dir, "b2.csv"));
    assert_eq!(read(&dir, "c1.csv"), read(&dir, "c2.csv"));
    // identical apart from the argument naming the report file and the wall clock
    let (mut a, mut b) = (stripped_report(&dir, "r1.json"), stripped_report(&dir, "r2.json"));
    a.as_object_mut().unwrap().remove("command");
    b.as_object_mut().unwrap().remove("command");
    assert_eq!(a, b);
}

#[test]
fn fuzz_covers_every_case_once() {
    let dir = setup(&[]);
    let out = Command::new(env!("CARGO_BIN_EXE_ergo"))
        .current_dir(dir.path())
        .env("ERGO_THREADS", "2")
        .args([
            "fuzz", "--seeds", "1..40", "--n-max", "12", "--out", "failures", "--report", "r.json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir, "r.json");
    let ids: Vec<&str> = r["cases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids.len(), 80);
    let mut unique = ids.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), 80);
    assert_eq!(std::fs::read_dir(dir.path().join("failures")).unwrap().count(), 0);
}

#[test]
fn corollary_three_cycle() {
    let dir = setup(&[("sys.json", THREE_CYCLE)]);
    let out = ergo(
        dir.path(),
        &["corollary", "--system", "sys.json", "--n-max", "6", "--out", "c.json"],
    );
    assert!(out.status.success());
    let c = json(&dir, "c.json");
    let cases = c["cases"].as_array().unwrap();
    for n in 1..=6i64 {
        let step = cases.iter().find(|x| x["id"] == format!("f+ n={n}")).unwrap();
        let expected = if n == 1 {
            "0".to_string()
        } else {
            format!("{}/{n}", n - 1)
        };
        assert_eq!(step["integral_lambda"], expected);
    }
    let sweep = cases.iter().find(|x| x["id"] == "f+ sweep").unwrap();
    assert_eq!(sweep["integral_observable"], "1");
    assert_eq!(sweep["integral_limit"], "1");
}

#[test]
fn errors_carry_the_path() {
    let dir = setup(&[
        (
            "broken.json",
            "{\"type\":\"finite\",\n\"map\":[1,0],\n\"cycle_weights\":[\"1/2\"],\n\"f\":[\"1\",]\n}",
        ),
        (
            "notperm.json",
            r#"{"type":"finite","map":[0,0],"cycle_weights":["1"],"f":["1","1"]}"#,
        ),
    ]);
    let out = ergo(dir.path(), &["birkhoff", "--system", "broken.json", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("broken.json:4"), "{stderr}");

    let out = ergo(dir.path(), &["birkhoff", "--system", "notperm.json", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("notperm.json"));

    let out = ergo(dir.path(), &["birkhoff", "--system", "missing.json", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn sampled_system_rejected_where_exactness_is_required() {
    let dir = setup(&[("rot.json", GOLDEN)]);
    let out = ergo(
        dir.path(),
        &["verify-maximal", "--system", "rot.json", "--n-range", "1..2"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = ergo(
        dir.path(),
        &["birkhoff", "--system", "rot.json", "--k", "4", "--truncate", "1"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_an_error() {
    let dir = setup(&[]);
    let out = Command::new(env!("CARGO_BIN_EXE_ergo"))
        .current_dir(dir.path())
        .env("ERGO_THREADS", "zero")
        .args(["fuzz", "--seeds", "1..2", "--out", "f"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _: PathBuf = dir.path().join("f");
}
