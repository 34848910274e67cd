use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use athermal::channels::Channel;
use athermal::cli::{BathSpecFile, ChannelSpecFile};
use athermal::qcore::{Hermitian, ThermalContext};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn athermal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_athermal"))
        .args(args)
        .env_remove("ATHERMAL_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identity_report_has_golden_free_energy() {
    let (id, bath) = (data("identity_qubit.json"), data("bath_degenerate.json"));
    let o = athermal(&["report", path(&id), path(&bath)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let f = v.to_string();
    assert!(f.contains("1.386294361"), "{f}");
}

#[test]
fn bits_convert_divergences() {
    let (id, bath) = (data("identity_qubit.json"), data("bath_degenerate.json"));
    let nats = json(&athermal(&["divergence", path(&id), path(&bath), "--kind", "rel,max"]));
    let bits = json(&athermal(&[
        "divergence",
        path(&id),
        path(&bath),
        "--kind",
        "rel,max",
        "--units",
        "bits",
    ]));
    assert_eq!(bits["units"], "bits");
    let find = |v: &serde_json::Value| -> Vec<f64> {
        let mut out = Vec::new();
        collect(v, &mut out);
        out
    };
    let (n, b) = (find(&nats), find(&bits));
    assert!(!n.is_empty());
    // 2 ln 2 nats = 2 bits
    assert!(b.iter().any(|x| (x - 2.0).abs() < 1e-6), "{b:?}");
    assert!(
        n.iter().any(|x| (x - 2.0 * std::f64::consts::LN_2).abs() < 1e-6),
        "{n:?}"
    );
}

fn collect(v: &serde_json::Value, out: &mut Vec<f64>) {
    match v {
        serde_json::Value::Number(x) => out.push(x.as_f64().unwrap()),
        serde_json::Value::Array(a) => a.iter().for_each(|x| collect(x, out)),
        serde_json::Value::Object(m) => m.values().for_each(|x| collect(x, out)),
        _ => {}
    }
}

#[test]
fn malformed_kraus_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"dim_in": 2, "dim_out": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], "one"]]]}"#,
    )
    .unwrap();
    let o = athermal(&["report", path(&bad), path(&data("bath_qubit.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kraus[0][1]"), "{}", stderr(&o));
}

#[test]
fn syntax_error_names_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bath.json");
    fs::write(&bad, "{\n  \"beta\": 1.0,\n  \"hamiltonian\": [[[0, 0]],\n}\n").unwrap();
    let o = athermal(&["report", path(&data("identity_qubit.json")), path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bath.json:4:"), "{}", stderr(&o));
}

#[test]
fn unknown_suite_and_missing_file_exit_one() {
    assert_eq!(athermal(&["audit", "--suite", "nonsense"]).status.code(), Some(1));
    let o = athermal(&["report", "/nonexistent/channel.json", path(&data("bath_qubit.json"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let (n, id, bath) = (
        data("amplitude_damping.json"),
        data("identity_qubit.json"),
        data("bath_qubit.json"),
    );
    let args = ["work-capacity", path(&n), path(&id), path(&bath), "--seed", "11"];
    let a = athermal(&args);
    let b = athermal(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_can_come_from_the_environment() {
    let flag = athermal(&["audit", "--suite", "convexity", "--samples", "3", "--seed", "9"]);
    let env = Command::new(env!("CARGO_BIN_EXE_athermal"))
        .args(["audit", "--suite", "convexity", "--samples", "3"])
        .env("ATHERMAL_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flag.status.code(), Some(0), "{}", stderr(&flag));
    assert_eq!(flag.stdout, env.stdout);
    assert_eq!(json(&flag)["audit"]["seed"], 9);
}

#[test]
fn audit_passes_and_renders_csv() {
    let o = athermal(&["audit", "--suite", "diamond", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("section,field,value,unit,certificate\n"), "{text}");
}

#[test]
fn files_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let n = Channel::random_seeded(2, 2, 3, 5);
    let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 0.7]), 1.3).unwrap();
    let cpath = dir.path().join("n.json");
    let bpath = dir.path().join("b.json");
    fs::write(&cpath, ChannelSpecFile::from_channel(&n, None).to_json()).unwrap();
    fs::write(&bpath, BathSpecFile::from_context(&ctx).to_json()).unwrap();
    let o = athermal(&["divergence", path(&cpath), path(&bpath), "--kind", "max"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = athermal::divergences::channel_max_rel_entropy_log(&n, &ctx.log_gamma())
        .unwrap()
        .value;
    let mut values = Vec::new();
    collect(&json(&o), &mut values);
    assert!(
        values.iter().any(|x| x.to_bits() == expected.to_bits()),
        "{values:?} vs {expected}"
    );
}

#[test]
fn one_shot_reports_golden_units() {
    let (id, bath) = (data("identity_qubit.json"), data("bath_degenerate.json"));
    let o = athermal(&[
        "one-shot",
        path(&id),
        path(&bath),
        "--epsilon",
        "0.05",
        "--mode",
        "cost",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["one_shot"]["golden_units"], 2);
    assert_eq!(v["one_shot"]["raw_divergence_certificate"], "upper_bound");
}
