use std::process::{Command, Output};

use kneadlab::config::Config;
use kneadlab::KneadingMap;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kneadlab")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kneadlab"))
        .args(args)
        .env(key, val)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn generate_fibonacci_times() {
    let out = run(&["generate", "--family", "offset:2", "--count", "10", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let s: Vec<String> = json(&out)["cutting_times"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(s, ["1", "2", "3", "5", "8", "13", "21", "34", "55", "89"]);
}

#[test]
fn generate_cascade_table() {
    let out = run(&["generate", "--family", "section5:k1=3", "--count", "14", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let q: Vec<usize> = json(&out)["q"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    let map = KneadingMap::parse_with("section5:k1=3", Config::builtin()).unwrap();
    let want: Vec<usize> = (1..=q.len()).map(|k| map.q(k)).collect();
    assert_eq!(q, want);
    assert_eq!(&q[..4], &[0, 0, 0, 3]);
}

#[test]
fn generate_rejects_offset_zero() {
    let out = run(&["generate", "--family", "offset:0"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Q(k) < k"));
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&run(&["check", "strong", "--family", "offset:2", "--horizon", "100", "--from", "6"])), 0);
    let renor = run(&["check", "renor", "--family", "double", "--k", "5", "--format", "json"]);
    assert_eq!(code(&renor), 0);
    assert_eq!(json(&renor)["verdict"], "holds");
    assert_eq!(code(&run(&["check", "admis", "--family", "offset:2", "--horizon", "0"])), 2);
    assert_eq!(code(&run(&["check", "strong", "--family", "const:0", "--horizon", "50"])), 1);
    assert_eq!(code(&run(&["check", "admis", "--family", "offset:2", "--bogus"])), 2);
}

#[test]
fn text_and_json_agree_on_verdicts() {
    for kind in ["admis", "strong", "stopcarry", "invert"] {
        for fam in ["offset:2", "const:0", "example1"] {
            let j = run(&["check", kind, "--family", fam, "--format", "json"]);
            let t = run(&["check", kind, "--family", fam]);
            assert_eq!(code(&j), code(&t), "{kind} {fam}");
            let verdict = json(&j)["verdict"].as_str().unwrap().to_string();
            assert!(String::from_utf8_lossy(&t.stdout).contains(&verdict), "{kind} {fam}");
        }
    }
}

#[test]
fn odometer_commands() {
    let e = run(&["encode", "--family", "offset:2", "--n", "12", "--format", "json"]);
    assert_eq!(json(&e)["code"], "0,2,4");
    let a = run(&["add", "--family", "offset:2", "--code", "0,2,4", "--format", "json"]);
    assert_eq!(json(&a)["result"], "5");
    assert_eq!(json(&a)["value"], "13");
    let b = run(&["add", "--family", "offset:2", "--code", "5", "--back", "--format", "json"]);
    assert_eq!(json(&b)["result"], "0,2,4");
}

#[test]
fn certify_exit_codes() {
    let ok = run(&["certify", "--family", "section5:k1=3", "--imax", "3", "--precision", "256", "--format", "json"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["overall"]["verdict"], "certified_at_depth");
    let bad = run(&["certify", "--family", "const:0", "--imax", "1", "--format", "json"]);
    assert_eq!(code(&bad), 1);
    assert_eq!(json(&bad)["overall"]["check"], "strong_admis");
    assert_eq!(code(&run(&["certify", "--family", "section5:k1=3", "--imax", "1"])), 2);
    assert_eq!(code(&run(&["certify", "--family", "section5:k1=3", "--precision", "64"])), 4);
}

#[test]
fn precision_env_caps_the_default() {
    let out = run_env(&["certify", "--family", "section5:k1=3"], "KNEADLAB_PRECISION_BITS", "64");
    assert_eq!(code(&out), 4);
    let out = run_env(&["certify", "--family", "section5:k1=3"], "KNEADLAB_PRECISION_BITS", "512");
    assert_eq!(code(&out), 0);
}

#[test]
fn certify_writes_output_file() {
    let dir = std::env::temp_dir().join(format!("kneadlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cert.json");
    let out = run(&[
        "certify",
        "--family",
        "section5:k1=3",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["toolkit"], "kneadlab");
    assert!(v["generated_at"].is_string());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn slope_and_tower_report() {
    let s = run(&["slope", "--family", "offset:2", "--format", "json"]);
    assert_eq!(code(&s), 0);
    let lo: f64 = json(&s)["slope"]["lo"].as_str().unwrap()[..12].parse().unwrap();
    assert!((lo - 1.7292).abs() < 1e-3);
    let t = run(&["tower", "--family", "offset:2", "--n", "8"]);
    assert_eq!(code(&t), 0);
    assert!(String::from_utf8_lossy(&t.stdout).contains("D_5"));
    assert_eq!(code(&run(&["tower", "--family", "double", "--n", "8"])), 2);
    let c = run(&["cover", "--family", "section5:k1=3", "--i", "2", "--format", "json"]);
    assert_eq!(json(&c)["pieces"].as_array().unwrap().len(), 4);
}
