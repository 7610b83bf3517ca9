//! The `dyalab` binary: exit codes, emitted files and reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dyalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyalab")).args(args).output().expect("spawn dyalab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const CHANILLO: &str = "\
# small corpus
[scenario]
name = chanillo-1d
lambda = 3/4
p = 2
resolution = 5
depth = 4
corpus_size = 4
";

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(code(&dyalab(&[])), 1);
    assert_eq!(code(&dyalab(&["bogus"])), 1);
    assert_eq!(code(&dyalab(&["norm", "--kind", "nope", "--input", "x.json"])), 1);
    assert_eq!(code(&dyalab(&["experiment", "--config", "/nonexistent/dyalab.conf"])), 1);
    assert_eq!(code(&dyalab(&["--help"])), 0);
}

#[test]
fn invalid_configs_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad_lambda = write(dir.path(), "a.conf", "[scenario]\nname = chanillo-1d\nlambda = 1/3\n");
    assert_eq!(code(&dyalab(&["experiment", "--config", &bad_lambda])), 2);
    let unknown = write(dir.path(), "b.conf", "[scenario]\nname = chanillo-1d\ncolour = blue\n");
    assert_eq!(code(&dyalab(&["experiment", "--config", &unknown])), 2);
    // q fixed against the scaling relation
    let bad_q = write(dir.path(), "c.conf", "[scenario]\nname = chanillo-1d\nlambda = 3/4\np = 2\nq = 4\n");
    let out = dyalab(&["experiment", "--config", &bad_q]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 - sum(alpha) + 1/q = 1/p"));
    // verify only runs the identity suite
    let other = write(dir.path(), "d.conf", CHANILLO);
    assert_eq!(code(&dyalab(&["verify", "--config", &other])), 2);
}

#[test]
fn strict_non_convergence_exits_four() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.conf", &format!("{CHANILLO}iters = 1\nstrict_convergence = true\n"));
    let out_dir = dir.path().join("out");
    let out = dyalab(&["experiment", "--config", &cfg, "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    // the report is still written
    assert!(out_dir.join("chanillo-1d.csv").exists());
}

#[test]
fn verify_succeeds_and_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "v.conf",
        "[scenario]\nname = verify-decomposition\nlambda = 5/8, 3/4, 7/8\ncases = 20\neigen_cases = 10\n",
    );
    let out_dir = dir.path().join("v");
    let out = dyalab(&["verify", "--config", &cfg, "--output-dir", out_dir.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("verify-decomposition.csv")).unwrap();
    assert!(csv.starts_with("case_id,kind,dim,lambda,b_terms,f_terms,families,residual_terms,exact\n"));
    assert_eq!(csv.lines().count(), 31);
    assert!(!out_dir.join("verify-decomposition.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.conf", CHANILLO);
    let a = dir.path().join("a");
    let mut runs = Vec::new();
    for threads in ["1", "2"] {
        let out = dyalab(&["experiment", "--config", &cfg, "--output-dir", a.to_str().unwrap(), "--threads", threads]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let read = |ext: &str| fs::read_to_string(a.join(format!("chanillo-1d.{ext}"))).unwrap();
        runs.push((read("csv"), read("json")));
    }
    assert_eq!(runs[0], runs[1]);
    let (csv, json) = &runs[0];
    assert!(csv.starts_with("symbol_id,bmo,opnorm_lb,ratio,witness_ref\n"));
    let json: serde_json::Value = serde_json::from_str(json).unwrap();
    for key in ["scenario", "params", "rows", "brackets", "flags", "seed"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert!(fs::read_to_string(a.join("chanillo-1d.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn seed_flag_changes_the_corpus() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.conf", CHANILLO);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    dyalab(&["experiment", "--config", &cfg, "--output-dir", a.to_str().unwrap(), "--format", "csv"]);
    dyalab(&["experiment", "--config", &cfg, "--output-dir", b.to_str().unwrap(), "--format", "csv", "--seed", "99"]);
    assert_ne!(fs::read(a.join("chanillo-1d.csv")).unwrap(), fs::read(b.join("chanillo-1d.csv")).unwrap());
}

#[test]
fn norm_command_reads_function_json() {
    let dir = TempDir::new().unwrap();
    // h on [0, 1/2) with coefficient 1: L^4 norm 2^{1/4}
    let f = write(dir.path(), "f.json", r#"[{"coeff": "1", "factors": [{"kind": "haar", "scale": -1, "pos": 0}]}]"#);
    let out = dyalab(&["norm", "--kind", "lp", "--input", &f, "--p", "4"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2f64.powf(0.25)).abs() < 1e-12);

    let out = dyalab(&["norm", "--kind", "bmo", "--input", &f]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["witness"], "[0, 1/2)");

    let bad = write(dir.path(), "g.json", r#"[{"coeff": "x", "factors": []}]"#);
    assert_eq!(code(&dyalab(&["norm", "--kind", "lp", "--input", &bad])), 2);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "conf") {
            let text = fs::read_to_string(&path).unwrap();
            let cfg = dyalab::ScenarioConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 11);
}
