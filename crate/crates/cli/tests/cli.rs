use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use fsmat_cli::{run, Args, Command as Suite, Format, RunConfig};

fn fsmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsmat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_spec(name: &str, text: &str) -> String {
    let path = scratch(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn check_on_constant_one_is_exact() {
    let spec = write_spec("one.json", r#"{"family": "constant", "value": 1}"#);
    let out = fsmat(&["check", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["unitarity", "crossing", "symmetry", "modulus"] {
        assert_eq!(v[key], 0.0, "{key}");
    }
    assert_eq!(v["norm"], 1.0);
}

#[test]
fn formfactor_verify_example() {
    let out = fsmat(&["formfactor-verify", "--n", "3", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["family"], "sinh_gordon");
    assert_eq!(v["n"], 3);
    assert!(v["k"].is_null());
    assert!(v["max_res1"].as_f64().unwrap() < 1e-9);
    assert!(v["max_res2"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["trials"], 20);
}

#[test]
fn smatrix_report_shape() {
    let out = fsmat(&["smatrix", "--grid", "5,-1,1", "--n", "2", "--trials", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["family", "n", "d", "trials", "max_residual", "rank", "dim"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["rank"], 10);
    assert_eq!(v["dim"], 10);
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(fsmat(&[]).status.code(), Some(2));
    assert_eq!(fsmat(&["bogus"]).status.code(), Some(2));
    assert_eq!(fsmat(&["check", "--spec", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(fsmat(&["nuclearity", "--s", "1,-2"]).status.code(), Some(2));
    assert_eq!(fsmat(&["smatrix", "--grid", "3,1,0"]).status.code(), Some(2));
    let bad = write_spec("bad.json", r#"{"family": "constant", "value": 2}"#);
    assert_eq!(fsmat(&["check", "--spec", &bad]).status.code(), Some(2));
    assert_eq!(fsmat(&["formfactor-verify", "--n", "2", "--k", "2"]).status.code(), Some(2));
}

#[test]
fn failing_suite_exits_one() {
    // a repeated s cannot be strictly decreasing
    let config = RunConfig {
        command: Suite::Nuclearity,
        spec_path: None,
        families: vec![fsmat::ScatteringFunction::constant(-1).unwrap()],
        grid: None,
        n: None,
        k: None,
        mass: 1.0,
        s_list: vec![1.0, 1.0],
        kappa_list: vec![0.3],
        seed: 1,
        trials: None,
        lattice: 4,
        format: Format::Json,
        out: None,
    };
    let outcome = run(&config).unwrap();
    assert!(!outcome.passed);
    assert_eq!(outcome.exit_code(), 1);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let cfg = scratch("run.json");
    fs::write(&cfg, r#"{"grid": "4,-1,1", "n": 2, "trials": 3, "seed": 5, "format": "csv"}"#).unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    let out = fsmat(&["smatrix", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("\nd,4\n") && text.contains("\nn,2\n") && text.contains("\ntrials,3\n"));
    let out = fsmat(&["smatrix", "--config", &cfg, "--n", "3", "--format", "json"]);
    assert_eq!(json(&out)["n"], 3);
    let unknown = scratch("unknown.json");
    fs::write(&unknown, r#"{"colour": "red"}"#).unwrap();
    let out = fsmat(&["smatrix", "--config", &unknown.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic_and_written_to_file() {
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    let spec = write_spec("minus.json", r#"{"family": "constant", "value": -1}"#);
    for path in [&a, &b] {
        let out = fsmat(&[
            "nuclearity",
            "--spec",
            &spec,
            "--s",
            "0.5,1,2",
            "--kappa",
            "0.2,0.4",
            "--lattice",
            "4",
            "--format",
            "csv",
            "--out",
            &path.to_string_lossy(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,kappa,sigma,t_trace,product,bound_bosonic,fermionic_x,bound_fermionic"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("0.5,0.2,") && rows[5].starts_with("2,0.4,"));
}

#[test]
fn seed_changes_random_suites_only() {
    let base = ["fock-verify", "--grid", "3,-1,1", "--n", "3", "--trials", "10"];
    let one = fsmat(&[&base[..], &["--seed", "1"]].concat());
    let again = fsmat(&[&base[..], &["--seed", "1"]].concat());
    let two = fsmat(&[&base[..], &["--seed", "2"]].concat());
    assert_eq!(one.stdout, again.stdout);
    assert_ne!(one.stdout, two.stdout);
    assert_eq!(json(&two)["passed"], true);
}

#[test]
fn args_parse_lists_and_negative_grid() {
    use clap::Parser;
    let args = Args::try_parse_from(["fsmat", "nuclearity", "--s", "0.5,1", "--kappa", "0.2", "--grid", "4,-2,2"]).unwrap();
    let config = RunConfig::from_args(args).unwrap();
    assert_eq!(config.s_list, vec![0.5, 1.0]);
    assert_eq!(config.kappa_list, vec![0.2]);
    assert_eq!(config.grid.unwrap().min, -2.0);
    assert_eq!(config.command, Suite::Nuclearity);
}
