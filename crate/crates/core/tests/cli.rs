use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hallmech");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited normally")
}

#[test]
fn virtual_values_table_shape() {
    let text = stdout(&["virtual-values", "--prior", "uniform:0,1", "--gamma", "0.75", "--signal", "0.4", "--grid", "200"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    assert!(lines.next().unwrap().starts_with("# command=virtual-values"));
    assert_eq!(lines.next(), Some("v,pre_iron,ironed,oracle"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 4));
    let at_signal = rows.iter().find(|r| r[0] == "0.4").expect("signal row");
    assert_eq!(at_signal[1], "");
    let ironed: f64 = at_signal[2].parse().unwrap();
    assert!((ironed - 0.2489).abs() < 1e-3);
}

#[test]
fn price_curve_has_two_hundred_rows() {
    let text = stdout(&["price-curve", "--grid", "300"]);
    assert!(text.starts_with("# schema=1\n"));
    let body: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(body[0], "s,p_hall,p_noise,p_hall_noise,regime");
    assert_eq!(body.len(), 201);
}

#[test]
fn revenue_ratio_columns() {
    let text = stdout(&["revenue-ratio", "--prior", "uniform:0,1", "--gamma", "0.3,0.7", "--samples", "3000", "--grid", "300"]);
    let header = text.lines().nth(2).unwrap();
    assert_eq!(
        header,
        "gamma,optimal_revenue,optimal_stderr,ratio_signal_eager,ratio_monopoly_eager,ratio_k_uncapped_0,ratio_k_uncapped_1,\
ratio_k_uncapped_2,ratio_best_k_uncapped,best_k,ratio_spa_ignore,ratio_hybrid"
    );
    let rows: Vec<&str> = text.lines().skip(3).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0.3,") && rows[1].starts_with("0.7,"));
    assert!(text.lines().nth(1).unwrap().contains("seed=20240601"));
}

#[test]
fn counterexamples_write_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cx.csv");
    let status = code(&["counterexamples", "--out", out.to_str().unwrap()]);
    assert_eq!(status, 0);
    let gap = std::fs::read_to_string(dir.path().join("cx_ironing_gap.csv")).unwrap();
    let regimes = std::fs::read_to_string(dir.path().join("cx_regimes.csv")).unwrap();
    assert!(gap.starts_with("# schema=1\n") && regimes.starts_with("# schema=1\n"));
    let max_gap: f64 = gap.lines().nth(1).unwrap().split("max_gap=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(max_gap > 0.01);
    let count: usize = regimes.lines().nth(1).unwrap().split("regimes=").nth(1).unwrap().trim().parse().unwrap();
    assert!(count >= 5);
}

#[test]
fn full_surplus_report() {
    let text = stdout(&["full-surplus", "--alpha", "0.5", "--gamma", "0.5", "--epsilon", "0.1"]);
    assert!(text.contains("incentive_compatible=true"));
    assert!(text.contains("individually_rational=true"));
    assert!(text.contains("revenue=1.4 target=1.4"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"prior": "beta:1,2", "gamma": [0.5], "signal": 0.3, "grid_size": 200}"#).unwrap();
    let text = stdout(&["virtual-values", "--config", cfg.to_str().unwrap(), "--signal", "0.6"]);
    let meta = text.lines().nth(1).unwrap();
    assert!(meta.contains("prior=beta:1,2") && meta.contains("gamma=0.5") && meta.contains("signal=0.6"), "{meta}");
}

#[test]
fn configuration_errors_exit_with_two() {
    assert_eq!(code(&["virtual-values", "--prior", "beta:1,x"]), 2);
    assert_eq!(code(&["virtual-values", "--gamma", "1.5"]), 2);
    assert_eq!(code(&["virtual-values", "--gamma", "0.3,0.5"]), 2);
    assert_eq!(code(&["price-curve", "--sigma", "0"]), 2);
    assert_eq!(code(&["revenue-ratio", "--samples", "0"]), 2);
    assert_eq!(code(&["virtual-values", "--bogus"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["virtual-values", "--config", "/nonexistent/cfg.json"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"priro": "beta:1,2"}"#).unwrap();
    assert_eq!(code(&["price-curve", "--config", cfg.to_str().unwrap()]), 2);
    let stderr = String::from_utf8(run(&["virtual-values", "--prior", "beta:1,x"]).stderr).unwrap();
    assert!(stderr.contains('7'), "{stderr}");
}

#[test]
fn numerical_preconditions_exit_with_three() {
    let irregular = "mix:0.8*truncnormal:0.51,0.05,0.5,0.52+0.2*uniform:0,1";
    assert_eq!(code(&["virtual-values", "--prior", irregular, "--gamma", "0.9", "--signal", "0.53"]), 3);
    assert_eq!(code(&["full-surplus", "--gamma", "1"]), 3);
}

fn identical_twice(args: &[&str], files: &[&Path]) {
    let first = run(args);
    let first_files: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
    let second = run(args);
    assert_eq!(first.status.code(), Some(0), "{args:?}");
    assert_eq!(first.stdout, second.stdout, "{args:?}");
    for (f, before) in files.iter().zip(first_files) {
        assert_eq!(std::fs::read(f).unwrap(), before, "{}", f.display());
    }
}

#[test]
fn every_command_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cx = dir.path().join("cx.csv");
    identical_twice(&["virtual-values", "--grid", "300"], &[]);
    identical_twice(&["price-curve", "--grid", "300"], &[]);
    identical_twice(&["revenue-ratio", "--gamma", "0.2,0.8", "--samples", "5000", "--grid", "300", "--seed", "9"], &[]);
    identical_twice(
        &["counterexamples", "--grid", "500", "--out", cx.to_str().unwrap()],
        &[&dir.path().join("cx_ironing_gap.csv"), &dir.path().join("cx_regimes.csv")],
    );
    identical_twice(&["full-surplus"], &[]);
}
