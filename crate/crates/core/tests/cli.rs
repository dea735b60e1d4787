use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ite-conformal");

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("ITE_LOG", "warn").output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn missing_config_is_usage_error_naming_path() {
    let out = cli(&["simulate", "--config", "/definitely/missing/paper.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/missing/paper.toml"));
}

#[test]
fn bad_flags_and_keys_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "alpha = 0.1\nsimulate.colour = 3\n").unwrap();
    assert_eq!(cli(&["simulate", "--config", p(&cfg)]).status.code(), Some(2));
    assert_eq!(cli(&["simulate", "--only", "colour=red"]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["--version"]).status.code(), Some(0));
}

#[test]
fn only_filter_selects_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = cli(&[
        "simulate",
        "--only",
        "method=LM2,regression=F1",
        "--replications",
        "2",
        "--out-dir",
        p(&out),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = lines(&out.join("results.csv"));
    assert_eq!(rows[0], ite_conformal::cli::RESULTS_HEADER);
    assert_eq!(rows.len(), 17);
    assert!(rows[1..].iter().all(|r| r.contains(",F1,") && r.contains(",LM2,")));
    // runtime_s stays empty unless --timings is given
    assert!(rows[1..].iter().all(|r| r.ends_with(',')));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "complete");
    assert_eq!(manifest["scenarios_completed"], 16);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn runtime_failure_flushes_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("diverge.toml");
    std::fs::write(
        &cfg,
        "replications = 2\nnn.lr = 1e6\n[simulate]\nn = [60]\nrho = [0.2]\nregression = [\"F1\"]\nerror_dist = [\"NORMAL\"]\nmethods = [\"LM1\", \"NN1\"]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = cli(&["simulate", "--config", p(&cfg), "--out-dir", p(&out)]);
    assert_eq!(res.status.code(), Some(1));
    let rows = lines(&out.join("results.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows[1].contains(",LM1,"));
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"failed\""));
}

fn write_train(path: &Path, n: usize) {
    let mut s = String::from("x1,x2,t,y\n");
    for i in 0..n {
        let x1 = (i as f64 * 0.37).sin();
        let x2 = (i as f64 * 0.91).cos();
        let t = if i % 2 == 0 { 1 } else { -1 };
        let y = x1 + x2 + t as f64 + 0.3 * (i as f64 * 1.7).sin();
        s.push_str(&format!("{x1},{x2},{t},{y}\n"));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn predict_small_split_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let probes = dir.path().join("probes.csv");
    let out = dir.path().join("pred.csv");
    write_train(&train, 10);
    std::fs::write(&probes, "x1,x2\n0.1,0.2\n-1,0.5\n").unwrap();
    let res = cli(&[
        "predict", "--train", p(&train), "--probes", p(&probes), "--mode", "split", "--alpha", "0.1", "--out", p(&out),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = lines(&out);
    assert_eq!(rows[0], "lo,hi,arm_plus_lo,arm_plus_hi,arm_minus_lo,arm_minus_hi,degenerate");
    assert_eq!(rows.len(), 3);
    assert!(rows[1..].iter().all(|r| r.starts_with("-inf,inf,") && r.ends_with(",true")));
}

#[test]
fn predict_is_pure_and_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let probes = dir.path().join("probes.csv");
    write_train(&train, 80);
    std::fs::write(&probes, "x1,x2\n0.3,-0.4\n1.2,0.1\n0.3,-0.4\n").unwrap();
    for mode in ["full", "split"] {
        for predictor in ["ols", "kernel", "nn"] {
            let res = cli(&[
                "predict", "--train", p(&train), "--probes", p(&probes), "--mode", mode, "--predictor", predictor, "--rule",
                "th1b",
            ]);
            assert_eq!(res.status.code(), Some(0), "{mode}/{predictor}: {}", String::from_utf8_lossy(&res.stderr));
            let text = String::from_utf8(res.stdout).unwrap();
            let rows: Vec<&str> = text.lines().collect();
            assert_eq!(rows.len(), 4);
            assert_eq!(rows[1], rows[3], "{mode}/{predictor}");
            for r in &rows[1..] {
                let v: Vec<f64> = r.split(',').take(6).map(|s| s.parse().unwrap()).collect();
                assert!(v[0] <= v[1] && v[2] <= v[3] && v[4] <= v[5], "{r}");
            }
        }
    }
}

#[test]
fn predict_schema_mismatch_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let probes = dir.path().join("probes.csv");
    write_train(&train, 30);
    std::fs::write(&probes, "x1,x2,x3\n0,0,0\n").unwrap();
    assert_eq!(cli(&["predict", "--train", p(&train), "--probes", p(&probes)]).status.code(), Some(2));
    std::fs::write(&probes, "x1,x2\n0,0\n").unwrap();
    std::fs::write(&train, "x1,x2,t,y\n0,0,2,1\n").unwrap();
    assert_eq!(cli(&["predict", "--train", p(&train), "--probes", p(&probes)]).status.code(), Some(2));
}

fn synthetic_results(path: &Path, cells: &[(&str, &str, &str, usize)]) {
    let mut s = format!("{}\n", ite_conformal::cli::RESULTS_HEADER);
    for (reg, dist, rho, n) in cells {
        for (j, m) in ["LM1", "LM2", "NN1", "NN2"].iter().enumerate() {
            let cov = 0.9 + 0.01 * j as f64;
            let len = 1.0 + 0.5 * j as f64 + 100.0 / *n as f64;
            s.push_str(&format!("{reg}-{dist}-rho{rho}-n{n}-{m},{reg},{dist},{rho},{n},{m},{cov},0.01,{len},0,\n"));
        }
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn report_writes_one_panel_pair_per_dgp() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.csv");
    let mut cells = Vec::new();
    for reg in ["F1", "F2"] {
        for dist in ["NORMAL", "LAPLACE"] {
            for rho in ["0.2", "0.8"] {
                for n in [300, 700, 1200, 2000] {
                    cells.push((reg, dist, rho, n));
                }
            }
        }
    }
    synthetic_results(&results, &cells);
    let out = dir.path().join("report");
    assert_eq!(cli(&["report", "--results", p(&results), "--out-dir", p(&out)]).status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
    assert_eq!(files.len(), 16);
    let cov = lines(&out.join("coverage_F2_LAPLACE_rho0.8.csv"));
    assert!(cov[0].contains("0.9") && cov[0].contains("oracle=1"));
    assert_eq!(cov[1], "n,LM1,LM2,NN1,NN2");
    assert_eq!(cov.len(), 6);
    assert!(cov[2].starts_with("300,0.9,"));
    let len = lines(&out.join("length_F1_NORMAL_rho0.2.csv"));
    assert_eq!(len[5], "2000,1.05,1.55,2.05,2.55");
}

#[test]
fn report_single_scenario_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.csv");
    let mut s = format!("{}\n", ite_conformal::cli::RESULTS_HEADER);
    s.push_str("F1-NORMAL-rho0.2-n300-LM1,F1,NORMAL,0.2,300,LM1,0.95,0.01,1.7,0,\n");
    std::fs::write(&results, s).unwrap();
    let out = dir.path().join("report");
    assert_eq!(cli(&["report", "--results", p(&results), "--out-dir", p(&out)]).status.code(), Some(0));
    let cov = lines(&out.join("coverage_F1_NORMAL_rho0.2.csv"));
    assert_eq!(cov.len(), 3);
    assert_eq!(cov[2], "300,0.95,,,");

    std::fs::write(&results, "a,b,c\n1,2,3\n").unwrap();
    assert_eq!(cli(&["report", "--results", p(&results), "--out-dir", p(&out)]).status.code(), Some(2));
    let mut s = format!("{}\n", ite_conformal::cli::RESULTS_HEADER);
    s.push_str("x,F1,NORMAL,0.2,300,LM9,0.95,0.01,1.7,0,\n");
    std::fs::write(&results, s).unwrap();
    assert_eq!(cli(&["report", "--results", p(&results), "--out-dir", p(&out)]).status.code(), Some(2));
}
