use std::process::{Command, Output};

fn cohres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohres"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn smatrix_csv_corner() {
    let o = cohres(&["smatrix", "--alphas", "1", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "col_0,col_1,col_2,col_3");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 1.25);
    assert_eq!(first[1], 0.0);
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn potential_is_a_well() {
    let o = cohres(&["potential", "--alphas", "1", "--grid", "-2:2:5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "x,V");
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    for (x, v) in rows {
        // single soliton: -2 sech^2 x
        let expected = -2.0 / x.cosh().powi(2);
        assert!((v - expected).abs() < 1e-12, "V({x}) = {v}");
    }
}

#[test]
fn density_xi_json_echoes_config() {
    let o = cohres(&["density-xi", "--alphas", "1", "--grid", "-1:1:3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.get("config_echo").is_some(), "{v}");
}

#[test]
fn coherent_psi_momentum_modulus() {
    let o = cohres(&["coherent", "--state", "psi", "--rep", "momentum", "--z", "0.5+0.5i", "--grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "p,re,im");
    for l in text.lines().skip(1) {
        let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        // |psi_z(p)|^2 = sqrt(2/pi) exp(-2 (p - Re z)^2)
        let expected = (2.0 / std::f64::consts::PI).sqrt() * (-2.0 * (v[0] - 0.5f64).powi(2)).exp();
        assert!((v[1] * v[1] + v[2] * v[2] - expected).abs() < 1e-12);
    }
}

#[test]
fn verify_xi_writes_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = cohres(&["verify", "--suite", "xi", "--alphas", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["overall_pass"], true);
}

#[test]
fn invalid_input_exits_two() {
    for args in [
        &["smatrix", "--n-max", "0", "--alphas", "1"][..],
        &["smatrix", "--alphas", "-1"],
        &["coherent", "--z", "nonsense"],
        &["no-such-command"],
        &["verify", "--suite", "bogus"],
    ] {
        let o = cohres(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "alphas = 1\nn_max = 2\n").unwrap();
    let o = cohres(&["smatrix", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = cohres(&["smatrix", "--config", cfg.to_str().unwrap(), "--n-max", "4"]);
    assert_eq!(stdout(&o).lines().count(), 6);
}
