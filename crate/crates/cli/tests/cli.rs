use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use proxyval::plot;

const SUBCOMMANDS: [&str; 6] = ["synth", "classify", "cohort", "risk", "seasonality", "validate"];

fn proxyval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proxyval")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "run.log")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert!(proxyval(&["--help"]).status.success());
    for cmd in SUBCOMMANDS {
        let help = proxyval(&[cmd, "--help"]);
        assert!(help.status.success(), "{cmd}");
        assert!(String::from_utf8_lossy(&help.stdout).contains("--out"), "{cmd}");
        assert_eq!(proxyval(&[cmd, "--no-such-flag"]).status.code(), Some(2), "{cmd}");
    }
    assert_eq!(proxyval(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(proxyval(&["validate", "--out", "x", "--alpha", "1"]).status.code(), Some(2));
    assert_eq!(proxyval(&["validate", "--out", "x", "--window-days", "27"]).status.code(), Some(2));
    assert_eq!(proxyval(&["validate", "--out", "x", "--purchases", "p.csv"]).status.code(), Some(2));
}

#[test]
fn flags_read_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_proxyval"))
        .args(["validate", "--out", "x"])
        .env("PROXYVAL_ALPHA", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn empty_purchases_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("catalog.csv");
    std::fs::write(&catalog, "product_id,name,category,food_form,ingredients\np1,Chicken Dry,general,dry,chicken\n")
        .unwrap();
    for contents in ["", "user_id,date,product_id,quantity\n"] {
        let purchases = dir.path().join("purchases.csv");
        std::fs::write(&purchases, contents).unwrap();
        let out = proxyval(&[
            "cohort",
            "--purchases",
            purchases.to_str().unwrap(),
            "--catalog",
            catalog.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(1), "{contents:?}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        let line: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
        assert!(line["error"].is_string() && line["message"].is_string(), "{stderr}");
    }
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = proxyval(&["synth", "--seed", "42", "--users", "2000", "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.contains_key("purchases.csv") && ta.contains_key("generator.conf"));
    assert_eq!(ta, tb);
}

#[test]
fn stat_kernels() {
    let out = proxyval(&["stat", "chi2", "20", "80", "10", "90"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["statistic"].as_f64().unwrap() - 3.9216).abs() < 1e-4);
    let out = proxyval(&["stat", "trend", "--cases", "10,20,30", "--totals", "100,100,100"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["statistic"].as_f64().unwrap() - 3.5355).abs() < 1e-4);
    let out = proxyval(&["stat", "q", "0.5", "1.9208"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["q"].as_f64().unwrap() - 0.05).abs() < 1e-4);
    let out = proxyval(&["stat", "trend", "--cases", "1,2", "--totals", "10,10,10"]);
    assert_eq!(out.status.code(), Some(1));
}

fn count(text: &str, needle: &str) -> usize {
    text.matches(needle).count()
}

#[test]
fn validate_outputs_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = proxyval(&["validate", "--seed", "3", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value = serde_json::from_str(&read(&out_dir.join("summary.json"))).unwrap();
    assert!(summary["ingredient"]["r"].as_f64().unwrap() >= 0.7, "{summary}");
    assert!(summary["seasonal"]["r"].as_f64().unwrap() >= 0.75, "{summary}");

    let scatter = read(&out_dir.join("scatter.csv"));
    let svg = read(&out_dir.join("scatter.svg"));
    assert_eq!(count(&svg, "class=\"point\""), scatter.lines().count() - 1);
    assert_eq!(
        svg,
        plot::scatter_svg(&scatter, "claim_rate", "switch_rate", "Switch rate against claim rate").unwrap()
    );

    let components = read(&out_dir.join("seasonal_components.csv"));
    let svg = read(&out_dir.join("seasonal.svg"));
    assert_eq!(count(&svg, "<polyline"), 2);
    assert_eq!(svg, plot::lines_svg(&components, "month", "Seasonal components").unwrap());

    let data = out_dir.join("data");
    let arg = |name: &str| data.join(name).to_str().unwrap().to_string();
    let risk_dir = dir.path().join("risk");
    let out = proxyval(&[
        "risk",
        "--purchases",
        &arg("purchases.csv"),
        "--catalog",
        &arg("catalog.csv"),
        "--questionnaire",
        &arg("questionnaire.csv"),
        "--alpha",
        "1e-300",
        "--out",
        risk_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!risk_dir.join("scatter.csv").exists() && !risk_dir.join("scatter.svg").exists());
    assert!(read(&risk_dir.join("run.log")).contains("warning: no significant ingredients"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no significant ingredients"));
}
