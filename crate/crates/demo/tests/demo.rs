use proxyval_demo::{dose_response_json, stl_json, trend_json};
use serde_json::Value;

#[test]
fn stl_round_trip() {
    let y: Vec<f64> = (0..48).map(|t| (t as f64 * std::f64::consts::PI / 6.0).sin() + 0.05 * t as f64).collect();
    let out: Value =
        serde_json::from_str(&stl_json(&serde_json::to_string(&y).unwrap(), 12, 7, true).unwrap()).unwrap();
    for i in 0..48 {
        let sum: f64 = ["trend", "seasonal", "remainder"].iter().map(|k| out[k][i].as_f64().unwrap()).sum();
        assert!((sum - y[i]).abs() < 1e-9);
    }
    assert!(stl_json("[1, 2, 3]", 12, 7, false).unwrap_err().contains("shorter"));
    assert!(stl_json("not json", 12, 7, false).unwrap_err().starts_with("values"));
}

#[test]
fn trend_matches_known_value() {
    let groups =
        r#"[{"score":0,"cases":10,"total":100},{"score":1,"cases":20,"total":100},{"score":2,"cases":30,"total":100}]"#;
    let out: Value = serde_json::from_str(&trend_json(groups).unwrap()).unwrap();
    assert!((out["statistic"].as_f64().unwrap() - 3.5355339).abs() < 1e-6);
    assert!(trend_json("[]").is_err());
}

#[test]
fn dose_response_bins() {
    let out: Value = serde_json::from_str(&dose_response_json(-0.8, 1).unwrap()).unwrap();
    assert_eq!(out["bins"].as_array().unwrap().len(), 6);
    assert!(out["trend"]["statistic"].is_number());
}
