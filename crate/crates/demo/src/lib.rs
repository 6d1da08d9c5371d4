//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes and returns JSON strings. The `*_json` functions hold
//! the logic and are callable from native code and tests; the exported
//! wrappers only turn their errors into JavaScript exceptions.

use proxyval::classify::{partition_catalog, KeywordRuleSet};
use proxyval::cohort::{assign_all, CohortConfig};
use proxyval::numstat::{cochran_armitage, TrendGroup, TrendTable};
use proxyval::risk::dose_response;
use proxyval::seasonality::{stl, StlParams};
use proxyval::synth::{generate, GeneratorConfig};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Population sizes small enough to simulate on every slider move.
const DEMO_USERS: usize = 3_000;
const DEMO_PRODUCTS: usize = 300;

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

fn encode<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo results serialize")
}

/// Decomposes `values` (a JSON array) into trend, seasonal and remainder.
pub fn stl_json(values: &str, period: usize, seasonal_span: usize, robust: bool) -> Result<String, String> {
    let y: Vec<f64> = parse(values, "values")?;
    let params = StlParams { n_outer: if robust { 2 } else { 0 }, ..StlParams::for_period(period, seasonal_span) };
    let d = stl(&y, &params).map_err(|e| e.to_string())?;
    Ok(encode(&json!({
        "trend": d.trend,
        "seasonal": d.seasonal,
        "remainder": d.remainder,
        "weights": d.weights,
        "params": params,
    })))
}

/// Cochran-Armitage trend test. `groups` is a JSON array of
/// `{"score": .., "cases": .., "total": ..}` objects.
pub fn trend_json(groups: &str) -> Result<String, String> {
    #[derive(serde::Deserialize)]
    struct Group {
        score: f64,
        cases: u64,
        total: u64,
    }
    let groups: Vec<Group> = parse(groups, "groups")?;
    let groups = groups.into_iter().map(|g| TrendGroup { score: g.score, cases: g.cases, total: g.total }).collect();
    let table = TrendTable::new(groups).map_err(|e| e.to_string())?;
    let r = cochran_armitage(&table).map_err(|e| e.to_string())?;
    Ok(encode(&r))
}

/// Simulates a small population with the given wet-food effect and returns
/// the wet-rate bins with their trend test.
pub fn dose_response_json(wet_effect: f64, seed: u64) -> Result<String, String> {
    let cfg = GeneratorConfig {
        seed,
        n_users: DEMO_USERS,
        n_insured: DEMO_USERS,
        n_general_products: DEMO_PRODUCTS,
        wet_effect,
        ..GeneratorConfig::default()
    };
    let bundle = generate(&cfg).map_err(|e| e.to_string())?;
    let part = partition_catalog(&bundle.catalog, &KeywordRuleSet::default_rules());
    let asg = assign_all(&bundle.purchases, &part, &CohortConfig::default());
    let d = dose_response(&asg, &bundle.catalog).map_err(|e| e.to_string())?;
    Ok(encode(&d))
}

#[wasm_bindgen]
pub fn stl_decompose(values: &str, period: usize, seasonal_span: usize, robust: bool) -> Result<String, JsValue> {
    to_js(stl_json(values, period, seasonal_span, robust))
}

#[wasm_bindgen]
pub fn trend_test(groups: &str) -> Result<String, JsValue> {
    to_js(trend_json(groups))
}

#[wasm_bindgen]
pub fn dose_response_demo(wet_effect: f64, seed: u64) -> Result<String, JsValue> {
    to_js(dose_response_json(wet_effect, seed))
}
