use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::names::ingredient_names;
use super::SynthError;
use crate::ingest::YearMonth;

/// Whether the insured population shares the purchase population's
/// ingredient effects.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    #[default]
    Coupled,
    /// Insured animals use `claim_effects` instead; a negative control.
    Decoupled,
}

impl Coupling {
    pub fn as_str(self) -> &'static str {
        match self {
            Coupling::Coupled => "coupled",
            Coupling::Decoupled => "decoupled",
        }
    }
}

impl FromStr for Coupling {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "coupled" => Ok(Coupling::Coupled),
            "decoupled" => Ok(Coupling::Decoupled),
            _ => Err(format!("unknown coupling {s:?} (coupled, decoupled)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_users: usize,
    pub n_insured: usize,
    pub n_general_products: usize,
    pub n_target_products: usize,
    /// Therapeutic products whose names match no keyword.
    pub n_unmatched_products: usize,
    /// General-category snacks with food form `other`.
    pub n_treat_products: usize,
    pub n_ingredients: usize,
    pub min_ingredients_per_product: usize,
    pub max_ingredients_per_product: usize,
    pub wet_product_share: f64,
    /// Log-odds per exposed ingredient; ingredients not listed have effect 0.
    pub ingredient_effects: BTreeMap<String, f64>,
    /// Effects for the insured population under decoupled coupling.
    pub claim_effects: BTreeMap<String, f64>,
    pub coupling: Coupling,
    pub seasonal_amplitude: f64,
    /// Calendar month of the seasonal peak; fractional values fall between
    /// months (12.5 peaks midway between December and January).
    pub seasonal_peak_month: f64,
    pub base_monthly_hazard: f64,
    pub claim_prob: f64,
    pub switch_prob: f64,
    pub switch_lag_mean_days: f64,
    /// Log-odds per unit wet rate.
    pub wet_effect: f64,
    pub start_month: YearMonth,
    pub months: u32,
    pub dry_only_share: f64,
    pub wet_only_share: f64,
    pub mixed_wet_min: f64,
    pub mixed_wet_max: f64,
    /// General purchase events per month, drawn uniformly per user.
    pub purchase_rate_min: f64,
    pub purchase_rate_max: f64,
    /// Months before `start_month` over which users join and insured
    /// animals are already at risk.
    pub history_months: u32,
    pub churn_prob: f64,
    pub treat_prob: f64,
    pub target_first_share: f64,
    pub unclassified_share: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            n_users: 10_000,
            n_insured: 10_000,
            n_general_products: 1_271,
            n_target_products: 24,
            n_unmatched_products: 12,
            n_treat_products: 30,
            n_ingredients: 411,
            min_ingredients_per_product: 4,
            max_ingredients_per_product: 8,
            wet_product_share: 0.4,
            ingredient_effects: BTreeMap::new(),
            claim_effects: BTreeMap::new(),
            coupling: Coupling::Coupled,
            seasonal_amplitude: 0.4,
            seasonal_peak_month: 12.0,
            base_monthly_hazard: 0.0025,
            claim_prob: 0.35,
            switch_prob: 0.95,
            switch_lag_mean_days: 10.0,
            wet_effect: 0.0,
            start_month: YearMonth::new(2018, 1).expect("valid month"),
            months: 36,
            dry_only_share: 0.25,
            wet_only_share: 0.10,
            mixed_wet_min: 0.1,
            mixed_wet_max: 0.9,
            purchase_rate_min: 1.0,
            purchase_rate_max: 2.0,
            history_months: 24,
            churn_prob: 0.15,
            treat_prob: 0.1,
            target_first_share: 0.01,
            unclassified_share: 0.01,
        }
    }
}

fn invalid(message: impl Into<String>) -> SynthError {
    SynthError::ConfigInvalid { line: None, message: message.into() }
}

fn check_prob(name: &str, v: f64, allow_zero: bool) -> Result<(), SynthError> {
    let ok = v.is_finite() && v <= 1.0 && if allow_zero { v >= 0.0 } else { v > 0.0 };
    if ok {
        Ok(())
    } else {
        let range = if allow_zero { "[0, 1]" } else { "(0, 1]" };
        Err(invalid(format!("{name} must lie in {range}, got {v}")))
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        check_prob("base_monthly_hazard", self.base_monthly_hazard, false)?;
        if self.base_monthly_hazard >= 1.0 {
            return Err(invalid("base_monthly_hazard must be below 1"));
        }
        check_prob("claim_prob", self.claim_prob, false)?;
        check_prob("switch_prob", self.switch_prob, false)?;
        for (name, v) in [
            ("wet_product_share", self.wet_product_share),
            ("dry_only_share", self.dry_only_share),
            ("wet_only_share", self.wet_only_share),
            ("churn_prob", self.churn_prob),
            ("treat_prob", self.treat_prob),
            ("target_first_share", self.target_first_share),
            ("unclassified_share", self.unclassified_share),
        ] {
            check_prob(name, v, true)?;
        }
        let special = self.dry_only_share + self.wet_only_share;
        if special > 1.0 {
            return Err(invalid("dry_only_share + wet_only_share exceeds 1"));
        }
        if self.target_first_share + self.unclassified_share > 0.5 {
            return Err(invalid("target_first_share + unclassified_share exceeds 0.5"));
        }
        if !(0.0 < self.mixed_wet_min && self.mixed_wet_min <= self.mixed_wet_max && self.mixed_wet_max < 1.0) {
            return Err(invalid("mixed wet rates need 0 < mixed_wet_min <= mixed_wet_max < 1"));
        }
        if !(self.purchase_rate_min > 0.0
            && self.purchase_rate_min <= self.purchase_rate_max
            && self.purchase_rate_max.is_finite())
        {
            return Err(invalid("purchase rates need 0 < purchase_rate_min <= purchase_rate_max"));
        }
        for (name, v) in
            [("seasonal_amplitude", self.seasonal_amplitude), ("switch_lag_mean_days", self.switch_lag_mean_days)]
        {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if !self.wet_effect.is_finite() || !self.seasonal_peak_month.is_finite() {
            return Err(invalid("wet_effect and seasonal_peak_month must be finite"));
        }
        if self.months == 0 {
            return Err(invalid("months must be positive"));
        }
        if self.min_ingredients_per_product == 0 || self.min_ingredients_per_product > self.max_ingredients_per_product
        {
            return Err(invalid("need 1 <= min_ingredients_per_product <= max_ingredients_per_product"));
        }
        if self.n_ingredients < self.max_ingredients_per_product {
            return Err(invalid(format!(
                "n_ingredients ({}) is below max_ingredients_per_product ({})",
                self.n_ingredients, self.max_ingredients_per_product
            )));
        }
        let n_wet = (self.n_general_products as f64 * self.wet_product_share).round() as usize;
        let n_dry = self.n_general_products - n_wet;
        if n_wet < 2 || n_dry < 2 {
            return Err(invalid("need at least 2 wet and 2 dry general products"));
        }
        if self.n_target_products == 0 {
            return Err(invalid("n_target_products must be positive"));
        }
        if self.unclassified_share > 0.0 && self.n_unmatched_products == 0 {
            return Err(invalid("unclassified_share > 0 needs n_unmatched_products > 0"));
        }
        if self.treat_prob > 0.0 && self.n_treat_products == 0 {
            return Err(invalid("treat_prob > 0 needs n_treat_products > 0"));
        }
        let vocab: std::collections::HashSet<String> = ingredient_names(self.n_ingredients).into_iter().collect();
        for (map_name, map) in [("effect", &self.ingredient_effects), ("claim_effect", &self.claim_effects)] {
            for (k, v) in map {
                if !vocab.contains(k) {
                    return Err(invalid(format!("{map_name}.{k}: not a generated ingredient")));
                }
                if !v.is_finite() {
                    return Err(invalid(format!("{map_name}.{k}: effect must be finite")));
                }
            }
        }
        Ok(())
    }

    /// Flat `key = value` text; ingredient effects are `effect.<name>` and
    /// `claim_effect.<name>` lines.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("seed", self.seed.to_string());
        kv("n_users", self.n_users.to_string());
        kv("n_insured", self.n_insured.to_string());
        kv("n_general_products", self.n_general_products.to_string());
        kv("n_target_products", self.n_target_products.to_string());
        kv("n_unmatched_products", self.n_unmatched_products.to_string());
        kv("n_treat_products", self.n_treat_products.to_string());
        kv("n_ingredients", self.n_ingredients.to_string());
        kv("min_ingredients_per_product", self.min_ingredients_per_product.to_string());
        kv("max_ingredients_per_product", self.max_ingredients_per_product.to_string());
        kv("wet_product_share", self.wet_product_share.to_string());
        kv("coupling", self.coupling.as_str().to_string());
        kv("seasonal_amplitude", self.seasonal_amplitude.to_string());
        kv("seasonal_peak_month", self.seasonal_peak_month.to_string());
        kv("base_monthly_hazard", self.base_monthly_hazard.to_string());
        kv("claim_prob", self.claim_prob.to_string());
        kv("switch_prob", self.switch_prob.to_string());
        kv("switch_lag_mean_days", self.switch_lag_mean_days.to_string());
        kv("wet_effect", self.wet_effect.to_string());
        kv("start_month", self.start_month.to_string());
        kv("months", self.months.to_string());
        kv("dry_only_share", self.dry_only_share.to_string());
        kv("wet_only_share", self.wet_only_share.to_string());
        kv("mixed_wet_min", self.mixed_wet_min.to_string());
        kv("mixed_wet_max", self.mixed_wet_max.to_string());
        kv("purchase_rate_min", self.purchase_rate_min.to_string());
        kv("purchase_rate_max", self.purchase_rate_max.to_string());
        kv("history_months", self.history_months.to_string());
        kv("churn_prob", self.churn_prob.to_string());
        kv("treat_prob", self.treat_prob.to_string());
        kv("target_first_share", self.target_first_share.to_string());
        kv("unclassified_share", self.unclassified_share.to_string());
        for (k, v) in &self.ingredient_effects {
            kv(&format!("effect.{k}"), v.to_string());
        }
        for (k, v) in &self.claim_effects {
            kv(&format!("claim_effect.{k}"), v.to_string());
        }
        s
    }

    /// Parses a config file. Keys not present keep their defaults.
    pub fn parse(text: &str) -> Result<Self, SynthError> {
        let mut c = GeneratorConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SynthError::ConfigInvalid { line: Some(line_no), message };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("{key}: cannot parse {v:?}"))
            }
            let r: Result<(), String> = (|| {
                match key {
                    "seed" => c.seed = num(key, value)?,
                    "n_users" => c.n_users = num(key, value)?,
                    "n_insured" => c.n_insured = num(key, value)?,
                    "n_general_products" => c.n_general_products = num(key, value)?,
                    "n_target_products" => c.n_target_products = num(key, value)?,
                    "n_unmatched_products" => c.n_unmatched_products = num(key, value)?,
                    "n_treat_products" => c.n_treat_products = num(key, value)?,
                    "n_ingredients" => c.n_ingredients = num(key, value)?,
                    "min_ingredients_per_product" => c.min_ingredients_per_product = num(key, value)?,
                    "max_ingredients_per_product" => c.max_ingredients_per_product = num(key, value)?,
                    "wet_product_share" => c.wet_product_share = num(key, value)?,
                    "coupling" => c.coupling = value.parse()?,
                    "seasonal_amplitude" => c.seasonal_amplitude = num(key, value)?,
                    "seasonal_peak_month" => c.seasonal_peak_month = num(key, value)?,
                    "base_monthly_hazard" => c.base_monthly_hazard = num(key, value)?,
                    "claim_prob" => c.claim_prob = num(key, value)?,
                    "switch_prob" => c.switch_prob = num(key, value)?,
                    "switch_lag_mean_days" => c.switch_lag_mean_days = num(key, value)?,
                    "wet_effect" => c.wet_effect = num(key, value)?,
                    "start_month" => {
                        c.start_month = value.parse().map_err(|_| format!("start_month: bad month {value:?}"))?
                    }
                    "months" => c.months = num(key, value)?,
                    "dry_only_share" => c.dry_only_share = num(key, value)?,
                    "wet_only_share" => c.wet_only_share = num(key, value)?,
                    "mixed_wet_min" => c.mixed_wet_min = num(key, value)?,
                    "mixed_wet_max" => c.mixed_wet_max = num(key, value)?,
                    "purchase_rate_min" => c.purchase_rate_min = num(key, value)?,
                    "purchase_rate_max" => c.purchase_rate_max = num(key, value)?,
                    "history_months" => c.history_months = num(key, value)?,
                    "churn_prob" => c.churn_prob = num(key, value)?,
                    "treat_prob" => c.treat_prob = num(key, value)?,
                    "target_first_share" => c.target_first_share = num(key, value)?,
                    "unclassified_share" => c.unclassified_share = num(key, value)?,
                    k => {
                        if let Some(ing) = k.strip_prefix("effect.") {
                            c.ingredient_effects.insert(ing.to_string(), num(k, value)?);
                        } else if let Some(ing) = k.strip_prefix("claim_effect.") {
                            c.claim_effects.insert(ing.to_string(), num(k, value)?);
                        } else {
                            return Err(format!("unknown key {k:?}"));
                        }
                    }
                }
                Ok(())
            })();
            r.map_err(err)?;
        }
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SynthError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Effects the insured population is exposed to.
    pub fn insured_effects(&self) -> &BTreeMap<String, f64> {
        match self.coupling {
            Coupling::Coupled => &self.ingredient_effects,
            Coupling::Decoupled => &self.claim_effects,
        }
    }
}
