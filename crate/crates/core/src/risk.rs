//! Switch and claim rates, per-ingredient risk screening, cross-source
//! validation and the wet-food dose-response analysis.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::cohort::{CohortAssignment, CohortGroup};
use crate::ingest::{normalize_token, Catalog, FoodForm, QuestionnaireGroup, QuestionnaireRecord};
use crate::numstat::{
    chi_squared_2x2_with, cochran_armitage, pearson, ChiSquaredOptions, StatError, TestResult, TrendGroup, TrendTable,
    TwoByTwoTable,
};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MIN_EXPOSURE: u64 = 50;

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("rate has an empty denominator")]
    EmptyDenominator,
    #[error("no ingredient is observed in both sources")]
    NoSharedIngredients,
    #[error("only {found} significant ingredients; at least {needed} are needed")]
    TooFewSignificant { found: usize, needed: usize },
    #[error("no wet or dry purchases in window")]
    NoFormKnownPurchases,
    #[error("dose-response needs at least 2 non-empty positive bins, found {non_empty}")]
    EmptyBins { non_empty: usize },
    #[error("category map line {line}: {message}")]
    BadCategoryMap { line: u64, message: String },
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl RiskError {
    pub fn kind(&self) -> &'static str {
        match self {
            RiskError::EmptyDenominator => "EmptyDenominator",
            RiskError::NoSharedIngredients => "NoSharedIngredients",
            RiskError::TooFewSignificant { .. } => "TooFewSignificant",
            RiskError::NoFormKnownPurchases => "NoFormKnownPurchases",
            RiskError::EmptyBins { .. } => "EmptyBins",
            RiskError::BadCategoryMap { .. } => "BadCategoryMap",
            RiskError::Classify(_) => "ClassifyError",
            RiskError::Stat(e) => e.kind(),
            RiskError::Io(_) => "IoError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub positives: u64,
    pub total: u64,
    pub rate: f64,
}

impl RateEstimate {
    pub fn new(positives: u64, negatives: u64) -> Result<Self, RiskError> {
        let total = positives + negatives;
        if total == 0 {
            return Err(RiskError::EmptyDenominator);
        }
        Ok(RateEstimate { positives, total, rate: positives as f64 / total as f64 })
    }
}

/// Share of purchase-log users who switched to a targeted diet.
pub fn switch_rate(cases: u64, controls: u64) -> Result<RateEstimate, RiskError> {
    RateEstimate::new(cases, controls)
}

/// Share of insured animals with a claim for the disease.
pub fn claim_rate(case_n: u64, control_n: u64) -> Result<RateEstimate, RiskError> {
    RateEstimate::new(case_n, control_n)
}

/// Which side's chi-squared test decides whether an ingredient is flagged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScreenSide {
    #[default]
    Claim,
    Ec,
    Both,
    Either,
}

impl std::str::FromStr for ScreenSide {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "claim" => Ok(ScreenSide::Claim),
            "ec" => Ok(ScreenSide::Ec),
            "both" => Ok(ScreenSide::Both),
            "either" => Ok(ScreenSide::Either),
            other => Err(format!("unknown screen side {other:?} (claim, ec, both, either)")),
        }
    }
}

/// Maps ingredient tokens onto coarser categories. Ingredients absent from
/// the map are left out of a categorised analysis.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryMap {
    map: BTreeMap<String, String>,
}

impl CategoryMap {
    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        CategoryMap {
            map: pairs.into_iter().map(|(a, b)| (normalize_token(a.as_ref()), normalize_token(b.as_ref()))).collect(),
        }
    }

    /// Reads a two-column `ingredient,category` CSV with a header row.
    pub fn read<R: Read>(r: R) -> Result<Self, RiskError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut map = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i as u64 + 2;
            let rec = rec.map_err(|e| RiskError::BadCategoryMap { line, message: e.to_string() })?;
            let (Some(ing), Some(cat)) = (rec.get(0), rec.get(1)) else {
                return Err(RiskError::BadCategoryMap { line, message: "expected 2 columns".into() });
            };
            let (ing, cat) = (normalize_token(ing), normalize_token(cat));
            if ing.is_empty() || cat.is_empty() {
                return Err(RiskError::BadCategoryMap { line, message: "empty field".into() });
            }
            if let Some(prev) = map.insert(ing.clone(), cat.clone()) {
                if prev != cat {
                    return Err(RiskError::BadCategoryMap {
                        line,
                        message: format!("{ing:?} mapped to both {prev:?} and {cat:?}"),
                    });
                }
            }
        }
        Ok(CategoryMap { map })
    }

    pub fn load(path: &Path) -> Result<Self, RiskError> {
        Self::read(std::fs::File::open(path)?)
    }

    pub fn get(&self, ingredient: &str) -> Option<&str> {
        self.map.get(ingredient).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskOptions {
    pub alpha: f64,
    pub min_exposure: u64,
    pub screen: ScreenSide,
    pub yates: bool,
    pub categories: Option<CategoryMap>,
}

impl Default for RiskOptions {
    fn default() -> Self {
        RiskOptions {
            alpha: DEFAULT_ALPHA,
            min_exposure: DEFAULT_MIN_EXPOSURE,
            screen: ScreenSide::Claim,
            yates: false,
            categories: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngredientRiskRow {
    pub ingredient: String,
    pub switch_rate: RateEstimate,
    pub claim_rate: RateEstimate,
    /// Claim-side test; None when a margin of the table is empty.
    pub chi2: Option<TestResult>,
    pub ec_chi2: Option<TestResult>,
    pub significant: bool,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    exposed_cases: u64,
    exposed_total: u64,
}

fn tally_table(t: Tally, cases: u64, total: u64) -> TwoByTwoTable {
    TwoByTwoTable::new(
        t.exposed_cases,
        t.exposed_total - t.exposed_cases,
        cases - t.exposed_cases,
        (total - cases) - (t.exposed_total - t.exposed_cases),
    )
}

fn map_tokens<'a>(tokens: impl Iterator<Item = &'a str>, categories: Option<&'a CategoryMap>) -> Vec<&'a str> {
    let mut out: Vec<&str> = match categories {
        Some(m) => tokens.filter_map(|t| m.get(t)).collect(),
        None => tokens.collect(),
    };
    out.sort_unstable();
    out.dedup();
    out
}

/// Ingredient tokens a cohort member was exposed to in their window.
pub fn window_exposure<'a>(a: &CohortAssignment, catalog: &'a Catalog) -> Result<Vec<&'a str>, RiskError> {
    let mut out = Vec::new();
    for p in &a.window_purchases {
        let entry =
            catalog.get(&p.product_id).ok_or_else(|| ClassifyError::UnknownProductId(p.product_id.to_string()))?;
        out.extend(entry.ingredients.iter().map(String::as_str));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Builds one row per ingredient seen in both sources with at least
/// `min_exposure` exposed members on each side, sorted by ingredient.
pub fn ingredient_risk_table(
    assignments: &[CohortAssignment],
    catalog: &Catalog,
    questionnaire: &[QuestionnaireRecord],
    opts: &RiskOptions,
) -> Result<Vec<IngredientRiskRow>, RiskError> {
    let cats = opts.categories.as_ref();
    let included: Vec<&CohortAssignment> = assignments.iter().filter(|a| a.is_included()).collect();

    let exposure = |a: &&CohortAssignment| -> Result<Vec<&str>, RiskError> {
        Ok(map_tokens(window_exposure(a, catalog)?.into_iter(), cats))
    };
    #[cfg(feature = "parallel")]
    let per_user: Vec<Vec<&str>> = {
        use rayon::prelude::*;
        included.par_iter().map(exposure).collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_user: Vec<Vec<&str>> = included.iter().map(exposure).collect::<Result<_, _>>()?;

    let mut ec: HashMap<&str, Tally> = HashMap::new();
    let mut ec_cases = 0u64;
    for (a, tokens) in included.iter().zip(&per_user) {
        let is_case = a.group == CohortGroup::Case;
        ec_cases += is_case as u64;
        for t in tokens {
            let e = ec.entry(t).or_default();
            e.exposed_total += 1;
            e.exposed_cases += is_case as u64;
        }
    }
    let ec_total = included.len() as u64;

    let mut claim: HashMap<&str, Tally> = HashMap::new();
    let mut claim_cases = 0u64;
    for q in questionnaire {
        let is_case = q.group == QuestionnaireGroup::Case;
        claim_cases += is_case as u64;
        for t in map_tokens(q.exposures.iter().map(String::as_str), cats) {
            let e = claim.entry(t).or_default();
            e.exposed_total += 1;
            e.exposed_cases += is_case as u64;
        }
    }
    let claim_total = questionnaire.len() as u64;

    let mut shared: Vec<&str> = ec.keys().copied().filter(|k| claim.contains_key(k)).collect();
    if shared.is_empty() {
        return Err(RiskError::NoSharedIngredients);
    }
    shared.sort_unstable();

    let chi = ChiSquaredOptions { yates: opts.yates };
    let mut rows = Vec::new();
    for ing in shared {
        let (e, c) = (ec[ing], claim[ing]);
        if e.exposed_total < opts.min_exposure || c.exposed_total < opts.min_exposure {
            continue;
        }
        let claim_chi2 = chi_squared_2x2_with(&tally_table(c, claim_cases, claim_total), chi).ok();
        let ec_chi2 = chi_squared_2x2_with(&tally_table(e, ec_cases, ec_total), chi).ok();
        let sig = |t: &Option<TestResult>| t.is_some_and(|t| t.p_value < opts.alpha);
        let significant = match opts.screen {
            ScreenSide::Claim => sig(&claim_chi2),
            ScreenSide::Ec => sig(&ec_chi2),
            ScreenSide::Both => sig(&claim_chi2) && sig(&ec_chi2),
            ScreenSide::Either => sig(&claim_chi2) || sig(&ec_chi2),
        };
        rows.push(IngredientRiskRow {
            ingredient: ing.to_string(),
            switch_rate: RateEstimate::new(e.exposed_cases, e.exposed_total - e.exposed_cases)?,
            claim_rate: RateEstimate::new(c.exposed_cases, c.exposed_total - c.exposed_cases)?,
            chi2: claim_chi2,
            ec_chi2,
            significant,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub ingredient: String,
    pub claim_rate: f64,
    pub switch_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub correlation: TestResult,
    pub n_rows: usize,
    pub scatter: Vec<ScatterPoint>,
}

/// Pearson correlation of claim rate against switch rate over the
/// significant rows.
pub fn validate_ingredients(rows: &[IngredientRiskRow]) -> Result<Validation, RiskError> {
    let scatter: Vec<ScatterPoint> = rows
        .iter()
        .filter(|r| r.significant)
        .map(|r| ScatterPoint {
            ingredient: r.ingredient.clone(),
            claim_rate: r.claim_rate.rate,
            switch_rate: r.switch_rate.rate,
        })
        .collect();
    if scatter.len() < 3 {
        return Err(RiskError::TooFewSignificant { found: scatter.len(), needed: 3 });
    }
    let x: Vec<f64> = scatter.iter().map(|p| p.claim_rate).collect();
    let y: Vec<f64> = scatter.iter().map(|p| p.switch_rate).collect();
    let correlation = pearson(&x, &y)?;
    Ok(Validation { correlation, n_rows: scatter.len(), scatter })
}

/// Wet and dry purchase events in a member's window.
pub fn form_counts(a: &CohortAssignment, catalog: &Catalog) -> Result<(u64, u64), RiskError> {
    let (mut wet, mut dry) = (0u64, 0u64);
    for p in &a.window_purchases {
        let entry =
            catalog.get(&p.product_id).ok_or_else(|| ClassifyError::UnknownProductId(p.product_id.to_string()))?;
        match entry.food_form {
            FoodForm::Wet => wet += 1,
            FoodForm::Dry => dry += 1,
            FoodForm::Other => {}
        }
    }
    Ok((wet, dry))
}

/// Share of wet-form events among wet and dry general purchases in window.
pub fn wet_rate(a: &CohortAssignment, catalog: &Catalog) -> Result<f64, RiskError> {
    let (wet, dry) = form_counts(a, catalog)?;
    if wet + dry == 0 {
        return Err(RiskError::NoFormKnownPurchases);
    }
    Ok(wet as f64 / (wet + dry) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WetBin {
    Exactly0,
    Le25,
    Le50,
    Le75,
    Lt100,
    Exactly100,
}

impl WetBin {
    pub const ALL: [WetBin; 6] =
        [WetBin::Exactly0, WetBin::Le25, WetBin::Le50, WetBin::Le75, WetBin::Lt100, WetBin::Exactly100];

    /// Bin for `wet` wet events out of `total` form-known events (total > 0).
    /// Integer comparisons keep the 25% edges exact.
    pub fn of_counts(wet: u64, total: u64) -> WetBin {
        debug_assert!(total > 0 && wet <= total);
        if wet == 0 {
            WetBin::Exactly0
        } else if wet == total {
            WetBin::Exactly100
        } else if 4 * wet <= total {
            WetBin::Le25
        } else if 2 * wet <= total {
            WetBin::Le50
        } else if 4 * wet <= 3 * total {
            WetBin::Le75
        } else {
            WetBin::Lt100
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WetBin::Exactly0 => "exactly0",
            WetBin::Le25 => "le25",
            WetBin::Le50 => "le50",
            WetBin::Le75 => "le75",
            WetBin::Lt100 => "lt100",
            WetBin::Exactly100 => "exactly100",
        }
    }

    /// Trend-test score; the dry-only bin does not take part.
    pub fn score(self) -> Option<f64> {
        match self {
            WetBin::Exactly0 => None,
            WetBin::Le25 => Some(1.0),
            WetBin::Le50 => Some(2.0),
            WetBin::Le75 => Some(3.0),
            WetBin::Lt100 => Some(4.0),
            WetBin::Exactly100 => Some(5.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WetRateBin {
    pub bin: WetBin,
    pub cases: u64,
    pub total: u64,
    /// None for an empty bin.
    pub switch_rate: Option<RateEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoseResponse {
    pub bins: Vec<WetRateBin>,
    pub trend: TestResult,
    /// switch rate of the le25 bin over that of the exactly100 bin.
    pub ratio: Option<f64>,
    /// Cohort members with no wet or dry purchase in window.
    pub no_form_known: usize,
}

/// Bins cohort members by wet rate and tests for a trend across the positive
/// bins.
pub fn dose_response(assignments: &[CohortAssignment], catalog: &Catalog) -> Result<DoseResponse, RiskError> {
    let mut counts = [(0u64, 0u64); 6];
    let mut no_form_known = 0;
    for a in assignments.iter().filter(|a| a.is_included()) {
        let (wet, dry) = form_counts(a, catalog)?;
        if wet + dry == 0 {
            no_form_known += 1;
            continue;
        }
        let slot = &mut counts[WetBin::of_counts(wet, wet + dry) as usize];
        slot.0 += (a.group == CohortGroup::Case) as u64;
        slot.1 += 1;
    }
    let bins: Vec<WetRateBin> = WetBin::ALL
        .iter()
        .zip(counts)
        .map(|(&bin, (cases, total))| WetRateBin {
            bin,
            cases,
            total,
            switch_rate: RateEstimate::new(cases, total - cases).ok(),
        })
        .collect();
    let groups: Vec<TrendGroup> = bins
        .iter()
        .filter(|b| b.total > 0)
        .filter_map(|b| b.bin.score().map(|score| TrendGroup { score, cases: b.cases, total: b.total }))
        .collect();
    if groups.len() < 2 {
        return Err(RiskError::EmptyBins { non_empty: groups.len() });
    }
    let trend = cochran_armitage(&TrendTable::new(groups)?)?;
    let rate = |b: WetBin| bins[b as usize].switch_rate.map(|r| r.rate);
    let ratio = match (rate(WetBin::Le25), rate(WetBin::Exactly100)) {
        (Some(lo), Some(hi)) if hi > 0.0 => Some(lo / hi),
        _ => None,
    };
    Ok(DoseResponse { bins, trend, ratio, no_form_known })
}

fn opt_f64(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn write_risk_table<W: Write>(w: W, rows: &[IngredientRiskRow]) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record([
        "ingredient",
        "ec_cases",
        "ec_total",
        "switch_rate",
        "claim_cases",
        "claim_total",
        "claim_rate",
        "chi2",
        "p",
        "significant",
    ])?;
    for r in rows {
        wtr.write_record([
            r.ingredient.clone(),
            r.switch_rate.positives.to_string(),
            r.switch_rate.total.to_string(),
            r.switch_rate.rate.to_string(),
            r.claim_rate.positives.to_string(),
            r.claim_rate.total.to_string(),
            r.claim_rate.rate.to_string(),
            opt_f64(r.chi2.map(|t| t.statistic)),
            opt_f64(r.chi2.map(|t| t.p_value)),
            r.significant.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_scatter<W: Write>(w: W, points: &[ScatterPoint]) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["ingredient", "claim_rate", "switch_rate"])?;
    for p in points {
        wtr.write_record([p.ingredient.clone(), p.claim_rate.to_string(), p.switch_rate.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_dose_response<W: Write>(w: W, bins: &[WetRateBin]) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["bin", "cases", "total", "rate"])?;
    for b in bins {
        wtr.write_record([
            b.bin.as_str().to_string(),
            b.cases.to_string(),
            b.total.to_string(),
            opt_f64(b.switch_rate.map(|r| r.rate)),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{partition_catalog, KeywordRuleSet};
    use crate::cohort::{assign_all, CohortConfig};
    use crate::ingest::{Category, ProductEntry, PurchaseRecord};
    use chrono::NaiveDate;
    use std::collections::BTreeSet;

    #[test]
    fn rate_examples() {
        let r = switch_rate(4328, 51317).unwrap();
        assert_eq!(r.total, 55645);
        assert!((r.rate - 0.07778).abs() < 5e-6);
        assert_eq!(switch_rate(0, 7).unwrap().rate, 0.0);
        assert_eq!(switch_rate(7, 0).unwrap().rate, 1.0);
        assert!(matches!(switch_rate(0, 0), Err(RiskError::EmptyDenominator)));

        let c = claim_rate(296, 9158).unwrap();
        assert_eq!(c.total, 9454);
        assert!((c.rate - 0.03131).abs() < 5e-6);
        assert_eq!(claim_rate(0, 9158).unwrap().rate, 0.0);
        assert_eq!(claim_rate(40, 40).unwrap().rate, 0.5);
    }

    #[test]
    fn bins_partition_unit_interval() {
        assert_eq!(WetBin::of_counts(0, 5), WetBin::Exactly0);
        assert_eq!(WetBin::of_counts(1, 4), WetBin::Le25);
        assert_eq!(WetBin::of_counts(2, 7), WetBin::Le50);
        assert_eq!(WetBin::of_counts(2, 4), WetBin::Le50);
        assert_eq!(WetBin::of_counts(3, 4), WetBin::Le75);
        assert_eq!(WetBin::of_counts(4, 5), WetBin::Lt100);
        assert_eq!(WetBin::of_counts(5, 5), WetBin::Exactly100);
        for total in 1..60u64 {
            for wet in 0..=total {
                let bin = WetBin::of_counts(wet, total);
                let w = wet as f64 / total as f64;
                let want = if w == 0.0 {
                    WetBin::Exactly0
                } else if w == 1.0 {
                    WetBin::Exactly100
                } else if w <= 0.25 {
                    WetBin::Le25
                } else if w <= 0.5 {
                    WetBin::Le50
                } else if w <= 0.75 {
                    WetBin::Le75
                } else {
                    WetBin::Lt100
                };
                assert_eq!(bin, want, "{wet}/{total}");
            }
        }
    }

    #[test]
    fn ratio_definition() {
        let r: f64 = 0.0296 / 0.0200;
        assert!((r - 1.48).abs() < 1e-12);
    }

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    struct Fixture {
        catalog: Catalog,
        assignments: Vec<CohortAssignment>,
    }

    /// Users u0..: each buys `wet` wet and `dry` dry general products, and
    /// optionally a therapeutic target product later.
    fn fixture(users: &[(u64, u64, bool)]) -> Fixture {
        let catalog = Catalog::from_entries([
            ProductEntry::new("w", "Wet Chicken", Category::General, FoodForm::Wet, ["chicken", "rice"]),
            ProductEntry::new("d", "Dry Fish", Category::General, FoodForm::Dry, ["fish"]),
            ProductEntry::new("t", "Treat", Category::General, FoodForm::Other, ["liver"]),
            ProductEntry::new("x", "Urinary Care", Category::Therapeutic, FoodForm::Dry, ["chicken"]),
        ])
        .unwrap();
        let mut purchases = Vec::new();
        for (i, &(wet, dry, case)) in users.iter().enumerate() {
            let uid = format!("u{i:04}");
            let mut day = d("2020-01-01");
            for (pid, n) in [("w", wet), ("d", dry)] {
                for _ in 0..n {
                    purchases.push(PurchaseRecord {
                        user_id: uid.as_str().into(),
                        date: day,
                        product_id: pid.into(),
                        quantity: 1,
                    });
                    day = day.succ_opt().unwrap();
                }
            }
            purchases.push(PurchaseRecord {
                user_id: uid.as_str().into(),
                date: day,
                product_id: "t".into(),
                quantity: 1,
            });
            if case {
                purchases.push(PurchaseRecord {
                    user_id: uid.as_str().into(),
                    date: d("2020-06-01"),
                    product_id: "x".into(),
                    quantity: 1,
                });
            }
        }
        purchases.sort();
        let partition = partition_catalog(&catalog, &KeywordRuleSet::default_rules());
        let assignments = assign_all(&purchases, &partition, &CohortConfig::default());
        Fixture { catalog, assignments }
    }

    #[test]
    fn wet_rate_counts_events_and_ignores_other() {
        let f = fixture(&[(3, 1, false), (0, 2, false), (2, 0, true)]);
        let rates: Vec<f64> = f.assignments.iter().map(|a| wet_rate(a, &f.catalog).unwrap()).collect();
        assert_eq!(rates, vec![0.75, 0.0, 1.0]);
    }

    #[test]
    fn wet_rate_without_known_forms() {
        let catalog =
            Catalog::from_entries([ProductEntry::new("t", "Treat", Category::General, FoodForm::Other, ["liver"])])
                .unwrap();
        let a = CohortAssignment {
            user_id: "u".into(),
            group: CohortGroup::Control,
            window: None,
            first_target_date: None,
            exclusion: None,
            window_purchases: vec![PurchaseRecord {
                user_id: "u".into(),
                date: d("2020-01-01"),
                product_id: "t".into(),
                quantity: 1,
            }],
        };
        assert!(matches!(wet_rate(&a, &catalog), Err(RiskError::NoFormKnownPurchases)));
    }

    #[test]
    fn dose_response_bins_reconcile() {
        let mut users = Vec::new();
        for i in 0..40 {
            users.push((1, 4, i % 4 == 0)); // 20%
            users.push((4, 0, i % 8 == 0)); // 100%
            users.push((3, 2, i % 5 == 0)); // 60%
            users.push((0, 3, i % 2 == 0)); // 0%
        }
        let f = fixture(&users);
        let dr = dose_response(&f.assignments, &f.catalog).unwrap();
        let included = f.assignments.iter().filter(|a| a.is_included()).count();
        assert_eq!(dr.bins.iter().map(|b| b.total).sum::<u64>() as usize + dr.no_form_known, included);
        assert_eq!(dr.bins[WetBin::Le25 as usize].total, 40);
        assert_eq!(dr.bins[WetBin::Le25 as usize].cases, 10);
        assert_eq!(dr.bins[WetBin::Exactly100 as usize].cases, 5);
        assert!((dr.ratio.unwrap() - 2.0).abs() < 1e-12);

        // oracle: CA over le25 (score 1), le75 (score 3), exactly100 (score 5)
        let want = cochran_armitage(
            &TrendTable::new(vec![
                TrendGroup { score: 1.0, cases: 10, total: 40 },
                TrendGroup { score: 3.0, cases: 8, total: 40 },
                TrendGroup { score: 5.0, cases: 5, total: 40 },
            ])
            .unwrap(),
        )
        .unwrap();
        assert_eq!(dr.trend, want);
        assert!(dr.trend.statistic < 0.0);
    }

    #[test]
    fn dose_response_needs_two_positive_bins() {
        let f = fixture(&[(0, 2, true), (0, 3, false), (2, 0, false)]);
        assert!(matches!(dose_response(&f.assignments, &f.catalog), Err(RiskError::EmptyBins { non_empty: 1 })));
    }

    fn questionnaire(rows: &[(bool, &[&str], usize)]) -> Vec<QuestionnaireRecord> {
        let mut out = Vec::new();
        for &(case, exp, n) in rows {
            for _ in 0..n {
                out.push(QuestionnaireRecord {
                    animal_id: format!("a{}", out.len()),
                    group: if case { QuestionnaireGroup::Case } else { QuestionnaireGroup::Control },
                    exposures: exp.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
                });
            }
        }
        out
    }

    #[test]
    fn risk_table_claim_side_chi2() {
        let f = fixture(&[(1, 1, true), (1, 1, false), (0, 2, false)]);
        // chicken: exposed 20 cases / 80 controls, unexposed 10 / 90
        let q = questionnaire(&[
            (true, &["chicken"], 20),
            (false, &["chicken"], 80),
            (true, &["fish"], 10),
            (false, &["fish"], 90),
        ]);
        let opts = RiskOptions { min_exposure: 1, ..Default::default() };
        let rows = ingredient_risk_table(&f.assignments, &f.catalog, &q, &opts).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.ingredient.as_str()).collect();
        // liver only comes from "other" products bought by everyone; not in the questionnaire
        assert_eq!(names, ["chicken", "fish"]);
        let chicken = &rows[0];
        let chi2 = chicken.chi2.unwrap();
        assert!((chi2.statistic - 3.9216).abs() < 1e-4);
        assert!(chicken.significant);
        assert_eq!(chicken.claim_rate.positives, 20);
        assert_eq!(chicken.claim_rate.total, 100);
        assert_eq!(chicken.switch_rate.positives, 1);
        assert_eq!(chicken.switch_rate.total, 2);
        for r in &rows {
            assert_eq!(r.significant, r.chi2.is_some_and(|t| t.p_value < 0.05));
        }
    }

    #[test]
    fn risk_table_thresholds_and_errors() {
        let f = fixture(&[(1, 1, true), (1, 1, false), (0, 2, false)]);
        let q = questionnaire(&[(true, &["chicken"], 3), (false, &["beef"], 3)]);
        let opts = RiskOptions { min_exposure: 1, ..Default::default() };
        let rows = ingredient_risk_table(&f.assignments, &f.catalog, &q, &opts).unwrap();
        assert_eq!(rows.len(), 1);
        // every questionnaire animal with chicken is a case: empty control column among exposed is fine,
        // but the column margins are both non-zero so the test still runs
        assert!(rows[0].chi2.is_some());

        let opts = RiskOptions { min_exposure: 4, ..Default::default() };
        assert!(ingredient_risk_table(&f.assignments, &f.catalog, &q, &opts).unwrap().is_empty());

        let q = questionnaire(&[(true, &["beef"], 3)]);
        assert!(matches!(
            ingredient_risk_table(&f.assignments, &f.catalog, &q, &RiskOptions::default()),
            Err(RiskError::NoSharedIngredients)
        ));
    }

    #[test]
    fn risk_table_with_categories() {
        let f = fixture(&[(1, 1, true), (1, 1, false), (0, 2, false)]);
        let q = questionnaire(&[(true, &["chicken"], 3), (false, &["fish"], 3)]);
        let cats = CategoryMap::read("ingredient,category\nChicken,meat\nfish,seafood\n".as_bytes()).unwrap();
        let opts = RiskOptions { min_exposure: 1, categories: Some(cats), ..Default::default() };
        let rows = ingredient_risk_table(&f.assignments, &f.catalog, &q, &opts).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.ingredient.as_str()).collect();
        assert_eq!(names, ["meat", "seafood"]);
        assert!(CategoryMap::read("ingredient,category\nfish,a\nfish,b\n".as_bytes()).is_err());
    }

    #[test]
    fn risk_table_order_independent() {
        let f = fixture(&[(1, 1, true), (1, 1, false), (0, 2, false), (2, 0, true)]);
        let q = questionnaire(&[(true, &["chicken", "fish"], 5), (false, &["fish"], 7), (false, &["chicken"], 2)]);
        let opts = RiskOptions { min_exposure: 1, ..Default::default() };
        let a = ingredient_risk_table(&f.assignments, &f.catalog, &q, &opts).unwrap();
        let mut rev_assign = f.assignments.clone();
        rev_assign.reverse();
        let mut rev_q = q.clone();
        rev_q.reverse();
        let b = ingredient_risk_table(&rev_assign, &f.catalog, &rev_q, &opts).unwrap();
        assert_eq!(a, b);
    }

    fn row(name: &str, claim: f64, switch: f64, significant: bool) -> IngredientRiskRow {
        let rate = |r: f64| RateEstimate { positives: (r * 1000.0) as u64, total: 1000, rate: r };
        IngredientRiskRow {
            ingredient: name.into(),
            switch_rate: rate(switch),
            claim_rate: rate(claim),
            chi2: None,
            ec_chi2: None,
            significant,
        }
    }

    #[test]
    fn validation_identity_and_errors() {
        let rows = vec![
            row("a", 0.1, 0.1, true),
            row("b", 0.2, 0.2, true),
            row("c", 0.35, 0.35, true),
            row("d", 0.9, 0.0, false),
        ];
        let v = validate_ingredients(&rows).unwrap();
        assert!((v.correlation.statistic - 1.0).abs() < 1e-12);
        assert_eq!(v.n_rows, 3);
        let mut shuffled = rows.clone();
        shuffled.swap(0, 2);
        shuffled[1].ingredient = "renamed".into();
        let w = validate_ingredients(&shuffled).unwrap();
        assert!((w.correlation.statistic - v.correlation.statistic).abs() < 1e-14);
        assert!(matches!(validate_ingredients(&rows[..2]), Err(RiskError::TooFewSignificant { found: 2, .. })));
    }

    #[test]
    fn csv_outputs() {
        let rows = vec![row("a", 0.1, 0.2, true)];
        let mut buf = Vec::new();
        write_risk_table(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "ingredient,ec_cases,ec_total,switch_rate,claim_cases,claim_total,claim_rate,chi2,p,significant\n"
        ));
        assert!(text.contains("a,200,1000,0.2,100,1000,0.1,,,true\n"));
    }
}
