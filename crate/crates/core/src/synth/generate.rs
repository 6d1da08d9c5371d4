use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::Serialize;

use super::config::GeneratorConfig;
use super::names::{ingredient_names, BRANDS, FLAVORS, LINES, TARGET_STEMS, TREAT_STEMS, UNMATCHED_STEMS};
use super::rng::Stream;
use super::SynthError;
use crate::cohort::{CohortGroup, ExclusionReason};
use crate::ingest::{
    write_catalog, write_claim_series, write_purchases, write_questionnaire, Catalog, Category, ClaimSeriesRow,
    FoodForm, ProductEntry, ProductId, PurchaseRecord, QuestionnaireGroup, QuestionnaireRecord, UserId, YearMonth,
};

pub const DAYS_PER_MONTH: f64 = 30.44;
const TREAT_RATE_PER_MONTH: f64 = 0.5;
const MAX_TARGET_PURCHASES: usize = 6;
const REPEAT_QUANTITY_PROB: f64 = 0.15;
/// Purchase history a user accumulates before onset becomes possible, so
/// that cases and controls have equally long analysis windows.
const HISTORY_BEFORE_RISK_DAYS: f64 = 365.0;

#[derive(Debug, Clone)]
pub struct SynthProduct {
    pub id: ProductId,
    pub ingredients: Vec<u32>,
}

/// Generated catalog with index lists for each product family.
#[derive(Debug, Clone)]
pub struct SynthCatalog {
    pub ingredients: Vec<String>,
    pub products: Vec<SynthProduct>,
    pub dry: Vec<usize>,
    pub wet: Vec<usize>,
    pub targets: Vec<usize>,
    pub unmatched: Vec<usize>,
    pub treats: Vec<usize>,
    pub catalog: Catalog,
}

fn draw_ingredients(cfg: &GeneratorConfig, s: &mut Stream) -> Vec<u32> {
    let span = (cfg.max_ingredients_per_product - cfg.min_ingredients_per_product + 1) as u64;
    let k = cfg.min_ingredients_per_product + s.below(span) as usize;
    let mut v: Vec<u32> = s.distinct(cfg.n_ingredients, k).into_iter().map(|i| i as u32).collect();
    v.sort_unstable();
    v
}

pub fn build_catalog(cfg: &GeneratorConfig) -> Result<SynthCatalog, SynthError> {
    let ingredients = ingredient_names(cfg.n_ingredients);
    let mut s = Stream::derive(cfg.seed, "catalog", 0);
    let mut entries = Vec::new();
    let mut products = Vec::new();
    let (mut dry, mut wet, mut targets, mut unmatched, mut treats) = (vec![], vec![], vec![], vec![], vec![]);
    let n_wet = (cfg.n_general_products as f64 * cfg.wet_product_share).round() as usize;

    let mut push = |id: String, name: String, category: Category, form: FoodForm, ings: Vec<u32>| {
        let names: Vec<&str> = ings.iter().map(|&i| ingredients[i as usize].as_str()).collect();
        entries.push(ProductEntry::new(&id, &name, category, form, names));
        products.push(SynthProduct { id: ProductId::new(&id), ingredients: ings });
        products.len() - 1
    };

    for i in 0..cfg.n_general_products {
        let is_wet = i < n_wet;
        let name = format!(
            "{} {} {} {}",
            s.pick(&BRANDS),
            s.pick(&LINES),
            s.pick(&FLAVORS),
            if is_wet { "Wet Pouch" } else { "Dry Food" }
        );
        let ings = draw_ingredients(cfg, &mut s);
        let form = if is_wet { FoodForm::Wet } else { FoodForm::Dry };
        let idx = push(format!("g{i:05}"), name, Category::General, form, ings);
        if is_wet {
            wet.push(idx)
        } else {
            dry.push(idx)
        }
    }
    for i in 0..cfg.n_target_products {
        let stem = TARGET_STEMS[i % TARGET_STEMS.len()];
        let is_wet = s.bernoulli(0.3);
        let name = format!("{} {} {}", s.pick(&BRANDS), stem, s.pick(&FLAVORS));
        let ings = draw_ingredients(cfg, &mut s);
        let form = if is_wet { FoodForm::Wet } else { FoodForm::Dry };
        targets.push(push(format!("t{i:03}"), name, Category::Therapeutic, form, ings));
    }
    for i in 0..cfg.n_unmatched_products {
        let stem = UNMATCHED_STEMS[i % UNMATCHED_STEMS.len()];
        let name = format!("{} {} {}", s.pick(&BRANDS), stem, s.pick(&FLAVORS));
        let ings = draw_ingredients(cfg, &mut s);
        unmatched.push(push(format!("x{i:03}"), name, Category::Therapeutic, FoodForm::Dry, ings));
    }
    for i in 0..cfg.n_treat_products {
        let stem = TREAT_STEMS[i % TREAT_STEMS.len()];
        let name = format!("{} {} {}", s.pick(&BRANDS), stem, s.pick(&FLAVORS));
        let ings = draw_ingredients(cfg, &mut s);
        treats.push(push(format!("r{i:03}"), name, Category::General, FoodForm::Other, ings));
    }
    let catalog = Catalog::from_entries(entries).map_err(|e| SynthError::Internal(e.to_string()))?;
    // share the catalog's interned ids
    for p in &mut products {
        p.id = catalog.get(&p.id).expect("just inserted").product_id.clone();
    }
    Ok(SynthCatalog { ingredients, products, dry, wet, targets, unmatched, treats, catalog })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DietKind {
    DryOnly,
    WetOnly,
    Mixed,
}

/// Regular products with their purchase rates (events per month), the planted
/// wet rate and an optional treat.
#[derive(Debug, Clone)]
pub struct Diet {
    pub kind: DietKind,
    pub products: Vec<(usize, f64)>,
    pub treat: Option<usize>,
    pub wet_rate: f64,
    pub exposures: Vec<u32>,
}

pub fn sample_diet(cfg: &GeneratorConfig, cat: &SynthCatalog, s: &mut Stream) -> Diet {
    let u = s.uniform();
    let rate = s.uniform_range(cfg.purchase_rate_min, cfg.purchase_rate_max);
    let two = |s: &mut Stream, pool: &[usize]| {
        let idx = s.distinct(pool.len(), 2);
        (pool[idx[0]], pool[idx[1]])
    };
    let (kind, products, wet_rate) = if u < cfg.dry_only_share {
        let (a, b) = two(s, &cat.dry);
        (DietKind::DryOnly, vec![(a, rate / 2.0), (b, rate / 2.0)], 0.0)
    } else if u < cfg.dry_only_share + cfg.wet_only_share {
        let (a, b) = two(s, &cat.wet);
        (DietKind::WetOnly, vec![(a, rate / 2.0), (b, rate / 2.0)], 1.0)
    } else {
        let w = s.uniform_range(cfg.mixed_wet_min, cfg.mixed_wet_max);
        let d = *s.pick(&cat.dry);
        let wt = *s.pick(&cat.wet);
        (DietKind::Mixed, vec![(d, rate * (1.0 - w)), (wt, rate * w)], w)
    };
    let treat = (!cat.treats.is_empty() && s.bernoulli(cfg.treat_prob)).then(|| *s.pick(&cat.treats));
    let mut exposures: Vec<u32> =
        products.iter().map(|p| p.0).chain(treat).flat_map(|p| cat.products[p].ingredients.iter().copied()).collect();
    exposures.sort_unstable();
    exposures.dedup();
    Diet { kind, products, treat, wet_rate, exposures }
}

impl Diet {
    /// All purchased general products with their rates, treat last.
    pub fn schedule(&self) -> Vec<(usize, f64)> {
        let mut v = self.products.clone();
        if let Some(t) = self.treat {
            v.push((t, TREAT_RATE_PER_MONTH));
        }
        v
    }
}

/// Shared per-run quantities: month boundaries and the hazard terms. Month
/// indices count from the start of the history; day offsets count from the
/// first day of `start_month`, so history days are negative.
#[derive(Debug, Clone)]
pub struct Timeline {
    pub start: NaiveDate,
    pub first_month: YearMonth,
    /// Index of `start_month`.
    pub history: usize,
    /// Day offset of the first day of each month, plus the end of the range.
    pub month_starts: Vec<f64>,
    /// Calendar month (0-based) of each simulated month.
    pub calendar: Vec<usize>,
    pub end_day: f64,
}

impl Timeline {
    pub fn new(cfg: &GeneratorConfig) -> Self {
        let start = cfg.start_month.first_day();
        let history = cfg.history_months as usize;
        let first_month = cfg.start_month.add_months(-(history as i64));
        let total = history as i64 + cfg.months as i64;
        let month_starts: Vec<f64> =
            (0..=total).map(|m| (first_month.add_months(m).first_day() - start).num_days() as f64).collect();
        let calendar = (0..total).map(|m| first_month.add_months(m).month() as usize - 1).collect();
        let end_day = *month_starts.last().expect("months > 0");
        Timeline { start, first_month, history, month_starts, calendar, end_day }
    }

    pub fn n_months(&self) -> usize {
        self.calendar.len()
    }

    pub fn first_day(&self) -> f64 {
        self.month_starts[0]
    }

    pub fn month(&self, index: usize) -> YearMonth {
        self.first_month.add_months(index as i64)
    }

    pub fn month_of_day(&self, day: f64) -> usize {
        self.month_starts.partition_point(|&s| s <= day).saturating_sub(1)
    }

    pub fn date(&self, day: f64) -> NaiveDate {
        let d = day.floor() as i64;
        if d >= 0 {
            self.start + Days::new(d as u64)
        } else {
            self.start - Days::new(d.unsigned_abs())
        }
    }
}

/// Seasonal log-odds shift for each calendar month, January first.
pub fn seasonal_terms(cfg: &GeneratorConfig) -> [f64; 12] {
    std::array::from_fn(|m| {
        let cm = (m + 1) as f64;
        cfg.seasonal_amplitude * (std::f64::consts::TAU * (cm - cfg.seasonal_peak_month) / 12.0).cos()
    })
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn effect_vector(names: &[String], effects: &BTreeMap<String, f64>) -> Vec<f64> {
    names.iter().map(|n| effects.get(n).copied().unwrap_or(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UserKind {
    Regular,
    TargetFirst,
    Unclassified,
}

/// Everything about a user that is fixed before the hazard is applied.
#[derive(Debug, Clone)]
pub struct UserPlan {
    pub kind: UserKind,
    pub diet: Diet,
    pub join_day: f64,
    /// First-purchase offset of each scheduled product, in `diet.schedule()` order.
    pub phases: Vec<f64>,
    pub churn_day: Option<f64>,
    /// Months in which onset can occur: a year after every product has been
    /// bought once, and before churn.
    pub active_months: std::ops::Range<usize>,
}

fn interval_days(rate_per_month: f64) -> f64 {
    DAYS_PER_MONTH / rate_per_month
}

pub fn plan_user(cfg: &GeneratorConfig, cat: &SynthCatalog, tl: &Timeline, s: &mut Stream) -> UserPlan {
    let u = s.uniform();
    let kind = if u < cfg.target_first_share {
        UserKind::TargetFirst
    } else if u < cfg.target_first_share + cfg.unclassified_share {
        UserKind::Unclassified
    } else {
        UserKind::Regular
    };
    let diet = sample_diet(cfg, cat, s);
    let join_day = if tl.history > 0 {
        s.uniform_range(tl.first_day(), 0.0)
    } else {
        s.uniform_range(0.0, 30.0f64.min(tl.end_day - 1.0))
    };
    let phases: Vec<f64> =
        diet.schedule().iter().map(|&(_, rate)| s.uniform_range(0.0, interval_days(rate).min(30.0))).collect();
    let established = join_day + phases.iter().copied().fold(0.0, f64::max) + HISTORY_BEFORE_RISK_DAYS;
    let churn_day = if s.bernoulli(cfg.churn_prob) && established < tl.end_day {
        Some(s.uniform_range(established, tl.end_day))
    } else {
        None
    };
    let first = tl.month_of_day(established) + 1;
    let last = churn_day.map_or(tl.n_months(), |c| tl.month_of_day(c));
    UserPlan { kind, diet, join_day, phases, churn_day, active_months: first..last.max(first) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntendedGroup {
    Case,
    Control,
    TargetFirst,
    NoGeneralPurchases,
}

impl IntendedGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            IntendedGroup::Case => "case",
            IntendedGroup::Control => "control",
            IntendedGroup::TargetFirst => "excluded_target_first",
            IntendedGroup::NoGeneralPurchases => "excluded_no_general",
        }
    }

    pub fn cohort_group(self) -> CohortGroup {
        match self {
            IntendedGroup::Case => CohortGroup::Case,
            IntendedGroup::Control => CohortGroup::Control,
            _ => CohortGroup::Excluded,
        }
    }

    pub fn exclusion(self) -> Option<ExclusionReason> {
        match self {
            IntendedGroup::TargetFirst => Some(ExclusionReason::TargetFirst),
            IntendedGroup::NoGeneralPurchases => Some(ExclusionReason::NoGeneralPurchases),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserTruth {
    pub user_id: UserId,
    pub intended: IntendedGroup,
    pub diet: DietKind,
    pub onset_month: Option<YearMonth>,
    pub wet_rate: f64,
    /// Ingredient indices into `GroundTruth::ingredients`.
    pub exposures: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InsuredTruth {
    pub animal_id: String,
    pub onset_month: Option<YearMonth>,
    pub enrolled: bool,
    /// Month the claim was filed; at or after the onset month.
    pub claim_month: Option<YearMonth>,
    pub wet_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub ingredients: Vec<String>,
    pub effects: Vec<f64>,
    pub insured_effects: Vec<f64>,
    pub seasonal: [f64; 12],
    pub users: Vec<UserTruth>,
    pub insured: Vec<InsuredTruth>,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub config: GeneratorConfig,
    pub catalog: Catalog,
    pub purchases: Vec<PurchaseRecord>,
    pub claims: Vec<ClaimSeriesRow>,
    pub questionnaire: Vec<QuestionnaireRecord>,
    pub truth: GroundTruth,
}

struct Hazard<'a> {
    base_logit: f64,
    effects: &'a [f64],
    wet_effect: f64,
    seasonal: [f64; 12],
}

impl Hazard<'_> {
    fn offset(&self, diet: &Diet) -> f64 {
        self.base_logit
            + diet.exposures.iter().map(|&i| self.effects[i as usize]).sum::<f64>()
            + self.wet_effect * diet.wet_rate
    }

    /// First month in `months` with an onset.
    fn draw_onset(&self, diet: &Diet, months: std::ops::Range<usize>, tl: &Timeline, s: &mut Stream) -> Option<usize> {
        let off = self.offset(diet);
        months.into_iter().find(|&m| s.uniform() < logistic(off + self.seasonal[tl.calendar[m]]))
    }
}

fn id_width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(6)
}

struct UserOutput {
    records: Vec<PurchaseRecord>,
    truth: UserTruth,
}

fn purchase(user: &UserId, tl: &Timeline, day: f64, product: &ProductId, s: &mut Stream) -> PurchaseRecord {
    PurchaseRecord {
        user_id: user.clone(),
        date: tl.date(day),
        product_id: product.clone(),
        quantity: if s.bernoulli(REPEAT_QUANTITY_PROB) { 2 } else { 1 },
    }
}

fn simulate_user(
    index: usize,
    cfg: &GeneratorConfig,
    cat: &SynthCatalog,
    tl: &Timeline,
    hazard: &Hazard,
    width: usize,
) -> UserOutput {
    let mut s = Stream::derive(cfg.seed, "user", index as u64);
    let plan = plan_user(cfg, cat, tl, &mut s);
    let user_id = UserId::new(&format!("u{index:0width$}"));
    let schedule = plan.diet.schedule();
    let stop_default = plan.churn_day.unwrap_or(tl.end_day);
    let mut records = Vec::new();
    let mut general_from = plan.join_day;
    let mut general_until = stop_default;
    let mut onset_month = None;

    let intended = match plan.kind {
        UserKind::Regular => {
            let mut intended = IntendedGroup::Control;
            if let Some(m) = hazard.draw_onset(&plan.diet, plan.active_months.clone(), tl, &mut s) {
                onset_month = Some(tl.month(m));
                let onset_day = s.uniform_range(tl.month_starts[m], tl.month_starts[m + 1]);
                let switches = s.bernoulli(cfg.switch_prob);
                let lag = s.exponential(cfg.switch_lag_mean_days);
                if switches {
                    general_until = onset_day;
                    let target = cat.products[*s.pick(&cat.targets)].id.clone();
                    let mut day = onset_day + lag;
                    if day < tl.end_day {
                        intended = IntendedGroup::Case;
                    }
                    while day < tl.end_day && records.len() < MAX_TARGET_PURCHASES {
                        records.push(purchase(&user_id, tl, day, &target, &mut s));
                        day += DAYS_PER_MONTH;
                    }
                }
            }
            intended
        }
        UserKind::TargetFirst => {
            let target = cat.products[*s.pick(&cat.targets)].id.clone();
            let day = plan.join_day + s.uniform_range(0.0, 10.0);
            records.push(purchase(&user_id, tl, day, &target, &mut s));
            general_from = day.floor() + 15.0;
            IntendedGroup::TargetFirst
        }
        UserKind::Unclassified => {
            let product = cat.products[*s.pick(&cat.unmatched)].id.clone();
            let mut day = plan.join_day;
            while day < stop_default {
                records.push(purchase(&user_id, tl, day, &product, &mut s));
                day += DAYS_PER_MONTH;
            }
            general_until = general_from;
            IntendedGroup::NoGeneralPurchases
        }
    };

    for (&(p, rate), &phase) in schedule.iter().zip(&plan.phases) {
        let id = &cat.products[p].id;
        let step = interval_days(rate);
        let mut day = general_from + phase;
        while day < general_until {
            records.push(purchase(&user_id, tl, day, id, &mut s));
            day += step;
        }
    }
    records.sort();
    let exposures = if plan.kind == UserKind::Unclassified { Vec::new() } else { plan.diet.exposures.clone() };
    UserOutput {
        records,
        truth: UserTruth {
            user_id,
            intended,
            diet: plan.diet.kind,
            onset_month,
            wet_rate: plan.diet.wet_rate,
            exposures,
        },
    }
}

struct InsuredOutput {
    record: QuestionnaireRecord,
    truth: InsuredTruth,
    claim_month: Option<usize>,
}

fn simulate_insured(
    index: usize,
    cfg: &GeneratorConfig,
    cat: &SynthCatalog,
    tl: &Timeline,
    hazard: &Hazard,
    width: usize,
) -> InsuredOutput {
    let mut s = Stream::derive(cfg.seed, "insured", index as u64);
    let diet = sample_diet(cfg, cat, &mut s);
    let onset = hazard.draw_onset(&diet, 0..tl.n_months(), tl, &mut s);
    // an onset during the history means the animal was never enrolled
    let enrolled = onset.map_or(true, |m| m >= tl.history);
    // claims are filed after the same kind of delay as a diet switch
    let claim_month = onset.filter(|_| enrolled && s.bernoulli(cfg.claim_prob)).and_then(|m| {
        let day = s.uniform_range(tl.month_starts[m], tl.month_starts[m + 1]) + s.exponential(cfg.switch_lag_mean_days);
        (day < tl.end_day).then(|| tl.month_of_day(day))
    });
    let animal_id = format!("a{index:0width$}");
    let record = QuestionnaireRecord {
        animal_id: animal_id.clone(),
        group: if claim_month.is_some() { QuestionnaireGroup::Case } else { QuestionnaireGroup::Control },
        exposures: diet.exposures.iter().map(|&i| cat.ingredients[i as usize].clone()).collect(),
    };
    InsuredOutput {
        record,
        truth: InsuredTruth {
            animal_id,
            onset_month: onset.map(|m| tl.month(m)),
            enrolled,
            claim_month: claim_month.map(|m| tl.month(m)),
            wet_rate: diet.wet_rate,
        },
        claim_month: claim_month.map(|m| m - tl.history),
    }
}

fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Generates a full dataset bundle. The output depends only on `cfg`.
pub fn generate(cfg: &GeneratorConfig) -> Result<Bundle, SynthError> {
    cfg.validate()?;
    let cat = build_catalog(cfg)?;
    let tl = Timeline::new(cfg);
    let seasonal = seasonal_terms(cfg);
    let effects = effect_vector(&cat.ingredients, &cfg.ingredient_effects);
    let insured_effects = effect_vector(&cat.ingredients, cfg.insured_effects());
    let base_logit = logit(cfg.base_monthly_hazard);
    let user_hazard = Hazard { base_logit, effects: &effects, wet_effect: cfg.wet_effect, seasonal };
    let insured_hazard = Hazard { base_logit, effects: &insured_effects, wet_effect: cfg.wet_effect, seasonal };

    let width = id_width(cfg.n_users);
    let users = map_indices(cfg.n_users, |i| simulate_user(i, cfg, &cat, &tl, &user_hazard, width));
    let width = id_width(cfg.n_insured);
    let insured = map_indices(cfg.n_insured, |i| simulate_insured(i, cfg, &cat, &tl, &insured_hazard, width));

    let mut purchases = Vec::with_capacity(users.iter().map(|u| u.records.len()).sum());
    let mut user_truth = Vec::with_capacity(users.len());
    for u in users {
        purchases.extend(u.records);
        user_truth.push(u.truth);
    }
    let mut counts = vec![0u64; cfg.months as usize];
    let mut questionnaire = Vec::with_capacity(insured.len());
    let mut insured_truth = Vec::with_capacity(insured.len());
    for a in insured {
        if let Some(m) = a.claim_month {
            counts[m] += 1;
        }
        if a.truth.enrolled {
            questionnaire.push(a.record);
        }
        insured_truth.push(a.truth);
    }
    let claims = counts
        .into_iter()
        .enumerate()
        .map(|(m, count)| ClaimSeriesRow { month: cfg.start_month.add_months(m as i64), count })
        .collect();

    Ok(Bundle {
        config: cfg.clone(),
        catalog: cat.catalog,
        purchases,
        claims,
        questionnaire,
        truth: GroundTruth {
            ingredients: cat.ingredients,
            effects,
            insured_effects,
            seasonal,
            users: user_truth,
            insured: insured_truth,
        },
    })
}

pub const BUNDLE_FILES: [&str; 9] = [
    "catalog.csv",
    "purchases.csv",
    "claims.csv",
    "questionnaire.csv",
    "generator.conf",
    "ground_truth_users.csv",
    "ground_truth_ingredients.csv",
    "ground_truth_seasonal.csv",
    "ground_truth_insured.csv",
];

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, SynthError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

fn opt_month(m: Option<YearMonth>) -> String {
    m.map_or_else(String::new, |m| m.to_string())
}

impl GroundTruth {
    pub fn exposure_names(&self, u: &UserTruth) -> Vec<&str> {
        u.exposures.iter().map(|&i| self.ingredients[i as usize].as_str()).collect()
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), SynthError> {
        let mut w = csv_writer(&dir.join("ground_truth_users.csv"))?;
        w.write_record(["user_id", "intended_group", "onset_month", "wet_rate", "exposures"])?;
        for u in &self.users {
            w.write_record([
                u.user_id.to_string(),
                u.intended.as_str().to_string(),
                opt_month(u.onset_month),
                u.wet_rate.to_string(),
                self.exposure_names(u).join(";"),
            ])?;
        }
        w.flush()?;

        let mut w = csv_writer(&dir.join("ground_truth_ingredients.csv"))?;
        w.write_record(["ingredient", "effect", "insured_effect"])?;
        for ((name, e), ie) in self.ingredients.iter().zip(&self.effects).zip(&self.insured_effects) {
            w.write_record([name.clone(), e.to_string(), ie.to_string()])?;
        }
        w.flush()?;

        let mut w = csv_writer(&dir.join("ground_truth_seasonal.csv"))?;
        w.write_record(["calendar_month", "log_odds_shift"])?;
        for (m, v) in self.seasonal.iter().enumerate() {
            w.write_record([(m + 1).to_string(), v.to_string()])?;
        }
        w.flush()?;

        let mut w = csv_writer(&dir.join("ground_truth_insured.csv"))?;
        w.write_record(["animal_id", "onset_month", "enrolled", "claim_month", "wet_rate"])?;
        for a in &self.insured {
            w.write_record([
                a.animal_id.clone(),
                opt_month(a.onset_month),
                a.enrolled.to_string(),
                opt_month(a.claim_month),
                a.wet_rate.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl Bundle {
    /// Writes the event files, the config and the ground truth into `dir`,
    /// creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), SynthError> {
        std::fs::create_dir_all(dir)?;
        write_catalog(BufWriter::new(File::create(dir.join("catalog.csv"))?), &self.catalog)?;
        write_purchases(BufWriter::new(File::create(dir.join("purchases.csv"))?), &self.purchases)?;
        write_claim_series(BufWriter::new(File::create(dir.join("claims.csv"))?), &self.claims)?;
        write_questionnaire(BufWriter::new(File::create(dir.join("questionnaire.csv"))?), &self.questionnaire)?;
        let mut f = BufWriter::new(File::create(dir.join("generator.conf"))?);
        f.write_all(self.config.to_config_string().as_bytes())?;
        f.flush()?;
        self.truth.write_to(dir)
    }

    pub fn last_month(&self) -> YearMonth {
        self.config.start_month.add_months(self.config.months as i64 - 1)
    }
}
