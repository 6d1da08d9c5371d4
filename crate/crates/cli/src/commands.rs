use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use proxyval::classify::{label_catalog, partition_catalog, KeywordRuleSet};
use proxyval::cohort::{
    assign_all, cohort_summary, exclusion_counts, write_assignments, CohortAssignment, CohortConfig,
};
use proxyval::ingest::{self, Catalog, ClaimSeriesRow, LoadReport, ParseMode, PurchaseRecord, QuestionnaireRecord};
use proxyval::numstat::{
    chi_squared_2x2_with, cochran_armitage, reg_incomplete_gamma_upper, ChiSquaredOptions, StatError, TrendGroup,
    TrendTable, TwoByTwoTable,
};
use proxyval::plot;
use proxyval::risk::{
    dose_response, ingredient_risk_table, validate_ingredients, write_dose_response, write_risk_table, write_scatter,
    CategoryMap, DoseResponse, RiskError, RiskOptions, ScatterPoint, Validation,
};
use proxyval::seasonality::{
    claims_series, ec_onset_series, seasonal_agreement, write_profiles, write_seasonal_components, write_stl,
    AgreementReport, StlParams,
};
use proxyval::synth::{decoupled_scenario, generate, paper_scenario, GeneratorConfig};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::output::RunDir;
use crate::{
    ClassifyArgs, CohortArgs, CohortCmdArgs, Command, KeywordArgs, ParseArgs, RiskArgs, RiskCmdArgs, Scenario,
    SeasonalityCmdArgs, StatKernel, StlArgs, SynthArgs, ValidateArgs,
};

/// Rejected rows listed individually in the log before summarising.
const MAX_LOGGED_ROW_ERRORS: usize = 20;

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Classify(a) => classify(a),
        Command::Cohort(a) => cohort(a),
        Command::Risk(a) => risk(a),
        Command::Seasonality(a) => seasonality(a),
        Command::Validate(a) => validate(a),
        Command::Stat(a) => stat(a.kernel),
    }
}

fn mode(p: &ParseArgs) -> ParseMode {
    if p.strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn note_load(run: &mut RunDir, path: &Path, r: &LoadReport) {
    let name = file_name(path);
    run.info(format!("{name}: accepted {} of {} rows", r.accepted, r.data_rows));
    for e in r.skipped.iter().take(MAX_LOGGED_ROW_ERRORS) {
        run.warn(format!("{name}: skipped {e}"));
    }
    if r.skipped.len() > MAX_LOGGED_ROW_ERRORS {
        run.warn(format!("{name}: {} more rows skipped", r.skipped.len() - MAX_LOGGED_ROW_ERRORS));
    }
}

fn non_empty<T>(path: &Path, rows: Vec<T>) -> Result<Vec<T>, CliError> {
    if rows.is_empty() {
        Err(CliError::EmptyInput(path.display().to_string()))
    } else {
        Ok(rows)
    }
}

fn load_purchases(run: &mut RunDir, path: &Path, m: ParseMode) -> Result<Vec<PurchaseRecord>, CliError> {
    let l = ingest::load_purchases(path, m)?;
    note_load(run, path, &l.report);
    non_empty(path, l.table)
}

fn load_catalog(run: &mut RunDir, path: &Path, m: ParseMode) -> Result<Catalog, CliError> {
    let l = ingest::load_catalog(path, m)?;
    note_load(run, path, &l.report);
    if l.table.is_empty() {
        return Err(CliError::EmptyInput(path.display().to_string()));
    }
    Ok(l.table)
}

fn load_claims(run: &mut RunDir, path: &Path, m: ParseMode) -> Result<Vec<ClaimSeriesRow>, CliError> {
    let l = ingest::load_claim_series(path, m)?;
    note_load(run, path, &l.report);
    non_empty(path, l.table)
}

fn load_questionnaire(run: &mut RunDir, path: &Path, m: ParseMode) -> Result<Vec<QuestionnaireRecord>, CliError> {
    let l = ingest::load_questionnaire(path, m)?;
    note_load(run, path, &l.report);
    let s = ingest::questionnaire_summary(&l.table);
    run.info(format!("questionnaire: {} case, {} control", s.case, s.control));
    non_empty(path, l.table)
}

fn rules(run: &mut RunDir, k: &KeywordArgs) -> Result<KeywordRuleSet, CliError> {
    match &k.keywords {
        Some(p) => {
            run.info(format!("keywords from {}", file_name(p)));
            Ok(KeywordRuleSet::load(p)?)
        }
        None => Ok(KeywordRuleSet::default_rules()),
    }
}

fn cohort_config(c: &CohortArgs) -> CohortConfig {
    CohortConfig {
        window_days: c.window_days,
        min_window_purchases: c.min_window_purchases as usize,
        ..CohortConfig::default()
    }
}

fn risk_options(run: &mut RunDir, r: &RiskArgs) -> Result<RiskOptions, CliError> {
    let categories = match &r.categories {
        Some(p) => {
            let map = CategoryMap::load(p)?;
            run.info(format!("{} ingredients mapped to categories", map.len()));
            Some(map)
        }
        None => None,
    };
    Ok(RiskOptions { alpha: r.alpha, min_exposure: r.min_exposure, screen: r.screen, yates: r.yates, categories })
}

fn stl_params(s: &StlArgs) -> StlParams {
    let period = s.period as usize;
    let mut p = StlParams::for_period(period, s.seasonal_span);
    if let Some(t) = s.trend_span {
        p.trend_span = t;
    }
    if let Some(l) = s.lowpass_span {
        p.lowpass_span = l;
    }
    p.n_inner = s.inner as usize;
    p.n_outer = s.outer as usize;
    p
}

fn scenario_config(scenario: Scenario, seed: u64) -> GeneratorConfig {
    match scenario {
        Scenario::Paper => paper_scenario(seed),
        Scenario::Decoupled => decoupled_scenario(seed),
        Scenario::Default => GeneratorConfig { seed, ..GeneratorConfig::default() },
    }
}

fn synthesize(run: &mut RunDir, cfg: &GeneratorConfig, dir: &Path) -> Result<(), CliError> {
    let bundle = generate(cfg)?;
    bundle.write_to(dir)?;
    run.info(format!(
        "synthesized seed {}: {} users, {} purchases, {} questionnaire animals, {} claim months",
        cfg.seed,
        cfg.n_users,
        bundle.purchases.len(),
        bundle.questionnaire.len(),
        bundle.claims.len()
    ));
    Ok(())
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let mut run = RunDir::create(&a.out.out, "synth")?;
    let mut cfg = match &a.config {
        Some(p) => GeneratorConfig::load(p)?,
        None => scenario_config(a.scenario, a.seed),
    };
    if let Some(n) = a.users {
        cfg.n_users = n;
    }
    let dir = run.dir.clone();
    synthesize(&mut run, &cfg, &dir)?;
    run.finish()
}

fn classify(a: ClassifyArgs) -> Result<(), CliError> {
    let mut run = RunDir::create(&a.out.out, "classify")?;
    let catalog = load_catalog(&mut run, &a.catalog, mode(&a.parse))?;
    let rules = rules(&mut run, &a.keywords)?;
    let labels = label_catalog(&catalog, &rules);
    let part = partition_catalog(&catalog, &rules);
    run.write_with("product_labels.csv", |w| {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wtr.write_record(["product_id", "name", "category", "label", "matched_keywords"])?;
        for (entry, label) in catalog.iter().zip(&labels) {
            let kind = if label.is_target {
                "target"
            } else if part.is_general(&entry.product_id) {
                "general"
            } else {
                "unclassified"
            };
            let matched: Vec<&str> = label.matched_keywords.iter().map(String::as_str).collect();
            wtr.write_record([
                entry.product_id.as_str(),
                entry.name.as_str(),
                entry.category.as_str(),
                kind,
                &matched.join(";"),
            ])?;
        }
        wtr.flush().map_err(CliError::io("product_labels.csv"))?;
        Ok(())
    })?;
    let unclassified = catalog.len() - part.target_ids.len() - part.general_ids.len();
    run.info(format!(
        "{} target, {} general, {} unclassified products",
        part.target_ids.len(),
        part.general_ids.len(),
        unclassified
    ));
    run.write_json(
        "classify_summary.json",
        &json!({
            "products": catalog.len(),
            "target": part.target_ids.len(),
            "general": part.general_ids.len(),
            "unclassified": unclassified,
        }),
    )?;
    run.finish()
}

fn cohort_stage(
    run: &mut RunDir,
    purchases: &[PurchaseRecord],
    catalog: &Catalog,
    rules: &KeywordRuleSet,
    cfg: &CohortConfig,
) -> Result<Vec<CohortAssignment>, CliError> {
    let part = partition_catalog(catalog, rules);
    let asg = assign_all(purchases, &part, cfg);
    let s = cohort_summary(&asg);
    run.info(format!("cohort: {} case, {} control, {} excluded of {} users", s.case, s.control, s.excluded, s.total));
    run.write_with("cohort.csv", |w| Ok(write_assignments(w, &asg)?))?;
    let exclusions: BTreeMap<&str, usize> = exclusion_counts(&asg);
    run.write_json(
        "cohort_summary.json",
        &json!({
            "case": s.case,
            "control": s.control,
            "excluded": s.excluded,
            "total": s.total,
            "case_fraction": s.case_fraction(),
            "exclusions": exclusions,
            "window_days": cfg.window_days,
        }),
    )?;
    Ok(asg)
}

fn cohort(a: CohortCmdArgs) -> Result<(), CliError> {
    let mut run = RunDir::create(&a.out.out, "cohort")?;
    let m = mode(&a.parse);
    let catalog = load_catalog(&mut run, &a.catalog, m)?;
    let purchases = load_purchases(&mut run, &a.purchases, m)?;
    let rules = rules(&mut run, &a.keywords)?;
    cohort_stage(&mut run, &purchases, &catalog, &rules, &cohort_config(&a.cohort))?;
    run.finish()
}

#[derive(Debug, Serialize)]
struct RiskSummary {
    ingredients: usize,
    significant: usize,
    ingredient_r: Option<f64>,
    ingredient_p: Option<f64>,
    trend_z: Option<f64>,
    trend_p: Option<f64>,
    ratio: Option<f64>,
    no_form_known: Option<usize>,
}

fn csv_text<F>(f: F) -> Result<String, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writer emits utf-8"))
}

fn risk_stage(
    run: &mut RunDir,
    asg: &[CohortAssignment],
    catalog: &Catalog,
    questionnaire: &[QuestionnaireRecord],
    opts: &RiskOptions,
) -> Result<RiskSummary, CliError> {
    let rows = ingredient_risk_table(asg, catalog, questionnaire, opts)?;
    run.write_with("ingredient_risk.csv", |w| Ok(write_risk_table(w, &rows)?))?;
    let significant = rows.iter().filter(|r| r.significant).count();
    run.info(format!("risk: {} rows, {significant} significant at alpha {}", rows.len(), opts.alpha));

    let validation: Option<Validation> = match validate_ingredients(&rows) {
        Ok(v) => Some(v),
        Err(RiskError::TooFewSignificant { found, needed }) => {
            run.warn(format!("{found} significant rows, {needed} needed for a correlation"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    let points: Vec<ScatterPoint> = match &validation {
        Some(v) => v.scatter.clone(),
        None => rows
            .iter()
            .filter(|r| r.significant)
            .map(|r| ScatterPoint {
                ingredient: r.ingredient.clone(),
                claim_rate: r.claim_rate.rate,
                switch_rate: r.switch_rate.rate,
            })
            .collect(),
    };
    if points.is_empty() {
        run.warn("no significant ingredients; scatter not written");
    } else {
        let text = csv_text(|b| write_scatter(b, &points))?;
        run.write_text("scatter.csv", &text)?;
        let svg = plot::scatter_svg(&text, "claim_rate", "switch_rate", "Switch rate against claim rate")?;
        run.write_text("scatter.svg", &svg)?;
    }
    if let Some(v) = &validation {
        run.info(format!(
            "ingredient r = {:.4} (p = {:.3e}, n = {})",
            v.correlation.statistic, v.correlation.p_value, v.n_rows
        ));
    }

    let dose: Option<DoseResponse> = match dose_response(asg, catalog) {
        Ok(d) => Some(d),
        Err(e @ RiskError::EmptyBins { .. }) => {
            run.warn(format!("dose-response skipped: {e}"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(d) = &dose {
        let text = csv_text(|b| write_dose_response(b, &d.bins))?;
        run.write_text("dose_response.csv", &text)?;
        run.write_text("dose_response.svg", &plot::bars_svg(&text, "bin", "rate", "Switch rate by wet-food share")?)?;
        run.info(format!("trend Z = {:.4} (p = {:.3e}), ratio {:?}", d.trend.statistic, d.trend.p_value, d.ratio));
    }

    let summary = RiskSummary {
        ingredients: rows.len(),
        significant,
        ingredient_r: validation.as_ref().map(|v| v.correlation.statistic),
        ingredient_p: validation.as_ref().map(|v| v.correlation.p_value),
        trend_z: dose.as_ref().map(|d| d.trend.statistic),
        trend_p: dose.as_ref().map(|d| d.trend.p_value),
        ratio: dose.as_ref().and_then(|d| d.ratio),
        no_form_known: dose.as_ref().map(|d| d.no_form_known),
    };
    run.write_json("validation.json", &summary)?;
    Ok(summary)
}

fn risk(a: RiskCmdArgs) -> Result<(), CliError> {
    let mut run = RunDir::create(&a.out.out, "risk")?;
    let m = mode(&a.parse);
    let catalog = load_catalog(&mut run, &a.catalog, m)?;
    let purchases = load_purchases(&mut run, &a.purchases, m)?;
    let questionnaire = load_questionnaire(&mut run, &a.questionnaire, m)?;
    let rules = rules(&mut run, &a.keywords)?;
    let opts = risk_options(&mut run, &a.risk)?;
    let asg = cohort_stage(&mut run, &purchases, &catalog, &rules, &cohort_config(&a.cohort))?;
    risk_stage(&mut run, &asg, &catalog, &questionnaire, &opts)?;
    run.finish()
}

#[derive(Debug, Serialize)]
struct LagEntry {
    lag: i32,
    r: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SeasonalSummary {
    r: f64,
    p: f64,
    profile_r: Option<f64>,
    peak_month_claims: u32,
    peak_month_ec: u32,
    best_lag: Option<i32>,
    lag_scan: Vec<LagEntry>,
    first_month: String,
    months: usize,
    stl: StlParams,
}

fn seasonality_stage(
    run: &mut RunDir,
    asg: &[CohortAssignment],
    claims: &[ClaimSeriesRow],
    params: &StlParams,
) -> Result<SeasonalSummary, CliError> {
    let claims = claims_series(claims)?;
    let end = claims.end().expect("claims are non-empty");
    let ec = ec_onset_series(asg, Some((claims.start, end)))?;
    if claims.len() < 3 * params.period {
        run.warn(format!("{} months cover fewer than three periods of {}", claims.len(), params.period));
    }
    let report: AgreementReport = seasonal_agreement(&claims, &ec, params)?;
    let g = &report.agreement;
    run.write_with("stl_claims.csv", |w| Ok(write_stl(w, &report.a)?))?;
    run.write_with("stl_ec.csv", |w| Ok(write_stl(w, &report.b)?))?;
    let components = csv_text(|b| write_seasonal_components(b, &report))?;
    run.write_text("seasonal_components.csv", &components)?;
    run.write_text("seasonal.svg", &plot::lines_svg(&components, "month", "Seasonal components")?)?;
    let profile = csv_text(|b| write_profiles(b, g))?;
    run.write_text("seasonal_profile.csv", &profile)?;
    run.write_text(
        "seasonal_profile.svg",
        &plot::lines_svg(&profile, "month", "Mean seasonal value by calendar month")?,
    )?;
    run.info(format!(
        "seasonal r = {:.4} (p = {:.3e}), peaks {} / {}, best lag {:?}",
        g.correlation.statistic, g.correlation.p_value, g.peak_month_a, g.peak_month_b, g.best_lag
    ));
    let summary = SeasonalSummary {
        r: g.correlation.statistic,
        p: g.correlation.p_value,
        profile_r: g.profile_correlation.map(|t| t.statistic),
        peak_month_claims: g.peak_month_a,
        peak_month_ec: g.peak_month_b,
        best_lag: g.best_lag,
        lag_scan: g.lag_scan.iter().map(|&(lag, r)| LagEntry { lag, r }).collect(),
        first_month: claims.start.to_string(),
        months: claims.len(),
        stl: *params,
    };
    run.write_json("seasonal_agreement.json", &summary)?;
    Ok(summary)
}

fn seasonality(a: SeasonalityCmdArgs) -> Result<(), CliError> {
    let mut run = RunDir::create(&a.out.out, "seasonality")?;
    let m = mode(&a.parse);
    let catalog = load_catalog(&mut run, &a.catalog, m)?;
    let purchases = load_purchases(&mut run, &a.purchases, m)?;
    let claims = load_claims(&mut run, &a.claims, m)?;
    let rules = rules(&mut run, &a.keywords)?;
    let asg = cohort_stage(&mut run, &purchases, &catalog, &rules, &cohort_config(&a.cohort))?;
    seasonality_stage(&mut run, &asg, &claims, &stl_params(&a.stl))?;
    run.finish()
}

struct Inputs {
    purchases: PathBuf,
    catalog: PathBuf,
    claims: PathBuf,
    questionnaire: PathBuf,
}

fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let mut run = RunDir::create(&a.out.out, "validate")?;
    let inputs = match (&a.purchases, &a.catalog, &a.claims, &a.questionnaire) {
        (Some(p), Some(c), Some(cl), Some(q)) => {
            Inputs { purchases: p.clone(), catalog: c.clone(), claims: cl.clone(), questionnaire: q.clone() }
        }
        _ => {
            let mut cfg = scenario_config(a.scenario, a.seed);
            if let Some(n) = a.users {
                cfg.n_users = n;
            }
            let data = run.path("data");
            synthesize(&mut run, &cfg, &data)?;
            Inputs {
                purchases: data.join("purchases.csv"),
                catalog: data.join("catalog.csv"),
                claims: data.join("claims.csv"),
                questionnaire: data.join("questionnaire.csv"),
            }
        }
    };
    let m = mode(&a.parse);
    let catalog = load_catalog(&mut run, &inputs.catalog, m)?;
    let purchases = load_purchases(&mut run, &inputs.purchases, m)?;
    let claims = load_claims(&mut run, &inputs.claims, m)?;
    let questionnaire = load_questionnaire(&mut run, &inputs.questionnaire, m)?;
    let rules = rules(&mut run, &a.keywords)?;
    let opts = risk_options(&mut run, &a.risk)?;
    let asg = cohort_stage(&mut run, &purchases, &catalog, &rules, &cohort_config(&a.cohort))?;
    let risk = risk_stage(&mut run, &asg, &catalog, &questionnaire, &opts)?;
    let seasonal = seasonality_stage(&mut run, &asg, &claims, &stl_params(&a.stl))?;
    let s = cohort_summary(&asg);
    run.write_json(
        "summary.json",
        &json!({
            "cohort": { "case": s.case, "control": s.control, "excluded": s.excluded, "case_fraction": s.case_fraction() },
            "ingredient": { "r": risk.ingredient_r, "p": risk.ingredient_p, "n_rows": risk.significant, "ingredients": risk.ingredients },
            "seasonal": {
                "r": seasonal.r,
                "p": seasonal.p,
                "peak_month_claims": seasonal.peak_month_claims,
                "peak_month_ec": seasonal.peak_month_ec,
                "best_lag": seasonal.best_lag,
            },
            "dose_response": { "z": risk.trend_z, "p": risk.trend_p, "ratio": risk.ratio },
        }),
    )?;
    run.finish()
}

fn stat(k: StatKernel) -> Result<(), CliError> {
    let out = match k {
        StatKernel::Chi2 { cells, yates } => {
            let t = TwoByTwoTable::new(cells[0], cells[1], cells[2], cells[3]);
            serde_json::to_value(chi_squared_2x2_with(&t, ChiSquaredOptions { yates })?)
        }
        StatKernel::Trend { cases, totals, scores } => {
            if let Some(&right) =
                [totals.len()].iter().chain(scores.as_ref().map(Vec::len).as_ref()).find(|&&n| n != cases.len())
            {
                return Err(StatError::LengthMismatch { left: cases.len(), right }.into());
            }
            let groups = cases
                .iter()
                .zip(&totals)
                .enumerate()
                .map(|(i, (&c, &t))| TrendGroup {
                    score: scores.as_ref().map_or(i as f64, |s| s[i]),
                    cases: c,
                    total: t,
                })
                .collect();
            serde_json::to_value(cochran_armitage(&TrendTable::new(groups)?)?)
        }
        StatKernel::Q { a, x } => Ok(json!({ "q": reg_incomplete_gamma_upper(a, x)? })),
    };
    println!("{}", out.expect("results serialize"));
    Ok(())
}
