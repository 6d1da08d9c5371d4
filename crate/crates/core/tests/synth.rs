use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use proxyval::classify::{partition_catalog, KeywordRuleSet};
use proxyval::cohort::{assign_all, CohortConfig, CohortGroup};
use proxyval::ingest::{Category, YearMonth};
use proxyval::numstat::{chi_squared_2x2, TwoByTwoTable};
use proxyval::risk::{ingredient_risk_table, RiskOptions};
use proxyval::synth::{generate, paper_scenario, Bundle, Expectations, GeneratorConfig, IntendedGroup, BUNDLE_FILES};
use proxyval::synth::{PAPER_CASE_FRACTION, PAPER_CLAIM_FRACTION};

fn small(seed: u64) -> GeneratorConfig {
    GeneratorConfig { seed, n_users: 3_000, n_insured: 3_000, n_general_products: 300, ..GeneratorConfig::default() }
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    BUNDLE_FILES.iter().map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap())).collect()
}

#[test]
fn same_seed_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    generate(&small(42)).unwrap().write_to(a.path()).unwrap();
    generate(&small(42)).unwrap().write_to(b.path()).unwrap();
    let (fa, fb) = (read_dir(a.path()), read_dir(b.path()));
    assert_eq!(fa.len(), BUNDLE_FILES.len());
    for (name, bytes) in &fa {
        assert!(!bytes.is_empty(), "{name}");
        assert!(bytes == &fb[name], "{name} differs");
    }

    let c = tempfile::tempdir().unwrap();
    generate(&small(43)).unwrap().write_to(c.path()).unwrap();
    assert_ne!(fa["purchases.csv"], read_dir(c.path())["purchases.csv"]);
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = small(7);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| generate(&cfg).unwrap());
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| generate(&cfg).unwrap());
    assert_eq!(one.purchases, many.purchases);
    assert_eq!(one.claims, many.claims);
    assert_eq!(one.questionnaire, many.questionnaire);
    assert_eq!(one.truth, many.truth);
}

#[test]
fn written_config_regenerates_the_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GeneratorConfig { wet_effect: -0.8, ..small(5) };
    let bundle = generate(&cfg).unwrap();
    bundle.write_to(dir.path()).unwrap();
    let reloaded = GeneratorConfig::load(&dir.path().join("generator.conf")).unwrap();
    assert_eq!(generate(&reloaded).unwrap().purchases, bundle.purchases);
}

fn by_user(bundle: &Bundle) -> BTreeMap<&str, Vec<&proxyval::ingest::PurchaseRecord>> {
    let mut m: BTreeMap<&str, Vec<_>> = BTreeMap::new();
    for p in &bundle.purchases {
        m.entry(p.user_id.as_str()).or_default().push(p);
    }
    m
}

#[test]
fn ground_truth_reconciles_with_events() {
    let bundle = generate(&GeneratorConfig { base_monthly_hazard: 0.01, ..small(11) }).unwrap();
    let truth = &bundle.truth;
    let users = by_user(&bundle);
    let mut onsets = 0;
    for u in &truth.users {
        let events = users.get(u.user_id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        let mut exposed = BTreeSet::new();
        let mut targets = Vec::new();
        let mut last_general = None;
        for p in events {
            let entry = bundle.catalog.get(&p.product_id).unwrap();
            match entry.category {
                Category::General => {
                    exposed.extend(entry.ingredients.iter().map(String::as_str));
                    last_general = last_general.max(Some(p.date));
                }
                Category::Therapeutic => targets.push(p.date),
            }
        }
        let planted: BTreeSet<&str> = truth.exposure_names(u).into_iter().collect();
        assert_eq!(exposed, planted, "{}", u.user_id);

        if u.intended == IntendedGroup::Case {
            onsets += 1;
            let onset = u.onset_month.expect("cases have an onset");
            let first_target = *targets.first().unwrap();
            assert!(YearMonth::of(first_target) >= onset);
            assert!(YearMonth::of(last_general.unwrap()) <= onset);
            assert!(last_general.unwrap() <= first_target);
        }
        if u.intended == IntendedGroup::Control {
            assert!(targets.is_empty());
        }
    }
    assert!(onsets > 50, "only {onsets} cases");

    let mut counts: BTreeMap<YearMonth, u64> = BTreeMap::new();
    for a in truth.insured.iter().filter(|a| a.enrolled) {
        if let Some(m) = a.claim_month {
            assert!(m >= a.onset_month.unwrap());
            *counts.entry(m).or_default() += 1;
        }
    }
    for row in &bundle.claims {
        assert_eq!(row.count, counts.get(&row.month).copied().unwrap_or(0), "{}", row.month);
    }
    assert_eq!(bundle.questionnaire.len(), truth.insured.iter().filter(|a| a.enrolled).count());
    let claimed = truth.insured.iter().filter(|a| a.claim_month.is_some()).count();
    let cases = bundle.questionnaire.iter().filter(|q| q.group == proxyval::ingest::QuestionnaireGroup::Case).count();
    assert_eq!(claimed, cases);
}

#[test]
fn cohort_assignment_recovers_intended_groups() {
    let bundle = generate(&small(3)).unwrap();
    let part = partition_catalog(&bundle.catalog, &KeywordRuleSet::default_rules());
    let asg = assign_all(&bundle.purchases, &part, &CohortConfig::default());
    assert_eq!(asg.len(), bundle.truth.users.len());
    for (a, u) in asg.iter().zip(&bundle.truth.users) {
        assert_eq!(a.user_id, u.user_id);
        assert_eq!(a.group, u.intended.cohort_group(), "{}", u.user_id);
        assert_eq!(a.exclusion, u.intended.exclusion(), "{}", u.user_id);
    }
    assert!(asg.iter().any(|a| a.group == CohortGroup::Case));
}

#[test]
fn null_model_switch_rates_are_indistinguishable() {
    let cfg = GeneratorConfig {
        seed: 21,
        n_users: 20_000,
        n_insured: 20_000,
        seasonal_amplitude: 0.0,
        ..GeneratorConfig::default()
    };
    let bundle = generate(&cfg).unwrap();
    let part = partition_catalog(&bundle.catalog, &KeywordRuleSet::default_rules());
    let asg = assign_all(&bundle.purchases, &part, &CohortConfig::default());
    let rows = ingredient_risk_table(&asg, &bundle.catalog, &bundle.questionnaire, &RiskOptions::default()).unwrap();
    assert!(rows.len() > 300, "{} rows", rows.len());
    let k = rows.len() * (rows.len() - 1) / 2;
    let mut min_p = 1.0f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let (sa, sb) = (&a.switch_rate, &b.switch_rate);
            let t = TwoByTwoTable::new(sa.positives, sa.total - sa.positives, sb.positives, sb.total - sb.positives);
            if let Ok(r) = chi_squared_2x2(&t) {
                min_p = min_p.min(r.p_value);
            }
        }
    }
    assert!(min_p > 0.01 / k as f64, "min pairwise p {min_p} over {k} pairs");
}

#[test]
fn paper_scenario_expectations_hit_targets() {
    let cfg = paper_scenario(1);
    let exp = Expectations::new(&cfg).unwrap();
    assert!((exp.case_fraction() - PAPER_CASE_FRACTION).abs() < 1e-4, "{}", exp.case_fraction());
    assert!((exp.claim_fraction() - PAPER_CLAIM_FRACTION).abs() < 1e-4, "{}", exp.claim_fraction());
    assert!((exp.bin_ratio() - 1.48).abs() < 0.01, "{}", exp.bin_ratio());
    assert!(cfg.wet_effect < 0.0);
    assert_eq!(paper_scenario(1).to_config_string(), cfg.to_config_string());
}
