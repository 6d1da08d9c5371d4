//! Keyword rules that mark therapeutic products as disease-onset signals.
//!
//! A product is a *target* when it passes the category gate and its
//! normalized name contains at least one keyword as a substring. Substring
//! (not token) matching keeps compound names in languages without spaces
//! matchable.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::ingest::{normalize_token, Catalog, Category, ProductEntry, ProductId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoryRequirement {
    TherapeuticOnly,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordRuleSet {
    disease_keywords: BTreeSet<String>,
    function_keywords: BTreeSet<String>,
    require_category: CategoryRequirement,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("the {0} keyword set is empty")]
    EmptyKeywordSet(&'static str),
    #[error("keyword config line {line}: {message}")]
    BadConfig { line: usize, message: String },
    #[error("cannot read keyword config: {0}")]
    Io(String),
    #[error("unknown product id `{0}`")]
    UnknownProductId(String),
}

/// Default keyword configuration. Only example keywords are published for the
/// target-product list, so this is a starting point rather than the full
/// production vocabulary.
pub const DEFAULT_KEYWORD_CONFIG: &str = "\
# Target-product keywords: one per line, matched as substrings of the
# NFKC-normalized, case-folded product name.
# These are example keywords; the complete production list is unpublished.
require-category: therapeutic

[disease]
FLUTD
Lower Urinary Tract
Urinary Disease
Struvite
Stone

[function]
Urinary
pH Control
pH Care
pH Balance
Mineral Control
";

impl KeywordRuleSet {
    pub fn new(
        disease: impl IntoIterator<Item = impl AsRef<str>>,
        function: impl IntoIterator<Item = impl AsRef<str>>,
        require_category: CategoryRequirement,
    ) -> Result<Self, ClassifyError> {
        let norm =
            |it: &mut dyn Iterator<Item = String>| -> BTreeSet<String> { it.filter(|k| !k.is_empty()).collect() };
        let disease_keywords = norm(&mut disease.into_iter().map(|k| normalize_token(k.as_ref())));
        let function_keywords = norm(&mut function.into_iter().map(|k| normalize_token(k.as_ref())));
        if disease_keywords.is_empty() {
            return Err(ClassifyError::EmptyKeywordSet("disease"));
        }
        if function_keywords.is_empty() {
            return Err(ClassifyError::EmptyKeywordSet("function"));
        }
        Ok(Self { disease_keywords, function_keywords, require_category })
    }

    /// Parses the plain-text keyword config.
    ///
    /// `#` starts a comment, `[disease]` / `[function]` open a keyword section
    /// and `require-category: therapeutic|any` sets the category gate.
    pub fn parse(text: &str) -> Result<Self, ClassifyError> {
        #[derive(Clone, Copy)]
        enum Section {
            None,
            Disease,
            Function,
        }
        let mut section = Section::None;
        let mut disease = Vec::new();
        let mut function = Vec::new();
        let mut require = CategoryRequirement::TherapeuticOnly;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("require-category") {
                let value = rest.trim_start().trim_start_matches([':', '=']).trim();
                require = match normalize_token(value).as_str() {
                    "therapeutic" | "therapeutic_only" | "therapeutic-only" => CategoryRequirement::TherapeuticOnly,
                    "any" => CategoryRequirement::Any,
                    _ => {
                        return Err(ClassifyError::BadConfig {
                            line: line_no,
                            message: format!("unknown require-category value `{value}`"),
                        })
                    }
                };
                continue;
            }
            if line.starts_with('[') {
                section = match normalize_token(line).as_str() {
                    "[disease]" => Section::Disease,
                    "[function]" => Section::Function,
                    _ => {
                        return Err(ClassifyError::BadConfig {
                            line: line_no,
                            message: format!("unknown section `{line}`"),
                        })
                    }
                };
                continue;
            }
            match section {
                Section::Disease => disease.push(line.to_string()),
                Section::Function => function.push(line.to_string()),
                Section::None => {
                    return Err(ClassifyError::BadConfig {
                        line: line_no,
                        message: "keyword outside a [disease] or [function] section".into(),
                    })
                }
            }
        }
        Self::new(disease, function, require)
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let text = fs::read_to_string(path).map_err(|e| ClassifyError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn default_rules() -> Self {
        Self::parse(DEFAULT_KEYWORD_CONFIG).expect("built-in keyword config parses")
    }

    /// Serializes back to the config format.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.require_category {
            CategoryRequirement::TherapeuticOnly => "require-category: therapeutic\n",
            CategoryRequirement::Any => "require-category: any\n",
        });
        out.push_str("\n[disease]\n");
        for k in &self.disease_keywords {
            out.push_str(k);
            out.push('\n');
        }
        out.push_str("\n[function]\n");
        for k in &self.function_keywords {
            out.push_str(k);
            out.push('\n');
        }
        out
    }

    pub fn require_category(&self) -> CategoryRequirement {
        self.require_category
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.disease_keywords.iter().chain(self.function_keywords.iter()).map(String::as_str)
    }

    /// Returns a copy with one more keyword in the function set.
    pub fn with_function_keyword(&self, keyword: &str) -> Self {
        let mut out = self.clone();
        let k = normalize_token(keyword);
        if !k.is_empty() {
            out.function_keywords.insert(k);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductLabel {
    pub product_id: ProductId,
    pub is_target: bool,
    pub matched_keywords: BTreeSet<String>,
}

pub fn label_product(entry: &ProductEntry, rules: &KeywordRuleSet) -> ProductLabel {
    let matched_keywords: BTreeSet<String> =
        rules.keywords().filter(|k| entry.normalized_name.contains(k)).map(str::to_string).collect();
    let category_ok = match rules.require_category {
        CategoryRequirement::TherapeuticOnly => entry.category == Category::Therapeutic,
        CategoryRequirement::Any => true,
    };
    ProductLabel {
        product_id: entry.product_id.clone(),
        is_target: category_ok && !matched_keywords.is_empty(),
        matched_keywords,
    }
}

/// Target products versus regular-diet products. Therapeutic products without
/// a keyword hit are in neither set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CatalogPartition {
    pub target_ids: BTreeSet<ProductId>,
    pub general_ids: BTreeSet<ProductId>,
}

impl CatalogPartition {
    pub fn is_target(&self, id: &ProductId) -> bool {
        self.target_ids.contains(id)
    }

    pub fn is_general(&self, id: &ProductId) -> bool {
        self.general_ids.contains(id)
    }
}

pub fn label_catalog(catalog: &Catalog, rules: &KeywordRuleSet) -> Vec<ProductLabel> {
    catalog.iter().map(|e| label_product(e, rules)).collect()
}

pub fn partition_catalog(catalog: &Catalog, rules: &KeywordRuleSet) -> CatalogPartition {
    let mut p = CatalogPartition::default();
    for e in catalog.iter() {
        if label_product(e, rules).is_target {
            p.target_ids.insert(e.product_id.clone());
        } else if e.category == Category::General {
            p.general_ids.insert(e.product_id.clone());
        }
    }
    p
}

/// Union of the ingredient sets of `products`.
pub fn ingredient_exposure<'a>(
    products: impl IntoIterator<Item = &'a ProductId>,
    catalog: &Catalog,
) -> Result<BTreeSet<String>, ClassifyError> {
    let mut out = BTreeSet::new();
    for id in products {
        let e = catalog.get(id).ok_or_else(|| ClassifyError::UnknownProductId(id.to_string()))?;
        out.extend(e.ingredients.iter().cloned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::FoodForm;
    use proptest::prelude::*;

    fn entry(id: &str, name: &str, category: Category) -> ProductEntry {
        ProductEntry::new(id, name, category, FoodForm::Dry, ["chicken"])
    }

    #[test]
    fn ph_control_therapeutic_is_target() {
        let rules = KeywordRuleSet::default_rules();
        let l = label_product(&entry("p1", "pH Control Dry", Category::Therapeutic), &rules);
        assert!(l.is_target);
        assert_eq!(l.matched_keywords.iter().map(String::as_str).collect::<Vec<_>>(), ["ph control"]);
    }

    #[test]
    fn category_gate_applies() {
        let rules = KeywordRuleSet::default_rules();
        let l = label_product(&entry("p1", "pH Control Dry", Category::General), &rules);
        assert!(!l.is_target);

        let any = KeywordRuleSet::parse("require-category: any\n[disease]\nflutd\n[function]\nph control\n").unwrap();
        assert!(label_product(&entry("p1", "pH Control Dry", Category::General), &any).is_target);
    }

    #[test]
    fn no_keyword_means_not_target() {
        let rules = KeywordRuleSet::default_rules();
        let l = label_product(&entry("p1", "Chicken Dinner", Category::Therapeutic), &rules);
        assert!(!l.is_target);
        assert!(l.matched_keywords.is_empty());
    }

    #[test]
    fn partition_small_catalog() {
        let c = Catalog::from_entries([
            entry("t1", "Urinary Care", Category::Therapeutic),
            entry("g1", "Tuna Feast", Category::General),
            entry("u1", "Renal Support", Category::Therapeutic),
        ])
        .unwrap();
        let p = partition_catalog(&c, &KeywordRuleSet::default_rules());
        assert_eq!(p.target_ids, BTreeSet::from([ProductId::new("t1")]));
        assert_eq!(p.general_ids, BTreeSet::from([ProductId::new("g1")]));

        let empty = partition_catalog(&Catalog::default(), &KeywordRuleSet::default_rules());
        assert!(empty.target_ids.is_empty() && empty.general_ids.is_empty());
    }

    #[test]
    fn exposure_is_union() {
        let c = Catalog::from_entries([
            ProductEntry::new("p1", "a", Category::General, FoodForm::Dry, ["a", "b"]),
            ProductEntry::new("p2", "b", Category::General, FoodForm::Wet, ["b", "c"]),
        ])
        .unwrap();
        let ids = [ProductId::new("p1"), ProductId::new("p2")];
        let got = ingredient_exposure(ids.iter(), &c).unwrap();
        assert_eq!(got, BTreeSet::from(["a".to_string(), "b".into(), "c".into()]));
        assert!(ingredient_exposure([].iter(), &c).unwrap().is_empty());
        let missing = [ProductId::new("zz")];
        assert_eq!(ingredient_exposure(missing.iter(), &c), Err(ClassifyError::UnknownProductId("zz".into())));
    }

    #[test]
    fn config_round_trip_and_errors() {
        let rules = KeywordRuleSet::default_rules();
        assert_eq!(KeywordRuleSet::parse(&rules.to_config()).unwrap(), rules);
        assert_eq!(KeywordRuleSet::parse("[disease]\nflutd\n"), Err(ClassifyError::EmptyKeywordSet("function")));
        assert!(matches!(KeywordRuleSet::parse("flutd\n"), Err(ClassifyError::BadConfig { line: 1, .. })));
        assert!(matches!(KeywordRuleSet::parse("require-category: maybe\n"), Err(ClassifyError::BadConfig { .. })));
    }

    fn to_fullwidth(s: &str) -> String {
        s.chars()
            .map(|c| match c {
                '!'..='~' => char::from_u32(c as u32 - 0x21 + 0xFF01).unwrap(),
                ' ' => '\u{3000}',
                c => c,
            })
            .collect()
    }

    proptest! {
        #[test]
        fn matching_ignores_case_and_width(
            base in prop::sample::select(vec!["pH Control Dry", "Lower Urinary Tract Care", "Tuna Feast", "Struvite Guard", "Renal Support"]),
            upper in any::<bool>(),
            wide in any::<bool>(),
        ) {
            let rules = KeywordRuleSet::default_rules();
            let mut name = if upper { base.to_uppercase() } else { base.to_lowercase() };
            if wide { name = to_fullwidth(&name); }
            let a = label_product(&entry("p", base, Category::Therapeutic), &rules);
            let b = label_product(&entry("p", &name, Category::Therapeutic), &rules);
            prop_assert_eq!(a.is_target, b.is_target);
            prop_assert_eq!(a.matched_keywords, b.matched_keywords);
        }

        #[test]
        fn partition_is_disjoint_and_monotone(
            names in prop::collection::vec(("[a-z ]{0,12}", any::<bool>()), 0..20),
            extra in "[a-z]{1,4}",
        ) {
            let entries: Vec<_> = names.iter().enumerate().map(|(i, (n, th))| {
                entry(&format!("p{i}"), n, if *th { Category::Therapeutic } else { Category::General })
            }).collect();
            let c = Catalog::from_entries(entries).unwrap();
            let rules = KeywordRuleSet::default_rules();
            let p = partition_catalog(&c, &rules);
            prop_assert!(p.target_ids.is_disjoint(&p.general_ids));
            let wider = partition_catalog(&c, &rules.with_function_keyword(&extra));
            prop_assert!(p.target_ids.is_subset(&wider.target_ids));
        }
    }
}
