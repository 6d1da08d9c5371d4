//! Loading and validation of the four input tables.
//!
//! All loaders accept any reader (files go through the `load_*` helpers) and
//! return immutable, canonically ordered tables. Text tokens (product names,
//! ingredients, exposures) are NFKC-normalized and case-folded on the way in,
//! so every later string comparison is plain byte equality.
//!
//! Row-level problems are reported as [`RowError`]s carrying the 1-based file
//! line. In [`ParseMode::Strict`] the first one aborts the load; in
//! [`ParseMode::Lenient`] the row is skipped and tallied in the [`LoadReport`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Separator for list-valued fields (ingredients, exposures).
pub const LIST_SEPARATOR: char = ';';

pub const PURCHASE_COLUMNS: [&str; 4] = ["user_id", "date", "product_id", "quantity"];
pub const CATALOG_COLUMNS: [&str; 5] = ["product_id", "name", "category", "food_form", "ingredients"];
pub const CLAIM_COLUMNS: [&str; 2] = ["month", "count"];
pub const QUESTIONNAIRE_COLUMNS: [&str; 3] = ["animal_id", "group", "exposures"];

/// NFKC normalization followed by full default case folding, with runs of
/// whitespace collapsed to one ASCII space.
pub fn normalize_token(raw: &str) -> String {
    let nfkc: String = raw.nfkc().collect();
    let folded: String = caseless::default_case_fold_str(&nfkc).nfkc().collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn parse_token_list(field: &str) -> BTreeSet<String> {
    field.split(LIST_SEPARATOR).map(normalize_token).filter(|t| !t.is_empty()).collect()
}

fn join_token_list(tokens: &BTreeSet<String>) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(LIST_SEPARATOR);
        }
        out.push_str(t);
    }
    out
}

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(raw: &str) -> Self {
                Self(Arc::from(raw))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), &*self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(raw: &str) -> Self {
                Self::new(raw)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.0)
            }
        }
    };
}

id_newtype!(
    /// Pseudonymous purchaser. One user is treated as one analysis unit.
    UserId
);
id_newtype!(ProductId);

/// One time-stamped purchase event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PurchaseRecord {
    pub user_id: UserId,
    pub date: NaiveDate,
    pub product_id: ProductId,
    /// Units bought. Kept for round-tripping; analyses count events.
    pub quantity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    General,
    Therapeutic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FoodForm {
    Wet,
    Dry,
    Other,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::General => "general",
            Category::Therapeutic => "therapeutic",
        }
    }
}

impl FoodForm {
    pub fn as_str(self) -> &'static str {
        match self {
            FoodForm::Wet => "wet",
            FoodForm::Dry => "dry",
            FoodForm::Other => "other",
        }
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_token(s).as_str() {
            "general" => Ok(Category::General),
            "therapeutic" => Ok(Category::Therapeutic),
            _ => Err(s.to_string()),
        }
    }
}

impl FromStr for FoodForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_token(s).as_str() {
            "wet" => Ok(FoodForm::Wet),
            "dry" => Ok(FoodForm::Dry),
            "other" => Ok(FoodForm::Other),
            _ => Err(s.to_string()),
        }
    }
}

/// Catalog row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductEntry {
    pub product_id: ProductId,
    /// Display name exactly as supplied.
    pub name: String,
    pub normalized_name: String,
    pub category: Category,
    pub food_form: FoodForm,
    pub ingredients: BTreeSet<String>,
}

impl ProductEntry {
    pub fn new(
        product_id: &str,
        name: &str,
        category: Category,
        food_form: FoodForm,
        ingredients: impl IntoIterator<Item = impl AsRef<str>>,
    ) -> Self {
        Self {
            product_id: ProductId::new(product_id),
            name: name.to_string(),
            normalized_name: normalize_token(name),
            category,
            food_form,
            ingredients: ingredients
                .into_iter()
                .map(|t| normalize_token(t.as_ref()))
                .filter(|t| !t.is_empty())
                .collect(),
        }
    }
}

/// Product catalog keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    entries: BTreeMap<ProductId, ProductEntry>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CatalogSummary {
    pub general: usize,
    pub therapeutic: usize,
    pub wet: usize,
    pub dry: usize,
    pub other: usize,
    pub ingredients: usize,
}

impl Catalog {
    /// Builds a catalog, rejecting duplicate ids.
    pub fn from_entries(entries: impl IntoIterator<Item = ProductEntry>) -> Result<Self, IngestError> {
        let mut map = BTreeMap::new();
        for e in entries {
            let id = e.product_id.clone();
            if map.insert(id.clone(), e).is_some() {
                return Err(IngestError::DuplicateProductId(id.to_string()));
            }
        }
        Ok(Self { entries: map })
    }

    pub fn get(&self, id: &ProductId) -> Option<&ProductEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProductEntry> {
        self.entries.values()
    }

    pub fn ingredient_vocabulary(&self) -> BTreeSet<&str> {
        self.iter().flat_map(|e| e.ingredients.iter().map(String::as_str)).collect()
    }

    pub fn summary(&self) -> CatalogSummary {
        let mut s = CatalogSummary::default();
        for e in self.iter() {
            match e.category {
                Category::General => s.general += 1,
                Category::Therapeutic => s.therapeutic += 1,
            }
            match e.food_form {
                FoodForm::Wet => s.wet += 1,
                FoodForm::Dry => s.dry += 1,
                FoodForm::Other => s.other += 1,
            }
        }
        s.ingredients = self.ingredient_vocabulary().len();
        s
    }
}

/// Calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        Self { year: date.year(), month: date.month() }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    /// 1 = January.
    pub fn month(self) -> u32 {
        self.month
    }

    pub fn succ(self) -> Self {
        self.add_months(1)
    }

    pub fn add_months(self, n: i64) -> Self {
        let idx = self.index() + n;
        Self { year: idx.div_euclid(12) as i32, month: idx.rem_euclid(12) as u32 + 1 }
    }

    /// Months since year 0, January.
    pub fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn months_until(self, later: YearMonth) -> i64 {
        later.index() - self.index()
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid year-month")
    }

    pub fn days(self) -> u32 {
        (self.succ().first_day() - self.first_day()).num_days() as u32
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (y, m) = s.split_once('-').ok_or_else(|| s.to_string())?;
        if y.len() != 4 || m.len() != 2 {
            return Err(s.to_string());
        }
        let year: i32 = y.parse().map_err(|_| s.to_string())?;
        let month: u32 = m.parse().map_err(|_| s.to_string())?;
        YearMonth::new(year, month).ok_or_else(|| s.to_string())
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Aggregated claims for one month.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClaimSeriesRow {
    pub month: YearMonth,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionnaireGroup {
    Case,
    Control,
}

impl QuestionnaireGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionnaireGroup::Case => "case",
            QuestionnaireGroup::Control => "control",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionnaireRecord {
    pub animal_id: String,
    pub group: QuestionnaireGroup,
    pub exposures: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QuestionnaireSummary {
    pub case: usize,
    pub control: usize,
}

pub fn questionnaire_summary(records: &[QuestionnaireRecord]) -> QuestionnaireSummary {
    let case = records.iter().filter(|r| r.group == QuestionnaireGroup::Case).count();
    QuestionnaireSummary { case, control: records.len() - case }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PurchaseSummary {
    pub records: usize,
    pub users: usize,
    pub products: usize,
}

pub fn purchase_summary(records: &[PurchaseRecord]) -> PurchaseSummary {
    let users: BTreeSet<&UserId> = records.iter().map(|r| &r.user_id).collect();
    let products: BTreeSet<&ProductId> = records.iter().map(|r| &r.product_id).collect();
    PurchaseSummary { records: records.len(), users: users.len(), products: products.len() }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ParseMode {
    Strict,
    #[default]
    Lenient,
}

/// What went wrong with a single data row.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RowErrorKind {
    #[error("bad date `{0}` (expected YYYY-MM-DD)")]
    BadDate(String),
    #[error("quantity must be at least 1")]
    NonPositiveQuantity,
    #[error("bad quantity `{0}`")]
    BadQuantity(String),
    #[error("empty `{0}` field")]
    EmptyField(&'static str),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("unknown food form `{0}`")]
    UnknownFoodForm(String),
    #[error("duplicate product id `{0}`")]
    DuplicateProductId(String),
    #[error("bad month `{0}` (expected YYYY-MM)")]
    BadMonth(String),
    #[error("claim count is negative")]
    NegativeCount,
    #[error("bad count `{0}`")]
    BadCount(String),
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("duplicate animal id `{0}`")]
    DuplicateAnimalId(String),
    #[error("malformed row: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct RowError {
    pub line: u64,
    pub kind: RowErrorKind,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error(transparent)]
    Row(#[from] RowError),
    #[error("duplicate product id `{0}`")]
    DuplicateProductId(String),
    #[error("months are not contiguous: {after} is followed by {next}")]
    NonContiguousMonths { after: YearMonth, next: YearMonth },
    #[error("month {0} appears more than once")]
    DuplicateMonth(YearMonth),
}

impl IngestError {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            IngestError::Io { .. } => "Io",
            IngestError::Csv(_) => "Csv",
            IngestError::MissingColumn(_) => "MissingColumn",
            IngestError::Row(r) => match r.kind {
                RowErrorKind::BadDate(_) => "BadDate",
                RowErrorKind::NonPositiveQuantity => "NonPositiveQuantity",
                RowErrorKind::BadQuantity(_) => "BadQuantity",
                RowErrorKind::EmptyField(_) => "EmptyField",
                RowErrorKind::UnknownCategory(_) => "UnknownCategory",
                RowErrorKind::UnknownFoodForm(_) => "UnknownFoodForm",
                RowErrorKind::DuplicateProductId(_) => "DuplicateProductId",
                RowErrorKind::BadMonth(_) => "BadMonth",
                RowErrorKind::NegativeCount => "NegativeCount",
                RowErrorKind::BadCount(_) => "BadCount",
                RowErrorKind::UnknownGroup(_) => "UnknownGroup",
                RowErrorKind::DuplicateAnimalId(_) => "DuplicateAnimalId",
                RowErrorKind::Malformed(_) => "Malformed",
            },
            IngestError::DuplicateProductId(_) => "DuplicateProductId",
            IngestError::NonContiguousMonths { .. } => "NonContiguousMonths",
            IngestError::DuplicateMonth(_) => "DuplicateMonth",
        }
    }
}

/// Tally of a load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub data_rows: usize,
    pub accepted: usize,
    pub skipped: Vec<RowError>,
}

#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub table: T,
    pub report: LoadReport,
}

/// Column positions resolved from the header row.
struct Columns<const N: usize>([usize; N]);

impl<const N: usize> Columns<N> {
    fn resolve(headers: &csv::StringRecord, names: [&'static str; N]) -> Result<Self, IngestError> {
        let mut idx = [0usize; N];
        for (slot, name) in idx.iter_mut().zip(names) {
            *slot = headers
                .iter()
                .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
                .ok_or(IngestError::MissingColumn(name))?;
        }
        Ok(Self(idx))
    }

    fn get<'r>(&self, rec: &'r csv::StringRecord, i: usize) -> Result<&'r str, RowErrorKind> {
        rec.get(self.0[i]).ok_or_else(|| {
            RowErrorKind::Malformed(format!("expected at least {} fields, found {}", self.0[i] + 1, rec.len()))
        })
    }
}

/// Drives a row-by-row load, applying the strict/lenient policy.
fn read_rows<R: Read, const N: usize>(
    reader: R,
    names: [&'static str; N],
    mode: ParseMode,
    mut on_row: impl FnMut(&Columns<N>, &csv::StringRecord) -> Result<(), RowErrorKind>,
) -> Result<LoadReport, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = Columns::resolve(&headers, names)?;
    let mut report = LoadReport::default();
    let mut rec = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(e.into()),
        }
        if rec.iter().all(str::is_empty) {
            continue;
        }
        report.data_rows += 1;
        let line = rec.position().map_or(0, |p| p.line());
        match on_row(&cols, &rec) {
            Ok(()) => report.accepted += 1,
            Err(kind) => {
                let err = RowError { line, kind };
                match mode {
                    ParseMode::Strict => return Err(err.into()),
                    ParseMode::Lenient => {
                        log::debug!("skipping {err}");
                        report.skipped.push(err);
                    }
                }
            }
        }
    }
    Ok(report)
}

fn non_empty<'a>(field: &'a str, name: &'static str) -> Result<&'a str, RowErrorKind> {
    if field.is_empty() {
        Err(RowErrorKind::EmptyField(name))
    } else {
        Ok(field)
    }
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

pub fn parse_date(s: &str) -> Result<NaiveDate, RowErrorKind> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| RowErrorKind::BadDate(s.to_string()))
}

/// Reads purchases, sorted by (user, date, product, quantity).
pub fn read_purchases<R: Read>(reader: R, mode: ParseMode) -> Result<Loaded<Vec<PurchaseRecord>>, IngestError> {
    let mut users: HashMap<String, UserId> = HashMap::new();
    let mut products: HashMap<String, ProductId> = HashMap::new();
    let mut out = Vec::new();
    let report = read_rows(reader, PURCHASE_COLUMNS, mode, |cols, rec| {
        let user = non_empty(cols.get(rec, 0)?, "user_id")?;
        let date = parse_date(cols.get(rec, 1)?)?;
        let product = non_empty(cols.get(rec, 2)?, "product_id")?;
        let qty_raw = cols.get(rec, 3)?;
        let quantity: i64 = qty_raw.parse().map_err(|_| RowErrorKind::BadQuantity(qty_raw.to_string()))?;
        if quantity < 1 {
            return Err(RowErrorKind::NonPositiveQuantity);
        }
        let quantity = u32::try_from(quantity).map_err(|_| RowErrorKind::BadQuantity(qty_raw.to_string()))?;
        let user_id = users.entry(user.to_string()).or_insert_with(|| UserId::new(user)).clone();
        let product_id = products.entry(product.to_string()).or_insert_with(|| ProductId::new(product)).clone();
        out.push(PurchaseRecord { user_id, date, product_id, quantity });
        Ok(())
    })?;
    out.sort();
    Ok(Loaded { table: out, report })
}

pub fn load_purchases(path: &Path, mode: ParseMode) -> Result<Loaded<Vec<PurchaseRecord>>, IngestError> {
    read_purchases(open(path)?, mode)
}

pub fn read_catalog<R: Read>(reader: R, mode: ParseMode) -> Result<Loaded<Catalog>, IngestError> {
    let mut entries: BTreeMap<ProductId, ProductEntry> = BTreeMap::new();
    let report = read_rows(reader, CATALOG_COLUMNS, mode, |cols, rec| {
        let id = non_empty(cols.get(rec, 0)?, "product_id")?;
        let name = cols.get(rec, 1)?;
        let category: Category = cols.get(rec, 2)?.parse().map_err(RowErrorKind::UnknownCategory)?;
        let food_form: FoodForm = cols.get(rec, 3)?.parse().map_err(RowErrorKind::UnknownFoodForm)?;
        let ingredients = parse_token_list(cols.get(rec, 4)?);
        let product_id = ProductId::new(id);
        if entries.contains_key(&product_id) {
            return Err(RowErrorKind::DuplicateProductId(id.to_string()));
        }
        entries.insert(
            product_id.clone(),
            ProductEntry {
                product_id,
                name: name.to_string(),
                normalized_name: normalize_token(name),
                category,
                food_form,
                ingredients,
            },
        );
        Ok(())
    })?;
    Ok(Loaded { table: Catalog { entries }, report })
}

pub fn load_catalog(path: &Path, mode: ParseMode) -> Result<Loaded<Catalog>, IngestError> {
    read_catalog(open(path)?, mode)
}

/// Reads the monthly claim series; rows are sorted by month and must then be
/// contiguous.
pub fn read_claim_series<R: Read>(reader: R, mode: ParseMode) -> Result<Loaded<Vec<ClaimSeriesRow>>, IngestError> {
    let mut rows = Vec::new();
    let report = read_rows(reader, CLAIM_COLUMNS, mode, |cols, rec| {
        let m = cols.get(rec, 0)?;
        let month: YearMonth = m.parse().map_err(RowErrorKind::BadMonth)?;
        let c = cols.get(rec, 1)?;
        let count: i64 = c.parse().map_err(|_| RowErrorKind::BadCount(c.to_string()))?;
        if count < 0 {
            return Err(RowErrorKind::NegativeCount);
        }
        rows.push(ClaimSeriesRow { month, count: count as u64 });
        Ok(())
    })?;
    rows.sort_by_key(|r| r.month);
    for w in rows.windows(2) {
        if w[0].month == w[1].month {
            return Err(IngestError::DuplicateMonth(w[0].month));
        }
        if w[0].month.succ() != w[1].month {
            return Err(IngestError::NonContiguousMonths { after: w[0].month, next: w[1].month });
        }
    }
    Ok(Loaded { table: rows, report })
}

pub fn load_claim_series(path: &Path, mode: ParseMode) -> Result<Loaded<Vec<ClaimSeriesRow>>, IngestError> {
    read_claim_series(open(path)?, mode)
}

/// Reads questionnaire records sorted by animal id.
pub fn read_questionnaire<R: Read>(
    reader: R,
    mode: ParseMode,
) -> Result<Loaded<Vec<QuestionnaireRecord>>, IngestError> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::new();
    let report = read_rows(reader, QUESTIONNAIRE_COLUMNS, mode, |cols, rec| {
        let id = non_empty(cols.get(rec, 0)?, "animal_id")?;
        let g = cols.get(rec, 1)?;
        let group = match normalize_token(g).as_str() {
            "case" => QuestionnaireGroup::Case,
            "control" => QuestionnaireGroup::Control,
            _ => return Err(RowErrorKind::UnknownGroup(g.to_string())),
        };
        if !seen.insert(id.to_string()) {
            return Err(RowErrorKind::DuplicateAnimalId(id.to_string()));
        }
        out.push(QuestionnaireRecord {
            animal_id: id.to_string(),
            group,
            exposures: parse_token_list(cols.get(rec, 2)?),
        });
        Ok(())
    })?;
    out.sort_by(|a, b| a.animal_id.cmp(&b.animal_id));
    Ok(Loaded { table: out, report })
}

pub fn load_questionnaire(path: &Path, mode: ParseMode) -> Result<Loaded<Vec<QuestionnaireRecord>>, IngestError> {
    read_questionnaire(open(path)?, mode)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_purchases<W: Write>(w: W, records: &[PurchaseRecord]) -> csv::Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(PURCHASE_COLUMNS)?;
    for r in records {
        wtr.write_record([
            r.user_id.as_str(),
            &r.date.format("%Y-%m-%d").to_string(),
            r.product_id.as_str(),
            &r.quantity.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_catalog<W: Write>(w: W, catalog: &Catalog) -> csv::Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(CATALOG_COLUMNS)?;
    for e in catalog.iter() {
        wtr.write_record([
            e.product_id.as_str(),
            &e.name,
            e.category.as_str(),
            e.food_form.as_str(),
            &join_token_list(&e.ingredients),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_claim_series<W: Write>(w: W, rows: &[ClaimSeriesRow]) -> csv::Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(CLAIM_COLUMNS)?;
    for r in rows {
        wtr.write_record([r.month.to_string(), r.count.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_questionnaire<W: Write>(w: W, records: &[QuestionnaireRecord]) -> csv::Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(QUESTIONNAIRE_COLUMNS)?;
    for r in records {
        wtr.write_record([r.animal_id.as_str(), r.group.as_str(), &join_token_list(&r.exposures)])?;
    }
    wtr.flush()?;
    Ok(())
}
