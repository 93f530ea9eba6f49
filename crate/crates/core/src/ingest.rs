//! Reading and writing dataset directories.
//!
//! A dataset is a JSON manifest plus UTF-8 CSV tables (with header rows)
//! and a JSON-lines behavior log. Paths in the manifest are relative to
//! the manifest's directory. Empty cells and the token `unknown` mean the
//! value is not known.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AccessibilityAudit, AccessibilityScore, BehaviorEvent, Dataset, DatasetTables, EnergyLedger, EvalConfig,
    ExplanationRecord, FamiliarPolicy, ItemFeatures, ItemRecord, PairedObservation,
    RecommendationSet, RelevanceJudgment, SatisfactionSeries, SimilarityEntry, SimilaritySource, Units,
    UserRecord, ValidationReport, DEFAULT_EPSILON,
};
use crate::report::MetricError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}:{line}: {message}")]
    Schema { file: String, line: u64, message: String },
    #[error("manifest {}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("dataset failed validation:\n{0}")]
    Invalid(ValidationReport),
}

/// Table locations, relative to the manifest. Only the catalog is required.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablePaths {
    pub catalog: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub users: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recommendations: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevance: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_features: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accessibility: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behaviors: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanations: Option<PathBuf>,
}

fn default_schema_version() -> u32 {
    MANIFEST_SCHEMA_VERSION
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub tables: TablePaths,
    #[serde(default)]
    pub units: Units,
    /// Source scale `[min, max]` of satisfaction values; rescaled to `[0, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction_scale: Option<[f64; 2]>,
    /// Number of periods `T`; defaults to the largest period seen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction_horizon: Option<u32>,
    #[serde(default)]
    pub groups: Vec<String>,
    #[serde(default)]
    pub sustainable_behaviors: Vec<String>,
    #[serde(default)]
    pub green_item_behaviors: bool,
    /// Catalog column bindings: canonical column name to the header used in the file.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub columns: BTreeMap<String, String>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default)]
    pub familiar_policy: FamiliarPolicy,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub accessibility_criteria: Vec<String>,
}

impl DatasetManifest {
    pub fn new(tables: TablePaths) -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tables,
            units: Units::default(),
            satisfaction_scale: None,
            satisfaction_horizon: None,
            groups: Vec::new(),
            sustainable_behaviors: Vec::new(),
            green_item_behaviors: false,
            columns: BTreeMap::new(),
            epsilon: DEFAULT_EPSILON,
            decay: None,
            familiar_policy: FamiliarPolicy::Seen,
            accessibility_criteria: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_owned(),
            source,
        })?;
        let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| IngestError::Manifest {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        manifest.check(path)?;
        Ok(manifest)
    }

    fn check(&self, path: &Path) -> Result<(), IngestError> {
        let fail = |message: String| IngestError::Manifest {
            path: path.to_owned(),
            message,
        };
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(fail(format!("unsupported schema_version {}", self.schema_version)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(fail(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if let Some(d) = self.decay {
            if !(d > 0.0 && d <= 1.0) {
                return Err(fail(format!("decay must lie in (0, 1], got {d}")));
            }
        }
        if let Some([lo, hi]) = self.satisfaction_scale {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(fail(format!("satisfaction_scale [{lo}, {hi}] is not an increasing range")));
            }
        }
        if self.satisfaction_horizon == Some(0) {
            return Err(fail("satisfaction_horizon must be positive".into()));
        }
        for key in self.columns.keys() {
            if !CATALOG_COLUMNS.contains(&key.as_str()) && !OPTIONAL_CATALOG_COLUMNS.contains(&key.as_str()) {
                return Err(fail(format!("cannot bind unknown catalog column `{key}`")));
            }
        }
        Ok(())
    }

    fn config(&self) -> EvalConfig {
        EvalConfig {
            groups: self.groups.iter().cloned().collect(),
            sustainable_behaviors: self.sustainable_behaviors.iter().cloned().collect(),
            green_item_behaviors: self.green_item_behaviors,
            epsilon: self.epsilon,
            decay: self.decay,
            familiar_policy: self.familiar_policy.clone(),
            units: self.units.clone(),
        }
    }
}

/// A catalog attribute whose availability is audited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CatalogField {
    CarbonFootprint,
    IsGreen,
    IsHarmful,
    LciScore,
    ProducerId,
    ProducerRegion,
    SustainabilityLabel,
}

impl CatalogField {
    pub const ALL: [CatalogField; 7] = [
        CatalogField::CarbonFootprint,
        CatalogField::IsGreen,
        CatalogField::IsHarmful,
        CatalogField::LciScore,
        CatalogField::ProducerId,
        CatalogField::ProducerRegion,
        CatalogField::SustainabilityLabel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogField::CarbonFootprint => "carbon_footprint",
            CatalogField::IsGreen => "is_green",
            CatalogField::IsHarmful => "is_harmful",
            CatalogField::LciScore => "lci_score",
            CatalogField::ProducerId => "producer_id",
            CatalogField::ProducerRegion => "producer_region",
            CatalogField::SustainabilityLabel => "sustainability_label",
        }
    }

    /// The metric that depends on this field.
    pub fn metric(self) -> &'static str {
        match self {
            CatalogField::CarbonFootprint => "avgcarfi",
            CatalogField::IsGreen => "girec",
            CatalogField::IsHarmful => "hier",
            CatalogField::LciScore => "avglci",
            CatalogField::ProducerId => "pef",
            CatalogField::ProducerRegion => "lbpr",
            CatalogField::SustainabilityLabel => "labelcoverage",
        }
    }

    pub fn is_known(self, item: &ItemRecord) -> bool {
        match self {
            CatalogField::CarbonFootprint => item.carbon_footprint.is_some(),
            CatalogField::IsGreen => item.is_green.is_some(),
            CatalogField::IsHarmful => item.is_harmful.is_some(),
            CatalogField::LciScore => item.lci_score.is_some(),
            CatalogField::ProducerId => item.producer_id.is_some(),
            CatalogField::ProducerRegion => item.producer_region.is_some(),
            CatalogField::SustainabilityLabel => item.sustainability_label.is_some(),
        }
    }
}

impl fmt::Display for CatalogField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CatalogField::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown catalog field `{s}`"))
    }
}

/// Share of catalog items whose `field` is known.
pub fn label_coverage(catalog: &[ItemRecord], field: CatalogField) -> Result<f64, MetricError> {
    if catalog.is_empty() {
        return Err(MetricError::EmptyCatalog);
    }
    let known = catalog.iter().filter(|i| field.is_known(i)).count();
    Ok(known as f64 / catalog.len() as f64)
}

const CATALOG_COLUMNS: [&str; 8] = [
    "item_id",
    "carbon_footprint",
    "is_green",
    "is_harmful",
    "lci_score",
    "producer_id",
    "producer_region",
    "sustainability_label",
];
const OPTIONAL_CATALOG_COLUMNS: [&str; 2] = ["is_local", "category"];

struct Row {
    line: u64,
    record: csv::StringRecord,
}

struct Table {
    file: String,
    headers: HashMap<String, usize>,
    rows: Vec<Row>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, IngestError> {
        let file = path.display().to_string();
        let bytes = fs::read(path).map_err(|source| IngestError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(bytes.as_slice());
        let csv_err = |e: csv::Error, file: &str| {
            let line = e.position().map_or(0, |p| p.line());
            IngestError::Schema {
                file: file.to_owned(),
                line,
                message: e.to_string(),
            }
        };
        let headers = reader
            .headers()
            .map_err(|e| csv_err(e, &file))?
            .iter()
            .enumerate()
            .map(|(n, h)| (h.trim_start_matches('\u{feff}').to_owned(), n))
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_err(e, &file))?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push(Row { line, record });
        }
        Ok(Self { file, headers, rows })
    }

    fn column(&self, name: &str) -> Result<usize, IngestError> {
        self.headers.get(name).copied().ok_or_else(|| IngestError::Schema {
            file: self.file.clone(),
            line: 1,
            message: format!("missing column `{name}`"),
        })
    }

    fn err(&self, row: &Row, message: impl Into<String>) -> IngestError {
        IngestError::Schema {
            file: self.file.clone(),
            line: row.line,
            message: message.into(),
        }
    }
}

fn cell<'r>(row: &'r Row, col: usize) -> &'r str {
    row.record.get(col).unwrap_or("")
}

fn known(raw: &str) -> Option<&str> {
    if raw.is_empty() || raw.eq_ignore_ascii_case("unknown") {
        None
    } else {
        Some(raw)
    }
}

fn opt_string(row: &Row, col: usize) -> Option<String> {
    known(cell(row, col)).map(str::to_owned)
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn opt_bool(t: &Table, row: &Row, col: usize, name: &str) -> Result<Option<bool>, IngestError> {
    match known(cell(row, col)) {
        None => Ok(None),
        Some(raw) => parse_bool(raw)
            .map(Some)
            .ok_or_else(|| t.err(row, format!("{name}: expected a boolean, got `{raw}`"))),
    }
}

fn real(t: &Table, row: &Row, col: usize, name: &str) -> Result<f64, IngestError> {
    let raw = cell(row, col);
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(t.err(row, format!("{name}: expected a finite number, got `{raw}`"))),
    }
}

fn opt_nonneg(t: &Table, row: &Row, col: usize, name: &str) -> Result<Option<f64>, IngestError> {
    if known(cell(row, col)).is_none() {
        return Ok(None);
    }
    let v = real(t, row, col, name)?;
    if v < 0.0 {
        return Err(t.err(row, format!("{name}: must be >= 0, got {v}")));
    }
    Ok(Some(v))
}

fn count(t: &Table, row: &Row, col: usize, name: &str) -> Result<u64, IngestError> {
    let raw = cell(row, col);
    raw.parse::<u64>()
        .map_err(|_| t.err(row, format!("{name}: expected a nonnegative integer, got `{raw}`")))
}

fn required(t: &Table, row: &Row, col: usize, name: &str) -> Result<String, IngestError> {
    let raw = cell(row, col);
    if raw.is_empty() {
        return Err(t.err(row, format!("{name}: empty value")));
    }
    Ok(raw.to_owned())
}

fn split_list(raw: &str) -> impl Iterator<Item = String> + '_ {
    raw.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned)
}

fn read_catalog(path: &Path, bindings: &BTreeMap<String, String>) -> Result<Vec<ItemRecord>, IngestError> {
    let t = Table::read(path)?;
    let bound = |name: &str| bindings.get(name).map_or(name, String::as_str).to_owned();
    let mut cols = HashMap::new();
    for name in CATALOG_COLUMNS {
        cols.insert(name, t.column(&bound(name))?);
    }
    let is_local = t.headers.get(&bound("is_local")).copied();
    let category = t.headers.get(&bound("category")).copied();
    for name in OPTIONAL_CATALOG_COLUMNS {
        if bindings.contains_key(name) {
            t.column(&bound(name))?;
        }
    }
    let mut items = Vec::with_capacity(t.rows.len());
    for row in &t.rows {
        items.push(ItemRecord {
            item_id: required(&t, row, cols["item_id"], "item_id")?,
            carbon_footprint: opt_nonneg(&t, row, cols["carbon_footprint"], "carbon_footprint")?,
            is_green: opt_bool(&t, row, cols["is_green"], "is_green")?,
            is_harmful: opt_bool(&t, row, cols["is_harmful"], "is_harmful")?,
            lci_score: opt_nonneg(&t, row, cols["lci_score"], "lci_score")?,
            producer_id: opt_string(row, cols["producer_id"]),
            producer_region: opt_string(row, cols["producer_region"]),
            sustainability_label: opt_bool(&t, row, cols["sustainability_label"], "sustainability_label")?,
            is_local: match is_local {
                Some(c) => opt_bool(&t, row, c, "is_local")?,
                None => None,
            },
            category: category.and_then(|c| opt_string(row, c)),
        });
    }
    Ok(items)
}

fn read_users(path: &Path) -> Result<Vec<UserRecord>, IngestError> {
    let t = Table::read(path)?;
    let (id, groups, region, familiar) = (
        t.column("user_id")?,
        t.column("groups")?,
        t.column("region")?,
        t.column("familiar_items")?,
    );
    t.rows
        .iter()
        .map(|row| {
            Ok(UserRecord {
                user_id: required(&t, row, id, "user_id")?,
                groups: split_list(cell(row, groups)).collect(),
                region: opt_string(row, region),
                familiar_items: split_list(cell(row, familiar)).collect(),
            })
        })
        .collect()
}

fn read_recommendations(path: &Path) -> Result<Vec<RecommendationSet>, IngestError> {
    let t = Table::read(path)?;
    let (user, rank, item) = (t.column("user_id")?, t.column("rank")?, t.column("item_id")?);
    let ts = t.headers.get("timestamp").copied();

    struct Pending {
        user_id: String,
        ranked: BTreeMap<u64, String>,
        timestamp: Option<String>,
    }
    let mut order: Vec<Pending> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for row in &t.rows {
        let user_id = required(&t, row, user, "user_id")?;
        let r = count(&t, row, rank, "rank")?;
        let item_id = required(&t, row, item, "item_id")?;
        let stamp = ts.and_then(|c| opt_string(row, c));
        let n = *index.entry(user_id.clone()).or_insert_with(|| {
            order.push(Pending {
                user_id,
                ranked: BTreeMap::new(),
                timestamp: None,
            });
            order.len() - 1
        });
        let pending = &mut order[n];
        if pending.ranked.insert(r, item_id).is_some() {
            return Err(t.err(row, format!("duplicate rank {r} for user `{}`", pending.user_id)));
        }
        match (&pending.timestamp, stamp) {
            (None, s) => pending.timestamp = s,
            (Some(a), Some(b)) if *a != b => {
                return Err(t.err(row, "conflicting timestamps within one recommendation set"));
            }
            _ => {}
        }
    }
    Ok(order
        .into_iter()
        .map(|p| RecommendationSet {
            user_id: p.user_id,
            items: p.ranked.into_values().collect(),
            timestamp: p.timestamp,
        })
        .collect())
}

fn read_relevance(path: &Path) -> Result<Vec<RelevanceJudgment>, IngestError> {
    let t = Table::read(path)?;
    let (user, item, rel) = (t.column("user_id")?, t.column("item_id")?, t.column("relevance")?);
    t.rows
        .iter()
        .map(|row| {
            Ok(RelevanceJudgment {
                user_id: required(&t, row, user, "user_id")?,
                item_id: required(&t, row, item, "item_id")?,
                relevance: real(&t, row, rel, "relevance")?,
            })
        })
        .collect()
}

fn read_similarity(path: &Path) -> Result<Vec<SimilarityEntry>, IngestError> {
    let t = Table::read(path)?;
    let (a, b, s) = (t.column("item_a")?, t.column("item_b")?, t.column("sim")?);
    t.rows
        .iter()
        .map(|row| {
            Ok(SimilarityEntry {
                item_a: required(&t, row, a, "item_a")?,
                item_b: required(&t, row, b, "item_b")?,
                sim: real(&t, row, s, "sim")?,
            })
        })
        .collect()
}

fn read_features(path: &Path) -> Result<Vec<ItemFeatures>, IngestError> {
    let t = Table::read(path)?;
    let id = t.column("item_id")?;
    let mut feature_cols: Vec<(usize, &String)> = t
        .headers
        .iter()
        .filter(|(_, &n)| n != id)
        .map(|(h, &n)| (n, h))
        .collect();
    feature_cols.sort();
    t.rows
        .iter()
        .map(|row| {
            Ok(ItemFeatures {
                item_id: required(&t, row, id, "item_id")?,
                values: feature_cols
                    .iter()
                    .map(|(c, h)| real(&t, row, *c, h))
                    .collect::<Result<_, _>>()?,
            })
        })
        .collect()
}

fn read_energy(path: &Path) -> Result<EnergyLedger, IngestError> {
    let t = Table::read(path)?;
    let cols = [
        t.column("e_inference_kwh")?,
        t.column("n_rec")?,
        t.column("ec_build_kwh")?,
        t.column("n_epoch")?,
        t.column("n_data_processed")?,
    ];
    let [row] = t.rows.as_slice() else {
        return Err(IngestError::Schema {
            file: t.file.clone(),
            line: t.rows.get(1).map_or(1, |r| r.line),
            message: format!("expected exactly one ledger row, found {}", t.rows.len()),
        });
    };
    let energy = |c, name| -> Result<f64, IngestError> {
        let v = real(&t, row, c, name)?;
        if v < 0.0 {
            return Err(t.err(row, format!("{name}: must be >= 0, got {v}")));
        }
        Ok(v)
    };
    Ok(EnergyLedger {
        e_inference_kwh: energy(cols[0], "e_inference_kwh")?,
        n_rec: count(&t, row, cols[1], "n_rec")?,
        ec_build_kwh: energy(cols[2], "ec_build_kwh")?,
        n_epoch: count(&t, row, cols[3], "n_epoch")?,
        n_data_processed: count(&t, row, cols[4], "n_data_processed")?,
    })
}

fn read_paired(path: &Path) -> Result<Vec<PairedObservation>, IngestError> {
    let t = Table::read(path)?;
    let (kind, base, treat, unit) = (
        t.column("kind")?,
        t.column("baseline")?,
        t.column("treatment")?,
        t.column("unit")?,
    );
    let hib = t.headers.get("higher_is_better").copied();
    t.rows
        .iter()
        .map(|row| {
            Ok(PairedObservation {
                kind: cell(row, kind).parse().map_err(|e: String| t.err(row, e))?,
                baseline: real(&t, row, base, "baseline")?,
                treatment: real(&t, row, treat, "treatment")?,
                unit: cell(row, unit).to_owned(),
                higher_is_better: match hib {
                    Some(c) => opt_bool(&t, row, c, "higher_is_better")?.unwrap_or(true),
                    None => true,
                },
            })
        })
        .collect()
}

fn read_accessibility(path: &Path, criteria: &[String]) -> Result<AccessibilityAudit, IngestError> {
    let t = Table::read(path)?;
    let (a, g, s) = (t.column("artifact_id")?, t.column("group")?, t.column("score")?);
    let scores = t
        .rows
        .iter()
        .map(|row| {
            Ok(AccessibilityScore {
                artifact_id: required(&t, row, a, "artifact_id")?,
                group: required(&t, row, g, "group")?,
                score: real(&t, row, s, "score")?,
            })
        })
        .collect::<Result<Vec<_>, IngestError>>()?;
    let mut audit = AccessibilityAudit::from_scores(scores);
    audit.criteria = criteria.iter().cloned().collect();
    Ok(audit)
}

fn read_satisfaction(
    path: &Path,
    scale: Option<[f64; 2]>,
    horizon: Option<u32>,
) -> Result<Vec<SatisfactionSeries>, IngestError> {
    let t = Table::read(path)?;
    let (user, period, value) = (t.column("user_id")?, t.column("t")?, t.column("value")?);
    let [lo, hi] = scale.unwrap_or([0.0, 1.0]);
    let mut parsed = Vec::with_capacity(t.rows.len());
    for row in &t.rows {
        let u = required(&t, row, user, "user_id")?;
        let p = count(&t, row, period, "t")?;
        if p == 0 || p > u64::from(u32::MAX) {
            return Err(t.err(row, format!("t: periods are numbered from 1, got {p}")));
        }
        let raw = real(&t, row, value, "value")?;
        let v = (raw - lo) / (hi - lo);
        if !(0.0..=1.0).contains(&v) {
            return Err(t.err(row, format!("value {raw} outside the declared scale [{lo}, {hi}]")));
        }
        parsed.push((row, u, p as u32, v));
    }
    let horizon = horizon.unwrap_or_else(|| parsed.iter().map(|p| p.2).max().unwrap_or(0));
    let mut series: Vec<SatisfactionSeries> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (row, u, p, v) in parsed {
        if p > horizon {
            return Err(t.err(row, format!("t = {p} exceeds the horizon {horizon}")));
        }
        let n = *index.entry(u.clone()).or_insert_with(|| {
            series.push(SatisfactionSeries {
                user_id: u,
                horizon,
                values: vec![None; horizon as usize],
            });
            series.len() - 1
        });
        let slot = &mut series[n].values[p as usize - 1];
        if slot.is_some() {
            return Err(t.err(row, format!("duplicate period {p}")));
        }
        *slot = Some(v);
    }
    Ok(series)
}

#[derive(Deserialize)]
struct BehaviorLine {
    user: String,
    kind: String,
    #[serde(default)]
    item: Option<String>,
    #[serde(default)]
    timestamp: Option<String>,
}

#[derive(Serialize)]
struct BehaviorLineOut<'a> {
    user: &'a str,
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    item: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<&'a str>,
}

fn read_behaviors(path: &Path) -> Result<Vec<BehaviorEvent>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut events = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let b: BehaviorLine = serde_json::from_str(line).map_err(|e| IngestError::Schema {
            file: path.display().to_string(),
            line: n as u64 + 1,
            message: e.to_string(),
        })?;
        events.push(BehaviorEvent {
            user_id: b.user,
            kind: b.kind,
            item_id: b.item.filter(|i| !i.is_empty()),
            timestamp: b.timestamp,
        });
    }
    Ok(events)
}

fn read_explanations(path: &Path) -> Result<Vec<ExplanationRecord>, IngestError> {
    let t = Table::read(path)?;
    let (user, id, score) = (t.column("user_id")?, t.column("explanation_id")?, t.column("score")?);
    t.rows
        .iter()
        .map(|row| {
            Ok(ExplanationRecord {
                user_id: required(&t, row, user, "user_id")?,
                explanation_id: required(&t, row, id, "explanation_id")?,
                interpret_score: real(&t, row, score, "score")?,
            })
        })
        .collect()
}

fn base_dir(manifest_path: &Path) -> PathBuf {
    manifest_path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Reads only the catalog named by a manifest.
pub fn load_catalog(manifest_path: &Path) -> Result<Vec<ItemRecord>, IngestError> {
    let manifest = DatasetManifest::read(manifest_path)?;
    read_catalog(&base_dir(manifest_path).join(&manifest.tables.catalog), &manifest.columns)
}

/// Parses every table named by the manifest without validating it.
pub fn load_tables(manifest_path: &Path) -> Result<DatasetTables, IngestError> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let dir = base_dir(manifest_path);
    let p = &manifest.tables;
    let at = |rel: &Option<PathBuf>| rel.as_ref().map(|r| dir.join(r));

    let similarity = match (at(&p.similarity), at(&p.item_features)) {
        (Some(_), Some(_)) => {
            return Err(IngestError::Manifest {
                path: manifest_path.to_owned(),
                message: "declare either `similarity` or `item_features`, not both".into(),
            })
        }
        (Some(s), None) => Some(SimilaritySource::Table(read_similarity(&s)?)),
        (None, Some(f)) => Some(SimilaritySource::Features(read_features(&f)?)),
        (None, None) => None,
    };

    Ok(DatasetTables {
        catalog: read_catalog(&dir.join(&p.catalog), &manifest.columns)?,
        users: at(&p.users).map(|f| read_users(&f)).transpose()?.unwrap_or_default(),
        recommendations: at(&p.recommendations)
            .map(|f| read_recommendations(&f))
            .transpose()?
            .unwrap_or_default(),
        judgments: at(&p.relevance).map(|f| read_relevance(&f)).transpose()?.unwrap_or_default(),
        similarity,
        energy: at(&p.energy).map(|f| read_energy(&f)).transpose()?,
        paired: at(&p.paired).map(|f| read_paired(&f)).transpose()?.unwrap_or_default(),
        accessibility: at(&p.accessibility)
            .map(|f| read_accessibility(&f, &manifest.accessibility_criteria))
            .transpose()?,
        satisfaction: at(&p.satisfaction)
            .map(|f| read_satisfaction(&f, manifest.satisfaction_scale, manifest.satisfaction_horizon))
            .transpose()?
            .unwrap_or_default(),
        behaviors: at(&p.behaviors).map(|f| read_behaviors(&f)).transpose()?.unwrap_or_default(),
        explanations: at(&p.explanations)
            .map(|f| read_explanations(&f))
            .transpose()?
            .unwrap_or_default(),
        config: manifest.config(),
    })
}

/// Loads and validates a dataset; refuses it on any hard violation.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset, IngestError> {
    Dataset::new(load_tables(manifest_path)?).map_err(IngestError::Invalid)
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn join(items: impl IntoIterator<Item = impl AsRef<str>>) -> String {
    items
        .into_iter()
        .map(|s| s.as_ref().to_owned())
        .collect::<Vec<_>>()
        .join(";")
}

struct Writer {
    dir: PathBuf,
}

impl Writer {
    fn csv<I, R>(&self, name: &str, header: &[&str], rows: I) -> Result<PathBuf, IngestError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let path = self.dir.join(name);
        let io_err = |e: csv::Error| IngestError::Io {
            path: path.clone(),
            source: e.into(),
        };
        let mut w = csv::Writer::from_path(&path).map_err(io_err)?;
        w.write_record(header).map_err(io_err)?;
        for row in rows {
            w.write_record(row).map_err(io_err)?;
        }
        w.flush().map_err(|source| IngestError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(PathBuf::from(name))
    }

    fn text(&self, name: &str, contents: &str) -> Result<PathBuf, IngestError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| IngestError::Io { path, source })?;
        Ok(PathBuf::from(name))
    }
}

/// Writes `tables` as a dataset directory in canonical form and returns
/// the manifest path. Satisfaction values are written on the `[0, 1]` scale.
pub fn write_dataset(tables: &DatasetTables, dir: &Path) -> Result<PathBuf, IngestError> {
    fs::create_dir_all(dir).map_err(|source| IngestError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let w = Writer { dir: dir.to_owned() };
    let has_local = tables.catalog.iter().any(|i| i.is_local.is_some());
    let has_category = tables.catalog.iter().any(|i| i.category.is_some());
    let mut header: Vec<&str> = CATALOG_COLUMNS.to_vec();
    if has_local {
        header.push("is_local");
    }
    if has_category {
        header.push("category");
    }
    let catalog = w.csv(
        "catalog.csv",
        &header,
        tables.catalog.iter().map(|i| {
            let mut row = vec![
                i.item_id.clone(),
                fmt_opt_f64(i.carbon_footprint),
                fmt_opt_bool(i.is_green),
                fmt_opt_bool(i.is_harmful),
                fmt_opt_f64(i.lci_score),
                i.producer_id.clone().unwrap_or_default(),
                i.producer_region.clone().unwrap_or_default(),
                fmt_opt_bool(i.sustainability_label),
            ];
            if has_local {
                row.push(fmt_opt_bool(i.is_local));
            }
            if has_category {
                row.push(i.category.clone().unwrap_or_default());
            }
            row
        }),
    )?;
    let mut paths = TablePaths {
        catalog,
        ..TablePaths::default()
    };

    if !tables.users.is_empty() {
        paths.users = Some(w.csv(
            "users.csv",
            &["user_id", "groups", "region", "familiar_items"],
            tables.users.iter().map(|u| {
                [
                    u.user_id.clone(),
                    join(&u.groups),
                    u.region.clone().unwrap_or_default(),
                    join(&u.familiar_items),
                ]
            }),
        )?);
    }
    if !tables.recommendations.is_empty() {
        paths.recommendations = Some(w.csv(
            "recommendations.csv",
            &["user_id", "rank", "item_id", "timestamp"],
            tables.recommendations.iter().flat_map(|r| {
                r.items.iter().enumerate().map(move |(n, i)| {
                    [
                        r.user_id.clone(),
                        (n + 1).to_string(),
                        i.clone(),
                        r.timestamp.clone().unwrap_or_default(),
                    ]
                })
            }),
        )?);
    }
    if !tables.judgments.is_empty() {
        paths.relevance = Some(w.csv(
            "relevance.csv",
            &["user_id", "item_id", "relevance"],
            tables
                .judgments
                .iter()
                .map(|j| [j.user_id.clone(), j.item_id.clone(), j.relevance.to_string()]),
        )?);
    }
    match &tables.similarity {
        Some(SimilaritySource::Table(entries)) => {
            paths.similarity = Some(w.csv(
                "similarity.csv",
                &["item_a", "item_b", "sim"],
                entries
                    .iter()
                    .map(|e| [e.item_a.clone(), e.item_b.clone(), e.sim.to_string()]),
            )?);
        }
        Some(SimilaritySource::Features(rows)) => {
            let dim = rows.first().map_or(0, |r| r.values.len());
            let names: Vec<String> = (0..dim).map(|d| format!("f{d}")).collect();
            let mut header = vec!["item_id"];
            header.extend(names.iter().map(String::as_str));
            paths.item_features = Some(w.csv(
                "item_features.csv",
                &header,
                rows.iter().map(|r| {
                    std::iter::once(r.item_id.clone())
                        .chain(r.values.iter().map(f64::to_string))
                        .collect::<Vec<_>>()
                }),
            )?);
        }
        None => {}
    }
    if let Some(e) = &tables.energy {
        paths.energy = Some(w.csv(
            "energy.csv",
            &["e_inference_kwh", "n_rec", "ec_build_kwh", "n_epoch", "n_data_processed"],
            [[
                e.e_inference_kwh.to_string(),
                e.n_rec.to_string(),
                e.ec_build_kwh.to_string(),
                e.n_epoch.to_string(),
                e.n_data_processed.to_string(),
            ]],
        )?);
    }
    if !tables.paired.is_empty() {
        paths.paired = Some(w.csv(
            "paired.csv",
            &["kind", "baseline", "treatment", "unit", "higher_is_better"],
            tables.paired.iter().map(|p| {
                [
                    p.kind.to_string(),
                    p.baseline.to_string(),
                    p.treatment.to_string(),
                    p.unit.clone(),
                    p.higher_is_better.to_string(),
                ]
            }),
        )?);
    }
    if let Some(audit) = &tables.accessibility {
        paths.accessibility = Some(w.csv(
            "accessibility.csv",
            &["artifact_id", "group", "score"],
            audit
                .scores
                .iter()
                .map(|s| [s.artifact_id.clone(), s.group.clone(), s.score.to_string()]),
        )?);
    }
    let mut horizon = None;
    if !tables.satisfaction.is_empty() {
        horizon = tables.satisfaction.iter().map(|s| s.horizon).max();
        paths.satisfaction = Some(w.csv(
            "satisfaction.csv",
            &["user_id", "t", "value"],
            tables.satisfaction.iter().flat_map(|s| {
                s.values.iter().enumerate().filter_map(move |(n, v)| {
                    v.map(|v| [s.user_id.clone(), (n + 1).to_string(), v.to_string()])
                })
            }),
        )?);
    }
    if !tables.behaviors.is_empty() {
        let mut text = String::new();
        for b in &tables.behaviors {
            let line = BehaviorLineOut {
                user: &b.user_id,
                kind: &b.kind,
                item: b.item_id.as_deref(),
                timestamp: b.timestamp.as_deref(),
            };
            text.push_str(&serde_json::to_string(&line).expect("behavior line serializes"));
            text.push('\n');
        }
        paths.behaviors = Some(w.text("behaviors.jsonl", &text)?);
    }
    if !tables.explanations.is_empty() {
        paths.explanations = Some(w.csv(
            "explanations.csv",
            &["user_id", "explanation_id", "score"],
            tables.explanations.iter().map(|e| {
                [
                    e.user_id.clone(),
                    e.explanation_id.clone(),
                    e.interpret_score.to_string(),
                ]
            }),
        )?);
    }

    let cfg = &tables.config;
    let mut manifest = DatasetManifest::new(paths);
    manifest.units = cfg.units.clone();
    manifest.satisfaction_horizon = horizon;
    manifest.groups = cfg.groups.iter().cloned().collect();
    manifest.sustainable_behaviors = cfg.sustainable_behaviors.iter().cloned().collect();
    manifest.green_item_behaviors = cfg.green_item_behaviors;
    manifest.epsilon = cfg.epsilon;
    manifest.decay = cfg.decay;
    manifest.familiar_policy = cfg.familiar_policy.clone();
    manifest.accessibility_criteria = tables
        .accessibility
        .as_ref()
        .map(|a| a.criteria.iter().cloned().collect())
        .unwrap_or_default();
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    w.text("manifest.json", &json)?;
    Ok(dir.join("manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    const CATALOG_HEADER: &str =
        "item_id,carbon_footprint,is_green,is_harmful,lci_score,producer_id,producer_region,sustainability_label\n";

    fn manifest(dir: &Path, extra: &str) -> PathBuf {
        let path = dir.join("manifest.json");
        write(
            dir,
            "manifest.json",
            &format!(r#"{{"tables": {{"catalog": "catalog.csv"{extra}}}}}"#),
        );
        path
    }

    #[test]
    fn coverage_examples() {
        let items: Vec<ItemRecord> = (0..10)
            .map(|n| {
                let i = ItemRecord::new(format!("i{n}"));
                if n < 8 {
                    i.with_green(n % 2 == 0)
                } else {
                    i
                }
            })
            .collect();
        assert!((label_coverage(&items, CatalogField::IsGreen).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(label_coverage(&items, CatalogField::CarbonFootprint), Ok(0.0));
        let all: Vec<_> = items.iter().cloned().map(|i| i.with_green(true)).collect();
        assert_eq!(label_coverage(&all, CatalogField::IsGreen), Ok(1.0));
        assert_eq!(label_coverage(&[], CatalogField::IsGreen), Err(MetricError::EmptyCatalog));
    }

    #[test]
    fn negative_carbon_is_schema_error_with_line() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "catalog.csv",
            &format!("{CATALOG_HEADER}a,1,true,false,,p,r,\nb,-2,,,,,,\n"),
        );
        let err = load_dataset(&manifest(dir.path(), "")).unwrap_err();
        match err {
            IngestError::Schema { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("carbon_footprint"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_token_is_unlabeled() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "catalog.csv",
            &format!("{CATALOG_HEADER}a,unknown,UNKNOWN,,,,,true\n"),
        );
        let catalog = load_catalog(&manifest(dir.path(), "")).unwrap();
        assert_eq!(catalog[0].carbon_footprint, None);
        assert_eq!(catalog[0].is_green, None);
        assert_eq!(catalog[0].sustainability_label, Some(true));
    }

    #[test]
    fn missing_column_reported() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "catalog.csv", "item_id,carbon_footprint\na,1\n");
        let err = load_catalog(&manifest(dir.path(), "")).unwrap_err();
        assert!(err.to_string().contains("missing column `is_green`"), "{err}");
    }

    #[test]
    fn column_bindings() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "catalog.csv",
            "item_id,carbon_footprint,eco,is_harmful,lci_score,producer_id,producer_region,sustainability_label\na,,yes,,,,,\n",
        );
        let path = dir.path().join("manifest.json");
        write(
            dir.path(),
            "manifest.json",
            r#"{"tables": {"catalog": "catalog.csv"}, "columns": {"is_green": "eco"}}"#,
        );
        assert_eq!(load_catalog(&path).unwrap()[0].is_green, Some(true));
    }

    #[test]
    fn bad_epsilon_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "catalog.csv", CATALOG_HEADER);
        let path = dir.path().join("manifest.json");
        write(dir.path(), "manifest.json", r#"{"tables": {"catalog": "catalog.csv"}, "epsilon": 0}"#);
        assert!(matches!(load_tables(&path), Err(IngestError::Manifest { .. })));
    }

    #[test]
    fn missing_energy_table_is_absent() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "catalog.csv", &format!("{CATALOG_HEADER}a,1,,,,,,\n"));
        let ds = load_dataset(&manifest(dir.path(), "")).unwrap();
        assert!(ds.tables().energy.is_none());
    }

    #[test]
    fn recommendations_grouped_and_ranked() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "catalog.csv", &format!("{CATALOG_HEADER}a,,,,,,,\nb,,,,,,,\n"));
        write(dir.path(), "users.csv", "user_id,groups,region,familiar_items\nu1,A;B,north,a\n");
        write(
            dir.path(),
            "recommendations.csv",
            "user_id,rank,item_id,timestamp\nu1,2,a,\nu1,1,b,2024-01-01T00:00:00Z\n",
        );
        let ds = load_dataset(&manifest(
            dir.path(),
            r#", "users": "users.csv", "recommendations": "recommendations.csv""#,
        ))
        .unwrap();
        let rec = ds.recommendations_for("u1").unwrap();
        assert_eq!(rec.items, ["b", "a"]);
        assert_eq!(rec.timestamp.as_deref(), Some("2024-01-01T00:00:00Z"));
        assert_eq!(ds.user("u1").unwrap().groups.len(), 2);
    }

    #[test]
    fn satisfaction_is_rescaled() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "catalog.csv", CATALOG_HEADER);
        write(dir.path(), "users.csv", "user_id,groups,region,familiar_items\nu1,,,\n");
        write(dir.path(), "satisfaction.csv", "user_id,t,value\nu1,1,1\nu1,3,5\n");
        let path = dir.path().join("manifest.json");
        write(
            dir.path(),
            "manifest.json",
            r#"{"tables": {"catalog": "catalog.csv", "users": "users.csv", "satisfaction": "satisfaction.csv"},
                "satisfaction_scale": [1, 5]}"#,
        );
        let t = load_tables(&path).unwrap();
        assert_eq!(t.satisfaction[0].values, vec![Some(0.0), None, Some(1.0)]);
    }

    #[test]
    fn behavior_log_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "catalog.csv", CATALOG_HEADER);
        write(dir.path(), "b.jsonl", "{\"user\":\"u\",\"kind\":\"k\"}\n{\"user\":1}\n");
        let err = load_tables(&manifest(dir.path(), r#", "behaviors": "b.jsonl""#)).unwrap_err();
        assert!(matches!(err, IngestError::Schema { line: 2, .. }));
    }
}
