//! Shared data model for offline sustainability evaluation.
//!
//! Every symbol the metric formulas use lives in exactly one field or
//! configured predicate below. The inventory compiles as a doc test:
//!
//! ```
//! use sustain_eval::model::*;
//!
//! let item = ItemRecord::new("i1");
//! let _carf: Option<f64> = item.carbon_footprint;          // CarF(i)
//! let _green: Option<bool> = item.is_green;                // 𝕀(i), i ∈ 𝒢
//! let _harm: Option<bool> = item.is_harmful;               // harm(i, ℋ)
//! let _lci: Option<f64> = item.lci_score;                  // LCI(i)
//! let _producer: &Option<String> = &item.producer_id;      // p ∈ 𝒫
//! let _region: &Option<String> = &item.producer_region;    // ℒ_u, item side
//! let _local: Option<bool> = item.is_local;                // ℒ_u override
//! let _label: Option<bool> = item.sustainability_label;    // s_i
//!
//! let user = UserRecord::new("u1");
//! let _groups = &user.groups;                              // g ∈ G
//! let _user_region = &user.region;                         // ℒ_u, user side
//! let _familiar = &user.familiar_items;                    // 𝒬_u
//!
//! let recs = RecommendationSet::new("u1", ["i1"]);
//! let _list: &Vec<String> = &recs.items;                   // ℛ_u
//!
//! let judgment = RelevanceJudgment::new("u1", "i1", 1.0);
//! let _rel = judgment.relevance;                           // rel(i, u)
//!
//! let ledger = EnergyLedger::default();
//! let _ = (ledger.e_inference_kwh, ledger.n_rec);          // E_inference, N_rec
//! let _ = (ledger.ec_build_kwh, ledger.n_epoch);           // EC_build, N_epoch
//! let _ = ledger.n_data_processed;                         // N_dataprocessed
//!
//! let obs = PairedObservation::new(PairedKind::Energy, 100.0, 80.0);
//! let _ = (obs.baseline, obs.treatment);  // EC_baseline/EC_withrec, R_baseline/R_withrec, ℳ_without/ℳ_with
//!
//! let audit = AccessibilityAudit::default();
//! let _ = (&audit.artifacts, &audit.criteria, &audit.scores); // 𝒬, 𝒞, sat(q, 𝒞, g)
//!
//! let series = SatisfactionSeries::complete("u1", vec![0.5, 1.0]);
//! let _ = (series.horizon, &series.values);                // T, sat_u^t
//!
//! let event = BehaviorEvent::new("u1", "eco_buy");
//! let _bag_member = &event.kind;                           // b ∈ B_u
//!
//! let explanation = ExplanationRecord::new("u1", "e1", 0.5);
//! let _ = explanation.interpret_score;                     // interpret(e), e ∈ ℰ_u
//!
//! let config = EvalConfig::default();
//! let _ = &config.sustainable_behaviors;                   // 𝒮 (kind labels)
//! let _ = config.green_item_behaviors;                     // 𝒮 (green-item predicate)
//! let _ = &config.groups;                                  // G
//! let _ = config.epsilon;                                  // tolerance behind "≈"
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Per-item sustainability metadata. `None` means the attribute is unknown.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ItemRecord {
    pub item_id: String,
    pub carbon_footprint: Option<f64>,
    pub is_green: Option<bool>,
    pub is_harmful: Option<bool>,
    pub lci_score: Option<f64>,
    pub producer_id: Option<String>,
    pub producer_region: Option<String>,
    pub sustainability_label: Option<bool>,
    /// Dataset-wide locality flag; when present it overrides region matching.
    pub is_local: Option<bool>,
    pub category: Option<String>,
}

impl ItemRecord {
    pub fn new(item_id: impl Into<String>) -> Self {
        Self {
            item_id: item_id.into(),
            ..Self::default()
        }
    }

    pub fn with_carbon(mut self, kg: f64) -> Self {
        self.carbon_footprint = Some(kg);
        self
    }

    pub fn with_green(mut self, green: bool) -> Self {
        self.is_green = Some(green);
        self
    }

    pub fn with_harmful(mut self, harmful: bool) -> Self {
        self.is_harmful = Some(harmful);
        self
    }

    pub fn with_lci(mut self, lci: f64) -> Self {
        self.lci_score = Some(lci);
        self
    }

    pub fn with_producer(mut self, producer: impl Into<String>) -> Self {
        self.producer_id = Some(producer.into());
        self
    }

    pub fn with_region(mut self, region: impl Into<String>) -> Self {
        self.producer_region = Some(region.into());
        self
    }

    pub fn with_label(mut self, label: bool) -> Self {
        self.sustainability_label = Some(label);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserRecord {
    pub user_id: String,
    pub groups: BTreeSet<String>,
    pub region: Option<String>,
    pub familiar_items: BTreeSet<String>,
}

impl UserRecord {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            ..Self::default()
        }
    }

    pub fn in_groups<I, S>(mut self, groups: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.groups.extend(groups.into_iter().map(Into::into));
        self
    }

    pub fn with_region(mut self, region: impl Into<String>) -> Self {
        self.region = Some(region.into());
        self
    }

    pub fn familiar_with<I, S>(mut self, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.familiar_items.extend(items.into_iter().map(Into::into));
        self
    }
}

/// The ranked list delivered to one user.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecommendationSet {
    pub user_id: String,
    pub items: Vec<String>,
    pub timestamp: Option<String>,
}

impl RecommendationSet {
    pub fn new<I, S>(user_id: impl Into<String>, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            user_id: user_id.into(),
            items: items.into_iter().map(Into::into).collect(),
            timestamp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceJudgment {
    pub user_id: String,
    pub item_id: String,
    pub relevance: f64,
}

impl RelevanceJudgment {
    pub fn new(user_id: impl Into<String>, item_id: impl Into<String>, relevance: f64) -> Self {
        Self {
            user_id: user_id.into(),
            item_id: item_id.into(),
            relevance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityEntry {
    pub item_a: String,
    pub item_b: String,
    pub sim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemFeatures {
    pub item_id: String,
    pub values: Vec<f64>,
}

/// Where item similarity comes from: an explicit pairwise table or
/// cosine similarity over nonnegative feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum SimilaritySource {
    Table(Vec<SimilarityEntry>),
    Features(Vec<ItemFeatures>),
}

/// Pairwise item similarity in `[0, 1]`, symmetric, with `sim(i, i) = 1`.
pub trait SimilarityProvider: Send + Sync {
    /// `None` when the pair has no known similarity.
    fn sim(&self, a: &str, b: &str) -> Option<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub e_inference_kwh: f64,
    pub n_rec: u64,
    pub ec_build_kwh: f64,
    pub n_epoch: u64,
    pub n_data_processed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairedKind {
    Energy,
    ReuseRate,
    Health,
}

impl PairedKind {
    pub const ALL: [PairedKind; 3] = [PairedKind::Energy, PairedKind::ReuseRate, PairedKind::Health];

    pub fn as_str(self) -> &'static str {
        match self {
            PairedKind::Energy => "energy",
            PairedKind::ReuseRate => "reuse_rate",
            PairedKind::Health => "health",
        }
    }
}

impl fmt::Display for PairedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairedKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "energy" => Ok(PairedKind::Energy),
            "reuse_rate" => Ok(PairedKind::ReuseRate),
            "health" => Ok(PairedKind::Health),
            other => Err(format!("unknown paired observation kind `{other}`")),
        }
    }
}

/// A before/after measurement: without the recommender (`baseline`) and
/// with it (`treatment`).
#[derive(Debug, Clone, PartialEq)]
pub struct PairedObservation {
    pub kind: PairedKind,
    pub baseline: f64,
    pub treatment: f64,
    pub unit: String,
    /// Only consulted for health outcomes, where lower can be better (e.g. BMI).
    pub higher_is_better: bool,
}

impl PairedObservation {
    pub fn new(kind: PairedKind, baseline: f64, treatment: f64) -> Self {
        Self {
            kind,
            baseline,
            treatment,
            unit: String::new(),
            higher_is_better: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessibilityScore {
    pub artifact_id: String,
    pub group: String,
    pub score: f64,
}

/// Degree to which audited items or interfaces satisfy the accessibility
/// criteria, per user group.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccessibilityAudit {
    pub artifacts: BTreeSet<String>,
    pub criteria: BTreeSet<String>,
    pub scores: Vec<AccessibilityScore>,
}

impl AccessibilityAudit {
    /// Builds an audit whose artifact set is every artifact that was scored.
    pub fn from_scores(scores: Vec<AccessibilityScore>) -> Self {
        Self {
            artifacts: scores.iter().map(|s| s.artifact_id.clone()).collect(),
            criteria: BTreeSet::new(),
            scores,
        }
    }

    /// Groups under evaluation: every group that has at least one score.
    pub fn groups(&self) -> BTreeSet<&str> {
        self.scores.iter().map(|s| s.group.as_str()).collect()
    }
}

/// Satisfaction values of one user over periods `t = 1..=horizon`.
/// `values[t - 1]` is `None` when that period was not observed.
#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionSeries {
    pub user_id: String,
    pub horizon: u32,
    pub values: Vec<Option<f64>>,
}

impl SatisfactionSeries {
    pub fn complete(user_id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            user_id: user_id.into(),
            horizon: values.len() as u32,
            values: values.into_iter().map(Some).collect(),
        }
    }

    /// All values when every period is observed.
    pub fn observed(&self) -> Option<Vec<f64>> {
        if self.values.len() != self.horizon as usize || self.horizon == 0 {
            return None;
        }
        self.values.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorEvent {
    pub user_id: String,
    pub kind: String,
    pub item_id: Option<String>,
    pub timestamp: Option<String>,
}

impl BehaviorEvent {
    pub fn new(user_id: impl Into<String>, kind: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            kind: kind.into(),
            item_id: None,
            timestamp: None,
        }
    }

    pub fn on_item(mut self, item: impl Into<String>) -> Self {
        self.item_id = Some(item.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationRecord {
    pub user_id: String,
    pub explanation_id: String,
    pub interpret_score: f64,
}

impl ExplanationRecord {
    pub fn new(user_id: impl Into<String>, explanation_id: impl Into<String>, score: f64) -> Self {
        Self {
            user_id: user_id.into(),
            explanation_id: explanation_id.into(),
            interpret_score: score,
        }
    }
}

/// How the familiar set used by serendipity is formed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamiliarPolicy {
    /// Only the user's own previously seen items.
    #[default]
    Seen,
    /// Seen items plus the `top_n` items that appear in the most users'
    /// familiar sets (ties by item id).
    SeenOrPopular { top_n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Units {
    pub carbon: String,
    pub energy: String,
    pub data_unit: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            carbon: "kg CO2e".to_owned(),
            energy: "kWh".to_owned(),
            data_unit: "records".to_owned(),
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 0.05;

/// Evaluation settings carried with a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Declared group universe. Empty means "every group some user belongs to".
    pub groups: BTreeSet<String>,
    pub sustainable_behaviors: BTreeSet<String>,
    /// Also count any behavior that references a green item as sustainable.
    pub green_item_behaviors: bool,
    pub epsilon: f64,
    pub decay: Option<f64>,
    pub familiar_policy: FamiliarPolicy,
    pub units: Units,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            groups: BTreeSet::new(),
            sustainable_behaviors: BTreeSet::new(),
            green_item_behaviors: false,
            epsilon: DEFAULT_EPSILON,
            decay: None,
            familiar_policy: FamiliarPolicy::Seen,
            units: Units::default(),
        }
    }
}

/// Raw tables of one evaluation dataset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetTables {
    pub catalog: Vec<ItemRecord>,
    pub users: Vec<UserRecord>,
    pub recommendations: Vec<RecommendationSet>,
    pub judgments: Vec<RelevanceJudgment>,
    pub similarity: Option<SimilaritySource>,
    pub energy: Option<EnergyLedger>,
    pub paired: Vec<PairedObservation>,
    pub accessibility: Option<AccessibilityAudit>,
    pub satisfaction: Vec<SatisfactionSeries>,
    pub behaviors: Vec<BehaviorEvent>,
    pub explanations: Vec<ExplanationRecord>,
    pub config: EvalConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// The dataset cannot be evaluated.
    Hard,
    /// Evaluation proceeds; affected metrics skip the entity.
    Soft,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub table: &'static str,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Hard => "error",
            Severity::Soft => "warning",
        };
        write!(f, "{sev}: {} [{}]: {}", self.table, self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn usable(&self) -> bool {
        self.hard_count() == 0
    }

    pub fn hard_count(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Hard)
            .count()
    }

    pub fn hard(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Hard)
    }

    fn push(&mut self, severity: Severity, table: &'static str, key: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            severity,
            table,
            key: key.into(),
            message: message.into(),
        });
    }

    fn hard_err(&mut self, table: &'static str, key: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Hard, table, key, message);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Checks referential integrity, key uniqueness and value ranges.
/// Violations are returned as data; nothing here fails.
pub fn validate_dataset(tables: &DatasetTables) -> ValidationReport {
    let mut report = ValidationReport::default();
    let cfg = &tables.config;

    if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
        report.hard_err("manifest", "epsilon", format!("epsilon must be > 0, got {}", cfg.epsilon));
    }
    if let Some(d) = cfg.decay {
        if !(d > 0.0 && d <= 1.0) {
            report.hard_err("manifest", "decay", format!("decay must lie in (0, 1], got {d}"));
        }
    }

    let mut items = HashSet::new();
    for item in &tables.catalog {
        if !items.insert(item.item_id.as_str()) {
            report.hard_err("catalog", &item.item_id, "duplicate item_id");
        }
        if let Some(c) = item.carbon_footprint {
            if !nonneg(c) {
                report.hard_err("catalog", &item.item_id, format!("carbon_footprint must be >= 0, got {c}"));
            }
        }
        if let Some(l) = item.lci_score {
            if !nonneg(l) {
                report.hard_err("catalog", &item.item_id, format!("lci_score must be >= 0, got {l}"));
            }
        }
    }

    let mut users = HashSet::new();
    for user in &tables.users {
        if !users.insert(user.user_id.as_str()) {
            report.hard_err("users", &user.user_id, "duplicate user_id");
        }
        if !cfg.groups.is_empty() {
            for g in user.groups.iter().filter(|g| !cfg.groups.contains(*g)) {
                report.hard_err("users", &user.user_id, format!("group `{g}` is not in the declared group universe"));
            }
        }
        for i in user.familiar_items.iter().filter(|i| !items.contains(i.as_str())) {
            report.hard_err("users", &user.user_id, format!("familiar item `{i}` is not in the catalog"));
        }
    }

    let mut rec_users = HashSet::new();
    for rec in &tables.recommendations {
        let key = rec.user_id.as_str();
        if !users.contains(key) {
            report.hard_err("recommendations", key, "unknown user_id");
        }
        if !rec_users.insert(key) {
            report.hard_err("recommendations", key, "more than one recommendation set for user");
        }
        if rec.items.is_empty() {
            report.hard_err("recommendations", key, "empty recommendation list");
        }
        let mut seen = HashSet::new();
        for i in &rec.items {
            if !seen.insert(i.as_str()) {
                report.hard_err("recommendations", key, format!("duplicate item `{i}` in list"));
            }
            if !items.contains(i.as_str()) {
                report.hard_err("recommendations", key, format!("unknown item_id `{i}`"));
            }
        }
        if let Some(ts) = &rec.timestamp {
            if chrono::DateTime::parse_from_rfc3339(ts).is_err() {
                report.hard_err("recommendations", key, format!("timestamp `{ts}` is not ISO-8601"));
            }
        }
    }

    let mut judged = HashSet::new();
    for j in &tables.judgments {
        let key = format!("{}/{}", j.user_id, j.item_id);
        if !users.contains(j.user_id.as_str()) {
            report.hard_err("relevance", &key, "unknown user_id");
        }
        if !items.contains(j.item_id.as_str()) {
            report.hard_err("relevance", &key, "unknown item_id");
        }
        if !unit_interval(j.relevance) {
            report.hard_err("relevance", &key, format!("relevance must lie in [0, 1], got {}", j.relevance));
        }
        if !judged.insert((j.user_id.as_str(), j.item_id.as_str())) {
            report.hard_err("relevance", &key, "duplicate judgment");
        }
    }

    match &tables.similarity {
        Some(SimilaritySource::Table(entries)) => {
            let mut pairs: HashMap<(&str, &str), f64> = HashMap::new();
            for e in entries {
                let key = format!("{}/{}", e.item_a, e.item_b);
                for id in [&e.item_a, &e.item_b] {
                    if !items.contains(id.as_str()) {
                        report.hard_err("similarity", &key, format!("unknown item_id `{id}`"));
                    }
                }
                if !unit_interval(e.sim) {
                    report.hard_err("similarity", &key, format!("sim must lie in [0, 1], got {}", e.sim));
                }
                if e.item_a == e.item_b && e.sim != 1.0 {
                    report.hard_err("similarity", &key, "self-similarity must be 1");
                }
                let pair = if e.item_a <= e.item_b {
                    (e.item_a.as_str(), e.item_b.as_str())
                } else {
                    (e.item_b.as_str(), e.item_a.as_str())
                };
                if let Some(prev) = pairs.insert(pair, e.sim) {
                    if prev != e.sim {
                        report.hard_err("similarity", &key, "asymmetric or conflicting similarity");
                    }
                }
            }
        }
        Some(SimilaritySource::Features(rows)) => {
            let dim = rows.first().map(|r| r.values.len());
            let mut seen = HashSet::new();
            for r in rows {
                if !items.contains(r.item_id.as_str()) {
                    report.hard_err("item_features", &r.item_id, "unknown item_id");
                }
                if !seen.insert(r.item_id.as_str()) {
                    report.hard_err("item_features", &r.item_id, "duplicate feature row");
                }
                if Some(r.values.len()) != dim {
                    report.hard_err("item_features", &r.item_id, "feature dimension mismatch");
                }
                if r.values.iter().any(|v| !nonneg(*v)) {
                    report.hard_err("item_features", &r.item_id, "features must be finite and >= 0");
                }
            }
        }
        None => {}
    }

    if let Some(e) = &tables.energy {
        for (name, v) in [("e_inference_kwh", e.e_inference_kwh), ("ec_build_kwh", e.ec_build_kwh)] {
            if !nonneg(v) {
                report.hard_err("energy", name, format!("must be >= 0, got {v}"));
            }
        }
    }

    let mut kinds = HashSet::new();
    for p in &tables.paired {
        let key = p.kind.as_str();
        if !kinds.insert(p.kind) {
            report.hard_err("paired", key, "more than one observation of this kind");
        }
        if !(p.baseline.is_finite() && p.treatment.is_finite()) {
            report.hard_err("paired", key, "values must be finite");
        }
        match p.kind {
            PairedKind::ReuseRate => {
                if !(unit_interval(p.baseline) && unit_interval(p.treatment)) {
                    report.hard_err("paired", key, "reuse rates must lie in [0, 1]");
                }
            }
            PairedKind::Energy => {
                if p.baseline < 0.0 || p.treatment < 0.0 {
                    report.hard_err("paired", key, "energy values must be >= 0");
                }
            }
            PairedKind::Health => {}
        }
    }

    if let Some(audit) = &tables.accessibility {
        let mut scored = HashSet::new();
        for s in &audit.scores {
            let key = format!("{}/{}", s.artifact_id, s.group);
            if !unit_interval(s.score) {
                report.hard_err("accessibility", &key, format!("score must lie in [0, 1], got {}", s.score));
            }
            if !audit.artifacts.contains(&s.artifact_id) {
                report.hard_err("accessibility", &key, "artifact not in the audited artifact set");
            }
            if !scored.insert((s.artifact_id.as_str(), s.group.as_str())) {
                report.hard_err("accessibility", &key, "duplicate score");
            }
        }
        for g in audit.groups() {
            for a in &audit.artifacts {
                if !scored.contains(&(a.as_str(), g)) {
                    report.push(Severity::Soft, "accessibility", format!("{a}/{g}"), "artifact not scored for group");
                }
            }
        }
    }

    let mut series_users = HashSet::new();
    for s in &tables.satisfaction {
        let key = s.user_id.as_str();
        if !users.contains(key) {
            report.hard_err("satisfaction", key, "unknown user_id");
        }
        if !series_users.insert(key) {
            report.hard_err("satisfaction", key, "more than one series for user");
        }
        if s.horizon == 0 || s.values.len() != s.horizon as usize {
            report.hard_err("satisfaction", key, "series length does not match horizon");
        }
        if s.values.iter().flatten().any(|v| !unit_interval(*v)) {
            report.hard_err("satisfaction", key, "normalized satisfaction must lie in [0, 1]");
        }
        if s.values.iter().any(Option::is_none) {
            report.push(Severity::Soft, "satisfaction", key, "incomplete series");
        }
    }

    for (n, b) in tables.behaviors.iter().enumerate() {
        let key = format!("event {}", n + 1);
        if b.kind.trim().is_empty() {
            report.hard_err("behaviors", &key, "empty behavior kind");
        }
        if !users.contains(b.user_id.as_str()) {
            report.hard_err("behaviors", &key, format!("unknown user_id `{}`", b.user_id));
        }
        if let Some(i) = &b.item_id {
            if !items.contains(i.as_str()) {
                report.hard_err("behaviors", &key, format!("unknown item_id `{i}`"));
            }
        }
    }

    let mut explanations = HashSet::new();
    for e in &tables.explanations {
        let key = format!("{}/{}", e.user_id, e.explanation_id);
        if !users.contains(e.user_id.as_str()) {
            report.hard_err("explanations", &key, "unknown user_id");
        }
        if !unit_interval(e.interpret_score) {
            report.hard_err("explanations", &key, format!("score must lie in [0, 1], got {}", e.interpret_score));
        }
        if !explanations.insert((e.user_id.as_str(), e.explanation_id.as_str())) {
            report.hard_err("explanations", &key, "duplicate explanation");
        }
    }

    report
}

/// Similarity lookup built from a [`SimilaritySource`].
#[derive(Debug, Clone)]
pub enum SimilarityIndex {
    Table(HashMap<String, HashMap<String, f64>>),
    Features(HashMap<String, Vec<f64>>),
}

impl SimilarityIndex {
    pub fn build(source: &SimilaritySource) -> Self {
        match source {
            SimilaritySource::Table(entries) => {
                let mut map: HashMap<String, HashMap<String, f64>> = HashMap::new();
                for e in entries {
                    map.entry(e.item_a.clone()).or_default().insert(e.item_b.clone(), e.sim);
                    map.entry(e.item_b.clone()).or_default().insert(e.item_a.clone(), e.sim);
                }
                SimilarityIndex::Table(map)
            }
            SimilaritySource::Features(rows) => SimilarityIndex::Features(
                rows.iter().map(|r| (r.item_id.clone(), r.values.clone())).collect(),
            ),
        }
    }
}

impl SimilarityProvider for SimilarityIndex {
    fn sim(&self, a: &str, b: &str) -> Option<f64> {
        if a == b {
            return Some(1.0);
        }
        match self {
            SimilarityIndex::Table(map) => map.get(a).and_then(|row| row.get(b)).copied(),
            SimilarityIndex::Features(map) => {
                let (x, y) = (map.get(a)?, map.get(b)?);
                let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
                let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if nx == 0.0 || ny == 0.0 {
                    return None;
                }
                Some((dot / (nx * ny)).clamp(0.0, 1.0))
            }
        }
    }
}

/// An immutable, validated dataset snapshot with lookup indexes.
#[derive(Debug, Clone)]
pub struct Dataset {
    tables: DatasetTables,
    items: HashMap<String, usize>,
    users: HashMap<String, usize>,
    recs: HashMap<String, usize>,
    relevance: HashMap<String, HashMap<String, f64>>,
    similarity: Option<SimilarityIndex>,
}

impl Dataset {
    /// Validates `tables` and builds the snapshot. Soft violations are
    /// tolerated; any hard violation returns the full report.
    pub fn new(tables: DatasetTables) -> Result<Self, ValidationReport> {
        let report = validate_dataset(&tables);
        if !report.usable() {
            return Err(report);
        }
        let items = tables
            .catalog
            .iter()
            .enumerate()
            .map(|(n, i)| (i.item_id.clone(), n))
            .collect();
        let users = tables
            .users
            .iter()
            .enumerate()
            .map(|(n, u)| (u.user_id.clone(), n))
            .collect();
        let recs = tables
            .recommendations
            .iter()
            .enumerate()
            .map(|(n, r)| (r.user_id.clone(), n))
            .collect();
        let mut relevance: HashMap<String, HashMap<String, f64>> = HashMap::new();
        for j in &tables.judgments {
            relevance
                .entry(j.user_id.clone())
                .or_default()
                .insert(j.item_id.clone(), j.relevance);
        }
        let similarity = tables.similarity.as_ref().map(SimilarityIndex::build);
        Ok(Self {
            tables,
            items,
            users,
            recs,
            relevance,
            similarity,
        })
    }

    pub fn tables(&self) -> &DatasetTables {
        &self.tables
    }

    pub fn into_tables(self) -> DatasetTables {
        self.tables
    }

    pub fn config(&self) -> &EvalConfig {
        &self.tables.config
    }

    pub fn catalog(&self) -> &[ItemRecord] {
        &self.tables.catalog
    }

    pub fn users(&self) -> &[UserRecord] {
        &self.tables.users
    }

    pub fn recommendations(&self) -> &[RecommendationSet] {
        &self.tables.recommendations
    }

    pub fn item(&self, id: &str) -> Option<&ItemRecord> {
        self.items.get(id).map(|&n| &self.tables.catalog[n])
    }

    pub fn user(&self, id: &str) -> Option<&UserRecord> {
        self.users.get(id).map(|&n| &self.tables.users[n])
    }

    pub fn recommendations_for(&self, user: &str) -> Option<&RecommendationSet> {
        self.recs.get(user).map(|&n| &self.tables.recommendations[n])
    }

    pub fn relevance(&self, user: &str, item: &str) -> Option<f64> {
        self.relevance.get(user).and_then(|m| m.get(item)).copied()
    }

    pub fn similarity(&self) -> Option<&dyn SimilarityProvider> {
        self.similarity.as_ref().map(|s| s as &dyn SimilarityProvider)
    }

    /// The declared group universe, or every group some user belongs to.
    pub fn group_universe(&self) -> BTreeSet<String> {
        if !self.config().groups.is_empty() {
            return self.config().groups.clone();
        }
        self.users()
            .iter()
            .flat_map(|u| u.groups.iter().cloned())
            .collect()
    }

    pub fn group_members<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a UserRecord> + 'a {
        self.users().iter().filter(move |u| u.groups.contains(group))
    }

    /// Items counted as "popular" under [`FamiliarPolicy::SeenOrPopular`].
    pub fn popular_items(&self, top_n: usize) -> BTreeSet<String> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for u in self.users() {
            for i in &u.familiar_items {
                *counts.entry(i.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.into_iter().take(top_n).map(|(i, _)| i.to_owned()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DatasetTables {
        DatasetTables {
            catalog: vec![ItemRecord::new("a"), ItemRecord::new("b")],
            users: vec![UserRecord::new("u1")],
            recommendations: vec![RecommendationSet::new("u1", ["a", "b"])],
            ..DatasetTables::default()
        }
    }

    #[test]
    fn empty_dataset_is_usable() {
        let report = validate_dataset(&DatasetTables::default());
        assert!(report.usable());
        assert!(report.violations.is_empty());
    }

    #[test]
    fn unknown_item_is_one_hard_violation() {
        let mut t = small();
        t.recommendations[0].items.push("x9".into());
        let report = validate_dataset(&t);
        assert_eq!(report.hard_count(), 1);
        assert!(report.violations[0].message.contains("x9"));
    }

    #[test]
    fn relevance_out_of_range_is_hard() {
        let mut t = small();
        t.judgments.push(RelevanceJudgment::new("u1", "a", 1.3));
        let report = validate_dataset(&t);
        assert_eq!(report.hard_count(), 1);
        assert!(Dataset::new(t).is_err());
    }

    #[test]
    fn validation_is_idempotent() {
        let mut t = small();
        t.catalog.push(ItemRecord::new("a").with_carbon(-1.0));
        t.recommendations.push(RecommendationSet::new("ghost", Vec::<String>::new()));
        assert_eq!(validate_dataset(&t), validate_dataset(&t));
    }

    #[test]
    fn duplicate_keys_and_list_items() {
        let mut t = small();
        t.users.push(UserRecord::new("u1"));
        t.recommendations[0].items.push("a".into());
        let report = validate_dataset(&t);
        assert_eq!(report.hard_count(), 2);
    }

    #[test]
    fn undeclared_group_rejected() {
        let mut t = small();
        t.config.groups = ["g1".to_owned()].into();
        t.users[0].groups.insert("g2".into());
        assert_eq!(validate_dataset(&t).hard_count(), 1);
    }

    #[test]
    fn missing_accessibility_pair_is_soft() {
        let mut t = small();
        t.accessibility = Some(AccessibilityAudit::from_scores(vec![
            AccessibilityScore { artifact_id: "q1".into(), group: "A".into(), score: 0.5 },
            AccessibilityScore { artifact_id: "q2".into(), group: "A".into(), score: 0.5 },
            AccessibilityScore { artifact_id: "q1".into(), group: "B".into(), score: 0.5 },
        ]));
        let report = validate_dataset(&t);
        assert!(report.usable());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].severity, Severity::Soft);
    }

    #[test]
    fn asymmetric_similarity_rejected() {
        let mut t = small();
        t.similarity = Some(SimilaritySource::Table(vec![
            SimilarityEntry { item_a: "a".into(), item_b: "b".into(), sim: 0.2 },
            SimilarityEntry { item_a: "b".into(), item_b: "a".into(), sim: 0.3 },
        ]));
        assert_eq!(validate_dataset(&t).hard_count(), 1);
    }

    #[test]
    fn cosine_similarity_properties() {
        let idx = SimilarityIndex::build(&SimilaritySource::Features(vec![
            ItemFeatures { item_id: "a".into(), values: vec![1.0, 0.0] },
            ItemFeatures { item_id: "b".into(), values: vec![1.0, 1.0] },
            ItemFeatures { item_id: "z".into(), values: vec![0.0, 0.0] },
        ]));
        assert_eq!(idx.sim("a", "a"), Some(1.0));
        let ab = idx.sim("a", "b").unwrap();
        assert!((ab - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(idx.sim("b", "a"), Some(ab));
        assert_eq!(idx.sim("a", "z"), None);
        assert_eq!(idx.sim("a", "missing"), None);
    }

    #[test]
    fn popular_items_rank_by_count_then_id() {
        let mut t = small();
        t.catalog.push(ItemRecord::new("c"));
        t.users = vec![
            UserRecord::new("u1").familiar_with(["b", "c"]),
            UserRecord::new("u2").familiar_with(["c", "a"]),
        ];
        let ds = Dataset::new(t).unwrap();
        let top: Vec<_> = ds.popular_items(2).into_iter().collect();
        assert_eq!(top, ["a", "c"]);
    }
}
