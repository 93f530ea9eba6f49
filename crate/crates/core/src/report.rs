//! Metric results and the errors behind undefined values.

use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Why a metric could not be computed for the data at hand.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    /// The formula's preconditions are not met (e.g. a zero denominator).
    #[error("{0}")]
    Undefined(String),
    #[error("missing table")]
    MissingTable(&'static str),
    #[error("empty group `{0}`")]
    EmptyGroup(String),
    #[error("fewer than two groups")]
    FewerThanTwoGroups,
    #[error("missing similarity for ({0}, {1})")]
    MissingSimilarity(String, String),
    #[error("missing score for artifact `{artifact}` in group `{group}`")]
    MissingScore { artifact: String, group: String },
    #[error("value out of range: {0}")]
    Range(String),
    #[error("incomplete series for user `{0}`")]
    IncompleteSeries(String),
    #[error("fewer than two producers")]
    FewerThanTwoProducers,
    #[error("empty catalog")]
    EmptyCatalog,
    #[error("unknown user `{0}`")]
    UnknownUser(String),
}

impl MetricError {
    pub fn undefined(reason: impl Into<String>) -> Self {
        MetricError::Undefined(reason.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricValue {
    Defined(f64),
    Undefined(String),
}

impl MetricValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Defined(v) => Some(*v),
            MetricValue::Undefined(_) => None,
        }
    }

    pub fn status(&self) -> String {
        match self {
            MetricValue::Defined(_) => "ok".to_owned(),
            MetricValue::Undefined(reason) => format!("undefined: {reason}"),
        }
    }
}

/// One named metric with its breakdowns and data-coverage annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub metric: String,
    pub value: MetricValue,
    pub per_user: Option<BTreeMap<String, f64>>,
    pub per_group: Option<BTreeMap<String, f64>>,
    /// Named secondary tables (per-item gaps, producer exposure, label coverage, ...).
    pub breakdowns: BTreeMap<String, BTreeMap<String, f64>>,
    /// Fraction of entities with enough data to contribute, in `[0, 1]`.
    pub coverage: f64,
    pub notes: Vec<String>,
}

impl MetricReport {
    pub fn defined(metric: impl Into<String>, value: f64, coverage: f64) -> Self {
        Self {
            metric: metric.into(),
            value: MetricValue::Defined(value),
            per_user: None,
            per_group: None,
            breakdowns: BTreeMap::new(),
            coverage,
            notes: Vec::new(),
        }
    }

    pub fn undefined(metric: impl Into<String>, err: &MetricError) -> Self {
        let mut report = Self {
            metric: metric.into(),
            value: MetricValue::Undefined(err.to_string()),
            per_user: None,
            per_group: None,
            breakdowns: BTreeMap::new(),
            coverage: 0.0,
            notes: Vec::new(),
        };
        if let MetricError::MissingTable(table) = err {
            report.notes.push(format!("table `{table}` not provided"));
        }
        report
    }

    pub fn from_result(metric: impl Into<String>, result: Result<f64, MetricError>) -> Self {
        match result {
            Ok(v) => Self::defined(metric, v, 1.0),
            Err(e) => Self::undefined(metric, &e),
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.value.value()
    }

    pub fn is_defined(&self) -> bool {
        self.value().is_some()
    }

    pub fn with_coverage(mut self, coverage: f64) -> Self {
        self.coverage = coverage;
        self
    }

    pub fn with_per_user(mut self, per_user: BTreeMap<String, f64>) -> Self {
        self.per_user = Some(per_user);
        self
    }

    pub fn with_per_group(mut self, per_group: BTreeMap<String, f64>) -> Self {
        self.per_group = Some(per_group);
        self
    }

    pub fn with_breakdown(mut self, name: impl Into<String>, table: BTreeMap<String, f64>) -> Self {
        self.breakdowns.insert(name.into(), table);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Ratio with an empty denominator mapped to zero coverage.
pub(crate) fn fraction(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Rounds to 12 significant digits and folds `-0.0` into `0.0`, so that
/// serialized reports are stable.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

struct Rounded<'a>(&'a BTreeMap<String, f64>);

impl Serialize for Rounded<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, &round_sig12(*v))?;
        }
        map.end()
    }
}

impl Serialize for MetricReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("metric", &self.metric)?;
        map.serialize_entry("status", &self.value.status())?;
        map.serialize_entry("value", &self.value().map(round_sig12))?;
        map.serialize_entry("coverage", &round_sig12(self.coverage))?;
        if let Some(per_user) = &self.per_user {
            map.serialize_entry("per_user", &Rounded(per_user))?;
        }
        if let Some(per_group) = &self.per_group {
            map.serialize_entry("per_group", &Rounded(per_group))?;
        }
        if !self.breakdowns.is_empty() {
            let tables: BTreeMap<&str, Rounded<'_>> = self
                .breakdowns
                .iter()
                .map(|(k, v)| (k.as_str(), Rounded(v)))
                .collect();
            map.serialize_entry("breakdowns", &tables)?;
        }
        map.serialize_entry("notes", &self.notes)?;
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_twelve_significant_digits() {
        assert_eq!(round_sig12(2.0 / 3.0), 0.666666666667);
        assert_eq!(round_sig12(-0.0), 0.0);
        assert_eq!(round_sig12(0.1 + 0.2), 0.3);
        assert_eq!(round_sig12(1234.5678), 1234.5678);
    }

    #[test]
    fn undefined_status_string() {
        let r = MetricReport::undefined("ecrec", &MetricError::MissingTable("energy"));
        assert_eq!(r.value.status(), "undefined: missing table");
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"value\":null"));
    }
}
