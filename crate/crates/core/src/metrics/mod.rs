//! Sustainability metrics over a [`Dataset`] snapshot.
//!
//! Metrics skip entities that lack the metadata they need and report the
//! surviving fraction in [`MetricReport::coverage`].

pub mod crosscut;
pub mod economic;
pub mod environmental;
pub mod social;

use std::collections::BTreeMap;

use crate::ingest::{label_coverage, CatalogField};
use crate::model::{Dataset, ItemRecord, RecommendationSet};
use crate::report::{fraction, MetricError, MetricReport};

/// Mean over users of the mean item attribute within each user's list.
///
/// Items without the attribute are dropped from their list; users left
/// with nothing are dropped from the outer mean and counted in the notes.
/// Carbon footprint and life-cycle impact both use this kernel.
pub fn mean_of_list_means<F>(ds: &Dataset, metric: &str, field: CatalogField, attr: F) -> MetricReport
where
    F: Fn(&ItemRecord) -> Option<f64>,
{
    let total = ds.recommendations().len();
    let mut per_user = BTreeMap::new();
    let mut sum = 0.0;
    for rec in ds.recommendations() {
        let values: Vec<f64> = rec
            .items
            .iter()
            .filter_map(|i| ds.item(i).and_then(&attr))
            .collect();
        if values.is_empty() {
            continue;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        sum += mean;
        per_user.insert(rec.user_id.clone(), mean);
    }
    let report = if per_user.is_empty() {
        MetricReport::undefined(
            metric,
            &MetricError::undefined(format!("no recommended item has a known {}", field.as_str())),
        )
    } else {
        let n = per_user.len();
        MetricReport::defined(metric, sum / n as f64, fraction(n, total))
            .note(format!("users excluded for missing {}: {}", field.as_str(), total - n))
            .with_per_user(per_user)
    };
    attach_label_coverage(report, ds, &[field])
}

/// Share of recommendation slots for which `flag` is true, over slots
/// where `flag` is known.
pub(crate) fn slot_rate<F>(ds: &Dataset, metric: &str, what: &str, flag: F) -> MetricReport
where
    F: Fn(&RecommendationSet, &ItemRecord) -> Option<bool>,
{
    let mut hits = 0usize;
    let mut known = 0usize;
    let mut slots = 0usize;
    let mut per_user = BTreeMap::new();
    for rec in ds.recommendations() {
        let (mut user_hits, mut user_known) = (0usize, 0usize);
        for item in rec.items.iter().filter_map(|i| ds.item(i)) {
            slots += 1;
            if let Some(f) = flag(rec, item) {
                user_known += 1;
                user_hits += usize::from(f);
            }
        }
        if user_known > 0 {
            per_user.insert(rec.user_id.clone(), user_hits as f64 / user_known as f64);
        }
        hits += user_hits;
        known += user_known;
    }
    if known == 0 {
        return MetricReport::undefined(
            metric,
            &MetricError::undefined(format!("no recommended item has a known {what}")),
        );
    }
    MetricReport::defined(metric, hits as f64 / known as f64, fraction(known, slots))
        .with_per_user(per_user)
        .note(format!("slots with unknown {what}: {}", slots - known))
}

pub(crate) fn attach_label_coverage(report: MetricReport, ds: &Dataset, fields: &[CatalogField]) -> MetricReport {
    let table: BTreeMap<String, f64> = fields
        .iter()
        .filter_map(|f| label_coverage(ds.catalog(), *f).ok().map(|c| (f.as_str().to_owned(), c)))
        .collect();
    if table.is_empty() {
        report
    } else {
        report.with_breakdown("label_coverage", table)
    }
}
