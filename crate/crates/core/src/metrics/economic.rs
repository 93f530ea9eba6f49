//! Economic metrics: local business promotion, loyalty over time, and
//! producer exposure fairness.

use std::collections::BTreeMap;

use crate::ingest::CatalogField;
use crate::metrics::{attach_label_coverage, slot_rate};
use crate::model::{Dataset, ItemRecord, SatisfactionSeries, UserRecord};
use crate::report::{fraction, MetricError, MetricReport};

/// Whether `item` is local to `user`, if that can be decided.
///
/// A dataset-wide `is_local` flag wins; otherwise the producer region must
/// equal the user's region, ignoring case.
pub fn is_local(user: Option<&UserRecord>, item: &ItemRecord) -> Option<bool> {
    if let Some(flag) = item.is_local {
        return Some(flag);
    }
    let producer = item.producer_region.as_deref()?;
    let region = user?.region.as_deref()?;
    Some(producer.to_lowercase() == region.to_lowercase())
}

pub fn local_business_rate(ds: &Dataset) -> MetricReport {
    let report = slot_rate(ds, "lbpr", "locality", |rec, item| is_local(ds.user(&rec.user_id), item));
    attach_label_coverage(report, ds, &[CatalogField::ProducerRegion])
}

/// Mean satisfaction over the horizon; with `decay`, period `t` of `T`
/// gets weight `decay^(T - t)` so recent periods count more.
pub fn user_loyalty(series: &SatisfactionSeries, decay: Option<f64>) -> Result<f64, MetricError> {
    let values = series
        .observed()
        .ok_or_else(|| MetricError::IncompleteSeries(series.user_id.clone()))?;
    match decay {
        None => Ok(values.iter().sum::<f64>() / values.len() as f64),
        Some(d) if d > 0.0 && d <= 1.0 => {
            let horizon = values.len() as i32;
            let (mut num, mut den) = (0.0, 0.0);
            for (idx, v) in values.iter().enumerate() {
                let w = d.powi(horizon - 1 - idx as i32);
                num += w * v;
                den += w;
            }
            Ok(num / den)
        }
        Some(d) => Err(MetricError::Range(format!("decay {d} outside (0, 1]"))),
    }
}

fn loyalty_report(ds: &Dataset, metric: &str, decay: Option<f64>) -> MetricReport {
    let series = &ds.tables().satisfaction;
    if series.is_empty() {
        return MetricReport::undefined(metric, &MetricError::undefined("no satisfaction series"));
    }
    let mut per_user = BTreeMap::new();
    let mut incomplete = 0usize;
    let mut sum = 0.0;
    for s in series {
        match user_loyalty(s, decay) {
            Ok(v) => {
                sum += v;
                per_user.insert(s.user_id.clone(), v);
            }
            Err(MetricError::IncompleteSeries(_)) => incomplete += 1,
            Err(e) => return MetricReport::undefined(metric, &e),
        }
    }
    if per_user.is_empty() {
        return MetricReport::undefined(metric, &MetricError::undefined("no complete satisfaction series"));
    }
    let n = per_user.len();
    let mut report = MetricReport::defined(metric, sum / n as f64, fraction(n, series.len()))
        .with_per_user(per_user)
        .note(format!("incomplete series rejected: {incomplete}"));
    if let Some(d) = decay {
        report = report.note(format!("recency decay {d}"));
    }
    report
}

/// Average loyalty over users with a complete satisfaction series.
pub fn avg_loyalty(ds: &Dataset, decay: Option<f64>) -> MetricReport {
    loyalty_report(ds, "avgloyalty", decay)
}

/// Per-user loyalty; the headline value is the same average as
/// [`avg_loyalty`].
pub fn loyalty(ds: &Dataset, decay: Option<f64>) -> MetricReport {
    loyalty_report(ds, "loyalty", decay).note("per-user values in per_user")
}

/// Recommendation-slot counts per producer.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExposureHistogram {
    pub counts: BTreeMap<String, u64>,
}

fn in_scope(item: &ItemRecord, category: Option<&str>) -> bool {
    category.is_none_or(|c| item.category.as_deref() == Some(c))
}

/// Counts slots per producer. Every producer with an in-scope catalog item
/// is present, with zero if never recommended.
pub fn exposure_histogram(ds: &Dataset, category: Option<&str>) -> ExposureHistogram {
    let mut counts = BTreeMap::new();
    for item in ds.catalog().iter().filter(|i| in_scope(i, category)) {
        if let Some(p) = &item.producer_id {
            counts.entry(p.clone()).or_insert(0);
        }
    }
    for rec in ds.recommendations() {
        for item in rec.items.iter().filter_map(|i| ds.item(i)) {
            if let (true, Some(p)) = (in_scope(item, category), &item.producer_id) {
                *counts.entry(p.clone()).or_insert(0) += 1;
            }
        }
    }
    ExposureHistogram { counts }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureFairness {
    pub value: f64,
    /// All producers received identical exposure; `value` is then 0 by convention.
    pub uniform: bool,
}

/// Mean pairwise exposure distance divided by the maximum pairwise
/// distance, over unordered producer pairs.
pub fn exposure_fairness(counts: &[f64]) -> Result<ExposureFairness, MetricError> {
    if counts.len() < 2 {
        return Err(MetricError::FewerThanTwoProducers);
    }
    let mut sum = 0.0;
    let mut max = 0.0f64;
    let mut pairs = 0usize;
    for (n, a) in counts.iter().enumerate() {
        for b in &counts[n + 1..] {
            let d = (a - b).abs();
            sum += d;
            max = max.max(d);
            pairs += 1;
        }
    }
    if max == 0.0 {
        return Ok(ExposureFairness { value: 0.0, uniform: true });
    }
    Ok(ExposureFairness {
        value: (sum / pairs as f64) / max,
        uniform: false,
    })
}

pub fn producer_exposure_fairness(ds: &Dataset, category: Option<&str>) -> MetricReport {
    let hist = exposure_histogram(ds, category);
    let counts: Vec<f64> = hist.counts.values().map(|&c| c as f64).collect();
    let (mut slots, mut attributed) = (0usize, 0usize);
    for rec in ds.recommendations() {
        for item in rec.items.iter().filter_map(|i| ds.item(i)).filter(|i| in_scope(i, category)) {
            slots += 1;
            attributed += usize::from(item.producer_id.is_some());
        }
    }
    let report = match exposure_fairness(&counts) {
        Ok(f) => {
            let table = hist.counts.iter().map(|(p, c)| (p.clone(), *c as f64)).collect();
            let mut r = MetricReport::defined("pef", f.value, fraction(attributed, slots))
                .with_breakdown("producer_exposure", table)
                .note("lower = more uniform pairwise spread");
            if f.uniform {
                r = r.note("uniform exposure");
            }
            r
        }
        Err(e) => MetricReport::undefined("pef", &e),
    };
    let report = match category {
        Some(c) => report.note(format!("category scope: {c}")),
        None => report,
    };
    attach_label_coverage(report, ds, &[CatalogField::ProducerId])
}
