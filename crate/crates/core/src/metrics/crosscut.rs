//! Cross-cutting metrics: sustainable behavior share, explanation
//! interpretability, life-cycle impact.

use std::collections::BTreeMap;

use crate::ingest::CatalogField;
use crate::metrics::mean_of_list_means;
use crate::model::{BehaviorEvent, Dataset};
use crate::report::{fraction, MetricError, MetricReport};

/// `Some(true/false)` when the event's sustainability is determined,
/// `None` when it hinges on an unknown green flag.
fn classify(ds: &Dataset, event: &BehaviorEvent) -> Option<bool> {
    let cfg = ds.config();
    if cfg.sustainable_behaviors.contains(&event.kind) {
        return Some(true);
    }
    if !cfg.green_item_behaviors {
        return Some(false);
    }
    match &event.item_id {
        None => Some(false),
        Some(id) => ds.item(id).and_then(|i| i.is_green),
    }
}

/// Share of logged behaviors that are sustainable. Events form a bag, so
/// repeated events count every time.
pub fn sustainable_behavior_score(ds: &Dataset) -> MetricReport {
    let events = &ds.tables().behaviors;
    if events.is_empty() {
        return MetricReport::undefined("sbs", &MetricError::undefined("empty behavior log"));
    }
    let mut per_user: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let (mut hits, mut determined) = (0usize, 0usize);
    for e in events {
        let class = classify(ds, e);
        determined += usize::from(class.is_some());
        let sustainable = class.unwrap_or(false);
        hits += usize::from(sustainable);
        let entry = per_user.entry(e.user_id.clone()).or_default();
        entry.0 += usize::from(sustainable);
        entry.1 += 1;
    }
    let per_user = per_user
        .into_iter()
        .map(|(u, (h, n))| (u, h as f64 / n as f64))
        .collect();
    let mut report = MetricReport::defined("sbs", hits as f64 / events.len() as f64, fraction(determined, events.len()))
        .with_per_user(per_user);
    if determined < events.len() {
        report = report.note(format!(
            "events on items with unknown green flag counted as not sustainable: {}",
            events.len() - determined
        ));
    }
    report
}

/// Mean over users (with at least one explanation) of their mean
/// explanation interpretability.
pub fn avg_interpretability(ds: &Dataset) -> MetricReport {
    let mut by_user: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for e in &ds.tables().explanations {
        let entry = by_user.entry(e.user_id.as_str()).or_default();
        entry.0 += e.interpret_score;
        entry.1 += 1;
    }
    if by_user.is_empty() {
        return MetricReport::undefined("intp", &MetricError::undefined("no explanations"));
    }
    let per_user: BTreeMap<String, f64> = by_user
        .into_iter()
        .map(|(u, (s, n))| (u.to_owned(), s / n as f64))
        .collect();
    let value = per_user.values().sum::<f64>() / per_user.len() as f64;
    MetricReport::defined("intp", value, fraction(per_user.len(), ds.users().len())).with_per_user(per_user)
}

/// Same double average as the carbon footprint metric, over life-cycle
/// impact scores.
pub fn avg_life_cycle_impact(ds: &Dataset) -> MetricReport {
    mean_of_list_means(ds, "avglci", CatalogField::LciScore, |i| i.lci_score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::environmental::avg_carbon_footprint;
    use crate::model::*;

    fn behaviors(kinds: &[&str], sustainable: &[&str]) -> Dataset {
        let mut t = DatasetTables {
            users: vec![UserRecord::new("u1")],
            behaviors: kinds.iter().map(|k| BehaviorEvent::new("u1", *k)).collect(),
            ..DatasetTables::default()
        };
        t.config.sustainable_behaviors = sustainable.iter().map(|s| s.to_string()).collect();
        Dataset::new(t).unwrap()
    }

    #[test]
    fn sbs_examples() {
        let d = behaviors(&["eco_click", "click", "eco_buy"], &["eco_click", "eco_buy"]);
        assert!((sustainable_behavior_score(&d).value().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(sustainable_behavior_score(&behaviors(&["click", "buy"], &[])).value(), Some(0.0));
        assert_eq!(sustainable_behavior_score(&behaviors(&["eco", "eco"], &["eco"])).value(), Some(1.0));
        assert!(!sustainable_behavior_score(&behaviors(&[], &["eco"])).is_defined());
    }

    #[test]
    fn sbs_green_item_predicate() {
        let mut t = DatasetTables {
            catalog: vec![ItemRecord::new("g").with_green(true), ItemRecord::new("n").with_green(false), ItemRecord::new("q")],
            users: vec![UserRecord::new("u1")],
            behaviors: vec![
                BehaviorEvent::new("u1", "buy").on_item("g"),
                BehaviorEvent::new("u1", "buy").on_item("n"),
                BehaviorEvent::new("u1", "buy").on_item("q"),
                BehaviorEvent::new("u1", "buy").on_item("g"),
            ],
            ..DatasetTables::default()
        };
        t.config.green_item_behaviors = true;
        let r = sustainable_behavior_score(&Dataset::new(t).unwrap());
        assert_eq!(r.value(), Some(0.5));
        assert_eq!(r.coverage, 0.75);
    }

    #[test]
    fn intp_example() {
        let d = Dataset::new(DatasetTables {
            users: vec![UserRecord::new("u1"), UserRecord::new("u2")],
            explanations: vec![
                ExplanationRecord::new("u1", "e1", 0.4),
                ExplanationRecord::new("u1", "e2", 0.8),
                ExplanationRecord::new("u2", "e3", 1.0),
            ],
            ..DatasetTables::default()
        })
        .unwrap();
        let r = avg_interpretability(&d);
        assert!((r.value().unwrap() - 0.8).abs() < 1e-15);
        assert!((r.per_user.unwrap()["u1"] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn lci_matches_carbon_kernel() {
        let values = [("a", 1.0), ("b", 3.0), ("c", 2.0)];
        let d = Dataset::new(DatasetTables {
            catalog: values
                .iter()
                .map(|(i, v)| ItemRecord::new(*i).with_lci(*v).with_carbon(*v))
                .collect(),
            users: vec![UserRecord::new("u1"), UserRecord::new("u2")],
            recommendations: vec![
                RecommendationSet::new("u1", ["a", "b"]),
                RecommendationSet::new("u2", ["c"]),
            ],
            ..DatasetTables::default()
        })
        .unwrap();
        let lci = avg_life_cycle_impact(&d);
        assert_eq!(lci.value(), Some(2.0));
        assert_eq!(lci.value(), avg_carbon_footprint(&d).value());
        assert_eq!(lci.per_user, avg_carbon_footprint(&d).per_user);
    }
}
