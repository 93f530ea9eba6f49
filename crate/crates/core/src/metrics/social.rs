//! Social metrics: demographic parity of exposure, intra-list diversity,
//! serendipity, accessibility and inclusivity, harmful exposure, health.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::ingest::CatalogField;
use crate::metrics::{attach_label_coverage, slot_rate};
use crate::model::{
    AccessibilityAudit, Dataset, FamiliarPolicy, PairedKind, PairedObservation, RecommendationSet,
    SimilarityProvider,
};
use crate::report::{fraction, MetricError, MetricReport};

/// Per-item exposure gaps across groups.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityReport {
    /// Largest pairwise `|P_g(i) - P_g'(i)|` for each recommended item.
    pub per_item_gap: BTreeMap<String, f64>,
    pub max_gap: f64,
    pub mean_gap: f64,
    pub epsilon: f64,
    pub satisfied: bool,
    /// Groups in the universe with no members; left out of the comparison.
    pub empty_groups: Vec<String>,
}

/// Share of group members whose list contains `item`. Members without a
/// recommendation set count in the denominator.
pub fn exposure_probability(ds: &Dataset, group: &str, item: &str) -> Result<f64, MetricError> {
    let mut members = 0usize;
    let mut exposed = 0usize;
    for user in ds.group_members(group) {
        members += 1;
        if ds
            .recommendations_for(&user.user_id)
            .is_some_and(|r| r.items.iter().any(|i| i == item))
        {
            exposed += 1;
        }
    }
    if members == 0 {
        return Err(MetricError::EmptyGroup(group.to_owned()));
    }
    Ok(exposed as f64 / members as f64)
}

/// Compares each recommended item's exposure probability across all
/// nonempty groups; the condition holds when the largest gap is within
/// `epsilon`.
pub fn demographic_parity(ds: &Dataset, epsilon: f64) -> Result<ParityReport, MetricError> {
    let universe = ds.group_universe();
    let mut groups: Vec<(String, Vec<&str>)> = Vec::new();
    let mut empty_groups = Vec::new();
    for g in universe {
        let members: Vec<&str> = ds
            .users()
            .iter()
            .filter(|u| u.groups.contains(&g))
            .map(|u| u.user_id.as_str())
            .collect();
        if members.is_empty() {
            empty_groups.push(g);
        } else {
            groups.push((g, members));
        }
    }
    if groups.len() < 2 {
        return Err(MetricError::FewerThanTwoGroups);
    }

    let lists: HashMap<&str, HashSet<&str>> = ds
        .recommendations()
        .iter()
        .map(|r| (r.user_id.as_str(), r.items.iter().map(String::as_str).collect()))
        .collect();
    let items: BTreeSet<&str> = lists.values().flatten().copied().collect();
    if items.is_empty() {
        return Err(MetricError::undefined("no recommended items"));
    }

    let mut per_item_gap = BTreeMap::new();
    for item in items {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (_, members) in &groups {
            let exposed = members
                .iter()
                .filter(|u| lists.get(*u).is_some_and(|l| l.contains(item)))
                .count();
            let p = exposed as f64 / members.len() as f64;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        per_item_gap.insert(item.to_owned(), hi - lo);
    }
    let max_gap = per_item_gap.values().copied().fold(0.0, f64::max);
    let mean_gap = per_item_gap.values().sum::<f64>() / per_item_gap.len() as f64;
    Ok(ParityReport {
        per_item_gap,
        max_gap,
        mean_gap,
        epsilon,
        satisfied: max_gap <= epsilon,
        empty_groups,
    })
}

pub fn parity_report(ds: &Dataset, epsilon: f64) -> MetricReport {
    let universe = ds.group_universe().len();
    match demographic_parity(ds, epsilon) {
        Ok(p) => {
            let summary = BTreeMap::from([
                ("max_gap".to_owned(), p.max_gap),
                ("mean_gap".to_owned(), p.mean_gap),
                ("epsilon".to_owned(), p.epsilon),
                ("satisfied".to_owned(), if p.satisfied { 1.0 } else { 0.0 }),
            ]);
            let mut report = MetricReport::defined("parity", p.max_gap, fraction(universe - p.empty_groups.len(), universe))
                .with_breakdown("item_gap", p.per_item_gap)
                .with_breakdown("summary", summary)
                .note(format!("epsilon={} satisfied={}", p.epsilon, p.satisfied))
                .note("only items recommended to at least one user are compared");
            if !p.empty_groups.is_empty() {
                report = report.note(format!("empty groups skipped: {}", p.empty_groups.join(";")));
            }
            report
        }
        Err(e) => MetricReport::undefined("parity", &e),
    }
}

/// One minus the mean similarity over ordered pairs of distinct positions.
pub fn list_diversity(items: &[String], sim: &dyn SimilarityProvider) -> Result<f64, MetricError> {
    let n = items.len();
    if n < 2 {
        return Err(MetricError::undefined("list has fewer than two items"));
    }
    let mut total = 0.0;
    for (p, a) in items.iter().enumerate() {
        for (q, b) in items.iter().enumerate() {
            if p != q {
                total += sim
                    .sim(a, b)
                    .ok_or_else(|| MetricError::MissingSimilarity(a.clone(), b.clone()))?;
            }
        }
    }
    Ok(1.0 - total / (n * (n - 1)) as f64)
}

pub fn intra_list_diversity(ds: &Dataset, user: &str) -> Result<f64, MetricError> {
    let sim = ds.similarity().ok_or(MetricError::MissingTable("similarity"))?;
    let rec = ds
        .recommendations_for(user)
        .ok_or_else(|| MetricError::UnknownUser(user.to_owned()))?;
    list_diversity(&rec.items, sim)
}

/// Mean intra-list diversity over users whose lists have at least two items
/// with fully known pairwise similarity.
pub fn avg_intra_list_diversity(ds: &Dataset) -> MetricReport {
    let Some(sim) = ds.similarity() else {
        return MetricReport::undefined("listd", &MetricError::MissingTable("similarity"));
    };
    let total = ds.recommendations().len();
    let (mut short, mut missing) = (0usize, 0usize);
    let mut per_user = BTreeMap::new();
    for rec in ds.recommendations() {
        match list_diversity(&rec.items, sim) {
            Ok(v) => {
                per_user.insert(rec.user_id.clone(), v);
            }
            Err(MetricError::MissingSimilarity(..)) => missing += 1,
            Err(_) => short += 1,
        }
    }
    if per_user.is_empty() {
        return MetricReport::undefined(
            "listd",
            &MetricError::undefined("no list with at least two items and known similarities"),
        );
    }
    let value = per_user.values().sum::<f64>() / per_user.len() as f64;
    MetricReport::defined("listd", value, fraction(per_user.len(), total))
        .with_per_user(per_user)
        .note(format!("users skipped with fewer than two items: {short}"))
        .note(format!("users skipped for missing similarity: {missing}"))
}

fn familiar_extra(ds: &Dataset) -> BTreeSet<String> {
    match ds.config().familiar_policy {
        FamiliarPolicy::Seen => BTreeSet::new(),
        FamiliarPolicy::SeenOrPopular { top_n } => ds.popular_items(top_n),
    }
}

/// Returns (serendipity, slots with known relevance).
fn serendipity_of(ds: &Dataset, rec: &RecommendationSet, popular: &BTreeSet<String>) -> (f64, usize) {
    let familiar = ds.user(&rec.user_id).map(|u| &u.familiar_items);
    let mut sum = 0.0;
    let mut known = 0usize;
    for item in &rec.items {
        let rel = ds.relevance(&rec.user_id, item);
        known += usize::from(rel.is_some());
        let expected = familiar.is_some_and(|f| f.contains(item)) || popular.contains(item);
        if !expected {
            sum += rel.unwrap_or(0.0);
        }
    }
    (sum / rec.items.len() as f64, known)
}

/// Relevance-weighted share of recommended items outside the user's
/// familiar set. Unknown relevance counts as 0.
pub fn serendipity(ds: &Dataset, user: &str) -> Result<f64, MetricError> {
    let rec = ds
        .recommendations_for(user)
        .ok_or_else(|| MetricError::UnknownUser(user.to_owned()))?;
    Ok(serendipity_of(ds, rec, &familiar_extra(ds)).0)
}

pub fn avg_serendipity(ds: &Dataset) -> MetricReport {
    if ds.recommendations().is_empty() {
        return MetricReport::undefined("ser", &MetricError::undefined("no recommendation sets"));
    }
    let popular = familiar_extra(ds);
    let mut per_user = BTreeMap::new();
    let (mut known, mut slots) = (0usize, 0usize);
    let mut sum = 0.0;
    for rec in ds.recommendations() {
        let (v, k) = serendipity_of(ds, rec, &popular);
        known += k;
        slots += rec.items.len();
        sum += v;
        per_user.insert(rec.user_id.clone(), v);
    }
    MetricReport::defined("ser", sum / per_user.len() as f64, fraction(known, slots))
        .with_per_user(per_user)
        .note(format!("slots with unknown relevance counted as 0: {}", slots - known))
}

/// Mean satisfaction score of all audited artifacts for `group`.
pub fn accessibility_score(audit: &AccessibilityAudit, group: &str) -> Result<f64, MetricError> {
    if audit.artifacts.is_empty() {
        return Err(MetricError::undefined("no audited artifacts"));
    }
    let scores: HashMap<&str, f64> = audit
        .scores
        .iter()
        .filter(|s| s.group == group)
        .map(|s| (s.artifact_id.as_str(), s.score))
        .collect();
    let mut sum = 0.0;
    for artifact in &audit.artifacts {
        sum += scores.get(artifact.as_str()).ok_or_else(|| MetricError::MissingScore {
            artifact: artifact.clone(),
            group: group.to_owned(),
        })?;
    }
    Ok(sum / audit.artifacts.len() as f64)
}

fn group_accessibility(audit: &AccessibilityAudit) -> (BTreeMap<String, f64>, usize) {
    let groups = audit.groups();
    let scored = groups
        .iter()
        .filter_map(|g| accessibility_score(audit, g).ok().map(|v| ((*g).to_owned(), v)))
        .collect();
    (scored, groups.len())
}

pub fn accessibility_report(ds: &Dataset) -> MetricReport {
    let Some(audit) = &ds.tables().accessibility else {
        return MetricReport::undefined("acc", &MetricError::MissingTable("accessibility"));
    };
    let (per_group, total) = group_accessibility(audit);
    if per_group.is_empty() {
        return MetricReport::undefined("acc", &MetricError::undefined("no group scored on every artifact"));
    }
    let value = per_group.values().sum::<f64>() / per_group.len() as f64;
    MetricReport::defined("acc", value, fraction(per_group.len(), total))
        .note("value is the unweighted mean over groups; see per_group")
        .with_per_group(per_group)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusivityGap {
    pub max_gap: f64,
    pub satisfied: bool,
}

/// Largest accessibility difference between any two fully scored groups.
pub fn inclusivity_gap(audit: &AccessibilityAudit, epsilon: f64) -> Result<InclusivityGap, MetricError> {
    let (per_group, _) = group_accessibility(audit);
    if per_group.len() < 2 {
        return Err(MetricError::FewerThanTwoGroups);
    }
    let lo = per_group.values().copied().fold(f64::INFINITY, f64::min);
    let hi = per_group.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_gap = hi - lo;
    Ok(InclusivityGap {
        max_gap,
        satisfied: max_gap <= epsilon,
    })
}

pub fn inclusivity_report(ds: &Dataset, epsilon: f64) -> MetricReport {
    let Some(audit) = &ds.tables().accessibility else {
        return MetricReport::undefined("inclusivity", &MetricError::MissingTable("accessibility"));
    };
    match inclusivity_gap(audit, epsilon) {
        Ok(gap) => {
            let (per_group, total) = group_accessibility(audit);
            MetricReport::defined("inclusivity", gap.max_gap, fraction(per_group.len(), total))
                .with_per_group(per_group)
                .note(format!("epsilon={epsilon} satisfied={}", gap.satisfied))
        }
        Err(e) => MetricReport::undefined("inclusivity", &e),
    }
}

/// Share of recommended slots holding items flagged harmful.
pub fn harmful_exposure_rate(ds: &Dataset) -> MetricReport {
    let report = slot_rate(ds, "hier", "is_harmful", |_, item| item.is_harmful);
    attach_label_coverage(report, ds, &[CatalogField::IsHarmful])
}

/// Relative change of a health outcome with the recommender against
/// without it. For outcomes where lower is better the sign is flipped so
/// that positive always means improvement.
pub fn health_improvement(obs: &PairedObservation) -> Result<f64, MetricError> {
    if obs.kind != PairedKind::Health {
        return Err(MetricError::undefined(format!("expected a health observation, got {}", obs.kind)));
    }
    if obs.baseline == 0.0 {
        return Err(MetricError::undefined("outcome without recommender is zero"));
    }
    let delta = if obs.higher_is_better {
        obs.treatment - obs.baseline
    } else {
        obs.baseline - obs.treatment
    };
    Ok(delta / obs.baseline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn parity_fixture() -> Dataset {
        Dataset::new(DatasetTables {
            catalog: vec![ItemRecord::new("x"), ItemRecord::new("y")],
            users: vec![
                UserRecord::new("u1").in_groups(["A"]),
                UserRecord::new("u2").in_groups(["A"]),
                UserRecord::new("u3").in_groups(["B"]),
            ],
            recommendations: vec![
                RecommendationSet::new("u1", ["x", "y"]),
                RecommendationSet::new("u2", ["y"]),
                RecommendationSet::new("u3", ["x", "y"]),
            ],
            ..DatasetTables::default()
        })
        .unwrap()
    }

    #[test]
    fn exposure_probability_counts_members() {
        let d = parity_fixture();
        assert_eq!(exposure_probability(&d, "A", "x"), Ok(0.5));
        assert_eq!(exposure_probability(&d, "A", "y"), Ok(1.0));
        assert_eq!(exposure_probability(&d, "B", "zzz"), Ok(0.0));
        assert_eq!(exposure_probability(&d, "C", "x"), Err(MetricError::EmptyGroup("C".into())));
    }

    #[test]
    fn parity_gap() {
        let p = demographic_parity(&parity_fixture(), 0.1).unwrap();
        assert_eq!(p.max_gap, 0.5);
        assert_eq!(p.per_item_gap["y"], 0.0);
        assert!(!p.satisfied);
    }

    #[test]
    fn parity_needs_two_groups() {
        let mut t = parity_fixture().into_tables();
        for u in &mut t.users {
            u.groups = ["A".to_owned()].into();
        }
        let d = Dataset::new(t).unwrap();
        assert_eq!(demographic_parity(&d, 0.1), Err(MetricError::FewerThanTwoGroups));
    }

    #[test]
    fn parity_identical_lists_is_zero() {
        let mut t = parity_fixture().into_tables();
        t.recommendations[1].items = vec!["x".into(), "y".into()];
        let p = demographic_parity(&Dataset::new(t).unwrap(), 0.1).unwrap();
        assert_eq!(p.max_gap, 0.0);
        assert!(p.satisfied);
    }

    struct Uniform(f64);
    impl SimilarityProvider for Uniform {
        fn sim(&self, a: &str, b: &str) -> Option<f64> {
            Some(if a == b { 1.0 } else { self.0 })
        }
    }

    #[test]
    fn diversity_examples() {
        let ab = vec!["a".to_owned(), "b".to_owned()];
        assert!((list_diversity(&ab, &Uniform(0.2)).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(list_diversity(&ab, &Uniform(1.0)), Ok(0.0));
        assert!(list_diversity(&ab[..1], &Uniform(0.2)).is_err());
    }

    #[test]
    fn diversity_missing_pair() {
        let idx = SimilarityIndex::build(&SimilaritySource::Table(vec![]));
        let ab = vec!["a".to_owned(), "b".to_owned()];
        assert!(matches!(list_diversity(&ab, &idx), Err(MetricError::MissingSimilarity(..))));
    }

    fn ser_fixture(familiar: &[&str]) -> Dataset {
        Dataset::new(DatasetTables {
            catalog: vec![ItemRecord::new("a"), ItemRecord::new("b")],
            users: vec![UserRecord::new("u1").familiar_with(familiar.iter().copied())],
            recommendations: vec![RecommendationSet::new("u1", ["a", "b"])],
            judgments: vec![
                RelevanceJudgment::new("u1", "a", 1.0),
                RelevanceJudgment::new("u1", "b", 1.0),
            ],
            ..DatasetTables::default()
        })
        .unwrap()
    }

    #[test]
    fn serendipity_examples() {
        assert_eq!(serendipity(&ser_fixture(&["a"]), "u1"), Ok(0.5));
        assert_eq!(serendipity(&ser_fixture(&["a", "b"]), "u1"), Ok(0.0));
        assert_eq!(serendipity(&ser_fixture(&[]), "u1"), Ok(1.0));
    }

    #[test]
    fn serendipity_popular_policy() {
        let mut t = ser_fixture(&["b"]).into_tables();
        t.config.familiar_policy = FamiliarPolicy::SeenOrPopular { top_n: 1 };
        // "b" is the only familiar item anywhere, so it is also the popular one.
        assert_eq!(serendipity(&Dataset::new(t).unwrap(), "u1"), Ok(0.5));
    }

    fn audit(rows: &[(&str, &str, f64)]) -> AccessibilityAudit {
        AccessibilityAudit::from_scores(
            rows.iter()
                .map(|(a, g, s)| AccessibilityScore {
                    artifact_id: (*a).into(),
                    group: (*g).into(),
                    score: *s,
                })
                .collect(),
        )
    }

    #[test]
    fn accessibility_examples() {
        let a = audit(&[("q1", "A", 0.5), ("q2", "A", 1.0)]);
        assert_eq!(accessibility_score(&a, "A"), Ok(0.75));
        let a = audit(&[("q1", "A", 1.0), ("q2", "A", 1.0)]);
        assert_eq!(accessibility_score(&a, "A"), Ok(1.0));
        let a = audit(&[("q1", "A", 0.0), ("q2", "A", 0.0), ("q1", "B", 1.0)]);
        assert_eq!(accessibility_score(&a, "A"), Ok(0.0));
        assert!(matches!(accessibility_score(&a, "B"), Err(MetricError::MissingScore { .. })));
    }

    #[test]
    fn inclusivity_examples() {
        let a = audit(&[("q", "A", 0.75), ("q", "B", 0.75)]);
        assert_eq!(inclusivity_gap(&a, 0.05), Ok(InclusivityGap { max_gap: 0.0, satisfied: true }));
        let a = audit(&[("q", "A", 0.9), ("q", "B", 0.6)]);
        let g = inclusivity_gap(&a, 0.05).unwrap();
        assert!((g.max_gap - 0.3).abs() < 1e-15 && !g.satisfied);
        let a = audit(&[("q", "A", 0.5), ("q", "B", 0.6), ("q", "C", 0.9)]);
        assert!((inclusivity_gap(&a, 0.05).unwrap().max_gap - 0.4).abs() < 1e-15);
        let a = audit(&[("q", "A", 0.5)]);
        assert_eq!(inclusivity_gap(&a, 0.05), Err(MetricError::FewerThanTwoGroups));
    }

    #[test]
    fn harmful_rate() {
        let ids = ["a", "b", "c", "d", "e"];
        let d = Dataset::new(DatasetTables {
            catalog: ids
                .iter()
                .map(|i| ItemRecord::new(*i).with_harmful(*i == "c"))
                .collect(),
            users: vec![UserRecord::new("u1")],
            recommendations: vec![RecommendationSet::new("u1", ids)],
            ..DatasetTables::default()
        })
        .unwrap();
        assert_eq!(harmful_exposure_rate(&d).value(), Some(0.2));
    }

    #[test]
    fn health_examples() {
        let h = |b, t| PairedObservation::new(PairedKind::Health, b, t);
        assert!((health_improvement(&h(100.0, 110.0)).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(health_improvement(&h(100.0, 100.0)), Ok(0.0));
        assert!(health_improvement(&h(0.0, 1.0)).is_err());
        let mut bmi = h(30.0, 27.0);
        bmi.higher_is_better = false;
        assert!((health_improvement(&bmi).unwrap() - 0.1).abs() < 1e-15);
    }
}
