use sustain_eval::metrics::social::{
    accessibility_report, avg_intra_list_diversity, avg_serendipity, demographic_parity, inclusivity_gap,
};
use sustain_eval::model::*;

fn main() {
    let scores = [("q1", "A", 0.5), ("q2", "A", 1.0), ("q1", "B", 0.75), ("q2", "B", 0.75)]
        .into_iter()
        .map(|(artifact, group, score)| AccessibilityScore {
            artifact_id: artifact.into(),
            group: group.into(),
            score,
        })
        .collect();
    let audit = AccessibilityAudit::from_scores(scores);

    let ds = Dataset::new(DatasetTables {
        catalog: vec![ItemRecord::new("x"), ItemRecord::new("y")],
        users: vec![
            UserRecord::new("u1").in_groups(["A"]).familiar_with(["x"]),
            UserRecord::new("u2").in_groups(["A"]),
            UserRecord::new("u3").in_groups(["B"]).familiar_with(["x"]),
        ],
        recommendations: vec![
            RecommendationSet::new("u1", ["x", "y"]),
            RecommendationSet::new("u2", ["y"]),
            RecommendationSet::new("u3", ["x", "y"]),
        ],
        judgments: vec![
            RelevanceJudgment::new("u1", "x", 1.0),
            RelevanceJudgment::new("u1", "y", 1.0),
            RelevanceJudgment::new("u2", "y", 0.5),
            RelevanceJudgment::new("u3", "x", 1.0),
            RelevanceJudgment::new("u3", "y", 1.0),
        ],
        similarity: Some(SimilaritySource::Table(vec![SimilarityEntry {
            item_a: "x".into(),
            item_b: "y".into(),
            sim: 0.2,
        }])),
        accessibility: Some(audit.clone()),
        ..DatasetTables::default()
    })
    .expect("valid dataset");

    let parity = demographic_parity(&ds, 0.05).expect("two nonempty groups");
    println!("parity max gap {} (within epsilon: {})", parity.max_gap, parity.satisfied);
    println!("per item gaps  {:?}", parity.per_item_gap);
    println!("listd          {:?}", avg_intra_list_diversity(&ds).value());
    println!("ser            {:?}", avg_serendipity(&ds).value());
    let acc = accessibility_report(&ds);
    println!("acc            {:?} per group {:?}", acc.value(), acc.per_group);
    println!("inclusivity    {:?}", inclusivity_gap(&audit, 0.05));
}
