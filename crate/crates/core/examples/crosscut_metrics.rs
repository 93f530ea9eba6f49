use sustain_eval::metrics::crosscut::{avg_interpretability, avg_life_cycle_impact, sustainable_behavior_score};
use sustain_eval::model::*;

fn main() {
    let mut tables = DatasetTables {
        catalog: vec![
            ItemRecord::new("a").with_lci(1.0).with_green(true),
            ItemRecord::new("b").with_lci(3.0),
            ItemRecord::new("c").with_lci(2.0),
        ],
        users: vec![UserRecord::new("u1"), UserRecord::new("u2")],
        recommendations: vec![
            RecommendationSet::new("u1", ["a", "b"]),
            RecommendationSet::new("u2", ["c"]),
        ],
        behaviors: vec![
            BehaviorEvent::new("u1", "eco_click").on_item("a"),
            BehaviorEvent::new("u1", "click").on_item("b"),
            BehaviorEvent::new("u1", "eco_buy"),
            BehaviorEvent::new("u2", "buy").on_item("a"),
        ],
        explanations: vec![
            ExplanationRecord::new("u1", "e1", 0.4),
            ExplanationRecord::new("u1", "e2", 0.8),
            ExplanationRecord::new("u2", "e3", 1.0),
        ],
        ..DatasetTables::default()
    };
    tables.config.sustainable_behaviors = ["eco_click", "eco_buy"].map(String::from).into();

    let ds = Dataset::new(tables.clone()).expect("valid dataset");
    println!("sbs by kind only     {:?}", sustainable_behavior_score(&ds).value());

    // Also count any behavior on a green item.
    tables.config.green_item_behaviors = true;
    let with_green = Dataset::new(tables).expect("valid dataset");
    println!("sbs with green items {:?}", sustainable_behavior_score(&with_green).value());

    println!("intp   {:?}", avg_interpretability(&ds).value());
    let lci = avg_life_cycle_impact(&ds);
    println!("avglci {:?} per user {:?}", lci.value(), lci.per_user);
}
