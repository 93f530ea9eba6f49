//! Local business share, loyalty with and without recency decay, and
//! producer exposure fairness.

use sustain_eval::metrics::economic::{
    avg_loyalty, exposure_fairness, exposure_histogram, local_business_rate, producer_exposure_fairness, user_loyalty,
};
use sustain_eval::model::*;

fn main() {
    let item = |id: &str, producer: &str, region: &str| ItemRecord::new(id).with_producer(producer).with_region(region);
    let ds = Dataset::new(DatasetTables {
        catalog: vec![
            item("p", "P1", "north"),
            item("q", "P1", "north"),
            item("r", "P2", "south"),
            item("s", "P1", "south"),
            item("t", "P1", "north"),
            item("u", "P2", "north"),
            item("v", "P3", "east"),
            item("w", "P3", "east"),
        ],
        users: vec![
            UserRecord::new("u1").with_region("north"),
            UserRecord::new("u2").with_region("south"),
            UserRecord::new("u3"),
        ],
        recommendations: vec![
            RecommendationSet::new("u1", ["p", "q", "r"]),
            RecommendationSet::new("u2", ["s", "t", "u"]),
            RecommendationSet::new("u3", ["v", "w"]),
        ],
        satisfaction: vec![
            SatisfactionSeries::complete("u1", vec![0.5, 1.0]),
            SatisfactionSeries::complete("u2", vec![0.25, 0.25]),
        ],
        ..DatasetTables::default()
    })
    .expect("valid dataset");

    let lbpr = local_business_rate(&ds);
    println!("lbpr {:?}, coverage {}", lbpr.value(), lbpr.coverage);

    println!("loyalty u1           {:?}", user_loyalty(&ds.tables().satisfaction[0], None));
    println!("loyalty u1, decay .5 {:?}", user_loyalty(&ds.tables().satisfaction[0], Some(0.5)));
    println!("avgloyalty           {:?}", avg_loyalty(&ds, None).value());

    println!("exposure counts {:?}", exposure_histogram(&ds, None).counts);
    let pef = producer_exposure_fairness(&ds, None);
    println!("pef {:?} notes {:?}", pef.value(), pef.notes);
    println!("uniform counts: {:?}", exposure_fairness(&[3.0, 3.0, 3.0]));
}
