//! Carbon footprint, green share, energy ledger and paired savings on a
//! small in-memory dataset.

use sustain_eval::metrics::environmental::{
    avg_carbon_footprint, energy_per_data_unit, energy_per_epoch, energy_per_recommendation, energy_savings,
    green_item_rate, reuse_gain,
};
use sustain_eval::model::*;

fn main() {
    let ds = Dataset::new(DatasetTables {
        catalog: vec![
            ItemRecord::new("a").with_carbon(2.0).with_green(true),
            ItemRecord::new("b").with_carbon(4.0).with_green(false),
            ItemRecord::new("c").with_carbon(5.0).with_green(true),
            ItemRecord::new("d").with_green(false),
        ],
        users: vec![UserRecord::new("u1"), UserRecord::new("u2")],
        recommendations: vec![
            RecommendationSet::new("u1", ["a", "b"]),
            RecommendationSet::new("u2", ["c", "d"]),
        ],
        ..DatasetTables::default()
    })
    .expect("valid dataset");

    let carbon = avg_carbon_footprint(&ds);
    println!("avgcarfi = {:?} (coverage {})", carbon.value(), carbon.coverage);
    println!("per user: {:?}", carbon.per_user);
    println!("girec    = {:?}", green_item_rate(&ds).value());

    let ledger = EnergyLedger {
        e_inference_kwh: 10.0,
        n_rec: 1000,
        ec_build_kwh: 50.0,
        n_epoch: 5,
        n_data_processed: 100,
    };
    println!("ecrec    = {:?}", energy_per_recommendation(&ledger));
    println!("ectrain  = {:?}", energy_per_epoch(&ledger));
    println!("ecpdat   = {:?}", energy_per_data_unit(&ledger));

    let saved = energy_savings(&PairedObservation::new(PairedKind::Energy, 100.0, 80.0));
    let reuse = reuse_gain(&PairedObservation::new(PairedKind::ReuseRate, 0.25, 0.40));
    println!("estrec   = {saved:?}");
    println!("rtr      = {reuse:?}");

    // A zero denominator is a status, not a crash.
    let idle = EnergyLedger { n_rec: 0, ..ledger };
    println!("idle ecrec: {}", energy_per_recommendation(&idle).unwrap_err());
}
