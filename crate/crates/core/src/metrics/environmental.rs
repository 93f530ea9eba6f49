//! Environmental metrics: item carbon footprint, green share, energy use
//! of inference and training, and before/after savings.

use crate::ingest::CatalogField;
use crate::metrics::{attach_label_coverage, mean_of_list_means, slot_rate};
use crate::model::{Dataset, EnergyLedger, PairedKind, PairedObservation};
use crate::report::{MetricError, MetricReport};

/// Average carbon footprint of recommended items, averaged per user first.
pub fn avg_carbon_footprint(ds: &Dataset) -> MetricReport {
    mean_of_list_means(ds, "avgcarfi", CatalogField::CarbonFootprint, |i| i.carbon_footprint)
}

/// Share of recommended slots holding green items.
pub fn green_item_rate(ds: &Dataset) -> MetricReport {
    let report = slot_rate(ds, "girec", "is_green", |_, item| item.is_green);
    attach_label_coverage(report, ds, &[CatalogField::IsGreen])
}

fn per_unit(energy: f64, units: u64, what: &str) -> Result<f64, MetricError> {
    if units == 0 {
        return Err(MetricError::undefined(format!("{what} is zero")));
    }
    Ok(energy / units as f64)
}

pub fn energy_per_recommendation(ledger: &EnergyLedger) -> Result<f64, MetricError> {
    per_unit(ledger.e_inference_kwh, ledger.n_rec, "n_rec")
}

pub fn energy_per_epoch(ledger: &EnergyLedger) -> Result<f64, MetricError> {
    per_unit(ledger.ec_build_kwh, ledger.n_epoch, "n_epoch")
}

pub fn energy_per_data_unit(ledger: &EnergyLedger) -> Result<f64, MetricError> {
    per_unit(ledger.ec_build_kwh, ledger.n_data_processed, "n_data_processed")
}

fn expect_kind(obs: &PairedObservation, kind: PairedKind) -> Result<(), MetricError> {
    if obs.kind != kind {
        return Err(MetricError::undefined(format!(
            "expected a {kind} observation, got {}",
            obs.kind
        )));
    }
    Ok(())
}

/// Relative energy reduction `(baseline - treatment) / baseline`.
/// Negative when consumption rose; never clamped.
pub fn energy_savings(obs: &PairedObservation) -> Result<f64, MetricError> {
    expect_kind(obs, PairedKind::Energy)?;
    if obs.baseline == 0.0 {
        return Err(MetricError::undefined("baseline energy is zero"));
    }
    Ok((obs.baseline - obs.treatment) / obs.baseline)
}

/// Change in item reuse rate, `treatment - baseline`.
pub fn reuse_gain(obs: &PairedObservation) -> Result<f64, MetricError> {
    expect_kind(obs, PairedKind::ReuseRate)?;
    for (name, v) in [("baseline", obs.baseline), ("treatment", obs.treatment)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(MetricError::Range(format!("{name} reuse rate {v} outside [0, 1]")));
        }
    }
    Ok(obs.treatment - obs.baseline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn ds(catalog: Vec<ItemRecord>, recs: Vec<RecommendationSet>) -> Dataset {
        let users = recs.iter().map(|r| UserRecord::new(r.user_id.clone())).collect();
        Dataset::new(DatasetTables {
            catalog,
            users,
            recommendations: recs,
            ..DatasetTables::default()
        })
        .unwrap()
    }

    #[test]
    fn carbon_double_average() {
        let d = ds(
            vec![
                ItemRecord::new("a").with_carbon(2.0),
                ItemRecord::new("b").with_carbon(4.0),
                ItemRecord::new("c").with_carbon(5.0),
            ],
            vec![
                RecommendationSet::new("u1", ["a", "b"]),
                RecommendationSet::new("u2", ["c"]),
            ],
        );
        let r = avg_carbon_footprint(&d);
        assert_eq!(r.value(), Some(4.0));
        assert_eq!(r.per_user.as_ref().unwrap()["u1"], 3.0);
        assert_eq!(r.coverage, 1.0);
    }

    #[test]
    fn carbon_identity_and_zero() {
        let d = ds(
            vec![ItemRecord::new("a").with_carbon(7.0)],
            vec![RecommendationSet::new("u1", ["a"])],
        );
        assert_eq!(avg_carbon_footprint(&d).value(), Some(7.0));
        let d = ds(
            vec![ItemRecord::new("a").with_carbon(0.0), ItemRecord::new("b").with_carbon(0.0)],
            vec![RecommendationSet::new("u1", ["a", "b"])],
        );
        assert_eq!(avg_carbon_footprint(&d).value(), Some(0.0));
    }

    #[test]
    fn carbon_skips_unlabeled_users() {
        let d = ds(
            vec![ItemRecord::new("a").with_carbon(2.0), ItemRecord::new("b")],
            vec![
                RecommendationSet::new("u1", ["a"]),
                RecommendationSet::new("u2", ["b"]),
            ],
        );
        let r = avg_carbon_footprint(&d);
        assert_eq!(r.value(), Some(2.0));
        assert_eq!(r.coverage, 0.5);
        assert_eq!(r.breakdowns["label_coverage"]["carbon_footprint"], 0.5);
    }

    #[test]
    fn carbon_undefined_without_footprints() {
        let d = ds(vec![ItemRecord::new("a")], vec![RecommendationSet::new("u1", ["a"])]);
        assert!(!avg_carbon_footprint(&d).is_defined());
    }

    #[test]
    fn green_rate_bounds() {
        let items = |flags: [bool; 4]| {
            ["a", "b", "c", "d"]
                .iter()
                .zip(flags)
                .map(|(id, g)| ItemRecord::new(*id).with_green(g))
                .collect::<Vec<_>>()
        };
        let recs = || {
            vec![
                RecommendationSet::new("u1", ["a", "b"]),
                RecommendationSet::new("u2", ["c", "d"]),
            ]
        };
        assert_eq!(green_item_rate(&ds(items([true, false, true, false]), recs())).value(), Some(0.5));
        assert_eq!(green_item_rate(&ds(items([true; 4]), recs())).value(), Some(1.0));
        assert_eq!(green_item_rate(&ds(items([false; 4]), recs())).value(), Some(0.0));
        let unlabeled = ds(vec![ItemRecord::new("a")], vec![RecommendationSet::new("u1", ["a"])]);
        assert!(!green_item_rate(&unlabeled).is_defined());
    }

    #[test]
    fn energy_ratios() {
        let ledger = EnergyLedger {
            e_inference_kwh: 10.0,
            n_rec: 1000,
            ec_build_kwh: 50.0,
            n_epoch: 5,
            n_data_processed: 100,
        };
        assert_eq!(energy_per_recommendation(&ledger), Ok(0.01));
        assert_eq!(energy_per_epoch(&ledger), Ok(10.0));
        assert_eq!(energy_per_data_unit(&ledger), Ok(0.5));

        let zero = EnergyLedger { n_rec: 500, n_epoch: 3, n_data_processed: 9, ..EnergyLedger::default() };
        assert_eq!(energy_per_recommendation(&zero), Ok(0.0));
        assert_eq!(energy_per_epoch(&zero), Ok(0.0));
        assert_eq!(energy_per_data_unit(&zero), Ok(0.0));

        let empty = EnergyLedger::default();
        assert!(matches!(energy_per_recommendation(&empty), Err(MetricError::Undefined(_))));
        assert!(matches!(energy_per_epoch(&empty), Err(MetricError::Undefined(_))));
        assert!(matches!(energy_per_data_unit(&empty), Err(MetricError::Undefined(_))));
    }

    #[test]
    fn savings_and_reuse() {
        let e = |b, t| PairedObservation::new(PairedKind::Energy, b, t);
        assert_eq!(energy_savings(&e(100.0, 80.0)), Ok(0.2));
        assert_eq!(energy_savings(&e(100.0, 100.0)), Ok(0.0));
        assert_eq!(energy_savings(&e(100.0, 120.0)), Ok(-0.2));
        assert!(energy_savings(&e(0.0, 5.0)).is_err());

        let r = |b, t| PairedObservation::new(PairedKind::ReuseRate, b, t);
        assert!((reuse_gain(&r(0.25, 0.40)).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(reuse_gain(&r(0.3, 0.3)), Ok(0.0));
        assert!((reuse_gain(&r(0.3, 0.1)).unwrap() + 0.2).abs() < 1e-15);
        assert!(matches!(reuse_gain(&r(1.2, 0.1)), Err(MetricError::Range(_))));
        assert!(reuse_gain(&e(0.2, 0.1)).is_err());
    }
}
