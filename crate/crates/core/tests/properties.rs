use proptest::prelude::*;

use sustain_eval::evaluate::{evaluate, EvalOptions};
use sustain_eval::ingest::{label_coverage, load_tables, write_dataset, CatalogField};
use sustain_eval::metrics::economic::user_loyalty;
use sustain_eval::model::{Dataset, ItemRecord, SatisfactionSeries};
use sustain_eval::oracle::oracle_metric;
use sustain_eval::rerank::{green_filter_rerank, scalarized_rerank, Candidate, RerankProblem, SustainObjective};
use sustain_eval::synth::{generate_tables, SynthConfig};

fn small_config(seed: u64) -> SynthConfig {
    SynthConfig {
        seed,
        n_users: 1 + (seed % 7) as usize,
        n_items: 6 + (seed % 9) as usize,
        list_length: [1, 4],
        ..SynthConfig::default()
    }
}

fn candidates() -> impl Strategy<Value = Vec<Candidate>> {
    prop::collection::vec(
        (0u8..=4, prop::option::of(any::<bool>()), prop::option::of(0u8..=10), prop::option::of(0u8..=10)),
        1..=6,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(n, (rel, green, carbon, lci))| Candidate {
                item_id: format!("c{n}"),
                relevance: rel as f64 / 4.0,
                is_green: green,
                carbon: carbon.map(f64::from),
                lci: lci.map(f64::from),
            })
            .collect()
    })
}

fn objective() -> impl Strategy<Value = SustainObjective> {
    prop_oneof![
        Just(SustainObjective::GreenRate),
        Just(SustainObjective::Carbon),
        Just(SustainObjective::Lci)
    ]
}

/// Every ordered list of `k` distinct pool items.
fn ordered_lists(pool: &[String], k: usize) -> Vec<Vec<String>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (n, head) in pool.iter().enumerate() {
        let rest: Vec<String> = pool.iter().enumerate().filter(|(m, _)| *m != n).map(|(_, s)| s.clone()).collect();
        for mut tail in ordered_lists(&rest, k - 1) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_matches_oracle(seed in any::<u64>()) {
        let ds = Dataset::new(generate_tables(&small_config(seed)).unwrap()).unwrap();
        for r in evaluate(&ds, &EvalOptions::default()).metrics {
            let oracle = oracle_metric(&r.metric, &ds).unwrap();
            match (r.value(), oracle) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12, "{}: {} vs {}", r.metric, a, b),
                (a, b) => prop_assert_eq!(a, b, "{}", r.metric),
            }
        }
    }

    #[test]
    fn write_then_load_round_trips(seed in any::<u64>()) {
        let tables = generate_tables(&small_config(seed)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_dataset(&tables, dir.path()).unwrap();
        let loaded = load_tables(&manifest).unwrap();
        prop_assert_eq!(&loaded, &tables);
        let again = write_dataset(&loaded, &dir.path().join("again")).unwrap();
        for name in ["catalog.csv", "users.csv", "recommendations.csv", "manifest.json"] {
            let a = std::fs::read(manifest.parent().unwrap().join(name)).unwrap();
            let b = std::fs::read(again.parent().unwrap().join(name)).unwrap();
            prop_assert_eq!(a, b, "{}", name);
        }
    }

    #[test]
    fn label_coverage_is_monotone(labels in prop::collection::vec(prop::option::of(any::<bool>()), 1..30), pick in any::<prop::sample::Index>()) {
        let mut catalog: Vec<ItemRecord> = labels
            .iter()
            .enumerate()
            .map(|(n, l)| ItemRecord { sustainability_label: *l, ..ItemRecord::new(format!("i{n}")) })
            .collect();
        let before = label_coverage(&catalog, CatalogField::SustainabilityLabel).unwrap();
        let n = pick.index(catalog.len());
        catalog[n].sustainability_label = Some(true);
        let after = label_coverage(&catalog, CatalogField::SustainabilityLabel).unwrap();
        prop_assert!(after >= before);
        prop_assert!((0.0..=1.0).contains(&after));
    }

    #[test]
    fn loyalty_stays_within_observed_range(values in prop::collection::vec(0.0f64..=1.0, 1..8), decay in 0.01f64..=1.0) {
        let s = SatisfactionSeries::complete("u", values.clone());
        let v = user_loyalty(&s, Some(decay)).unwrap();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn scalarized_list_is_optimal(cands in candidates(), k in 1usize..=3, objective in objective(), lambda_step in 0u8..=10) {
        let k = k.min(cands.len());
        let lambda = lambda_step as f64 / 10.0;
        let problem = RerankProblem { user_id: "u".into(), candidates: cands, k, objective };
        let list = scalarized_rerank(&problem, lambda).unwrap();
        prop_assert_eq!(list.len(), k);
        let score = |l: &[String]| lambda * problem.accuracy(l) + (1.0 - lambda) * problem.sustainability(l);
        let ids: Vec<String> = problem.candidates.iter().map(|c| c.item_id.clone()).collect();
        let ours = score(&list);
        let acc = problem.accuracy(&list);
        let sus = problem.sustainability(&list);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&acc) && (0.0..=1.0).contains(&sus));
        for other in ordered_lists(&ids, k) {
            prop_assert!(score(&other) <= ours + 1e-12, "{:?} beats {:?}", other, list);
            if lambda == 1.0 || lambda == 0.0 {
                let (a, s) = (problem.accuracy(&other), problem.sustainability(&other));
                let better = a >= acc - 1e-12 && s >= sus - 1e-12 && (a > acc + 1e-12 || s > sus + 1e-12);
                prop_assert!(!better, "endpoint list {:?} dominated by {:?}", list, other);
            }
        }
    }

    #[test]
    fn green_filter_prefers_green(cands in candidates(), k in 1usize..=4) {
        let k = k.min(cands.len());
        let greens = cands.iter().filter(|c| c.is_green == Some(true)).count();
        let problem = RerankProblem { user_id: "u".into(), candidates: cands, k, objective: SustainObjective::GreenRate };
        let r = green_filter_rerank(&problem);
        prop_assert_eq!(r.list.len(), k);
        prop_assert_eq!(r.non_green_used, k.saturating_sub(greens));
        if greens >= k {
            prop_assert_eq!(r.sustainability, 1.0);
        }
    }
}
