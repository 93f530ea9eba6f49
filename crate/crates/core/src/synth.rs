//! Seeded synthetic datasets for verification.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, so the same configuration yields the same tables on
//! every platform. Draw order is fixed by the code below: catalog, users,
//! recommendations, judgments, similarity, energy, paired observations,
//! accessibility, satisfaction, behaviors, explanations.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AccessibilityAudit, AccessibilityScore, BehaviorEvent, Dataset, DatasetTables, EnergyLedger, EvalConfig,
    ExplanationRecord, FamiliarPolicy, ItemRecord, PairedKind, PairedObservation, RecommendationSet,
    RelevanceJudgment, SatisfactionSeries, SimilarityEntry, SimilaritySource, UserRecord,
};

/// Per-field probability that a value is left unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Missingness {
    pub carbon: f64,
    pub green: f64,
    pub harmful: f64,
    pub lci: f64,
    pub producer: f64,
    pub region: f64,
    pub label: f64,
    pub relevance: f64,
    pub accessibility: f64,
    pub satisfaction: f64,
}

impl Default for Missingness {
    fn default() -> Self {
        Self {
            carbon: 0.1,
            green: 0.1,
            harmful: 0.1,
            lci: 0.1,
            producer: 0.05,
            region: 0.1,
            label: 0.2,
            relevance: 0.3,
            accessibility: 0.1,
            satisfaction: 0.1,
        }
    }
}

impl Missingness {
    fn rates(&self) -> [(&'static str, f64); 10] {
        [
            ("carbon", self.carbon),
            ("green", self.green),
            ("harmful", self.harmful),
            ("lci", self.lci),
            ("producer", self.producer),
            ("region", self.region),
            ("label", self.label),
            ("relevance", self.relevance),
            ("accessibility", self.accessibility),
            ("satisfaction", self.satisfaction),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    pub n_items: usize,
    pub n_groups: usize,
    pub n_producers: usize,
    /// Inclusive bounds on recommendation list length.
    pub list_length: [usize; 2],
    pub missingness: Missingness,
    /// Probability that a behavior event has a sustainable kind.
    pub sustainable_fraction: f64,
    pub n_artifacts: usize,
    pub horizon: u32,
    pub decay: Option<f64>,
    /// Extra judged items per user beyond the recommended ones.
    pub extra_judgments: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_users: 10,
            n_items: 30,
            n_groups: 3,
            n_producers: 4,
            list_length: [2, 5],
            missingness: Missingness::default(),
            sustainable_fraction: 0.4,
            n_artifacts: 3,
            horizon: 4,
            decay: None,
            extra_judgments: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        for (name, v) in [
            ("n_users", self.n_users),
            ("n_items", self.n_items),
            ("n_groups", self.n_groups),
            ("n_producers", self.n_producers),
            ("n_artifacts", self.n_artifacts),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        let [lo, hi] = self.list_length;
        if lo == 0 || lo > hi || hi > self.n_items {
            return bad(format!("list_length [{lo}, {hi}] must satisfy 1 <= min <= max <= n_items"));
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        for (name, p) in self
            .missingness
            .rates()
            .into_iter()
            .chain([("sustainable_fraction", self.sustainable_fraction)])
        {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        if let Some(d) = self.decay {
            if !(d > 0.0 && d <= 1.0) {
                return bad(format!("decay {d} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

const REGIONS: [&str; 3] = ["north", "south", "east"];
const CATEGORIES: [&str; 3] = ["food", "fashion", "home"];
const SUSTAINABLE_KINDS: [&str; 2] = ["eco_click", "eco_buy"];
const PLAIN_KINDS: [&str; 2] = ["click", "buy"];

fn item_id(n: usize) -> String {
    format!("i{n:03}")
}

fn maybe<T>(rng: &mut ChaCha8Rng, missing: f64, value: T) -> Option<T> {
    if rng.gen_bool(missing) {
        None
    } else {
        Some(value)
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, from: &[&'a str]) -> &'a str {
    from[rng.gen_range(0..from.len())]
}

/// Generates the raw tables for `config`.
pub fn generate_tables(config: &SynthConfig) -> Result<DatasetTables, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let miss = &config.missingness;

    let catalog: Vec<ItemRecord> = (0..config.n_items)
        .map(|n| {
            let carbon = rng.gen_range(0.0..=10.0);
            let green = rng.gen_bool(0.5);
            let harmful = rng.gen_bool(0.2);
            let lci = rng.gen_range(0.0..=10.0);
            let producer = format!("p{}", rng.gen_range(0..config.n_producers));
            let region = pick(&mut rng, &REGIONS).to_owned();
            let label = rng.gen_bool(0.5);
            let category = pick(&mut rng, &CATEGORIES).to_owned();
            ItemRecord {
                item_id: item_id(n),
                carbon_footprint: maybe(&mut rng, miss.carbon, carbon),
                is_green: maybe(&mut rng, miss.green, green),
                is_harmful: maybe(&mut rng, miss.harmful, harmful),
                lci_score: maybe(&mut rng, miss.lci, lci),
                producer_id: maybe(&mut rng, miss.producer, producer),
                producer_region: maybe(&mut rng, miss.region, region),
                sustainability_label: maybe(&mut rng, miss.label, label),
                is_local: None,
                category: Some(category),
            }
        })
        .collect();

    let groups: Vec<String> = (0..config.n_groups).map(|g| format!("g{g}")).collect();
    let users: Vec<UserRecord> = (0..config.n_users)
        .map(|n| {
            let mut u = UserRecord::new(format!("u{n:02}"));
            u.groups.insert(groups[rng.gen_range(0..groups.len())].clone());
            if rng.gen_bool(0.2) {
                u.groups.insert(groups[rng.gen_range(0..groups.len())].clone());
            }
            let region = pick(&mut rng, &REGIONS).to_owned();
            u.region = maybe(&mut rng, miss.region, region);
            for i in 0..config.n_items {
                if rng.gen_bool(0.15) {
                    u.familiar_items.insert(item_id(i));
                }
            }
            u
        })
        .collect();

    let [lo, hi] = config.list_length;
    let recommendations: Vec<RecommendationSet> = users
        .iter()
        .map(|u| {
            let len = rng.gen_range(lo..=hi);
            let items: Vec<String> = sample(&mut rng, config.n_items, len).into_iter().map(item_id).collect();
            RecommendationSet::new(u.user_id.clone(), items)
        })
        .collect();

    let mut judgments = Vec::new();
    for rec in &recommendations {
        let mut judged: BTreeSet<String> = rec.items.iter().cloned().collect();
        for _ in 0..config.extra_judgments {
            judged.insert(item_id(rng.gen_range(0..config.n_items)));
        }
        for item in judged {
            // Quarter steps make relevance ties common.
            let rel = rng.gen_range(0..=4) as f64 / 4.0;
            if !rng.gen_bool(miss.relevance) {
                judgments.push(RelevanceJudgment::new(rec.user_id.clone(), item, rel));
            }
        }
    }

    let mut similarity = Vec::new();
    for a in 0..config.n_items {
        for b in a + 1..config.n_items {
            similarity.push(SimilarityEntry {
                item_a: item_id(a),
                item_b: item_id(b),
                sim: rng.gen_range(0.0..=1.0),
            });
        }
    }

    let slots: usize = recommendations.iter().map(|r| r.items.len()).sum();
    let energy = EnergyLedger {
        e_inference_kwh: rng.gen_range(1.0..100.0),
        n_rec: slots as u64,
        ec_build_kwh: rng.gen_range(10.0..1000.0),
        n_epoch: rng.gen_range(1..=20),
        n_data_processed: rng.gen_range(100..=10_000),
    };

    let paired = vec![
        PairedObservation {
            unit: "kWh".into(),
            ..PairedObservation::new(PairedKind::Energy, rng.gen_range(50.0..150.0), rng.gen_range(30.0..150.0))
        },
        PairedObservation::new(PairedKind::ReuseRate, rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)),
        PairedObservation {
            higher_is_better: rng.gen_bool(0.5),
            ..PairedObservation::new(PairedKind::Health, rng.gen_range(50.0..150.0), rng.gen_range(50.0..150.0))
        },
    ];

    let mut scores = Vec::new();
    let artifacts: BTreeSet<String> = (0..config.n_artifacts).map(|a| format!("a{a}")).collect();
    for g in &groups {
        for a in &artifacts {
            let score = rng.gen_range(0.0..=1.0);
            if !rng.gen_bool(miss.accessibility) {
                scores.push(AccessibilityScore {
                    artifact_id: a.clone(),
                    group: g.clone(),
                    score,
                });
            }
        }
    }
    let accessibility = AccessibilityAudit {
        artifacts,
        criteria: BTreeSet::from(["perceivable".to_owned(), "operable".to_owned()]),
        scores,
    };

    let satisfaction = users
        .iter()
        .map(|u| SatisfactionSeries {
            user_id: u.user_id.clone(),
            horizon: config.horizon,
            values: (0..config.horizon)
                .map(|_| {
                    let v = rng.gen_range(0.0..=1.0);
                    maybe(&mut rng, miss.satisfaction, v)
                })
                .collect(),
        })
        .collect();

    let mut behaviors = Vec::new();
    for u in &users {
        for _ in 0..rng.gen_range(0..=5) {
            let kind = if rng.gen_bool(config.sustainable_fraction) {
                pick(&mut rng, &SUSTAINABLE_KINDS)
            } else {
                pick(&mut rng, &PLAIN_KINDS)
            };
            let mut e = BehaviorEvent::new(u.user_id.clone(), kind);
            if rng.gen_bool(0.7) {
                e = e.on_item(item_id(rng.gen_range(0..config.n_items)));
            }
            behaviors.push(e);
        }
    }

    let mut explanations = Vec::new();
    for u in &users {
        for e in 0..rng.gen_range(0..=3) {
            explanations.push(ExplanationRecord::new(
                u.user_id.clone(),
                format!("{}-e{e}", u.user_id),
                rng.gen_range(0.0..=1.0),
            ));
        }
    }

    let config = EvalConfig {
        groups: groups.into_iter().collect(),
        sustainable_behaviors: SUSTAINABLE_KINDS.iter().map(|s| (*s).to_owned()).collect(),
        decay: config.decay,
        familiar_policy: FamiliarPolicy::Seen,
        ..EvalConfig::default()
    };

    Ok(DatasetTables {
        catalog,
        users,
        recommendations,
        judgments,
        similarity: Some(SimilaritySource::Table(similarity)),
        energy: Some(energy),
        paired,
        accessibility: Some(accessibility),
        satisfaction,
        behaviors,
        explanations,
        config,
    })
}

/// Generates and validates a dataset for `config`.
pub fn generate(config: &SynthConfig) -> Result<Dataset, SynthError> {
    let tables = generate_tables(config)?;
    Dataset::new(tables).map_err(|r| SynthError::InvalidConfig(format!("generated dataset failed validation: {r}")))
}
