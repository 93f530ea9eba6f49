//! Sustainability evaluation for recommender systems.
//!
//! The crate computes environmental, social and economic metrics over an
//! offline snapshot of recommendations and item metadata, audits how much
//! of the catalog carries sustainability labels, and re-ranks candidate
//! lists to trade accuracy against a sustainability objective.
//!
//! Start from the runnable programs in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `environmental_metrics` | carbon footprint, green share, energy ledger, paired savings |
//! | `social_metrics` | exposure parity, diversity, serendipity, accessibility |
//! | `economic_metrics` | local business share, loyalty, producer exposure fairness |
//! | `crosscut_metrics` | sustainable behavior, interpretability, life-cycle impact |
//! | `label_coverage` | per-field catalog coverage |
//! | `pareto_rerank` | scalarized re-ranking and the accuracy/sustainability frontier |
//! | `green_filter` | hard green-only list construction |
//! | `synth_and_oracle` | seeded synthetic data checked against the brute-force oracle |
//! | `evaluate_report` | loading a manifest and rendering the JSON and CSV reports |
//!
//! ```
//! use sustain_eval::model::{Dataset, DatasetTables, ItemRecord, RecommendationSet, UserRecord};
//! use sustain_eval::metrics::environmental::avg_carbon_footprint;
//!
//! let ds = Dataset::new(DatasetTables {
//!     catalog: vec![
//!         ItemRecord::new("a").with_carbon(2.0),
//!         ItemRecord::new("b").with_carbon(4.0),
//!         ItemRecord::new("c").with_carbon(5.0),
//!     ],
//!     users: vec![UserRecord::new("u1"), UserRecord::new("u2")],
//!     recommendations: vec![
//!         RecommendationSet::new("u1", ["a", "b"]),
//!         RecommendationSet::new("u2", ["c"]),
//!     ],
//!     ..DatasetTables::default()
//! })
//! .unwrap();
//! assert_eq!(avg_carbon_footprint(&ds).value(), Some(4.0));
//! ```

pub mod evaluate;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod report;
pub mod rerank;
pub mod synth;

pub use evaluate::{evaluate, EvalOptions, EvaluationReport, MetricName};
pub use ingest::{load_dataset, write_dataset, IngestError};
pub use model::{Dataset, DatasetTables};
pub use report::{MetricError, MetricReport};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const ENGINE_NAME: &str = "sustain-eval";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
