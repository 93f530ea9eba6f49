//! Loads a manifest and prints the JSON report, then the flat CSV for a
//! metric subset. Pass a manifest path to use your own data.

use std::path::PathBuf;

use sustain_eval::evaluate::{evaluate, parse_metric_list, EvalOptions};
use sustain_eval::ingest::load_dataset;

fn main() {
    let manifest = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/social/manifest.json")
    });
    let ds = match load_dataset(&manifest) {
        Ok(ds) => ds,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };

    print!("{}", evaluate(&ds, &EvalOptions::default()).to_json());

    let subset = EvalOptions {
        metrics: parse_metric_list("parity,listd,ser").unwrap(),
        epsilon: Some(0.6),
        ..EvalOptions::default()
    };
    print!("{}", evaluate(&ds, &subset).to_csv());
}
