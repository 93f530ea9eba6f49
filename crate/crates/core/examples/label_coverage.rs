//! Per-field catalog coverage, from a fixture manifest or a path given on
//! the command line.

use std::path::PathBuf;

use sustain_eval::evaluate::coverage_table;
use sustain_eval::ingest::load_catalog;

fn main() {
    let manifest = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/environmental/manifest.json")
    });
    let catalog = match load_catalog(&manifest) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let table = coverage_table(&catalog).expect("nonempty catalog");
    println!("{} items", table.items);
    for row in &table.rows {
        println!("{:<22} {:<14} {:.3}", row.field, row.metric, row.coverage);
    }
}
