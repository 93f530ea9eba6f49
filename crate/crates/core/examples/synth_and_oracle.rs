//! Generates seeded datasets and compares every metric with the
//! brute-force oracle.

use sustain_eval::evaluate::{evaluate, EvalOptions};
use sustain_eval::oracle::oracle_metric;
use sustain_eval::synth::{generate, SynthConfig};

fn main() {
    let mut worst: f64 = 0.0;
    let mut undefined = 0;
    for seed in 0..20 {
        let ds = generate(&SynthConfig { seed, ..SynthConfig::default() }).expect("valid config");
        for report in evaluate(&ds, &EvalOptions::default()).metrics {
            let oracle = oracle_metric(&report.metric, &ds).expect("known metric");
            match (report.value(), oracle) {
                (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                (None, None) => undefined += 1,
                (a, b) => panic!("seed {seed} {}: engine {a:?} oracle {b:?}", report.metric),
            }
        }
    }
    println!("20 datasets: largest engine/oracle difference {worst:e}, {undefined} matching undefined values");
}
