//! Accuracy/sustainability trade-off for one user's candidate pool.

use sustain_eval::rerank::{pareto_frontier, scalarized_rerank, weight_grid, Candidate, RerankProblem, SustainObjective};

fn main() {
    let problem = RerankProblem {
        user_id: "u1".into(),
        candidates: vec![
            Candidate::new("a", 1.0).green(false).carbon(6.0),
            Candidate::new("b", 0.8).green(false).carbon(4.0),
            Candidate::new("c", 0.6).green(true).carbon(1.0),
            Candidate::new("d", 0.0).green(true).carbon(2.0),
            Candidate::new("e", 0.4).carbon(0.5),
        ],
        k: 2,
        objective: SustainObjective::GreenRate,
    };

    for lambda in [0.0, 0.5, 1.0] {
        let list = scalarized_rerank(&problem, lambda).unwrap();
        println!("weight {lambda}: {list:?}");
    }

    for objective in [SustainObjective::GreenRate, SustainObjective::Carbon] {
        let p = RerankProblem { objective, ..problem.clone() };
        println!("\nfrontier, {objective} objective");
        for point in pareto_frontier(&p, &weight_grid(11)).unwrap() {
            println!(
                "  weight {:.1}  ndcg {:.4}  sustainability {:.4}  {:?}",
                point.weight, point.accuracy, point.sustainability, point.list
            );
        }
    }
}
