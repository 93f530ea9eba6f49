use sustain_eval::rerank::{green_filter_rerank, Candidate, RerankProblem, SustainObjective};

fn main() {
    let problem = |candidates: Vec<Candidate>| RerankProblem {
        user_id: "u1".into(),
        candidates,
        k: 3,
        objective: SustainObjective::GreenRate,
    };

    let enough = problem(vec![
        Candidate::new("g1", 0.3).green(true),
        Candidate::new("g2", 0.9).green(true),
        Candidate::new("g3", 0.5).green(true),
        Candidate::new("n1", 1.0).green(false),
    ]);
    let r = green_filter_rerank(&enough);
    println!("{:?} ndcg {:.4} non-green {}", r.list, r.accuracy, r.non_green_used);

    // Too few green candidates: the rest is filled by relevance and noted.
    let short = problem(vec![
        Candidate::new("g1", 0.3).green(true),
        Candidate::new("n1", 1.0).green(false),
        Candidate::new("n2", 0.7),
    ]);
    let r = green_filter_rerank(&short);
    println!("{:?} non-green {} note {:?}", r.list, r.non_green_used, r.note);
}
