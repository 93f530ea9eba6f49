//! Accuracy-versus-sustainability list re-ranking.
//!
//! Each user's judged items form a candidate pool. A list of length `k` is
//! scored on two objectives in `[0, 1]`: NDCG@k against the pool's
//! relevance, and the mean per-item sustainability score of the list.
//! Weighted-sum scalarization over a grid of weights traces the trade-off;
//! dominated points are dropped to leave a Pareto frontier.
//!
//! For a fixed set of items the best order puts higher relevance first
//! (sustainability does not depend on position), so the scalarized optimum
//! is found exactly by dynamic programming over the relevance-sorted pool
//! in `O(n * k)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::Dataset;
use crate::report::round_sig12;

/// Tolerance for treating two objective values as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RerankError {
    #[error("candidate pool of {pool} items is smaller than k = {k}")]
    PoolSmallerThanK { pool: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("weight {0} outside [0, 1]")]
    InvalidWeight(f64),
    #[error("empty weight grid")]
    EmptyGrid,
    #[error("unknown user `{0}`")]
    UnknownUser(String),
}

/// Which sustainability measure the second objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SustainObjective {
    /// Share of green items in the list.
    GreenRate,
    /// One minus mean carbon footprint relative to the pool maximum.
    Carbon,
    /// One minus mean life-cycle impact relative to the pool maximum.
    Lci,
}

impl SustainObjective {
    pub fn as_str(self) -> &'static str {
        match self {
            SustainObjective::GreenRate => "green_rate",
            SustainObjective::Carbon => "carbon",
            SustainObjective::Lci => "lci",
        }
    }
}

impl fmt::Display for SustainObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SustainObjective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "green_rate" | "green" | "girec" => Ok(SustainObjective::GreenRate),
            "carbon" | "avgcarfi" => Ok(SustainObjective::Carbon),
            "lci" | "avglci" => Ok(SustainObjective::Lci),
            other => Err(format!("unknown sustainability objective `{other}` (green_rate, carbon, lci)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub item_id: String,
    pub relevance: f64,
    pub is_green: Option<bool>,
    pub carbon: Option<f64>,
    pub lci: Option<f64>,
}

impl Candidate {
    pub fn new(item_id: impl Into<String>, relevance: f64) -> Self {
        Self {
            item_id: item_id.into(),
            relevance,
            is_green: None,
            carbon: None,
            lci: None,
        }
    }

    pub fn green(mut self, green: bool) -> Self {
        self.is_green = Some(green);
        self
    }

    pub fn carbon(mut self, kg: f64) -> Self {
        self.carbon = Some(kg);
        self
    }

    pub fn lci(mut self, lci: f64) -> Self {
        self.lci = Some(lci);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankProblem {
    pub user_id: String,
    pub candidates: Vec<Candidate>,
    pub k: usize,
    pub objective: SustainObjective,
}

/// Discount for the 0-based position `pos`: `1 / log2(pos + 2)`.
fn discount(pos: usize) -> f64 {
    1.0 / ((pos + 2) as f64).log2()
}

fn ideal_dcg(relevances: impl Iterator<Item = f64>, k: usize) -> f64 {
    let mut rels: Vec<f64> = relevances.collect();
    rels.sort_by(|a, b| b.total_cmp(a));
    rels.iter().take(k).enumerate().map(|(p, r)| r * discount(p)).sum()
}

/// NDCG@k of `list` with gains from `relevance` (missing items gain 0),
/// normalized by the best ordering of all judged items. Zero when the
/// ideal DCG is zero.
pub fn ndcg_at_k<S: AsRef<str>>(list: &[S], relevance: &HashMap<String, f64>, k: usize) -> f64 {
    let ideal = ideal_dcg(relevance.values().copied(), k);
    if ideal == 0.0 {
        return 0.0;
    }
    let dcg: f64 = list
        .iter()
        .take(k)
        .enumerate()
        .map(|(p, i)| relevance.get(i.as_ref()).copied().unwrap_or(0.0) * discount(p))
        .sum();
    dcg / ideal
}

/// Item scores in `[0, 1]` for a normalized "lower is better" attribute.
/// Unknown values score as the pool maximum; a zero maximum makes every
/// item score 1.
fn normalized_inverse(values: impl Iterator<Item = Option<f64>> + Clone) -> Vec<f64> {
    let max = values.clone().flatten().fold(0.0, f64::max);
    values
        .map(|v| if max == 0.0 { 1.0 } else { 1.0 - v.unwrap_or(max) / max })
        .collect()
}

impl RerankProblem {
    /// Builds the pool from the user's relevance judgments, in judgment order.
    pub fn from_dataset(
        ds: &Dataset,
        user: &str,
        k: usize,
        objective: SustainObjective,
    ) -> Result<Self, RerankError> {
        if ds.user(user).is_none() {
            return Err(RerankError::UnknownUser(user.to_owned()));
        }
        let candidates = ds
            .tables()
            .judgments
            .iter()
            .filter(|j| j.user_id == user)
            .map(|j| {
                let item = ds.item(&j.item_id);
                Candidate {
                    item_id: j.item_id.clone(),
                    relevance: j.relevance,
                    is_green: item.and_then(|i| i.is_green),
                    carbon: item.and_then(|i| i.carbon_footprint),
                    lci: item.and_then(|i| i.lci_score),
                }
            })
            .collect();
        Ok(Self {
            user_id: user.to_owned(),
            candidates,
            k,
            objective,
        })
    }

    fn check(&self) -> Result<(), RerankError> {
        if self.k == 0 {
            return Err(RerankError::ZeroK);
        }
        if self.candidates.len() < self.k {
            return Err(RerankError::PoolSmallerThanK {
                pool: self.candidates.len(),
                k: self.k,
            });
        }
        Ok(())
    }

    /// Per-candidate sustainability scores, aligned with `candidates`.
    pub fn sustainability_scores(&self) -> Vec<f64> {
        match self.objective {
            SustainObjective::GreenRate => self
                .candidates
                .iter()
                .map(|c| if c.is_green == Some(true) { 1.0 } else { 0.0 })
                .collect(),
            SustainObjective::Carbon => normalized_inverse(self.candidates.iter().map(|c| c.carbon)),
            SustainObjective::Lci => normalized_inverse(self.candidates.iter().map(|c| c.lci)),
        }
    }

    fn relevance_map(&self) -> HashMap<String, f64> {
        self.candidates
            .iter()
            .map(|c| (c.item_id.clone(), c.relevance))
            .collect()
    }

    pub fn accuracy<S: AsRef<str>>(&self, list: &[S]) -> f64 {
        ndcg_at_k(list, &self.relevance_map(), self.k)
    }

    /// Mean sustainability score of the listed items.
    pub fn sustainability<S: AsRef<str>>(&self, list: &[S]) -> f64 {
        if list.is_empty() {
            return 0.0;
        }
        let scores: HashMap<&str, f64> = self
            .candidates
            .iter()
            .map(|c| c.item_id.as_str())
            .zip(self.sustainability_scores())
            .collect();
        list.iter()
            .map(|i| scores.get(i.as_ref()).copied().unwrap_or(0.0))
            .sum::<f64>()
            / list.len() as f64
    }
}

/// Scalarized value: the weighted sum, then a tie-break objective that is
/// only used at the weight endpoints.
#[derive(Debug, Clone, Copy)]
struct Score(f64, f64);

impl Score {
    const INFEASIBLE: Score = Score(f64::NEG_INFINITY, f64::NEG_INFINITY);

    fn add(self, other: Score) -> Score {
        Score(self.0 + other.0, self.1 + other.1)
    }

    fn cmp_tol(self, other: Score) -> Ordering {
        if self.0 == f64::NEG_INFINITY || other.0 == f64::NEG_INFINITY {
            return self.0.total_cmp(&other.0);
        }
        if (self.0 - other.0).abs() > TIE_TOL {
            return self.0.total_cmp(&other.0);
        }
        if (self.1 - other.1).abs() > TIE_TOL {
            return self.1.total_cmp(&other.1);
        }
        Ordering::Equal
    }
}

/// Best list for weight `lambda` on accuracy (and `1 - lambda` on
/// sustainability). Among equally scored lists the lexicographically
/// smallest sequence of item ids wins. At `lambda = 1` ties in accuracy are
/// broken by sustainability and at `lambda = 0` the other way round, so
/// endpoint lists are never weakly dominated.
pub fn scalarized_rerank(problem: &RerankProblem, lambda: f64) -> Result<Vec<String>, RerankError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(RerankError::InvalidWeight(lambda));
    }
    problem.check()?;
    let k = problem.k;
    let sus = problem.sustainability_scores();
    let mut order: Vec<usize> = (0..problem.candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&problem.candidates[a], &problem.candidates[b]);
        cb.relevance
            .total_cmp(&ca.relevance)
            .then_with(|| ca.item_id.cmp(&cb.item_id))
    });
    let ideal = ideal_dcg(problem.candidates.iter().map(|c| c.relevance), k);
    let acc_scale = if ideal == 0.0 { 0.0 } else { 1.0 / ideal };
    let sus_scale = 1.0 / k as f64;

    let gain = |slot: usize, pos: usize| -> Score {
        let idx = order[slot];
        let acc = acc_scale * problem.candidates[idx].relevance * discount(pos);
        let s = sus_scale * sus[idx];
        let tie = if lambda == 1.0 {
            s
        } else if lambda == 0.0 {
            acc
        } else {
            0.0
        };
        Score(lambda * acc + (1.0 - lambda) * s, tie)
    };

    // best[j][p]: best score filling positions p..k from sorted slots j..n.
    let n = order.len();
    let mut best = vec![vec![Score::INFEASIBLE; k + 1]; n + 1];
    for row in best.iter_mut() {
        row[k] = Score(0.0, 0.0);
    }
    for j in (0..n).rev() {
        for p in (0..k).rev() {
            let skip = best[j + 1][p];
            let take = if best[j + 1][p + 1].0 == f64::NEG_INFINITY {
                Score::INFEASIBLE
            } else {
                gain(j, p).add(best[j + 1][p + 1])
            };
            best[j][p] = if take.cmp_tol(skip) == Ordering::Less { skip } else { take };
        }
    }

    let mut list = Vec::with_capacity(k);
    let mut start = 0;
    for p in 0..k {
        let target = best[start][p];
        let pick = (start..n)
            .filter(|&j| best[j + 1][p + 1].0 != f64::NEG_INFINITY)
            .filter(|&j| gain(j, p).add(best[j + 1][p + 1]).cmp_tol(target) != Ordering::Less)
            .min_by(|&a, &b| problem.candidates[order[a]].item_id.cmp(&problem.candidates[order[b]].item_id))
            .expect("dynamic program guarantees a feasible pick");
        list.push(problem.candidates[order[pick]].item_id.clone());
        start = pick + 1;
    }
    Ok(list)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub weight: f64,
    pub list: Vec<String>,
    pub accuracy: f64,
    pub sustainability: f64,
}

/// `a` is at least as good as `b` on both objectives and better on one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 - TIE_TOL && a.1 >= b.1 - TIE_TOL && (a.0 > b.0 + TIE_TOL || a.1 > b.1 + TIE_TOL)
}

/// `n` evenly spaced weights from 0 to 1 inclusive.
pub fn weight_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

pub const DEFAULT_GRID_SIZE: usize = 11;

pub fn pareto_frontier(problem: &RerankProblem, grid: &[f64]) -> Result<Vec<FrontierPoint>, RerankError> {
    if grid.is_empty() {
        return Err(RerankError::EmptyGrid);
    }
    let mut points: Vec<FrontierPoint> = Vec::new();
    for &lambda in grid {
        let list = scalarized_rerank(problem, lambda)?;
        if points.iter().any(|p| p.list == list) {
            continue;
        }
        points.push(FrontierPoint {
            weight: lambda,
            accuracy: problem.accuracy(&list),
            sustainability: problem.sustainability(&list),
            list,
        });
    }
    let vectors: Vec<(f64, f64)> = points.iter().map(|p| (p.accuracy, p.sustainability)).collect();
    let mut frontier: Vec<FrontierPoint> = points
        .into_iter()
        .enumerate()
        .filter(|(n, _)| !vectors.iter().any(|v| dominates(*v, vectors[*n])))
        .map(|(_, p)| p)
        .collect();
    frontier.sort_by(|a, b| {
        a.accuracy
            .total_cmp(&b.accuracy)
            .then(b.sustainability.total_cmp(&a.sustainability))
            .then_with(|| a.list.cmp(&b.list))
    });
    Ok(frontier)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenFilterResult {
    pub list: Vec<String>,
    /// Non-green items needed to fill the list to `k`.
    pub non_green_used: usize,
    pub accuracy: f64,
    pub sustainability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Hard green constraint: green candidates by relevance first, then the
/// best remaining candidates if fewer than `k` are green.
pub fn green_filter_rerank(problem: &RerankProblem) -> GreenFilterResult {
    let by_relevance = |green: bool| {
        let mut pool: Vec<&Candidate> = problem
            .candidates
            .iter()
            .filter(|c| (c.is_green == Some(true)) == green)
            .collect();
        pool.sort_by(|a, b| b.relevance.total_cmp(&a.relevance).then_with(|| a.item_id.cmp(&b.item_id)));
        pool
    };
    let mut list: Vec<String> = by_relevance(true)
        .into_iter()
        .take(problem.k)
        .map(|c| c.item_id.clone())
        .collect();
    let green = list.len();
    list.extend(
        by_relevance(false)
            .into_iter()
            .take(problem.k - green.min(problem.k))
            .map(|c| c.item_id.clone()),
    );
    let non_green_used = list.len() - green;
    let note = if green == 0 {
        Some("no green candidates; list ranked by relevance only".to_owned())
    } else if non_green_used > 0 {
        Some(format!("only {green} green candidates; filled with {non_green_used} non-green"))
    } else if list.len() < problem.k {
        Some(format!("pool holds only {} candidates", list.len()))
    } else {
        None
    };
    GreenFilterResult {
        accuracy: problem.accuracy(&list),
        sustainability: problem.sustainability(&list),
        list,
        non_green_used,
        note,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RerankMode {
    Frontier,
    GreenFilter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankOptions {
    pub k: usize,
    pub objective: SustainObjective,
    pub grid: Vec<f64>,
    pub mode: RerankMode,
}

impl Default for RerankOptions {
    fn default() -> Self {
        Self {
            k: 10,
            objective: SustainObjective::GreenRate,
            grid: weight_grid(DEFAULT_GRID_SIZE),
            mode: RerankMode::Frontier,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UserOutcome {
    Frontier(Vec<FrontierPoint>),
    GreenFilter(GreenFilterResult),
    Failed(RerankError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRerank {
    pub user_id: String,
    pub outcome: UserOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankReport {
    pub options: RerankOptions,
    pub users: Vec<UserRerank>,
}

/// Re-ranks every user with at least one relevance judgment, in users-table
/// order. Users are processed in parallel on the current rayon pool.
pub fn rerank_dataset(ds: &Dataset, options: &RerankOptions) -> RerankReport {
    let users: Vec<&str> = ds
        .users()
        .iter()
        .map(|u| u.user_id.as_str())
        .filter(|u| ds.tables().judgments.iter().any(|j| j.user_id == *u))
        .collect();
    let results = users
        .par_iter()
        .map(|user| {
            let outcome = match RerankProblem::from_dataset(ds, user, options.k, options.objective) {
                Err(e) => UserOutcome::Failed(e),
                Ok(problem) => match options.mode {
                    RerankMode::Frontier => match pareto_frontier(&problem, &options.grid) {
                        Ok(f) => UserOutcome::Frontier(f),
                        Err(e) => UserOutcome::Failed(e),
                    },
                    RerankMode::GreenFilter => match problem.check() {
                        Err(RerankError::ZeroK) => UserOutcome::Failed(RerankError::ZeroK),
                        _ => UserOutcome::GreenFilter(green_filter_rerank(&problem)),
                    },
                },
            };
            UserRerank {
                user_id: (*user).to_owned(),
                outcome,
            }
        })
        .collect();
    RerankReport {
        options: options.clone(),
        users: results,
    }
}

#[derive(Serialize)]
struct Row<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    accuracy: f64,
    sustainability: f64,
    items: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    non_green_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

impl RerankReport {
    fn rows(&self) -> Vec<(&str, Result<Vec<Row<'_>>, String>)> {
        self.users
            .iter()
            .map(|u| {
                let rows = match &u.outcome {
                    UserOutcome::Frontier(points) => Ok(points
                        .iter()
                        .map(|p| Row {
                            weight: Some(round_sig12(p.weight)),
                            accuracy: round_sig12(p.accuracy),
                            sustainability: round_sig12(p.sustainability),
                            items: &p.list,
                            non_green_used: None,
                            note: None,
                        })
                        .collect()),
                    UserOutcome::GreenFilter(g) => Ok(vec![Row {
                        weight: None,
                        accuracy: round_sig12(g.accuracy),
                        sustainability: round_sig12(g.sustainability),
                        items: &g.list,
                        non_green_used: Some(g.non_green_used),
                        note: g.note.as_deref(),
                    }]),
                    UserOutcome::Failed(e) => Err(e.to_string()),
                };
                (u.user_id.as_str(), rows)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct UserJson<'a> {
            user_id: &'a str,
            status: String,
            rows: Vec<Row<'a>>,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            engine: &'static str,
            engine_version: &'static str,
            mode: RerankMode,
            objective: SustainObjective,
            k: usize,
            grid: Vec<f64>,
            users: Vec<UserJson<'a>>,
        }
        let doc = Doc {
            schema_version: crate::REPORT_SCHEMA_VERSION,
            engine: crate::ENGINE_NAME,
            engine_version: crate::ENGINE_VERSION,
            mode: self.options.mode,
            objective: self.options.objective,
            k: self.options.k,
            grid: self.options.grid.iter().copied().map(round_sig12).collect(),
            users: self
                .rows()
                .into_iter()
                .map(|(user_id, rows)| match rows {
                    Ok(rows) => UserJson {
                        user_id,
                        status: "ok".into(),
                        rows,
                    },
                    Err(e) => UserJson {
                        user_id,
                        status: format!("error: {e}"),
                        rows: Vec::new(),
                    },
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("rerank report serializes");
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let record = |w: &mut csv::Writer<Vec<u8>>, fields: [String; 7]| {
            w.write_record(&fields).expect("in-memory csv write");
        };
        record(
            &mut w,
            ["user_id", "status", "weight", "accuracy", "sustainability", "items", "non_green_used"].map(String::from),
        );
        for (user, rows) in self.rows() {
            match rows {
                Ok(rows) => {
                    for r in rows {
                        record(
                            &mut w,
                            [
                                user.to_owned(),
                                "ok".into(),
                                r.weight.map(|x| x.to_string()).unwrap_or_default(),
                                r.accuracy.to_string(),
                                r.sustainability.to_string(),
                                r.items.join(";"),
                                r.non_green_used.map(|x| x.to_string()).unwrap_or_default(),
                            ],
                        );
                    }
                }
                Err(e) => record(
                    &mut w,
                    [user.to_owned(), format!("error: {e}"), String::new(), String::new(), String::new(), String::new(), String::new()],
                ),
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
        pairs.iter().map(|(i, r)| ((*i).to_owned(), *r)).collect()
    }

    #[test]
    fn ndcg_examples() {
        let judgments = rel(&[("a", 1.0), ("b", 0.0)]);
        assert_eq!(ndcg_at_k(&["a", "b"], &judgments, 2), 1.0);
        let swapped = ndcg_at_k(&["b", "a"], &judgments, 2);
        assert!((swapped - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert!((swapped - 0.6309).abs() < 1e-4);
        assert_eq!(ndcg_at_k(&["a", "b"], &rel(&[("a", 0.0), ("b", 0.0)]), 2), 0.0);
    }

    fn problem(cands: Vec<Candidate>, k: usize) -> RerankProblem {
        RerankProblem {
            user_id: "u".into(),
            candidates: cands,
            k,
            objective: SustainObjective::GreenRate,
        }
    }

    #[test]
    fn weight_endpoints() {
        let p = problem(
            vec![
                Candidate::new("a", 1.0).green(false),
                Candidate::new("b", 0.8).green(false),
                Candidate::new("c", 0.2).green(true),
                Candidate::new("d", 0.1).green(true),
            ],
            2,
        );
        assert_eq!(scalarized_rerank(&p, 1.0).unwrap(), ["a", "b"]);
        // Pure sustainability prefers the green pair, ordered by relevance.
        assert_eq!(scalarized_rerank(&p, 0.0).unwrap(), ["c", "d"]);
    }

    #[test]
    fn greedy_trap_is_avoided() {
        // A greedy position-by-position pick would place `z` first because
        // its sustainability outweighs `x`'s extra relevance, giving a list
        // dominated by the same items in relevance order.
        let p = problem(
            vec![Candidate::new("x", 1.0).green(false), Candidate::new("z", 0.5).green(true)],
            2,
        );
        for lambda in weight_grid(11) {
            assert_eq!(scalarized_rerank(&p, lambda).unwrap(), ["x", "z"]);
        }
    }

    #[test]
    fn lexicographic_tie_break() {
        let p = problem(
            vec![Candidate::new("b", 0.5).green(true), Candidate::new("a", 0.5).green(true), Candidate::new("c", 0.5).green(true)],
            2,
        );
        assert_eq!(scalarized_rerank(&p, 0.5).unwrap(), ["a", "b"]);
    }

    #[test]
    fn errors() {
        let p = problem(vec![Candidate::new("a", 1.0)], 2);
        assert_eq!(scalarized_rerank(&p, 0.5), Err(RerankError::PoolSmallerThanK { pool: 1, k: 2 }));
        let p = problem(vec![Candidate::new("a", 1.0)], 1);
        assert_eq!(scalarized_rerank(&p, 1.5), Err(RerankError::InvalidWeight(1.5)));
        assert_eq!(pareto_frontier(&p, &[]), Err(RerankError::EmptyGrid));
    }

    #[test]
    fn degenerate_frontier_is_one_point() {
        let p = problem(
            (0..5).map(|n| Candidate::new(format!("i{n}"), 0.7).green(true)).collect(),
            3,
        );
        assert_eq!(pareto_frontier(&p, &weight_grid(11)).unwrap().len(), 1);
    }

    #[test]
    fn carbon_objective_normalization() {
        let p = RerankProblem {
            objective: SustainObjective::Carbon,
            ..problem(
                vec![Candidate::new("a", 1.0).carbon(10.0), Candidate::new("b", 1.0).carbon(5.0), Candidate::new("c", 1.0)],
                1,
            )
        };
        assert_eq!(p.sustainability_scores(), vec![0.0, 0.5, 0.0]);
        let zero = RerankProblem {
            objective: SustainObjective::Carbon,
            ..problem(vec![Candidate::new("a", 1.0).carbon(0.0)], 1)
        };
        assert_eq!(zero.sustainability_scores(), vec![1.0]);
    }

    #[test]
    fn green_filter_fill_rule() {
        let p = problem(
            vec![
                Candidate::new("g1", 0.2).green(true),
                Candidate::new("n1", 0.9).green(false),
                Candidate::new("g2", 0.4).green(true),
                Candidate::new("n2", 0.5),
            ],
            3,
        );
        let r = green_filter_rerank(&p);
        assert_eq!(r.list, ["g2", "g1", "n1"]);
        assert_eq!(r.non_green_used, 1);

        let none = problem(vec![Candidate::new("a", 0.1), Candidate::new("b", 0.9)], 2);
        let r = green_filter_rerank(&none);
        assert_eq!(r.list, ["b", "a"]);
        assert!(r.note.is_some());
    }
}
