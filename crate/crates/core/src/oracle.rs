//! Brute-force reference implementations used to check the engine.
//!
//! Everything here works on the raw tables with plain loops and linear
//! lookups. It deliberately shares no code with `metrics` or `rerank`, so
//! agreement between the two is evidence rather than tautology.

use thiserror::Error;

use crate::model::{Dataset, DatasetTables, FamiliarPolicy, ItemRecord, PairedKind, PairedObservation, SimilaritySource};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("instance too large for exhaustive enumeration: pool {pool}, k {k}")]
    InstanceTooLarge { pool: usize, k: usize },
}

fn find_item<'a>(t: &'a DatasetTables, id: &str) -> Option<&'a ItemRecord> {
    t.catalog.iter().find(|i| i.item_id == id)
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn list_mean_of(t: &DatasetTables, attr: fn(&ItemRecord) -> Option<f64>) -> Option<f64> {
    let mut user_means = Vec::new();
    for rec in &t.recommendations {
        let mut vals = Vec::new();
        for id in &rec.items {
            if let Some(v) = find_item(t, id).and_then(attr) {
                vals.push(v);
            }
        }
        if let Some(m) = mean(&vals) {
            user_means.push(m);
        }
    }
    mean(&user_means)
}

fn slot_share(t: &DatasetTables, flag: impl Fn(&str, &ItemRecord) -> Option<bool>) -> Option<f64> {
    let mut known = 0.0;
    let mut hits = 0.0;
    for rec in &t.recommendations {
        for id in &rec.items {
            let Some(item) = find_item(t, id) else { continue };
            match flag(&rec.user_id, item) {
                Some(true) => {
                    known += 1.0;
                    hits += 1.0;
                }
                Some(false) => known += 1.0,
                None => {}
            }
        }
    }
    if known == 0.0 {
        None
    } else {
        Some(hits / known)
    }
}

fn paired(t: &DatasetTables, kind: PairedKind) -> Option<&PairedObservation> {
    t.paired.iter().find(|o| o.kind == kind)
}

fn ratio(num: f64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num / den as f64)
    }
}

fn groups_of(t: &DatasetTables) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    if !t.config.groups.is_empty() {
        out.extend(t.config.groups.iter().cloned());
    } else {
        for u in &t.users {
            for g in &u.groups {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
        }
    }
    out
}

fn parity(t: &DatasetTables) -> Option<f64> {
    let mut groups: Vec<Vec<&str>> = Vec::new();
    for g in groups_of(t) {
        let members: Vec<&str> = t
            .users
            .iter()
            .filter(|u| u.groups.contains(&g))
            .map(|u| u.user_id.as_str())
            .collect();
        if !members.is_empty() {
            groups.push(members);
        }
    }
    if groups.len() < 2 {
        return None;
    }
    let mut items: Vec<&str> = Vec::new();
    for rec in &t.recommendations {
        for i in &rec.items {
            if !items.contains(&i.as_str()) {
                items.push(i);
            }
        }
    }
    if items.is_empty() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for item in items {
        let mut probs = Vec::new();
        for members in &groups {
            let mut exposed = 0.0;
            for u in members {
                let got = t
                    .recommendations
                    .iter()
                    .any(|r| r.user_id == *u && r.items.iter().any(|i| i == item));
                if got {
                    exposed += 1.0;
                }
            }
            probs.push(exposed / members.len() as f64);
        }
        for a in &probs {
            for b in &probs {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Some(worst)
}

fn similarity(t: &DatasetTables, a: &str, b: &str) -> Option<f64> {
    if a == b {
        return Some(1.0);
    }
    match t.similarity.as_ref()? {
        SimilaritySource::Table(entries) => entries
            .iter()
            .rev()
            .find(|e| (e.item_a == a && e.item_b == b) || (e.item_a == b && e.item_b == a))
            .map(|e| e.sim),
        SimilaritySource::Features(rows) => {
            let x = &rows.iter().find(|r| r.item_id == a)?.values;
            let y = &rows.iter().find(|r| r.item_id == b)?.values;
            let mut dot = 0.0;
            let mut xx = 0.0;
            let mut yy = 0.0;
            for n in 0..x.len().min(y.len()) {
                dot += x[n] * y[n];
            }
            for v in x {
                xx += v * v;
            }
            for v in y {
                yy += v * v;
            }
            if xx == 0.0 || yy == 0.0 {
                return None;
            }
            Some((dot / (xx.sqrt() * yy.sqrt())).clamp(0.0, 1.0))
        }
    }
}

fn list_diversity(t: &DatasetTables) -> Option<f64> {
    t.similarity.as_ref()?;
    let mut per_user = Vec::new();
    'users: for rec in &t.recommendations {
        let n = rec.items.len();
        if n < 2 {
            continue;
        }
        let mut total = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p == q {
                    continue;
                }
                match similarity(t, &rec.items[p], &rec.items[q]) {
                    Some(s) => total += s,
                    None => continue 'users,
                }
            }
        }
        per_user.push(1.0 - total / (n * (n - 1)) as f64);
    }
    mean(&per_user)
}

fn popular(t: &DatasetTables, top_n: usize) -> Vec<String> {
    let mut counted: Vec<(String, usize)> = Vec::new();
    for u in &t.users {
        for i in &u.familiar_items {
            match counted.iter_mut().find(|(id, _)| id == i) {
                Some(entry) => entry.1 += 1,
                None => counted.push((i.clone(), 1)),
            }
        }
    }
    counted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    counted.into_iter().take(top_n).map(|(i, _)| i).collect()
}

fn serendipity(t: &DatasetTables) -> Option<f64> {
    if t.recommendations.is_empty() {
        return None;
    }
    let extra = match t.config.familiar_policy {
        FamiliarPolicy::Seen => Vec::new(),
        FamiliarPolicy::SeenOrPopular { top_n } => popular(t, top_n),
    };
    let mut per_user = Vec::new();
    for rec in &t.recommendations {
        let user = t.users.iter().find(|u| u.user_id == rec.user_id);
        let mut sum = 0.0;
        for item in &rec.items {
            let seen = user.is_some_and(|u| u.familiar_items.contains(item));
            if seen || extra.contains(item) {
                continue;
            }
            let rel = t
                .judgments
                .iter()
                .rev()
                .find(|j| j.user_id == rec.user_id && j.item_id == *item)
                .map(|j| j.relevance)
                .unwrap_or(0.0);
            sum += rel;
        }
        per_user.push(sum / rec.items.len() as f64);
    }
    mean(&per_user)
}

/// Per-group accessibility for groups scored on every artifact.
fn accessibility_by_group(t: &DatasetTables) -> Option<Vec<f64>> {
    let audit = t.accessibility.as_ref()?;
    let mut groups: Vec<&str> = Vec::new();
    for s in &audit.scores {
        if !groups.contains(&s.group.as_str()) {
            groups.push(&s.group);
        }
    }
    let mut out = Vec::new();
    if audit.artifacts.is_empty() {
        return Some(out);
    }
    'groups: for g in groups {
        let mut sum = 0.0;
        for a in &audit.artifacts {
            let score = audit
                .scores
                .iter()
                .rev()
                .find(|s| s.group == g && s.artifact_id == *a);
            match score {
                Some(s) => sum += s.score,
                None => continue 'groups,
            }
        }
        out.push(sum / audit.artifacts.len() as f64);
    }
    Some(out)
}

fn loyalty(t: &DatasetTables) -> Option<f64> {
    let decay = t.config.decay;
    if decay.is_some_and(|d| !(d > 0.0 && d <= 1.0)) {
        return None;
    }
    let mut per_user = Vec::new();
    'series: for s in &t.satisfaction {
        let mut values = Vec::new();
        for v in &s.values {
            match v {
                Some(x) => values.push(*x),
                None => continue 'series,
            }
        }
        if values.is_empty() {
            continue;
        }
        let d = decay.unwrap_or(1.0);
        let last = values.len() - 1;
        let mut num = 0.0;
        let mut den = 0.0;
        for (t, v) in values.iter().enumerate() {
            let w = d.powi((last - t) as i32);
            num += w * v;
            den += w;
        }
        per_user.push(num / den);
    }
    mean(&per_user)
}

fn producer_fairness(t: &DatasetTables) -> Option<f64> {
    let mut producers: Vec<(String, f64)> = Vec::new();
    for item in &t.catalog {
        if let Some(p) = &item.producer_id {
            if !producers.iter().any(|(q, _)| q == p) {
                producers.push((p.clone(), 0.0));
            }
        }
    }
    for rec in &t.recommendations {
        for id in &rec.items {
            if let Some(p) = find_item(t, id).and_then(|i| i.producer_id.as_ref()) {
                if let Some(entry) = producers.iter_mut().find(|(q, _)| q == p) {
                    entry.1 += 1.0;
                }
            }
        }
    }
    if producers.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    let mut pairs = 0.0;
    for a in 0..producers.len() {
        for b in a + 1..producers.len() {
            let d = (producers[a].1 - producers[b].1).abs();
            sum += d;
            max = max.max(d);
            pairs += 1.0;
        }
    }
    if max == 0.0 {
        Some(0.0)
    } else {
        Some(sum / pairs / max)
    }
}

fn behavior_share(t: &DatasetTables) -> Option<f64> {
    if t.behaviors.is_empty() {
        return None;
    }
    let mut hits = 0.0;
    for e in &t.behaviors {
        let by_kind = t.config.sustainable_behaviors.contains(&e.kind);
        let by_item = t.config.green_item_behaviors
            && e.item_id
                .as_ref()
                .and_then(|id| find_item(t, id))
                .and_then(|i| i.is_green)
                == Some(true);
        if by_kind || by_item {
            hits += 1.0;
        }
    }
    Some(hits / t.behaviors.len() as f64)
}

fn interpretability(t: &DatasetTables) -> Option<f64> {
    let mut users: Vec<&str> = Vec::new();
    for e in &t.explanations {
        if !users.contains(&e.user_id.as_str()) {
            users.push(&e.user_id);
        }
    }
    let mut per_user = Vec::new();
    for u in users {
        let scores: Vec<f64> = t
            .explanations
            .iter()
            .filter(|e| e.user_id == u)
            .map(|e| e.interpret_score)
            .collect();
        per_user.push(mean(&scores)?);
    }
    mean(&per_user)
}

fn local(t: &DatasetTables, user: &str, item: &ItemRecord) -> Option<bool> {
    if item.is_local.is_some() {
        return item.is_local;
    }
    let producer = item.producer_region.as_ref()?;
    let region = t.users.iter().find(|u| u.user_id == user)?.region.as_ref()?;
    Some(producer.to_lowercase() == region.to_lowercase())
}

/// Reference value of a metric, `None` when it is undefined on `ds`.
///
/// Parity and inclusivity report the largest gap; loyalty uses the
/// dataset's configured decay; producer fairness covers the whole catalog.
pub fn oracle_metric(name: &str, ds: &Dataset) -> Result<Option<f64>, OracleError> {
    let t = ds.tables();
    let energy = t.energy.as_ref();
    let v = match name {
        "avgcarfi" => list_mean_of(t, |i| i.carbon_footprint),
        "avglci" => list_mean_of(t, |i| i.lci_score),
        "girec" => slot_share(t, |_, i| i.is_green),
        "hier" => slot_share(t, |_, i| i.is_harmful),
        "lbpr" => slot_share(t, |u, i| local(t, u, i)),
        "ecrec" => energy.and_then(|e| ratio(e.e_inference_kwh, e.n_rec)),
        "ectrain" => energy.and_then(|e| ratio(e.ec_build_kwh, e.n_epoch)),
        "ecpdat" => energy.and_then(|e| ratio(e.ec_build_kwh, e.n_data_processed)),
        "estrec" => paired(t, PairedKind::Energy)
            .filter(|o| o.baseline != 0.0)
            .map(|o| (o.baseline - o.treatment) / o.baseline),
        "rtr" => paired(t, PairedKind::ReuseRate)
            .filter(|o| (0.0..=1.0).contains(&o.baseline) && (0.0..=1.0).contains(&o.treatment))
            .map(|o| o.treatment - o.baseline),
        "hirec" => paired(t, PairedKind::Health).filter(|o| o.baseline != 0.0).map(|o| {
            let sign = if o.higher_is_better { 1.0 } else { -1.0 };
            sign * (o.treatment - o.baseline) / o.baseline
        }),
        "parity" => parity(t),
        "listd" => list_diversity(t),
        "ser" => serendipity(t),
        "acc" => accessibility_by_group(t).and_then(|g| mean(&g)),
        "inclusivity" => accessibility_by_group(t).filter(|g| g.len() >= 2).map(|g| {
            let hi = g.iter().copied().fold(f64::MIN, f64::max);
            let lo = g.iter().copied().fold(f64::MAX, f64::min);
            hi - lo
        }),
        "loyalty" | "avgloyalty" => loyalty(t),
        "pef" => producer_fairness(t),
        "sbs" => behavior_share(t),
        "intp" => interpretability(t),
        "labelcoverage" => {
            if t.catalog.is_empty() {
                None
            } else {
                let known = t.catalog.iter().filter(|i| i.sustainability_label.is_some()).count();
                Some(known as f64 / t.catalog.len() as f64)
            }
        }
        other => return Err(OracleError::UnknownMetric(other.to_owned())),
    };
    Ok(v)
}

/// How the per-item sustainability score is derived in a frontier check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierAttribute {
    /// `Some(true)` scores 1, anything else 0.
    Green,
    /// Scores `1 - v / max` over the pool; unknown values score as the
    /// maximum and a zero maximum scores everything 1.
    LowerIsBetter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierInstance {
    pub relevance: Vec<f64>,
    /// Green flags as 1.0 / 0.0, or raw lower-is-better values.
    pub attribute: Vec<Option<f64>>,
    pub kind: FrontierAttribute,
    pub k: usize,
}

pub const MAX_ORACLE_POOL: usize = 12;
pub const MAX_ORACLE_K: usize = 4;

fn log2_discount(pos: usize) -> f64 {
    1.0 / ((pos + 2) as f64).log2()
}

/// Objective vectors `(accuracy, sustainability)` of every selection of `k`
/// items ordered by descending relevance, with dominated vectors removed.
pub fn oracle_frontier(inst: &FrontierInstance) -> Result<Vec<(f64, f64)>, OracleError> {
    let n = inst.relevance.len();
    if n > MAX_ORACLE_POOL || inst.k > MAX_ORACLE_K || inst.k == 0 || inst.k > n {
        return Err(OracleError::InstanceTooLarge { pool: n, k: inst.k });
    }
    let scores: Vec<f64> = match inst.kind {
        FrontierAttribute::Green => inst
            .attribute
            .iter()
            .map(|a| if *a == Some(1.0) { 1.0 } else { 0.0 })
            .collect(),
        FrontierAttribute::LowerIsBetter => {
            let mut max: f64 = 0.0;
            for v in inst.attribute.iter().flatten() {
                max = max.max(*v);
            }
            inst.attribute
                .iter()
                .map(|a| if max == 0.0 { 1.0 } else { 1.0 - a.unwrap_or(max) / max })
                .collect()
        }
    };
    let mut all = inst.relevance.clone();
    all.sort_by(|a, b| b.total_cmp(a));
    let mut ideal = 0.0;
    for p in 0..inst.k {
        ideal += all[p] * log2_discount(p);
    }

    let mut vectors = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != inst.k {
            continue;
        }
        let mut chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        chosen.sort_by(|a, b| inst.relevance[*b].total_cmp(&inst.relevance[*a]));
        let mut dcg = 0.0;
        let mut sus = 0.0;
        for (p, i) in chosen.iter().enumerate() {
            dcg += inst.relevance[*i] * log2_discount(p);
            sus += scores[*i];
        }
        let acc = if ideal == 0.0 { 0.0 } else { dcg / ideal };
        vectors.push((acc, sus / inst.k as f64));
    }

    let mut front: Vec<(f64, f64)> = Vec::new();
    for v in &vectors {
        let beaten = vectors
            .iter()
            .any(|w| w.0 >= v.0 && w.1 >= v.1 && (w.0 > v.0 || w.1 > v.1));
        if !beaten && !front.contains(v) {
            front.push(*v);
        }
    }
    front.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(front)
}
