//! Metric selection, batch evaluation and report rendering.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::ingest::{label_coverage, CatalogField};
use crate::metrics::{crosscut, economic, environmental, social};
use crate::model::{Dataset, EnergyLedger, ItemRecord, PairedKind, PairedObservation};
use crate::report::{round_sig12, MetricError, MetricReport};

macro_rules! metric_names {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// Stable lowercase metric identifiers.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum MetricName {
            $($variant),+
        }

        impl MetricName {
            pub const ALL: &'static [MetricName] = &[$(MetricName::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(MetricName::$variant => $name),+
                }
            }
        }
    };
}

metric_names! {
    AvgCarFI => "avgcarfi",
    GIRec => "girec",
    ECRec => "ecrec",
    ECTrain => "ectrain",
    ECPDat => "ecpdat",
    ESTRec => "estrec",
    RTR => "rtr",
    Parity => "parity",
    ListD => "listd",
    Ser => "ser",
    Acc => "acc",
    Inclusivity => "inclusivity",
    HIER => "hier",
    HIRec => "hirec",
    LBPR => "lbpr",
    Loyalty => "loyalty",
    AvgLoyalty => "avgloyalty",
    PEF => "pef",
    SBS => "sbs",
    IntP => "intp",
    AvgLCI => "avglci",
    LabelCoverage => "labelcoverage",
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        MetricName::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

/// Parses a comma-separated metric list, keeping the given order and
/// dropping repeats.
pub fn parse_metric_list(list: &str) -> Result<Vec<MetricName>, String> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let m: MetricName = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err("empty metric list".to_owned());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalOptions {
    /// Metrics to compute; empty means all of them.
    pub metrics: Vec<MetricName>,
    /// Overrides the dataset's parity and inclusivity tolerance.
    pub epsilon: Option<f64>,
    /// Overrides the dataset's loyalty recency decay.
    pub decay: Option<f64>,
    /// Restricts producer exposure fairness to one item category.
    pub category: Option<String>,
}

fn ledger_metric(
    ds: &Dataset,
    name: &str,
    f: fn(&EnergyLedger) -> Result<f64, MetricError>,
    unit: String,
) -> MetricReport {
    match &ds.tables().energy {
        None => MetricReport::undefined(name, &MetricError::MissingTable("energy")),
        Some(ledger) => MetricReport::from_result(name, f(ledger)).note(format!("unit: {unit}")),
    }
}

fn paired_metric(
    ds: &Dataset,
    name: &str,
    kind: PairedKind,
    f: fn(&PairedObservation) -> Result<f64, MetricError>,
) -> MetricReport {
    match ds.tables().paired.iter().find(|o| o.kind == kind) {
        None => MetricReport::undefined(name, &MetricError::MissingTable("paired")),
        Some(obs) => {
            let report = MetricReport::from_result(name, f(obs));
            if obs.unit.is_empty() {
                report
            } else {
                report.note(format!("unit: {}", obs.unit))
            }
        }
    }
}

fn label_coverage_report(catalog: &[ItemRecord]) -> MetricReport {
    match label_coverage(catalog, CatalogField::SustainabilityLabel) {
        Err(e) => MetricReport::undefined("labelcoverage", &e),
        Ok(v) => {
            let table = CatalogField::ALL
                .iter()
                .map(|f| (f.as_str().to_owned(), label_coverage(catalog, *f).unwrap_or(0.0)))
                .collect();
            MetricReport::defined("labelcoverage", v, 1.0)
                .with_breakdown("field_coverage", table)
                .note("value is the sustainability_label field; all fields in field_coverage")
        }
    }
}

/// Computes one metric with the given options.
pub fn compute_metric(ds: &Dataset, metric: MetricName, opts: &EvalOptions) -> MetricReport {
    let cfg = ds.config();
    let epsilon = opts.epsilon.unwrap_or(cfg.epsilon);
    let decay = opts.decay.or(cfg.decay);
    let units = &cfg.units;
    let name = metric.as_str();
    match metric {
        MetricName::AvgCarFI => environmental::avg_carbon_footprint(ds).note(format!("unit: {}", units.carbon)),
        MetricName::GIRec => environmental::green_item_rate(ds),
        MetricName::ECRec => ledger_metric(
            ds,
            name,
            environmental::energy_per_recommendation,
            format!("{} per recommendation", units.energy),
        ),
        MetricName::ECTrain => ledger_metric(
            ds,
            name,
            environmental::energy_per_epoch,
            format!("{} per epoch", units.energy),
        ),
        MetricName::ECPDat => ledger_metric(
            ds,
            name,
            environmental::energy_per_data_unit,
            format!("{} per {}", units.energy, units.data_unit),
        ),
        MetricName::ESTRec => paired_metric(ds, name, PairedKind::Energy, environmental::energy_savings),
        MetricName::RTR => paired_metric(ds, name, PairedKind::ReuseRate, environmental::reuse_gain),
        MetricName::Parity => social::parity_report(ds, epsilon),
        MetricName::ListD => social::avg_intra_list_diversity(ds),
        MetricName::Ser => social::avg_serendipity(ds),
        MetricName::Acc => social::accessibility_report(ds),
        MetricName::Inclusivity => social::inclusivity_report(ds, epsilon),
        MetricName::HIER => social::harmful_exposure_rate(ds),
        MetricName::HIRec => paired_metric(ds, name, PairedKind::Health, social::health_improvement),
        MetricName::LBPR => economic::local_business_rate(ds),
        MetricName::Loyalty => economic::loyalty(ds, decay),
        MetricName::AvgLoyalty => economic::avg_loyalty(ds, decay),
        MetricName::PEF => economic::producer_exposure_fairness(ds, opts.category.as_deref()),
        MetricName::SBS => crosscut::sustainable_behavior_score(ds),
        MetricName::IntP => crosscut::avg_interpretability(ds),
        MetricName::AvgLCI => crosscut::avg_life_cycle_impact(ds),
        MetricName::LabelCoverage => label_coverage_report(ds.catalog()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub epsilon: f64,
    pub decay: Option<f64>,
    pub category: Option<String>,
    pub metrics: Vec<MetricReport>,
}

impl EvaluationReport {
    pub fn get(&self, metric: MetricName) -> Option<&MetricReport> {
        self.metrics.iter().find(|r| r.metric == metric.as_str())
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            engine: &'static str,
            engine_version: &'static str,
            epsilon: f64,
            decay: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            category: Option<&'a str>,
            metrics: &'a [MetricReport],
        }
        let doc = Doc {
            schema_version: crate::REPORT_SCHEMA_VERSION,
            engine: crate::ENGINE_NAME,
            engine_version: crate::ENGINE_VERSION,
            epsilon: round_sig12(self.epsilon),
            decay: self.decay.map(round_sig12),
            category: self.category.as_deref(),
            metrics: &self.metrics,
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("evaluation report serializes");
        out.push('\n');
        out
    }

    /// Flat `metric,status,scope,key,value,coverage` table. The headline
    /// value has scope `all`; breakdown rows carry the breakdown name.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "status", "scope", "key", "value", "coverage"])
            .expect("in-memory csv write");
        for r in &self.metrics {
            let status = r.value.status();
            let coverage = round_sig12(r.coverage).to_string();
            let mut row = |scope: &str, key: &str, value: Option<f64>| {
                let value = value.map(|v| round_sig12(v).to_string()).unwrap_or_default();
                w.write_record([r.metric.as_str(), &status, scope, key, &value, &coverage])
                    .expect("in-memory csv write");
            };
            row("all", "", r.value());
            for (scope, table) in [("user", &r.per_user), ("group", &r.per_group)] {
                for (k, v) in table.iter().flatten() {
                    row(scope, k, Some(*v));
                }
            }
            for (name, table) in &r.breakdowns {
                for (k, v) in table {
                    row(name, k, Some(*v));
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

/// Evaluates the selected metrics. Metrics run in parallel on the current
/// rayon pool; the report keeps the selection order.
pub fn evaluate(ds: &Dataset, opts: &EvalOptions) -> EvaluationReport {
    let selected: Vec<MetricName> = if opts.metrics.is_empty() {
        MetricName::ALL.to_vec()
    } else {
        opts.metrics.clone()
    };
    let metrics = selected
        .par_iter()
        .map(|m| compute_metric(ds, *m, opts))
        .collect();
    EvaluationReport {
        epsilon: opts.epsilon.unwrap_or(ds.config().epsilon),
        decay: opts.decay.or(ds.config().decay),
        category: opts.category.clone(),
        metrics,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub field: &'static str,
    pub metric: &'static str,
    pub coverage: f64,
}

/// One row per audited catalog field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageTable {
    pub items: usize,
    pub rows: Vec<CoverageRow>,
}

pub fn coverage_table(catalog: &[ItemRecord]) -> Result<CoverageTable, MetricError> {
    let rows = CatalogField::ALL
        .iter()
        .map(|f| {
            Ok(CoverageRow {
                field: f.as_str(),
                metric: f.metric(),
                coverage: label_coverage(catalog, *f)?,
            })
        })
        .collect::<Result<_, MetricError>>()?;
    Ok(CoverageTable {
        items: catalog.len(),
        rows,
    })
}

impl CoverageTable {
    pub fn row(&self, field: CatalogField) -> f64 {
        self.rows
            .iter()
            .find(|r| r.field == field.as_str())
            .map(|r| r.coverage)
            .unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc {
            schema_version: u32,
            engine: &'static str,
            engine_version: &'static str,
            items: usize,
            fields: Vec<CoverageRow>,
        }
        let doc = Doc {
            schema_version: crate::REPORT_SCHEMA_VERSION,
            engine: crate::ENGINE_NAME,
            engine_version: crate::ENGINE_VERSION,
            items: self.items,
            fields: self
                .rows
                .iter()
                .map(|r| CoverageRow {
                    coverage: round_sig12(r.coverage),
                    ..r.clone()
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("coverage table serializes");
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("field,metric,coverage\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.field, r.metric, round_sig12(r.coverage)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn tiny() -> Dataset {
        Dataset::new(DatasetTables {
            catalog: vec![ItemRecord::new("a").with_green(true), ItemRecord::new("b").with_harmful(true)],
            users: vec![UserRecord::new("u1")],
            recommendations: vec![RecommendationSet::new("u1", ["a", "b"])],
            ..DatasetTables::default()
        })
        .unwrap()
    }

    #[test]
    fn names_round_trip() {
        assert_eq!(MetricName::ALL.len(), 22);
        for m in MetricName::ALL {
            assert_eq!(m.as_str().parse::<MetricName>(), Ok(*m));
        }
        assert!("nope".parse::<MetricName>().is_err());
        assert_eq!(
            parse_metric_list("girec, hier,girec").unwrap(),
            vec![MetricName::GIRec, MetricName::HIER]
        );
    }

    #[test]
    fn selection_is_respected() {
        let opts = EvalOptions {
            metrics: vec![MetricName::GIRec, MetricName::HIER],
            ..EvalOptions::default()
        };
        let r = evaluate(&tiny(), &opts);
        assert_eq!(r.metrics.len(), 2);
        assert_eq!(r.metrics[0].metric, "girec");
    }

    #[test]
    fn missing_tables_are_reported() {
        let r = evaluate(&tiny(), &EvalOptions::default());
        assert_eq!(r.metrics.len(), 22);
        for m in ["ecrec", "ectrain", "ecpdat", "estrec", "rtr", "hirec"] {
            let rep = r.metrics.iter().find(|x| x.metric == m).unwrap();
            assert_eq!(rep.value.status(), "undefined: missing table", "{m}");
        }
    }

    #[test]
    fn csv_has_headline_rows() {
        let r = evaluate(&tiny(), &EvalOptions::default());
        let csv = r.to_csv();
        assert!(csv.starts_with("metric,status,scope,key,value,coverage\n"));
        assert!(csv.contains("girec,ok,all,,1,"));
    }

    #[test]
    fn coverage_rows() {
        let t = coverage_table(tiny().catalog()).unwrap();
        assert_eq!(t.rows.len(), 7);
        assert_eq!(t.row(CatalogField::IsGreen), 0.5);
        assert_eq!(coverage_table(&[]), Err(MetricError::EmptyCatalog));
    }
}
