//! The experiment suite: naive baselines, the three nested models per
//! sample family, and the early/late period split.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{
    build_group_match_sample, build_group_ranking_sample, build_knockout_sample,
    build_trinomial_sample, split_periods, DataError, GroupStanding, MatchRecord, Observation,
    Periods, RankingConvention, RatingKind, RatingTable, SampleFamily,
};
use crate::glm::{fit_logistic, fit_multinomial, DesignMatrix, FitError, ModelReport, INTERCEPT};

pub const UEFA_COLUMN: &str = "UEFA";
pub const ELO_COLUMN: &str = "Elo";
pub const MODEL_IDS: [&str; 3] = ["(1)", "(2)", "(3)"];
pub const TRINOMIAL_CATEGORIES: [&str; 3] = ["away win", "draw", "home win"];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("model {model}: {source}")]
    Fit {
        model: String,
        #[source]
        source: FitError,
    },
    #[error("unknown model id `{0}`, expected (1), (2) or (3)")]
    UnknownModel(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Share (in percent) of observations where "the first club's rating is
/// higher or equal" agrees with `y = 1`. Empty samples score 0.
pub fn naive_accuracy(sample: &[Observation], kind: RatingKind) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let hits = sample.iter().filter(|o| (o.delta(kind) >= 0.0) == (o.y == 1)).count();
    100.0 * hits as f64 / sample.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Period {
    All,
    Early,
    Late,
}

impl std::str::FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Period::All),
            "early" => Ok(Period::Early),
            "late" => Ok(Period::Late),
            other => Err(format!("unknown period `{other}` (all, early, late)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub family: SampleFamily,
    pub period: Period,
}

/// Row count plus SHA-256 of the observations in a canonical text form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub rows: usize,
    pub sha256: String,
}

pub fn fingerprint(sample: &[Observation]) -> Fingerprint {
    let mut h = Sha256::new();
    for o in sample {
        // `{:?}` prints the shortest string that round-trips the f64
        h.update(format!(
            "{},{:?},{:?},{},{},{}\n",
            o.y, o.delta_uefa, o.delta_elo, o.season, o.first, o.second
        ));
    }
    Fingerprint {
        rows: sample.len(),
        sha256: format!("{:x}", h.finalize()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBaseline {
    pub rating: RatingKind,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    /// "(1)" UEFA only, "(2)" Elo only, "(3)" both.
    pub id: String,
    pub features: Vec<String>,
    pub report: ModelReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub family: SampleFamily,
    pub period: Period,
    pub fingerprint: Fingerprint,
    /// Observations per response value, keyed by label.
    pub outcomes: BTreeMap<String, usize>,
    pub naive: Vec<NaiveBaseline>,
    pub models: Vec<ModelEntry>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn model(&self, id: &str) -> Option<&ModelEntry> {
        self.models.iter().find(|m| m.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const MODELS: [(&str, &[&str]); 3] = [
    ("(1)", &[UEFA_COLUMN]),
    ("(2)", &[ELO_COLUMN]),
    ("(3)", &[UEFA_COLUMN, ELO_COLUMN]),
];

fn restrict(sample: &[Observation], period: Period) -> Vec<Observation> {
    match period {
        Period::All => sample.to_vec(),
        Period::Early => split_periods(sample).early,
        Period::Late => split_periods(sample).late,
    }
}

/// Fits one of the models "(1)", "(2)" or "(3)" on `sample` after the period filter.
pub fn fit_model(sample: &[Observation], spec: SuiteSpec, id: &str) -> Result<ModelEntry, EvalError> {
    fit_rows(&restrict(sample, spec.period), spec.family, id)
}

fn fit_rows(rows: &[Observation], family: SampleFamily, id: &str) -> Result<ModelEntry, EvalError> {
    let annotate = |source: FitError| EvalError::Fit {
        model: id.to_owned(),
        source,
    };
    let features = MODELS
        .iter()
        .find(|(m, _)| *m == id)
        .map(|(_, f)| *f)
        .ok_or_else(|| EvalError::UnknownModel(id.to_owned()))?;
    let uefa: Vec<f64> = rows.iter().map(|o| o.delta_uefa).collect();
    let elo: Vec<f64> = rows.iter().map(|o| o.delta_elo).collect();
    let y: Vec<u8> = rows.iter().map(|o| o.y).collect();
    let cols: Vec<(&str, &[f64])> = features
        .iter()
        .map(|&f| (f, if f == UEFA_COLUMN { &uefa[..] } else { &elo[..] }))
        .collect();
    let (design, model) = if family.is_multinomial() {
        let d = DesignMatrix::categorical(&cols, &y, &TRINOMIAL_CATEGORIES).map_err(annotate)?;
        let m = fit_multinomial(&d, 0).map_err(annotate)?;
        (d, m)
    } else {
        let d = DesignMatrix::binary(&cols, &y).map_err(annotate)?;
        let m = fit_logistic(&d).map_err(annotate)?;
        (d, m)
    };
    Ok(ModelEntry {
        id: id.to_owned(),
        features: features.iter().map(|f| f.to_string()).collect(),
        report: ModelReport::new(&model, &design).map_err(annotate)?,
    })
}

/// Fits models (1), (2) and (3) on `sample` (after the period filter) and
/// computes the naive baselines.
pub fn run_suite(sample: &[Observation], spec: SuiteSpec) -> Result<SuiteReport, EvalError> {
    let rows = restrict(sample, spec.period);
    let y: Vec<u8> = rows.iter().map(|o| o.y).collect();
    let multinomial = spec.family.is_multinomial();

    let mut outcomes = BTreeMap::new();
    for &v in &y {
        let label = if multinomial {
            TRINOMIAL_CATEGORIES.get(v as usize).copied().unwrap_or("?").to_owned()
        } else {
            v.to_string()
        };
        *outcomes.entry(label).or_insert(0) += 1;
    }

    let mut notes = Vec::new();
    let naive = if multinomial {
        notes.push("naive baseline not defined for a three-way response".to_owned());
        Vec::new()
    } else {
        [RatingKind::Uefa, RatingKind::Elo]
            .into_iter()
            .map(|rating| NaiveBaseline {
                rating,
                accuracy: naive_accuracy(&rows, rating),
            })
            .collect()
    };
    if spec.period == Period::Late {
        notes.push(format!("season {} left out of the late period", Periods::EXCLUDED));
    }

    let models = MODELS
        .iter()
        .map(|(id, _)| fit_rows(&rows, spec.family, id))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(SuiteReport {
        family: spec.family,
        period: spec.period,
        fingerprint: fingerprint(&rows),
        outcomes,
        naive,
        models,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum HalfReport {
    Ran(SuiteReport),
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub family: SampleFamily,
    pub excluded_season: String,
    pub early: HalfReport,
    pub late: HalfReport,
}

/// Runs the suite separately on the early and late periods. An empty half
/// is reported as skipped rather than failing the whole report.
pub fn period_report(sample: &[Observation], family: SampleFamily) -> Result<PeriodReport, EvalError> {
    let half = |period: Period| -> Result<HalfReport, EvalError> {
        if restrict(sample, period).is_empty() {
            return Ok(HalfReport::Skipped {
                reason: "no observations in this period".to_owned(),
            });
        }
        run_suite(sample, SuiteSpec { family, period }).map(HalfReport::Ran)
    };
    Ok(PeriodReport {
        family,
        excluded_season: Periods::EXCLUDED.to_string(),
        early: half(Period::Early)?,
        late: half(Period::Late)?,
    })
}

/// Every sample family built from one dataset.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub group_match: Vec<Observation>,
    pub knockout: Vec<Observation>,
    pub group_ranking: Vec<Observation>,
    pub group_ranking_elo: Vec<Observation>,
    pub trinomial: Vec<Observation>,
}

impl SampleSet {
    pub fn build(
        matches: &[MatchRecord],
        standings: &[GroupStanding],
        uefa: &RatingTable,
        elo: &RatingTable,
    ) -> Result<Self, DataError> {
        Ok(SampleSet {
            group_match: build_group_match_sample(matches, uefa, elo)?,
            knockout: build_knockout_sample(matches, uefa, elo)?.observations,
            group_ranking: build_group_ranking_sample(standings, uefa, elo, RankingConvention::ByUefa)?
                .observations,
            group_ranking_elo: build_group_ranking_sample(standings, uefa, elo, RankingConvention::ByElo)?
                .observations,
            trinomial: build_trinomial_sample(matches, uefa, elo)?,
        })
    }

    pub fn get(&self, family: SampleFamily) -> &[Observation] {
        match family {
            SampleFamily::GroupMatch => &self.group_match,
            SampleFamily::Knockout => &self.knockout,
            SampleFamily::GroupRanking => &self.group_ranking,
            SampleFamily::GroupRankingElo => &self.group_ranking_elo,
            SampleFamily::GroupMatchTrinomial => &self.trinomial,
        }
    }
}

/// Naive accuracies in the layout of the baseline table: the UEFA column
/// uses the UEFA-oriented ranking pairs, the Elo column the Elo-oriented ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveTable {
    pub rows: Vec<NaiveRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveRow {
    pub sample: String,
    pub n: usize,
    pub uefa: f64,
    pub elo: f64,
}

pub fn naive_table(samples: &SampleSet) -> NaiveTable {
    let row = |name: &str, u: &[Observation], e: &[Observation]| NaiveRow {
        sample: name.to_owned(),
        n: u.len(),
        uefa: naive_accuracy(u, RatingKind::Uefa),
        elo: naive_accuracy(e, RatingKind::Elo),
    };
    NaiveTable {
        rows: vec![
            row("group matches", &samples.group_match, &samples.group_match),
            row("knockout qualification", &samples.knockout, &samples.knockout),
            row("group ranking", &samples.group_ranking, &samples.group_ranking_elo),
        ],
    }
}

/// Everything the `suite` command produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub naive: NaiveTable,
    pub suites: Vec<SuiteReport>,
    pub periods: Vec<PeriodReport>,
}

impl FullReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const SUITE_FAMILIES: [SampleFamily; 4] = [
    SampleFamily::GroupMatch,
    SampleFamily::Knockout,
    SampleFamily::GroupRanking,
    SampleFamily::GroupMatchTrinomial,
];

pub const PERIOD_FAMILIES: [SampleFamily; 3] =
    [SampleFamily::GroupMatch, SampleFamily::Knockout, SampleFamily::GroupRanking];

pub fn run_all(samples: &SampleSet) -> Result<FullReport, EvalError> {
    let suites = SUITE_FAMILIES
        .iter()
        .map(|&family| {
            run_suite(
                samples.get(family),
                SuiteSpec {
                    family,
                    period: Period::All,
                },
            )
        })
        .collect::<Result<_, _>>()?;
    let periods = PERIOD_FAMILIES
        .iter()
        .map(|&family| period_report(samples.get(family), family))
        .collect::<Result<_, _>>()?;
    Ok(FullReport {
        naive: naive_table(samples),
        suites,
        periods,
    })
}

// ---- plain-text rendering ----

fn cell_estimate(report: &ModelReport, category: Option<&str>, name: &str) -> (String, String) {
    match report.coefficient(category, name) {
        Some(c) => (format!("{:.3}{}", c.estimate, c.stars), format!("({:.3})", c.std_error)),
        None => (String::new(), String::new()),
    }
}

fn push_row(out: &mut String, label: &str, cells: &[String]) {
    let _ = write!(out, "{label:<28}");
    for c in cells {
        let _ = write!(out, "{c:>14}");
    }
    out.push('\n');
}

/// Coefficient table with rows in the order: constant, UEFA, Elo, then
/// fit statistics, and one column per model.
pub fn render_suite(report: &SuiteReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} ({:?} period), n = {}",
        report.family.label(),
        report.period,
        report.fingerprint.rows
    );
    let ids: Vec<String> = report.models.iter().map(|m| m.id.clone()).collect();
    push_row(&mut out, "", &ids);
    let categories: Vec<Option<String>> = report
        .models
        .first()
        .map(|m| m.report.equations.iter().map(|e| e.category.clone()).rev().collect())
        .unwrap_or_default();
    for category in &categories {
        if let Some(c) = category {
            let _ = writeln!(out, "{c}");
        }
        for name in [INTERCEPT, UEFA_COLUMN, ELO_COLUMN] {
            let (est, se): (Vec<String>, Vec<String>) = report
                .models
                .iter()
                .map(|m| cell_estimate(&m.report, category.as_deref(), name))
                .unzip();
            if est.iter().all(String::is_empty) {
                continue;
            }
            push_row(&mut out, name, &est);
            push_row(&mut out, "", &se);
        }
    }
    let stat = |f: &dyn Fn(&ModelReport) -> String| -> Vec<String> {
        report.models.iter().map(|m| f(&m.report)).collect()
    };
    let multinomial = report.family.is_multinomial();
    if multinomial {
        push_row(
            &mut out,
            "McFadden R2",
            &stat(&|r| r.mcfadden_r2.map(|v| format!("{v:.3}")).unwrap_or_default()),
        );
    } else {
        push_row(&mut out, "Cox & Snell R2", &stat(&|r| format!("{:.3}", r.cox_snell_r2)));
        push_row(&mut out, "Nagelkerke R2", &stat(&|r| format!("{:.3}", r.nagelkerke_r2)));
    }
    push_row(&mut out, "Classification (%)", &stat(&|r| format!("{:.1}", r.classification_rate)));
    let auc_labels: Vec<String> = report
        .models
        .first()
        .map(|m| m.report.auc.iter().map(|(l, _)| l.clone()).collect())
        .unwrap_or_default();
    for (i, label) in auc_labels.iter().enumerate() {
        let name = if multinomial { format!("AUC ({label})") } else { "AUC".to_owned() };
        push_row(&mut out, &name, &stat(&|r| format!("{:.3}", r.auc[i].1)));
    }
    push_row(&mut out, "Observations", &stat(&|r| r.n.to_string()));
    for b in &report.naive {
        let _ = writeln!(out, "naive accuracy ({}): {:.2}%", b.rating, b.accuracy);
    }
    for n in &report.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn render_naive(table: &NaiveTable) -> String {
    let mut out = String::new();
    push_row(&mut out, "naive accuracy (%)", &["n".into(), "UEFA".into(), "Elo".into()]);
    for r in &table.rows {
        push_row(
            &mut out,
            &r.sample,
            &[r.n.to_string(), format!("{:.2}", r.uefa), format!("{:.2}", r.elo)],
        );
    }
    out
}

pub fn render_period(report: &PeriodReport) -> String {
    let mut out = String::new();
    for (name, half) in [("early", &report.early), ("late", &report.late)] {
        match half {
            HalfReport::Ran(r) => out.push_str(&render_suite(r)),
            HalfReport::Skipped { reason } => {
                let _ = writeln!(out, "{} ({name} period): skipped, {reason}", report.family.label());
            }
        }
        out.push('\n');
    }
    out
}

pub fn render_full(report: &FullReport) -> String {
    let mut out = render_naive(&report.naive);
    out.push('\n');
    for s in &report.suites {
        out.push_str(&render_suite(s));
        out.push('\n');
    }
    for p in &report.periods {
        out.push_str(&render_period(p));
    }
    out
}
