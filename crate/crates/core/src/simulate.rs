//! Monte Carlo simulation of a league phase and a comparison of seeding
//! policies.
//!
//! Fixture outcomes come either from a fitted three-way model (away win as
//! the reference category, Elo difference as the only regressor) or from the
//! Elo win expectancy with a draw share of `d·4·W·(1−W)`. Points are 3/1/0.
//! Goals are not simulated, so clubs level on points are separated by the
//! points they took from each other, then by a seeded random draw.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TeamId;
use crate::draw::{balance_metrics, draw, DrawError, DrawInput, Schedule};
use crate::elo::{win_expectancy, EloParams};
use crate::evaluation::{ELO_COLUMN, TRINOMIAL_CATEGORIES};
use crate::glm::{ModelReport, RegressionModel, INTERCEPT};
use crate::seed::SeedTree;

pub const DEFAULT_DRAW_FACTOR: f64 = 0.30;
pub const TOP_BAND: usize = 8;
pub const PLAYOFF_BAND: usize = 24;
pub const TIE_BREAK_RULE: &str = "points, then points in matches among the tied clubs, then a seeded random order";
const RUNS_PER_CHUNK: u64 = 4096;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation parameter: {0}")]
    Parameter(String),
    #[error("no strength for `{0}`")]
    MissingStrength(TeamId),
    #[error("outcome model: {0}")]
    Model(String),
    #[error(transparent)]
    Draw(#[from] DrawError),
}

/// Probabilities of one fixture from one club's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probabilities {
    pub win: f64,
    pub draw: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OutcomeModel {
    /// Linear predictors `intercept + slope·ΔElo` for the home-win and draw
    /// categories against the away-win reference.
    Trinomial { home: (f64, f64), draw: (f64, f64) },
    EloImplied { params: EloParams, draw_factor: f64 },
}

impl OutcomeModel {
    pub fn elo_implied(params: EloParams) -> Self {
        OutcomeModel::EloImplied {
            params,
            draw_factor: DEFAULT_DRAW_FACTOR,
        }
    }

    /// Reads the coefficients of a fitted three-way model whose only
    /// regressor is the Elo difference.
    pub fn from_regression(model: &RegressionModel) -> Result<Self, SimError> {
        let cats = model
            .categories
            .as_ref()
            .ok_or_else(|| SimError::Model("model is binary, a three-way model is needed".into()))?;
        if cats.names != TRINOMIAL_CATEGORIES || cats.reference != 0 {
            return Err(SimError::Model(format!(
                "categories must be {TRINOMIAL_CATEGORIES:?} with `away win` as reference"
            )));
        }
        if model.columns != [INTERCEPT, ELO_COLUMN] {
            return Err(SimError::Model(format!(
                "regressors must be [{INTERCEPT}, {ELO_COLUMN}], found {:?}",
                model.columns
            )));
        }
        let pair = |cat: &str| -> Result<(f64, f64), SimError> {
            let get = |name| {
                model
                    .coefficient_in(cat, name)
                    .map(|c| c.estimate)
                    .ok_or_else(|| SimError::Model(format!("missing {name} for {cat}")))
            };
            Ok((get(INTERCEPT)?, get(ELO_COLUMN)?))
        };
        Ok(OutcomeModel::Trinomial {
            home: pair("home win")?,
            draw: pair("draw")?,
        })
    }

    /// Same as [`OutcomeModel::from_regression`], from a serialized model report.
    pub fn from_report(report: &ModelReport) -> Result<Self, SimError> {
        let pair = |cat: &str| -> Result<(f64, f64), SimError> {
            let eq = report
                .equations
                .iter()
                .find(|e| e.category.as_deref() == Some(cat))
                .ok_or_else(|| SimError::Model(format!("no `{cat}` equation; a three-way model is needed")))?;
            let names: Vec<&str> = eq.coefficients.iter().map(|c| c.name.as_str()).collect();
            if names != [INTERCEPT, ELO_COLUMN] {
                return Err(SimError::Model(format!(
                    "regressors must be [{INTERCEPT}, {ELO_COLUMN}], found {names:?}"
                )));
            }
            Ok((eq.coefficients[0].estimate, eq.coefficients[1].estimate))
        };
        Ok(OutcomeModel::Trinomial {
            home: pair("home win")?,
            draw: pair("draw")?,
        })
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let ok = match self {
            OutcomeModel::Trinomial { home, draw } => [home.0, home.1, draw.0, draw.1].iter().all(|v| v.is_finite()),
            OutcomeModel::EloImplied { params, draw_factor } => {
                params.validate().is_ok() && (0.0..1.0).contains(draw_factor)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::Model("non-finite coefficient or draw factor outside [0, 1)".into()))
        }
    }
}

/// Outcome probabilities for a club whose Elo rating exceeds its opponent's
/// by `delta_elo`, playing at home (`home = true`) or away. With
/// `home = true` the triple is (home win, draw, away win).
pub fn outcome_probs(model: &OutcomeModel, delta_elo: f64, home: bool) -> Probabilities {
    let home_view = if home { delta_elo } else { -delta_elo };
    let (h, d, a) = match model {
        OutcomeModel::Trinomial { home: hc, draw: dc } => {
            let eta = [0.0, dc.0 + dc.1 * home_view, hc.0 + hc.1 * home_view];
            let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = eta.iter().map(|v| (v - m).exp()).collect();
            let z: f64 = e.iter().sum();
            (e[2] / z, e[1] / z, e[0] / z)
        }
        OutcomeModel::EloImplied { params, draw_factor } => {
            let w = win_expectancy(home_view + params.home_advantage, params.scale);
            let draw = draw_factor * 4.0 * w * (1.0 - w);
            ((1.0 - draw) * w, draw, (1.0 - draw) * (1.0 - w))
        }
    };
    if home {
        Probabilities { win: h, draw: d, loss: a }
    } else {
        Probabilities { win: a, draw: d, loss: h }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClubStanding {
    pub club: TeamId,
    /// `rank_probabilities[r]` is the chance of finishing in place `r + 1`.
    pub rank_probabilities: Vec<f64>,
    pub expected_rank: f64,
    pub top_band: f64,
    pub playoff_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandingsDistribution {
    pub runs: u64,
    pub seed: u64,
    pub tie_break: String,
    /// Places counted in the two bands, e.g. (8, 24).
    pub bands: (usize, usize),
    pub clubs: Vec<ClubStanding>,
}

impl StandingsDistribution {
    pub fn club(&self, club: &TeamId) -> Option<&ClubStanding> {
        self.clubs.iter().find(|c| &c.club == club)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }

    /// `club,rank,probability` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["club", "rank", "probability"])?;
        for c in &self.clubs {
            for (r, p) in c.rank_probabilities.iter().enumerate() {
                wtr.write_record([c.club.as_str(), &(r + 1).to_string(), &format!("{p:.6}")])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

struct League {
    clubs: Vec<TeamId>,
    /// (home index, away index, cumulative P(home win), cumulative P(home win or draw)).
    fixtures: Vec<(usize, usize, f64, f64)>,
}

impl League {
    fn new(schedule: &Schedule, strengths: &BTreeMap<TeamId, f64>, model: &OutcomeModel) -> Result<Self, SimError> {
        let clubs: Vec<TeamId> = schedule
            .fixtures
            .iter()
            .flat_map(|f| [f.home.clone(), f.away.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&TeamId, usize> = clubs.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let strength = |c: &TeamId| strengths.get(c).copied().ok_or_else(|| SimError::MissingStrength(c.clone()));
        let fixtures = schedule
            .fixtures
            .iter()
            .map(|f| {
                let p = outcome_probs(model, strength(&f.home)? - strength(&f.away)?, true);
                Ok((index[&f.home], index[&f.away], p.win, p.win + p.draw))
            })
            .collect::<Result<_, SimError>>()?;
        Ok(League { clubs, fixtures })
    }

    /// Plays every fixture once and returns club indices in finishing order.
    fn play(&self, rng: &mut ChaCha8Rng, points: &mut [u32], results: &mut Vec<(usize, usize, u8)>) -> Vec<usize> {
        points.iter_mut().for_each(|p| *p = 0);
        results.clear();
        for &(h, a, win, win_or_draw) in &self.fixtures {
            let u: f64 = rng.gen();
            let (ph, pa) = if u < win {
                (3, 0)
            } else if u < win_or_draw {
                (1, 1)
            } else {
                (0, 3)
            };
            points[h] += ph;
            points[a] += pa;
            results.push((h, a, ph as u8));
        }
        let lottery: Vec<u64> = (0..self.clubs.len()).map(|_| rng.gen()).collect();
        let mut order: Vec<usize> = (0..self.clubs.len()).collect();
        order.sort_by(|&x, &y| points[y].cmp(&points[x]).then(x.cmp(&y)));
        let mut i = 0;
        while i < order.len() {
            let mut j = i + 1;
            while j < order.len() && points[order[j]] == points[order[i]] {
                j += 1;
            }
            if j - i > 1 {
                let tied: BTreeSet<usize> = order[i..j].iter().copied().collect();
                let mut h2h: BTreeMap<usize, u32> = tied.iter().map(|&c| (c, 0)).collect();
                for &(h, a, ph) in results.iter() {
                    if tied.contains(&h) && tied.contains(&a) {
                        let pa = match ph {
                            3 => 0,
                            1 => 1,
                            _ => 3,
                        };
                        *h2h.get_mut(&h).unwrap() += ph as u32;
                        *h2h.get_mut(&a).unwrap() += pa;
                    }
                }
                order[i..j].sort_by(|&x, &y| h2h[&y].cmp(&h2h[&x]).then(lottery[y].cmp(&lottery[x])));
            }
            i = j;
        }
        order
    }
}

/// Simulates the league `runs` times. Run `r` draws its randomness from
/// the child seed `r` of `seed`, so results do not depend on the thread count.
pub fn simulate_league(
    schedule: &Schedule,
    strengths: &BTreeMap<TeamId, f64>,
    model: &OutcomeModel,
    runs: u64,
    seed: u64,
) -> Result<StandingsDistribution, SimError> {
    if runs == 0 {
        return Err(SimError::Parameter("runs must be positive".into()));
    }
    model.validate()?;
    let league = League::new(schedule, strengths, model)?;
    let n = league.clubs.len();
    let tree = SeedTree::new(seed).named("simulate");
    let chunks = runs.div_ceil(RUNS_PER_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut counts = vec![0u64; n * n];
            let mut points = vec![0u32; n];
            let mut results = Vec::with_capacity(league.fixtures.len());
            let end = ((chunk + 1) * RUNS_PER_CHUNK).min(runs);
            for run in chunk * RUNS_PER_CHUNK..end {
                let mut rng = tree.child(run).rng();
                for (rank, &club) in league.play(&mut rng, &mut points, &mut results).iter().enumerate() {
                    counts[club * n + rank] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let top = TOP_BAND.min(n);
    let playoff = PLAYOFF_BAND.min(n);
    let clubs = league
        .clubs
        .iter()
        .enumerate()
        .map(|(c, club)| {
            let probs: Vec<f64> = counts[c * n..(c + 1) * n].iter().map(|&k| k as f64 / runs as f64).collect();
            ClubStanding {
                club: club.clone(),
                expected_rank: probs.iter().enumerate().map(|(r, p)| (r + 1) as f64 * p).sum(),
                top_band: probs[..top].iter().sum(),
                playoff_band: probs[top..playoff].iter().sum(),
                rank_probabilities: probs,
            }
        })
        .collect();
    Ok(StandingsDistribution {
        runs,
        seed,
        tie_break: TIE_BREAK_RULE.to_owned(),
        bands: (top, playoff),
        clubs,
    })
}

/// Pots by descending rating (ties by club id), keeping pot count and size.
pub fn pots_by_rating(population: &DrawInput, rating: &BTreeMap<TeamId, f64>) -> Result<DrawInput, SimError> {
    let mut clubs: Vec<(&TeamId, f64)> = population
        .clubs()
        .map(|c| rating.get(c).map(|&r| (c, r)).ok_or_else(|| SimError::MissingStrength(c.clone())))
        .collect::<Result<_, _>>()?;
    clubs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let pots = clubs
        .chunks(population.pot_size())
        .map(|chunk| chunk.iter().map(|(c, _)| (*c).clone()).collect())
        .collect();
    Ok(DrawInput::new(
        pots,
        population.association.clone(),
        population.allow_same_association_exception,
    )?)
}

/// Spearman rank correlation (average ranks for ties); 0 when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedingStudy {
    /// Independent draws per seeding policy.
    pub draws: u64,
    /// Simulated seasons per draw.
    pub runs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedingSummary {
    pub label: String,
    pub mean_spread: f64,
    pub sd_spread: f64,
    /// Spearman correlation between true strength and minus the expected
    /// rank, averaged over draws; higher means the table reflects strength better.
    pub mean_rank_correlation: f64,
    pub sd_rank_correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub seed: u64,
    pub study: SeedingStudy,
    pub tie_break: String,
    pub spread_definition: String,
    pub a: SeedingSummary,
    pub b: SeedingSummary,
}

impl FairnessReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}

/// Draws schedules with pots formed by `rating_a` and by `rating_b`,
/// simulates each with `true_strength`, and summarises schedule spread and
/// how well final tables track true strength. Both policies use the same
/// draw and simulation seeds.
pub fn compare_seedings(
    population: &DrawInput,
    rating_a: &BTreeMap<TeamId, f64>,
    rating_b: &BTreeMap<TeamId, f64>,
    true_strength: &BTreeMap<TeamId, f64>,
    model: &OutcomeModel,
    study: SeedingStudy,
    seed: u64,
) -> Result<FairnessReport, SimError> {
    if study.draws == 0 || study.runs == 0 {
        return Err(SimError::Parameter("draws and runs must be positive".into()));
    }
    let tree = SeedTree::new(seed).named("seedings");
    let summarise = |label: &str, rating: &BTreeMap<TeamId, f64>| -> Result<SeedingSummary, SimError> {
        let input = pots_by_rating(population, rating)?;
        let mut spreads = Vec::new();
        let mut correlations = Vec::new();
        for d in 0..study.draws {
            let node = tree.child(d);
            let schedule = draw(&input, node.child(0).seed())?;
            spreads.push(balance_metrics(&schedule, true_strength)?.spread);
            let dist = simulate_league(&schedule, true_strength, model, study.runs, node.child(1).seed())?;
            let strength: Vec<f64> = dist.clubs.iter().map(|c| true_strength[&c.club]).collect();
            let rank: Vec<f64> = dist.clubs.iter().map(|c| -c.expected_rank).collect();
            correlations.push(spearman(&strength, &rank));
        }
        let (mean_spread, sd_spread) = mean_sd(&spreads);
        let (mean_rank_correlation, sd_rank_correlation) = mean_sd(&correlations);
        Ok(SeedingSummary {
            label: label.to_owned(),
            mean_spread,
            sd_spread,
            mean_rank_correlation,
            sd_rank_correlation,
        })
    };
    Ok(FairnessReport {
        seed,
        study,
        tie_break: TIE_BREAK_RULE.to_owned(),
        spread_definition: "largest minus smallest sum of opponents' true strength".to_owned(),
        a: summarise("a", rating_a)?,
        b: summarise("b", rating_b)?,
    })
}
