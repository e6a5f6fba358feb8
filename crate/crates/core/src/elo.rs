//! Football-club Elo ratings.
//!
//! The expected score of the home side is
//! `W = 1 / (1 + 10^(-(Δ + H) / s))` with `Δ` the home-minus-away rating
//! difference, `H` the home advantage (dropped at neutral venues) and `s` the
//! scale. After the match both clubs exchange `K · G · (R − W)` points, where
//! `R` is the actual score and `G` the margin-of-victory multiplier.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{MatchRecord, RatingRow, Season, TeamId};

#[derive(Debug, Error, PartialEq)]
pub enum EloError {
    #[error("non-finite {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("invalid Elo parameters: {0}")]
    InvalidParams(String),
    #[error("snapshot date {date} precedes the timeline start {start}")]
    OutOfRange { date: NaiveDate, start: NaiveDate },
}

/// Goal-difference multiplier. Entry `d` of `table` applies to a margin of
/// `d` goals; margins past the table grow linearly by `tail_slope` per goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovRule {
    pub table: Vec<f64>,
    pub tail_slope: f64,
}

impl Default for MovRule {
    fn default() -> Self {
        MovRule {
            table: vec![1.0, 1.0, 1.5, 1.75],
            tail_slope: 0.125,
        }
    }
}

impl MovRule {
    /// No margin-of-victory scaling.
    pub fn flat() -> Self {
        MovRule {
            table: vec![1.0],
            tail_slope: 0.0,
        }
    }

    pub fn multiplier(&self, goal_diff: u32) -> f64 {
        let d = goal_diff as usize;
        match self.table.get(d) {
            Some(&m) => m,
            None => {
                let last = self.table.len() - 1;
                self.table[last] + (d - last) as f64 * self.tail_slope
            }
        }
    }

    fn validate(&self) -> Result<(), EloError> {
        if self.table.is_empty() {
            return Err(EloError::InvalidParams("empty margin-of-victory table".into()));
        }
        if self.table.iter().any(|m| !m.is_finite() || *m < 1.0) {
            return Err(EloError::InvalidParams("margin multipliers must be finite and >= 1".into()));
        }
        if self.table.windows(2).any(|w| w[1] < w[0]) {
            return Err(EloError::InvalidParams("margin multipliers must be non-decreasing".into()));
        }
        if !self.tail_slope.is_finite() || self.tail_slope < 0.0 {
            return Err(EloError::InvalidParams("tail slope must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EloParams {
    /// Rating points per factor of ten in the odds.
    pub scale: f64,
    pub k_factor: f64,
    /// Added to the home rating in the expected score at non-neutral venues.
    pub home_advantage: f64,
    pub mov_rule: MovRule,
    pub initial_rating: f64,
}

impl Default for EloParams {
    fn default() -> Self {
        EloParams {
            scale: 400.0,
            k_factor: 20.0,
            home_advantage: 65.0,
            mov_rule: MovRule::default(),
            initial_rating: 1500.0,
        }
    }
}

impl EloParams {
    pub fn validate(&self) -> Result<(), EloError> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(EloError::InvalidParams(format!("scale must be > 0, got {}", self.scale)));
        }
        if !(self.k_factor.is_finite() && self.k_factor > 0.0) {
            return Err(EloError::InvalidParams(format!("K must be > 0, got {}", self.k_factor)));
        }
        if !self.home_advantage.is_finite() {
            return Err(EloError::InvalidParams("home advantage must be finite".into()));
        }
        if !self.initial_rating.is_finite() {
            return Err(EloError::InvalidParams("initial rating must be finite".into()));
        }
        self.mov_rule.validate()
    }
}

/// Actual score from the home side's perspective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub r: f64,
    pub goal_diff: u32,
}

impl MatchResult {
    pub fn from_goals(home_goals: u32, away_goals: u32) -> Self {
        let r = match home_goals.cmp(&away_goals) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Less => 0.0,
        };
        MatchResult {
            r,
            goal_diff: home_goals.abs_diff(away_goals),
        }
    }

    pub fn home_win(goal_diff: u32) -> Self {
        assert!(goal_diff > 0, "a win needs a positive margin");
        MatchResult { r: 1.0, goal_diff }
    }

    pub fn away_win(goal_diff: u32) -> Self {
        assert!(goal_diff > 0, "a win needs a positive margin");
        MatchResult { r: 0.0, goal_diff }
    }

    pub fn draw() -> Self {
        MatchResult { r: 0.5, goal_diff: 0 }
    }
}

fn finite(what: &'static str, value: f64) -> Result<f64, EloError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EloError::NonFinite { what, value })
    }
}

/// Expected score of the home side. The higher-rated side gets `W > 0.5`.
pub fn expected_score(r_home: f64, r_away: f64, params: &EloParams, neutral: bool) -> Result<f64, EloError> {
    finite("home rating", r_home)?;
    finite("away rating", r_away)?;
    let h = if neutral { 0.0 } else { params.home_advantage };
    Ok(win_expectancy(r_home - r_away + h, params.scale))
}

/// `1 / (1 + 10^(-diff / scale))`, written to stay accurate for large |diff|.
pub fn win_expectancy(diff: f64, scale: f64) -> f64 {
    let x = diff / scale * std::f64::consts::LN_10;
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Ratings of every club seen so far.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EloState {
    pub ratings: BTreeMap<TeamId, f64>,
    pub as_of: Option<NaiveDate>,
}

impl EloState {
    pub fn rating(&self, team: &TeamId, params: &EloParams) -> f64 {
        self.ratings.get(team).copied().unwrap_or(params.initial_rating)
    }

    pub fn total(&self) -> f64 {
        self.ratings.values().sum()
    }

    /// Applies one match and returns the new state with the home side's rating change.
    pub fn update(
        &self,
        home: &TeamId,
        away: &TeamId,
        result: MatchResult,
        params: &EloParams,
        neutral: bool,
    ) -> Result<(EloState, f64), EloError> {
        let mut next = self.clone();
        let delta = next.apply(home, away, result, params, neutral)?;
        Ok((next, delta))
    }

    fn apply(
        &mut self,
        home: &TeamId,
        away: &TeamId,
        result: MatchResult,
        params: &EloParams,
        neutral: bool,
    ) -> Result<f64, EloError> {
        finite("result", result.r)?;
        let rh = self.rating(home, params);
        let ra = self.rating(away, params);
        let w = expected_score(rh, ra, params, neutral)?;
        let g = params.mov_rule.multiplier(result.goal_diff);
        let delta = params.k_factor * g * (result.r - w);
        self.ratings.insert(home.clone(), rh + delta);
        self.ratings.insert(away.clone(), ra - delta);
        Ok(delta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub date: NaiveDate,
    pub match_id: String,
    pub home: TeamId,
    pub away: TeamId,
    /// Rating change of the home side; the away side moves by the negation.
    pub delta: f64,
    pub home_after: f64,
    pub away_after: f64,
}

/// Chronological replay of a match history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTimeline {
    pub params: EloParams,
    pub start: NaiveDate,
    pub teams: BTreeSet<TeamId>,
    pub entries: Vec<TimelineEntry>,
}

impl RatingTimeline {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn initial_state(&self) -> EloState {
        EloState {
            ratings: self
                .teams
                .iter()
                .map(|t| (t.clone(), self.params.initial_rating))
                .collect(),
            as_of: None,
        }
    }

    /// State after the first `n` matches (`n = 0` is the initial state).
    pub fn state_after(&self, n: usize) -> EloState {
        let mut state = self.initial_state();
        for e in self.entries.iter().take(n) {
            state.ratings.insert(e.home.clone(), e.home_after);
            state.ratings.insert(e.away.clone(), e.away_after);
            state.as_of = Some(e.date);
        }
        state
    }

    pub fn final_state(&self) -> EloState {
        self.state_after(self.entries.len())
    }

    /// Ratings after every match dated on or before `date`.
    pub fn snapshot_at(&self, date: NaiveDate) -> Result<BTreeMap<TeamId, f64>, EloError> {
        if date < self.start {
            return Err(EloError::OutOfRange { date, start: self.start });
        }
        let n = self.entries.partition_point(|e| e.date <= date);
        Ok(self.state_after(n).ratings)
    }

    /// Rating in force for each requested season: the June 30 snapshot that
    /// closes the previous season.
    pub fn season_snapshots(&self, seasons: &[Season]) -> Result<Vec<RatingRow>, EloError> {
        let mut out = Vec::new();
        for &season in seasons {
            let date = season.previous().last_day();
            for (team, rating) in self.snapshot_at(date)? {
                out.push(RatingRow { season, team, rating });
            }
        }
        Ok(out)
    }
}

/// Replays `records` in date order (same-day matches by `match_id`).
pub fn rate_history(records: &[MatchRecord], params: &EloParams) -> Result<RatingTimeline, EloError> {
    params.validate()?;
    let mut order: Vec<&MatchRecord> = records.iter().collect();
    order.sort_by(|a, b| (a.date, &a.match_id).cmp(&(b.date, &b.match_id)));
    let start = order
        .first()
        .map(|r| r.season.first_day().min(r.date))
        .unwrap_or(NaiveDate::MIN);
    let teams: BTreeSet<TeamId> = order
        .iter()
        .flat_map(|r| [r.home_team.clone(), r.away_team.clone()])
        .collect();

    let mut state = EloState::default();
    let mut entries = Vec::with_capacity(order.len());
    for r in order {
        let result = MatchResult::from_goals(r.home_goals, r.away_goals);
        let delta = state.apply(&r.home_team, &r.away_team, result, params, r.neutral_venue)?;
        state.as_of = Some(r.date);
        entries.push(TimelineEntry {
            date: r.date,
            match_id: r.match_id.clone(),
            home: r.home_team.clone(),
            away: r.away_team.clone(),
            delta,
            home_after: state.ratings[&r.home_team],
            away_after: state.ratings[&r.away_team],
        });
    }
    Ok(RatingTimeline {
        params: params.clone(),
        start,
        teams,
        entries,
    })
}

/// Writes `season,team,rating` rows rounded to two decimals.
pub fn write_snapshot_csv<W: std::io::Write>(out: W, rows: &[RatingRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["season", "team", "rating"])?;
    for r in rows {
        w.write_record([r.season.to_string(), r.team.0.clone(), format!("{:.2}", r.rating)])?;
    }
    w.flush()?;
    Ok(())
}
