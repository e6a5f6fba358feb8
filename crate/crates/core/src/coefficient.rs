//! UEFA club and association coefficients.
//!
//! A club's coefficient for season `t` is the larger of its own points over
//! seasons `t-5 .. t-1` and 20% of its association's seasonal coefficients
//! summed over the same window.
//!
//! The default rule table follows the 2018/19-2023/24 rulebook: two points
//! per win and one per draw from the group stage onwards, a four-point
//! Champions League group-stage participation bonus, five points for reaching
//! the Champions League round of 16 and one point for every later round
//! reached in either competition. Qualifying rounds score nothing by default.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{CoefficientRow, Competition, MatchRecord, Season, Stage, TeamId, COEFFICIENT_HEADER};

/// Share of the association coefficient that floors a club's coefficient.
pub const ASSOCIATION_FLOOR_SHARE: f64 = 0.2;
pub const DEFAULT_WINDOW: u32 = 5;

#[derive(Debug, Error)]
pub enum CoefficientError {
    #[error("rules configuration: {0}")]
    Config(String),
    #[error("club `{0}` has no association")]
    MissingAssociation(TeamId),
    #[error("association `{association}` has no participating club in {season}")]
    Undefined { association: String, season: Season },
    #[error("no rules edition covers season {0}")]
    NoEdition(Season),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBonus {
    pub competition: Competition,
    /// Awarded to every club whose furthest stage in `competition` is at least this one.
    pub stage: Stage,
    pub points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualificationBonus {
    pub competition: Competition,
    pub points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsRules {
    pub win_points: f64,
    pub draw_points: f64,
    #[serde(default, rename = "bonus")]
    pub stage_bonuses: Vec<StageBonus>,
    #[serde(default, rename = "qualification")]
    pub qualification_bonuses: Vec<QualificationBonus>,
}

impl PointsRules {
    pub fn validate(&self) -> Result<(), CoefficientError> {
        let all = [self.win_points, self.draw_points]
            .into_iter()
            .chain(self.stage_bonuses.iter().map(|b| b.points))
            .chain(self.qualification_bonuses.iter().map(|b| b.points));
        for v in all {
            if !v.is_finite() || v < 0.0 {
                return Err(CoefficientError::Config(format!("point values must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn modern() -> Self {
        let bonus = |competition, stage, points| StageBonus {
            competition,
            stage,
            points,
        };
        use Competition::{ChampionsLeague as CL, EuropaLeague as EL};
        PointsRules {
            win_points: 2.0,
            draw_points: 1.0,
            stage_bonuses: vec![
                bonus(CL, Stage::Group, 4.0),
                bonus(CL, Stage::RoundOf16, 5.0),
                bonus(CL, Stage::QuarterFinal, 1.0),
                bonus(CL, Stage::SemiFinal, 1.0),
                bonus(CL, Stage::Final, 1.0),
                bonus(EL, Stage::QuarterFinal, 1.0),
                bonus(EL, Stage::SemiFinal, 1.0),
                bonus(EL, Stage::Final, 1.0),
            ],
            qualification_bonuses: Vec::new(),
        }
    }
}

/// Rules in force over an inclusive season range (`to = None` is open-ended).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulesEdition {
    pub from: Season,
    #[serde(default)]
    pub to: Option<Season>,
    #[serde(flatten)]
    pub rules: PointsRules,
}

/// Versioned rule table, loadable from TOML:
///
/// ```toml
/// [[edition]]
/// from = "2003/04"
/// win_points = 2.0
/// draw_points = 1.0
///
/// [[edition.bonus]]
/// competition = "CL"
/// stage = "R16"
/// points = 5.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulesTable {
    #[serde(rename = "edition")]
    pub editions: Vec<RulesEdition>,
}

impl Default for RulesTable {
    fn default() -> Self {
        RulesTable {
            editions: vec![RulesEdition {
                from: Season(2003),
                to: None,
                rules: PointsRules::modern(),
            }],
        }
    }
}

impl RulesTable {
    pub fn from_toml(text: &str) -> Result<Self, CoefficientError> {
        let t: RulesTable = toml::from_str(text).map_err(|e| CoefficientError::Config(e.to_string()))?;
        for e in &t.editions {
            e.rules.validate()?;
        }
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CoefficientError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CoefficientError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("rules serialize")
    }

    /// The latest edition whose range covers `season`.
    pub fn rules_for(&self, season: Season) -> Result<&PointsRules, CoefficientError> {
        self.editions
            .iter()
            .rev()
            .find(|e| e.from <= season && e.to.is_none_or(|to| season <= to))
            .map(|e| &e.rules)
            .ok_or(CoefficientError::NoEdition(season))
    }
}

/// Points earned by `team` from `records` (its UEFA matches of one season).
pub fn season_points(team: &TeamId, records: &[&MatchRecord], rules: &PointsRules) -> f64 {
    let mut points = 0.0;
    let mut furthest: BTreeMap<Competition, Stage> = BTreeMap::new();
    let mut qualifying: Vec<Competition> = Vec::new();
    for r in records.iter().filter(|r| r.competition.is_uefa()) {
        let (scored, conceded) = if &r.home_team == team {
            (r.home_goals, r.away_goals)
        } else if &r.away_team == team {
            (r.away_goals, r.home_goals)
        } else {
            continue;
        };
        if r.stage == Stage::Other {
            if !qualifying.contains(&r.competition) {
                qualifying.push(r.competition);
            }
            continue;
        }
        points += match scored.cmp(&conceded) {
            std::cmp::Ordering::Greater => rules.win_points,
            std::cmp::Ordering::Equal => rules.draw_points,
            std::cmp::Ordering::Less => 0.0,
        };
        let e = furthest.entry(r.competition).or_insert(r.stage);
        *e = (*e).max(r.stage);
    }
    for b in &rules.stage_bonuses {
        if furthest.get(&b.competition).is_some_and(|&s| s >= b.stage) {
            points += b.points;
        }
    }
    for q in &rules.qualification_bonuses {
        if qualifying.contains(&q.competition) {
            points += q.points;
        }
    }
    points
}

/// Per-club seasonal points, association memberships and any directly
/// supplied association coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientLedger {
    pub club_points: BTreeMap<(TeamId, Season), f64>,
    pub association_points: BTreeMap<(String, Season), f64>,
    pub membership: BTreeMap<TeamId, String>,
}

/// The two candidate values behind a club coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBreakdown {
    pub own: f64,
    pub association_floor: f64,
    pub value: f64,
}

impl CoefficientLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_association(&mut self, team: impl Into<TeamId>, association: impl Into<String>) {
        self.membership.insert(team.into(), association.into());
    }

    pub fn add_club_points(&mut self, team: impl Into<TeamId>, season: Season, points: f64) {
        *self.club_points.entry((team.into(), season)).or_insert(0.0) += points;
    }

    /// Records an association's seasonal coefficient directly, overriding the
    /// mean computed from member clubs.
    pub fn set_association_points(&mut self, association: impl Into<String>, season: Season, value: f64) {
        self.association_points.insert((association.into(), season), value);
    }

    /// Folds UEFA matches into seasonal club points. Every club that played a
    /// UEFA match must have an association in `membership`.
    pub fn from_matches(
        records: &[MatchRecord],
        rules: &RulesTable,
        membership: BTreeMap<TeamId, String>,
    ) -> Result<Self, CoefficientError> {
        let mut by_club: BTreeMap<(TeamId, Season), Vec<&MatchRecord>> = BTreeMap::new();
        for r in records.iter().filter(|r| r.competition.is_uefa()) {
            for t in [&r.home_team, &r.away_team] {
                by_club.entry((t.clone(), r.season)).or_default().push(r);
            }
        }
        let mut ledger = CoefficientLedger {
            membership,
            ..Default::default()
        };
        for ((team, season), recs) in by_club {
            if !ledger.membership.contains_key(&team) {
                return Err(CoefficientError::MissingAssociation(team));
            }
            let pts = season_points(&team, &recs, rules.rules_for(season)?);
            ledger.club_points.insert((team, season), pts);
        }
        Ok(ledger)
    }

    /// Mean seasonal points of the association's participating clubs.
    pub fn association_coefficient(&self, association: &str, season: Season) -> Result<f64, CoefficientError> {
        if let Some(&v) = self.association_points.get(&(association.to_owned(), season)) {
            return Ok(v);
        }
        let (sum, n) = self
            .club_points
            .iter()
            .filter(|((team, s), _)| *s == season && self.membership.get(team).is_some_and(|a| a == association))
            .fold((0.0, 0usize), |(sum, n), (_, &p)| (sum + p, n + 1));
        if n == 0 {
            return Err(CoefficientError::Undefined {
                association: association.to_owned(),
                season,
            });
        }
        Ok(sum / n as f64)
    }

    pub fn coefficient_breakdown(
        &self,
        team: &TeamId,
        season: Season,
        window: u32,
    ) -> Result<CoefficientBreakdown, CoefficientError> {
        let association = self
            .membership
            .get(team)
            .ok_or_else(|| CoefficientError::MissingAssociation(team.clone()))?;
        let seasons = (1..=window as i32).map(|k| Season(season.0 - k));
        let mut own = 0.0;
        let mut assoc_sum = 0.0;
        for s in seasons {
            own += self.club_points.get(&(team.clone(), s)).copied().unwrap_or(0.0);
            // seasons without participants contribute nothing to the floor
            assoc_sum += self.association_coefficient(association, s).unwrap_or(0.0);
        }
        let floor = ASSOCIATION_FLOOR_SHARE * assoc_sum;
        Ok(CoefficientBreakdown {
            own,
            association_floor: floor,
            value: own.max(floor),
        })
    }

    /// Club coefficient at the start of `season`.
    pub fn club_coefficient(&self, team: &TeamId, season: Season, window: u32) -> Result<f64, CoefficientError> {
        Ok(self.coefficient_breakdown(team, season, window)?.value)
    }

    /// Coefficients of every member club for each requested season, in the
    /// layout of the coefficient input file.
    pub fn coefficient_rows(&self, seasons: &[Season], window: u32) -> Result<Vec<CoefficientRow>, CoefficientError> {
        let mut out = Vec::new();
        for &season in seasons {
            for (team, association) in &self.membership {
                out.push(CoefficientRow {
                    season,
                    team: team.clone(),
                    association: association.clone(),
                    uefa_points: self.club_coefficient(team, season, window)?,
                });
            }
        }
        Ok(out)
    }
}

/// Writes `season,team,association,uefa_points` with three decimals.
pub fn write_coefficient_csv<W: std::io::Write>(out: W, rows: &[CoefficientRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COEFFICIENT_HEADER)?;
    for r in rows {
        w.write_record([r.season.to_string(), r.team.0.clone(), r.association.clone(), format!("{:.3}", r.uefa_points)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn m(id: u32, stage: Stage, home: &str, away: &str, hg: u32, ag: u32) -> MatchRecord {
        let date = NaiveDate::from_ymd_opt(2019, 10, 1).unwrap() + chrono::Days::new(id as u64);
        MatchRecord {
            match_id: id.to_string(),
            date,
            season: Season(2019),
            competition: Competition::ChampionsLeague,
            stage,
            home_team: home.into(),
            away_team: away.into(),
            home_goals: hg,
            away_goals: ag,
            neutral_venue: false,
            behind_closed_doors: false,
            single_leg: false,
            winner: None,
        }
    }

    fn plain(win: f64, draw: f64) -> PointsRules {
        PointsRules {
            win_points: win,
            draw_points: draw,
            stage_bonuses: vec![],
            qualification_bonuses: vec![],
        }
    }

    #[test]
    fn no_matches_no_points() {
        assert_eq!(season_points(&"A".into(), &[], &PointsRules::modern()), 0.0);
    }

    #[test]
    fn wins_and_draws() {
        let recs = [
            m(1, Stage::Group, "A", "B", 1, 0),
            m(2, Stage::Group, "C", "A", 0, 2),
            m(3, Stage::Group, "A", "D", 3, 1),
            m(4, Stage::Group, "B", "A", 1, 1),
            m(5, Stage::Group, "A", "C", 0, 1),
        ];
        let refs: Vec<&MatchRecord> = recs.iter().collect();
        assert_eq!(season_points(&"A".into(), &refs, &plain(2.0, 1.0)), 7.0);
    }

    #[test]
    fn cumulative_stage_bonuses() {
        // six group wins, then scoreless exits from R16-on knockout legs
        let mut recs: Vec<MatchRecord> = (0..6).map(|i| m(i, Stage::Group, "A", "X", 1, 0)).collect();
        recs.push(m(10, Stage::RoundOf16, "A", "Y", 0, 1));
        recs.push(m(11, Stage::QuarterFinal, "A", "Z", 0, 2));
        let refs: Vec<&MatchRecord> = recs.iter().collect();
        let mut rules = plain(2.0, 1.0);
        rules.stage_bonuses = vec![
            StageBonus {
                competition: Competition::ChampionsLeague,
                stage: Stage::RoundOf16,
                points: 5.0,
            },
            StageBonus {
                competition: Competition::ChampionsLeague,
                stage: Stage::QuarterFinal,
                points: 1.0,
            },
        ];
        assert_eq!(season_points(&"A".into(), &refs, &rules), 18.0);
        assert_eq!(season_points(&"A".into(), &refs[..7], &rules), 17.0);
        assert_eq!(season_points(&"A".into(), &refs[..6], &rules), 12.0);
    }

    #[test]
    fn association_mean() {
        let mut l = CoefficientLedger::new();
        for (t, p) in [("a", 10.0), ("b", 8.0), ("c", 6.0), ("d", 4.0)] {
            l.set_association(t, "X");
            l.add_club_points(t, Season(2010), p);
        }
        l.set_association("e", "Y");
        l.add_club_points("e", Season(2010), 10.0);
        l.set_association("f", "Z");
        l.add_club_points("f", Season(2010), 8.0);
        l.set_association("g", "Z");
        l.add_club_points("g", Season(2010), 4.0);
        assert_eq!(l.association_coefficient("X", Season(2010)).unwrap(), 7.0);
        assert_eq!(l.association_coefficient("Y", Season(2010)).unwrap(), 10.0);
        assert_eq!(l.association_coefficient("Z", Season(2010)).unwrap(), 6.0);
        assert!(matches!(
            l.association_coefficient("X", Season(2011)),
            Err(CoefficientError::Undefined { .. })
        ));
    }

    #[test]
    fn association_floor_applies_when_higher() {
        // five seasons of German association coefficients, 2016/17-2020/21
        let mut l = CoefficientLedger::new();
        l.set_association("Wolfsburg", "GER");
        for (y, v) in [(2016, 14.571), (2017, 9.857), (2018, 15.214), (2019, 18.714), (2020, 15.214)] {
            l.set_association_points("GER", Season(y), v);
        }
        for (y, p) in [(2017, 2.0), (2019, 12.5)] {
            l.add_club_points("Wolfsburg", Season(y), p);
        }
        let b = l.coefficient_breakdown(&"Wolfsburg".into(), Season(2021), 5).unwrap();
        assert!((b.own - 14.5).abs() < 1e-12);
        assert!((b.association_floor - 14.714).abs() < 1e-9);
        assert_eq!(b.value, b.association_floor);
    }

    #[test]
    fn own_points_win_when_higher() {
        let mut l = CoefficientLedger::new();
        l.set_association("A", "X");
        l.set_association_points("X", Season(2015), 60.0);
        l.add_club_points("A", Season(2014), 25.0);
        l.add_club_points("A", Season(2016), 15.0);
        let b = l.coefficient_breakdown(&"A".into(), Season(2017), 5).unwrap();
        // floor: 20% of (25 + 60 + 15), the club being its association's only participant
        assert_eq!((b.own, b.association_floor, b.value), (40.0, 20.0, 40.0));
    }

    #[test]
    fn empty_history_in_empty_association() {
        let mut l = CoefficientLedger::new();
        l.set_association("A", "X");
        assert_eq!(l.club_coefficient(&"A".into(), Season(2017), 5).unwrap(), 0.0);
        assert!(matches!(
            l.club_coefficient(&"B".into(), Season(2017), 5),
            Err(CoefficientError::MissingAssociation(_))
        ));
    }

    #[test]
    fn window_excludes_current_and_old_seasons() {
        let mut l = CoefficientLedger::new();
        l.set_association("A", "X");
        l.add_club_points("A", Season(2017), 100.0); // current season
        l.add_club_points("A", Season(2011), 100.0); // six seasons back
        l.add_club_points("A", Season(2012), 3.0);
        assert_eq!(l.club_coefficient(&"A".into(), Season(2017), 5).unwrap(), 3.0);
    }

    #[test]
    fn ledger_from_matches_requires_membership() {
        let recs = vec![m(1, Stage::Group, "A", "B", 1, 0)];
        let err = CoefficientLedger::from_matches(&recs, &RulesTable::default(), BTreeMap::new());
        assert!(matches!(err, Err(CoefficientError::MissingAssociation(_))));
        let membership: BTreeMap<TeamId, String> =
            [("A".into(), "X".to_string()), ("B".into(), "Y".to_string())].into_iter().collect();
        let l = CoefficientLedger::from_matches(&recs, &RulesTable::default(), membership).unwrap();
        // win 2 + group participation 4
        assert_eq!(l.club_points[&("A".into(), Season(2019))], 6.0);
        assert_eq!(l.club_points[&("B".into(), Season(2019))], 4.0);
    }

    #[test]
    fn rules_toml_round_trip_and_editions() {
        let text = r#"
[[edition]]
from = "2003/04"
to = "2008/09"
win_points = 2.0
draw_points = 1.0

[[edition.bonus]]
competition = "CL"
stage = "group"
points = 3.0

[[edition]]
from = "2009/10"
win_points = 2.0
draw_points = 1.0

[[edition.qualification]]
competition = "EL"
points = 0.5
"#;
        let t = RulesTable::from_toml(text).unwrap();
        assert_eq!(t.rules_for(Season(2005)).unwrap().stage_bonuses.len(), 1);
        assert_eq!(t.rules_for(Season(2015)).unwrap().qualification_bonuses.len(), 1);
        assert!(t.rules_for(Season(1999)).is_err());
        assert_eq!(RulesTable::from_toml(&t.to_toml()).unwrap(), t);
        assert!(RulesTable::from_toml("[[edition]]\nfrom = \"2003/04\"\nwin_points = -1.0\ndraw_points = 1.0\n").is_err());
    }
}
