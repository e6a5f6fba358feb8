use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::records::{CoefficientRow, Competition, GroupStanding, MatchRecord, RatingRow, Season, Stage, TeamId};
use super::DataError;

/// Category codes of the trinomial group-match response.
pub const TRINOMIAL_AWAY: u8 = 0;
pub const TRINOMIAL_DRAW: u8 = 1;
pub const TRINOMIAL_HOME: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatingKind {
    Uefa,
    Elo,
}

impl fmt::Display for RatingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatingKind::Uefa => "UEFA",
            RatingKind::Elo => "Elo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleFamily {
    GroupMatch,
    Knockout,
    GroupRanking,
    GroupRankingElo,
    GroupMatchTrinomial,
}

impl SampleFamily {
    pub fn is_multinomial(self) -> bool {
        self == SampleFamily::GroupMatchTrinomial
    }

    pub fn label(self) -> &'static str {
        match self {
            SampleFamily::GroupMatch => "group matches",
            SampleFamily::Knockout => "knockout qualification",
            SampleFamily::GroupRanking => "group ranking",
            SampleFamily::GroupRankingElo => "group ranking (higher Elo convention)",
            SampleFamily::GroupMatchTrinomial => "all group matches including draws",
        }
    }
}

impl fmt::Display for SampleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleFamily::GroupMatch => "group-match",
            SampleFamily::Knockout => "knockout",
            SampleFamily::GroupRanking => "group-ranking",
            SampleFamily::GroupRankingElo => "group-ranking-elo",
            SampleFamily::GroupMatchTrinomial => "group-match-trinomial",
        })
    }
}

impl std::str::FromStr for SampleFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "group-match" => SampleFamily::GroupMatch,
            "knockout" => SampleFamily::Knockout,
            "group-ranking" => SampleFamily::GroupRanking,
            "group-ranking-elo" => SampleFamily::GroupRankingElo,
            "group-match-trinomial" => SampleFamily::GroupMatchTrinomial,
            other => return Err(format!("unknown sample family `{other}`")),
        })
    }
}

/// One regression observation: outcome plus rating differences.
///
/// `first` is the club whose perspective the deltas take (home side, first-leg
/// host, or the higher-rated club of a ranking pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub y: u8,
    pub delta_uefa: f64,
    pub delta_elo: f64,
    pub season: Season,
    pub tag: SampleFamily,
    pub first: TeamId,
    pub second: TeamId,
}

impl Observation {
    pub fn delta(&self, kind: RatingKind) -> f64 {
        match kind {
            RatingKind::Uefa => self.delta_uefa,
            RatingKind::Elo => self.delta_elo,
        }
    }

    /// The same pairing seen from the other club.
    pub fn swapped(&self) -> Observation {
        let y = if self.tag.is_multinomial() {
            match self.y {
                TRINOMIAL_HOME => TRINOMIAL_AWAY,
                TRINOMIAL_AWAY => TRINOMIAL_HOME,
                other => other,
            }
        } else {
            1 - self.y
        };
        Observation {
            y,
            delta_uefa: -self.delta_uefa,
            delta_elo: -self.delta_elo,
            season: self.season,
            tag: self.tag,
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

/// Per-season club ratings.
#[derive(Debug, Clone, Default)]
pub struct RatingTable {
    kind: Option<RatingKind>,
    values: HashMap<(Season, TeamId), f64>,
}

impl RatingTable {
    pub fn new(kind: RatingKind) -> Self {
        RatingTable {
            kind: Some(kind),
            values: HashMap::new(),
        }
    }

    pub fn from_coefficients(rows: &[CoefficientRow]) -> Self {
        let mut t = RatingTable::new(RatingKind::Uefa);
        for r in rows {
            t.insert(r.season, r.team.clone(), r.uefa_points);
        }
        t
    }

    pub fn from_ratings(kind: RatingKind, rows: &[RatingRow]) -> Self {
        let mut t = RatingTable::new(kind);
        for r in rows {
            t.insert(r.season, r.team.clone(), r.rating);
        }
        t
    }

    pub fn insert(&mut self, season: Season, team: TeamId, value: f64) {
        self.values.insert((season, team), value);
    }

    pub fn get(&self, team: &TeamId, season: Season) -> Option<f64> {
        self.values.get(&(season, team.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn resolve(&self, team: &TeamId, season: Season, fallback: RatingKind) -> Result<f64, DataError> {
        self.get(team, season).ok_or_else(|| DataError::UnresolvedRating {
            kind: self.kind.unwrap_or(fallback),
            team: team.clone(),
            season,
        })
    }
}

struct Ratings<'a> {
    uefa: &'a RatingTable,
    elo: &'a RatingTable,
}

impl Ratings<'_> {
    fn deltas(&self, first: &TeamId, second: &TeamId, season: Season) -> Result<(f64, f64), DataError> {
        let u1 = self.uefa.resolve(first, season, RatingKind::Uefa)?;
        let u2 = self.uefa.resolve(second, season, RatingKind::Uefa)?;
        let e1 = self.elo.resolve(first, season, RatingKind::Elo)?;
        let e2 = self.elo.resolve(second, season, RatingKind::Elo)?;
        Ok((u1 - u2, e1 - e2))
    }
}

fn cl_group_matches(records: &[MatchRecord]) -> impl Iterator<Item = &MatchRecord> {
    records
        .iter()
        .filter(|r| r.competition == Competition::ChampionsLeague && r.stage == Stage::Group)
}

/// Decided Champions League group matches; `y = 1` for a home win.
pub fn build_group_match_sample(
    records: &[MatchRecord],
    ratings_uefa: &RatingTable,
    ratings_elo: &RatingTable,
) -> Result<Vec<Observation>, DataError> {
    let ratings = Ratings {
        uefa: ratings_uefa,
        elo: ratings_elo,
    };
    cl_group_matches(records)
        .filter(|r| !r.is_draw())
        .map(|r| {
            let (du, de) = ratings.deltas(&r.home_team, &r.away_team, r.season)?;
            Ok(Observation {
                y: u8::from(r.home_goals > r.away_goals),
                delta_uefa: du,
                delta_elo: de,
                season: r.season,
                tag: SampleFamily::GroupMatch,
                first: r.home_team.clone(),
                second: r.away_team.clone(),
            })
        })
        .collect()
}

/// All Champions League group matches with a three-way response
/// (away win, draw, home win).
pub fn build_trinomial_sample(
    records: &[MatchRecord],
    ratings_uefa: &RatingTable,
    ratings_elo: &RatingTable,
) -> Result<Vec<Observation>, DataError> {
    let ratings = Ratings {
        uefa: ratings_uefa,
        elo: ratings_elo,
    };
    cl_group_matches(records)
        .map(|r| {
            let (du, de) = ratings.deltas(&r.home_team, &r.away_team, r.season)?;
            let y = match r.home_goals.cmp(&r.away_goals) {
                std::cmp::Ordering::Greater => TRINOMIAL_HOME,
                std::cmp::Ordering::Equal => TRINOMIAL_DRAW,
                std::cmp::Ordering::Less => TRINOMIAL_AWAY,
            };
            Ok(Observation {
                y,
                delta_uefa: du,
                delta_elo: de,
                season: r.season,
                tag: SampleFamily::GroupMatchTrinomial,
                first: r.home_team.clone(),
                second: r.away_team.clone(),
            })
        })
        .collect()
}

/// Knockout observations plus the ties that were dropped.
#[derive(Debug, Clone, Default)]
pub struct KnockoutSample {
    pub observations: Vec<Observation>,
    pub single_leg_dropped: usize,
    pub finals_excluded: usize,
}

fn tie_winner<'a>(first: &'a MatchRecord, second: &'a MatchRecord) -> Result<&'a TeamId, String> {
    // first.home_team hosts the first leg and plays away in the second
    let host1 = &first.home_team;
    let host2 = &first.away_team;
    if let Some(w) = first.winner.as_ref().or(second.winner.as_ref()) {
        return if w == host1 || w == host2 {
            Ok(if w == host1 { host1 } else { host2 })
        } else {
            Err(format!("recorded winner `{w}` did not play the tie"))
        };
    }
    let goals1 = first.home_goals + second.away_goals;
    let goals2 = first.away_goals + second.home_goals;
    if goals1 != goals2 {
        return Ok(if goals1 > goals2 { host1 } else { host2 });
    }
    // away goals rule, abolished from 2021/22
    if first.season < Season(2021) && second.away_goals != first.away_goals {
        return Ok(if second.away_goals > first.away_goals { host1 } else { host2 });
    }
    Err(format!(
        "tie {host1} v {host2} is level on goals; add a `winner` column entry"
    ))
}

/// Two-legged Champions League ties (R16 to SF); `y = 1` when the
/// first-leg host qualifies. Finals and single-leg ties are excluded.
pub fn build_knockout_sample(
    records: &[MatchRecord],
    ratings_uefa: &RatingTable,
    ratings_elo: &RatingTable,
) -> Result<KnockoutSample, DataError> {
    let ratings = Ratings {
        uefa: ratings_uefa,
        elo: ratings_elo,
    };
    let mut out = KnockoutSample::default();
    let mut ties: BTreeMap<(Season, Stage, TeamId, TeamId), Vec<&MatchRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.competition == Competition::ChampionsLeague) {
        if r.stage == Stage::Final {
            out.finals_excluded += 1;
            continue;
        }
        if !r.stage.is_two_legged_knockout() {
            continue;
        }
        if r.single_leg {
            out.single_leg_dropped += 1;
            continue;
        }
        let (a, b) = if r.home_team < r.away_team {
            (r.home_team.clone(), r.away_team.clone())
        } else {
            (r.away_team.clone(), r.home_team.clone())
        };
        ties.entry((r.season, r.stage, a, b)).or_default().push(r);
    }

    let mut keyed = Vec::with_capacity(ties.len());
    for ((season, stage, a, b), mut legs) in ties {
        let pairing_err = |message: String| DataError::Pairing {
            season,
            stage: stage.code().to_owned(),
            message,
        };
        if legs.len() != 2 {
            return Err(pairing_err(format!(
                "{a} v {b} has {} leg(s) and is not flagged single_leg",
                legs.len()
            )));
        }
        legs.sort_by(|x, y| (x.date, &x.match_id).cmp(&(y.date, &y.match_id)));
        let (first, second) = (legs[0], legs[1]);
        if first.home_team != second.away_team {
            return Err(pairing_err(format!(
                "{a} v {b}: both legs hosted by `{}`",
                first.home_team
            )));
        }
        let winner = tie_winner(first, second).map_err(pairing_err)?;
        let (du, de) = ratings.deltas(&first.home_team, &first.away_team, season)?;
        let obs = Observation {
            y: u8::from(winner == &first.home_team),
            delta_uefa: du,
            delta_elo: de,
            season,
            tag: SampleFamily::Knockout,
            first: first.home_team.clone(),
            second: first.away_team.clone(),
        };
        keyed.push(((first.date, first.match_id.clone()), obs));
    }
    keyed.sort_by(|x, y| x.0.cmp(&y.0));
    out.observations = keyed.into_iter().map(|(_, o)| o).collect();
    Ok(out)
}

/// Which rating decides the orientation of a group-ranking pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankingConvention {
    ByUefa,
    ByElo,
}

#[derive(Debug, Clone, Default)]
pub struct GroupRankingSample {
    pub observations: Vec<Observation>,
    /// Pairs with identical Elo ratings, left out under the Elo convention.
    pub elo_ties: Vec<(Season, String, TeamId, TeamId)>,
    pub groups: usize,
}

/// Six pairwise comparisons per four-team group, oriented from the
/// higher-rated club under `convention`.
pub fn build_group_ranking_sample(
    standings: &[GroupStanding],
    ratings_uefa: &RatingTable,
    ratings_elo: &RatingTable,
    convention: RankingConvention,
) -> Result<GroupRankingSample, DataError> {
    let ratings = Ratings {
        uefa: ratings_uefa,
        elo: ratings_elo,
    };
    let mut groups: BTreeMap<(Season, String), Vec<&GroupStanding>> = BTreeMap::new();
    for s in standings {
        groups.entry((s.season, s.group.clone())).or_default().push(s);
    }
    let mut out = GroupRankingSample {
        groups: groups.len(),
        ..Default::default()
    };
    for ((season, group), mut members) in groups {
        members.sort_by_key(|m| m.rank);
        let ranks: Vec<u8> = members.iter().map(|m| m.rank).collect();
        let distinct = {
            let mut t: Vec<&TeamId> = members.iter().map(|m| &m.team).collect();
            t.sort();
            t.dedup();
            t.len()
        };
        if ranks != [1, 2, 3, 4] || distinct != 4 {
            return Err(DataError::Standings {
                season,
                group,
                message: format!("expected four distinct clubs ranked 1-4, found ranks {ranks:?}"),
            });
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                // members[i] finished above members[j]
                let (upper, lower) = (&members[i].team, &members[j].team);
                let (du, de) = ratings.deltas(upper, lower, season)?;
                let decisive = match convention {
                    RankingConvention::ByUefa => du,
                    RankingConvention::ByElo => de,
                };
                if decisive == 0.0 {
                    match convention {
                        RankingConvention::ByUefa => {
                            return Err(DataError::EqualCoefficients {
                                season,
                                group: group.clone(),
                                a: upper.clone(),
                                b: lower.clone(),
                                value: ratings.uefa.get(upper, season).unwrap_or_default(),
                            })
                        }
                        RankingConvention::ByElo => {
                            out.elo_ties.push((season, group.clone(), upper.clone(), lower.clone()));
                            continue;
                        }
                    }
                }
                let tag = match convention {
                    RankingConvention::ByUefa => SampleFamily::GroupRanking,
                    RankingConvention::ByElo => SampleFamily::GroupRankingElo,
                };
                let obs = Observation {
                    y: 1,
                    delta_uefa: du,
                    delta_elo: de,
                    season,
                    tag,
                    first: upper.clone(),
                    second: lower.clone(),
                };
                out.observations.push(if decisive > 0.0 { obs } else { obs.swapped() });
            }
        }
    }
    Ok(out)
}

/// Observations split into the early and late halves used for robustness checks.
#[derive(Debug, Clone, Default)]
pub struct Periods {
    pub early: Vec<Observation>,
    pub late: Vec<Observation>,
}

impl Periods {
    pub const EARLY: (Season, Season) = (Season(2003), Season(2011));
    pub const LATE: (Season, Season) = (Season(2012), Season(2021));
    /// Left out of the late half (matches played behind closed doors).
    pub const EXCLUDED: Season = Season(2020);
}

/// Early = 2003/04-2011/12; late = 2012/13-2021/22 without 2020/21.
/// Seasons outside both ranges are dropped.
pub fn split_periods(sample: &[Observation]) -> Periods {
    let mut p = Periods::default();
    for o in sample {
        let s = o.season;
        if (Periods::EARLY.0..=Periods::EARLY.1).contains(&s) {
            p.early.push(o.clone());
        } else if (Periods::LATE.0..=Periods::LATE.1).contains(&s) && s != Periods::EXCLUDED {
            p.late.push(o.clone());
        }
    }
    p
}

/// Per-season Champions League match counts, for auditing coverage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonCoverage {
    pub group: usize,
    pub group_draws: usize,
    pub knockout: usize,
    pub single_leg: usize,
    pub finals: usize,
    pub other_cl: usize,
    pub non_cl: usize,
}

pub fn season_coverage(records: &[MatchRecord]) -> BTreeMap<Season, SeasonCoverage> {
    let mut out: BTreeMap<Season, SeasonCoverage> = BTreeMap::new();
    for r in records {
        let c = out.entry(r.season).or_default();
        if r.competition != Competition::ChampionsLeague {
            c.non_cl += 1;
            continue;
        }
        match r.stage {
            Stage::Group => {
                c.group += 1;
                c.group_draws += usize::from(r.is_draw());
            }
            Stage::Final => c.finals += 1,
            s if s.is_two_legged_knockout() && r.single_leg => c.single_leg += 1,
            s if s.is_two_legged_knockout() => c.knockout += 1,
            _ => c.other_cl += 1,
        }
    }
    out
}
