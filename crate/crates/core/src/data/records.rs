//! Match, standings and coefficient records plus their CSV readers.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::DataError;

pub const MATCH_HEADER: [&str; 12] = [
    "match_id",
    "date",
    "season",
    "competition",
    "stage",
    "home_team",
    "away_team",
    "home_goals",
    "away_goals",
    "neutral",
    "closed_doors",
    "single_leg",
];

/// Optional trailing column naming the qualifier of a two-legged tie when
/// goals alone cannot settle it (penalty shoot-outs).
pub const WINNER_COLUMN: &str = "winner";

pub const STANDINGS_HEADER: [&str; 4] = ["season", "group", "team", "rank"];
pub const COEFFICIENT_HEADER: [&str; 4] = ["season", "team", "association", "uefa_points"];
pub const ELO_SNAPSHOT_HEADER: [&str; 3] = ["season", "team", "rating"];

/// Club identifier as it appears in the input files.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TeamId(pub String);

impl TeamId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TeamId {
    fn from(s: &str) -> Self {
        TeamId(s.to_owned())
    }
}

impl From<String> for TeamId {
    fn from(s: String) -> Self {
        TeamId(s)
    }
}

/// A season such as `2003/04`, identified by the calendar year it starts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Season(pub i32);

impl Season {
    pub fn start_year(self) -> i32 {
        self.0
    }

    pub fn previous(self) -> Season {
        Season(self.0 - 1)
    }

    pub fn next(self) -> Season {
        Season(self.0 + 1)
    }

    /// July 1 of the start year.
    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.0, 7, 1).expect("valid season start")
    }

    /// June 30 of the following year; matches on this date still belong to the season.
    pub fn last_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.0 + 1, 6, 30).expect("valid season end")
    }

    /// 2019/20 finished in August 2020; its matches stay valid up to the
    /// 31st even though they fall after the June 30 snapshot.
    pub fn contains(self, date: NaiveDate) -> bool {
        let last = if self == Season(2019) {
            NaiveDate::from_ymd_opt(2020, 8, 31).expect("valid date")
        } else {
            self.last_day()
        };
        date >= self.first_day() && date <= last
    }

    /// Season a date falls into under the June 30 / July 1 boundary.
    pub fn of_date(date: NaiveDate) -> Season {
        if date.month() >= 7 {
            Season(date.year())
        } else {
            Season(date.year() - 1)
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{:02}", self.0, (self.0 + 1).rem_euclid(100))
    }
}

impl FromStr for Season {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (a, b) = s
            .split_once('/')
            .ok_or_else(|| format!("season `{s}` is not of the form YYYY/YY"))?;
        let start: i32 = a
            .parse()
            .map_err(|_| format!("season `{s}` has a non-numeric start year"))?;
        let end: i32 = b
            .parse()
            .map_err(|_| format!("season `{s}` has a non-numeric end year"))?;
        let expected = (start + 1).rem_euclid(100);
        let matches = if b.len() == 4 { end == start + 1 } else { end == expected };
        if !matches {
            return Err(format!("season `{s}` does not span consecutive years"));
        }
        Ok(Season(start))
    }
}

impl Serialize for Season {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Season {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Competition {
    #[serde(rename = "CL")]
    ChampionsLeague,
    #[serde(rename = "EL")]
    EuropaLeague,
    #[serde(rename = "ECL")]
    ConferenceLeague,
    #[serde(rename = "domestic-league")]
    DomesticLeague,
    #[serde(rename = "domestic-cup")]
    DomesticCup,
}

impl Competition {
    pub fn is_uefa(self) -> bool {
        matches!(
            self,
            Competition::ChampionsLeague | Competition::EuropaLeague | Competition::ConferenceLeague
        )
    }

    pub fn code(self) -> &'static str {
        match self {
            Competition::ChampionsLeague => "CL",
            Competition::EuropaLeague => "EL",
            Competition::ConferenceLeague => "ECL",
            Competition::DomesticLeague => "domestic-league",
            Competition::DomesticCup => "domestic-cup",
        }
    }
}

impl FromStr for Competition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "CL" => Competition::ChampionsLeague,
            "EL" => Competition::EuropaLeague,
            "ECL" => Competition::ConferenceLeague,
            "domestic-league" => Competition::DomesticLeague,
            "domestic-cup" => Competition::DomesticCup,
            other => return Err(format!("unknown competition `{other}`")),
        })
    }
}

/// Stage of a competition. Ordering follows progression through a UEFA tournament.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "other")]
    Other,
    #[serde(rename = "group")]
    Group,
    #[serde(rename = "league-phase")]
    LeaguePhase,
    #[serde(rename = "R16")]
    RoundOf16,
    #[serde(rename = "QF")]
    QuarterFinal,
    #[serde(rename = "SF")]
    SemiFinal,
    #[serde(rename = "final")]
    Final,
}

impl Stage {
    pub fn code(self) -> &'static str {
        match self {
            Stage::Other => "other",
            Stage::Group => "group",
            Stage::LeaguePhase => "league-phase",
            Stage::RoundOf16 => "R16",
            Stage::QuarterFinal => "QF",
            Stage::SemiFinal => "SF",
            Stage::Final => "final",
        }
    }

    /// Two-legged knockout rounds (the final is a single match).
    pub fn is_two_legged_knockout(self) -> bool {
        matches!(self, Stage::RoundOf16 | Stage::QuarterFinal | Stage::SemiFinal)
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "group" => Stage::Group,
            "league-phase" => Stage::LeaguePhase,
            "R16" => Stage::RoundOf16,
            "QF" => Stage::QuarterFinal,
            "SF" => Stage::SemiFinal,
            "final" => Stage::Final,
            "other" => Stage::Other,
            other => return Err(format!("unknown stage `{other}`")),
        })
    }
}

/// One played match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: String,
    pub date: NaiveDate,
    pub season: Season,
    pub competition: Competition,
    pub stage: Stage,
    pub home_team: TeamId,
    pub away_team: TeamId,
    pub home_goals: u32,
    pub away_goals: u32,
    pub neutral_venue: bool,
    pub behind_closed_doors: bool,
    /// Knockout tie decided in a single match (2019/20 quarter- and semi-finals).
    pub single_leg: bool,
    /// Qualifier of the tie, when recorded.
    pub winner: Option<TeamId>,
}

impl MatchRecord {
    pub fn is_draw(&self) -> bool {
        self.home_goals == self.away_goals
    }

    pub fn goal_diff(&self) -> u32 {
        self.home_goals.abs_diff(self.away_goals)
    }

    /// Checks the record invariants; returns the offending field and reason.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        if self.home_team == self.away_team {
            return Err(("away_team", format!("team `{}` plays itself", self.home_team)));
        }
        if !self.season.contains(self.date) {
            return Err((
                "date",
                format!("{} lies outside season {}", self.date, self.season),
            ));
        }
        if let Some(w) = &self.winner {
            if w != &self.home_team && w != &self.away_team {
                return Err(("winner", format!("`{w}` did not play in this match")));
            }
        }
        Ok(())
    }
}

/// Final position of a club in a four-team group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStanding {
    pub season: Season,
    pub group: String,
    pub team: TeamId,
    pub rank: u8,
}

/// Club coefficient snapshot at the start of a season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub season: Season,
    pub team: TeamId,
    pub association: String,
    pub uefa_points: f64,
}

/// Rating in force for a club during a season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRow {
    pub season: Season,
    pub team: TeamId,
    pub rating: f64,
}

fn field_error(line: u64, field: &str, message: impl Into<String>) -> DataError {
    DataError::Field {
        line,
        field: field.to_owned(),
        message: message.into(),
    }
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" | "n" | "f" => Some(false),
        "1" | "true" | "yes" | "y" | "t" => Some(true),
        _ => None,
    }
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    header: &'a [&'a str],
    line: u64,
}

impl Row<'_> {
    fn raw(&self, field: &str) -> Result<&str, DataError> {
        let idx = self
            .header
            .iter()
            .position(|h| *h == field)
            .expect("field belongs to the header");
        self.record
            .get(idx)
            .map(str::trim)
            .ok_or_else(|| field_error(self.line, field, "missing value"))
    }

    fn parse<T: FromStr>(&self, field: &str) -> Result<T, DataError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(field)?;
        raw.parse::<T>()
            .map_err(|e| field_error(self.line, field, format!("`{raw}`: {e}")))
    }

    fn non_empty(&self, field: &str) -> Result<String, DataError> {
        let raw = self.raw(field)?;
        if raw.is_empty() {
            return Err(field_error(self.line, field, "empty value"));
        }
        Ok(raw.to_owned())
    }

    fn flag(&self, field: &str) -> Result<bool, DataError> {
        let raw = self.raw(field)?;
        parse_bool(raw).ok_or_else(|| field_error(self.line, field, format!("`{raw}` is not a boolean")))
    }
}

fn open_reader<R: std::io::Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn check_header(found: &csv::StringRecord, expected: &[&str], optional: &[&str]) -> Result<(), DataError> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    let base_ok = found.len() >= expected.len() && found[..expected.len()] == *expected;
    let extra_ok = found[expected.len().min(found.len())..]
        .iter()
        .all(|h| optional.contains(h));
    if base_ok && extra_ok {
        Ok(())
    } else {
        Err(DataError::Header {
            expected: expected.join(","),
            found: found.join(","),
        })
    }
}

fn records_of<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord), DataError>> + '_ {
    reader.records().map(|r| {
        let rec = r.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            DataError::Field {
                line,
                field: String::from("<row>"),
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        Ok((line, rec))
    })
}

fn read_path(path: &Path) -> Result<std::fs::File, DataError> {
    std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads `matches.csv`. Row order is preserved.
pub fn parse_matches(path: impl AsRef<Path>) -> Result<Vec<MatchRecord>, DataError> {
    read_matches(read_path(path.as_ref())?)
}

pub fn read_matches<R: std::io::Read>(input: R) -> Result<Vec<MatchRecord>, DataError> {
    let mut reader = open_reader(input);
    let header_row = reader.headers().map_err(|e| DataError::Header {
        expected: MATCH_HEADER.join(","),
        found: e.to_string(),
    })?;
    check_header(header_row, &MATCH_HEADER, &[WINNER_COLUMN])?;
    let has_winner = header_row.len() > MATCH_HEADER.len();
    let mut header: Vec<&str> = MATCH_HEADER.to_vec();
    if has_winner {
        header.push(WINNER_COLUMN);
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in records_of(&mut reader) {
        let (line, record) = item?;
        if record.len() != header.len() {
            return Err(field_error(
                line,
                "<row>",
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let row = Row {
            record: &record,
            header: &header,
            line,
        };
        let match_id = row.non_empty("match_id")?;
        let date = {
            let raw = row.raw("date")?;
            NaiveDate::parse_from_str(raw, "%Y-%m-%d")
                .map_err(|e| field_error(line, "date", format!("`{raw}`: {e}")))?
        };
        let goals = |field: &str| -> Result<u32, DataError> {
            let raw = row.raw(field)?;
            let v: i64 = raw
                .parse()
                .map_err(|_| field_error(line, field, format!("`{raw}` is not an integer")))?;
            u32::try_from(v).map_err(|_| field_error(line, field, format!("{v} is negative")))
        };
        let winner = if has_winner {
            let raw = row.raw(WINNER_COLUMN)?;
            (!raw.is_empty()).then(|| TeamId::from(raw))
        } else {
            None
        };
        let rec = MatchRecord {
            match_id: match_id.clone(),
            date,
            season: row.parse("season")?,
            competition: row.parse("competition")?,
            stage: row.parse("stage")?,
            home_team: TeamId(row.non_empty("home_team")?),
            away_team: TeamId(row.non_empty("away_team")?),
            home_goals: goals("home_goals")?,
            away_goals: goals("away_goals")?,
            neutral_venue: row.flag("neutral")?,
            behind_closed_doors: row.flag("closed_doors")?,
            single_leg: row.flag("single_leg")?,
            winner,
        };
        rec.check().map_err(|(field, msg)| field_error(line, field, msg))?;
        if !seen.insert(match_id.clone()) {
            return Err(DataError::DuplicateMatch { match_id, line });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_standings(path: impl AsRef<Path>) -> Result<Vec<GroupStanding>, DataError> {
    read_standings(read_path(path.as_ref())?)
}

pub fn read_standings<R: std::io::Read>(input: R) -> Result<Vec<GroupStanding>, DataError> {
    let mut reader = open_reader(input);
    let header_row = reader.headers().map_err(|e| DataError::Header {
        expected: STANDINGS_HEADER.join(","),
        found: e.to_string(),
    })?;
    check_header(header_row, &STANDINGS_HEADER, &[])?;
    let mut out = Vec::new();
    for item in records_of(&mut reader) {
        let (line, record) = item?;
        let row = Row {
            record: &record,
            header: &STANDINGS_HEADER,
            line,
        };
        let rank: u8 = row.parse("rank")?;
        if !(1..=4).contains(&rank) {
            return Err(field_error(line, "rank", format!("{rank} is outside 1..=4")));
        }
        out.push(GroupStanding {
            season: row.parse("season")?,
            group: row.non_empty("group")?,
            team: TeamId(row.non_empty("team")?),
            rank,
        });
    }
    Ok(out)
}

pub fn parse_coefficients(path: impl AsRef<Path>) -> Result<Vec<CoefficientRow>, DataError> {
    read_coefficients(read_path(path.as_ref())?)
}

pub fn read_coefficients<R: std::io::Read>(input: R) -> Result<Vec<CoefficientRow>, DataError> {
    let mut reader = open_reader(input);
    let header_row = reader.headers().map_err(|e| DataError::Header {
        expected: COEFFICIENT_HEADER.join(","),
        found: e.to_string(),
    })?;
    check_header(header_row, &COEFFICIENT_HEADER, &[])?;
    let mut out = Vec::new();
    for item in records_of(&mut reader) {
        let (line, record) = item?;
        let row = Row {
            record: &record,
            header: &COEFFICIENT_HEADER,
            line,
        };
        let uefa_points: f64 = row.parse("uefa_points")?;
        if !uefa_points.is_finite() || uefa_points < 0.0 {
            return Err(field_error(line, "uefa_points", format!("{uefa_points} is not a non-negative number")));
        }
        out.push(CoefficientRow {
            season: row.parse("season")?,
            team: TeamId(row.non_empty("team")?),
            association: row.non_empty("association")?,
            uefa_points,
        });
    }
    Ok(out)
}

pub fn parse_elo_snapshots(path: impl AsRef<Path>) -> Result<Vec<RatingRow>, DataError> {
    read_elo_snapshots(read_path(path.as_ref())?)
}

pub fn read_elo_snapshots<R: std::io::Read>(input: R) -> Result<Vec<RatingRow>, DataError> {
    let mut reader = open_reader(input);
    let header_row = reader.headers().map_err(|e| DataError::Header {
        expected: ELO_SNAPSHOT_HEADER.join(","),
        found: e.to_string(),
    })?;
    check_header(header_row, &ELO_SNAPSHOT_HEADER, &[])?;
    let mut out = Vec::new();
    for item in records_of(&mut reader) {
        let (line, record) = item?;
        let row = Row {
            record: &record,
            header: &ELO_SNAPSHOT_HEADER,
            line,
        };
        let rating: f64 = row.parse("rating")?;
        if !rating.is_finite() {
            return Err(field_error(line, "rating", "non-finite rating"));
        }
        out.push(RatingRow {
            season: row.parse("season")?,
            team: TeamId(row.non_empty("team")?),
            rating,
        });
    }
    Ok(out)
}

/// Writes matches in the `matches.csv` layout (with the winner column when any record has one).
pub fn write_matches<W: std::io::Write>(out: W, records: &[MatchRecord]) -> Result<(), DataError> {
    let with_winner = records.iter().any(|r| r.winner.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = MATCH_HEADER.to_vec();
    if with_winner {
        header.push(WINNER_COLUMN);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.match_id.clone(),
            r.date.format("%Y-%m-%d").to_string(),
            r.season.to_string(),
            r.competition.code().to_owned(),
            r.stage.code().to_owned(),
            r.home_team.0.clone(),
            r.away_team.0.clone(),
            r.home_goals.to_string(),
            r.away_goals.to_string(),
            r.neutral_venue.to_string(),
            r.behind_closed_doors.to_string(),
            r.single_leg.to_string(),
        ];
        if with_winner {
            row.push(r.winner.as_ref().map(|t| t.0.clone()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
