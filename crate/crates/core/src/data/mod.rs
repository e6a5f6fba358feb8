//! Input files and the regression samples built from them.
//!
//! Three sample families are produced from Champions League records:
//! decided group matches, two-legged knockout ties and pairwise group
//! rankings. A fourth, trinomial family keeps drawn group matches.

mod records;
mod samples;
mod stats;

pub use records::{
    parse_coefficients, parse_elo_snapshots, parse_matches, parse_standings, read_coefficients,
    read_elo_snapshots, read_matches, read_standings, write_matches, CoefficientRow, Competition,
    GroupStanding, MatchRecord, RatingRow, Season, Stage, TeamId, COEFFICIENT_HEADER,
    ELO_SNAPSHOT_HEADER, MATCH_HEADER, STANDINGS_HEADER, WINNER_COLUMN,
};
pub use samples::{
    build_group_match_sample, build_group_ranking_sample, build_knockout_sample,
    build_trinomial_sample, season_coverage, split_periods, GroupRankingSample, KnockoutSample,
    Observation, Periods, RankingConvention, RatingKind, RatingTable, SampleFamily,
    SeasonCoverage, TRINOMIAL_AWAY, TRINOMIAL_DRAW, TRINOMIAL_HOME,
};
pub use stats::{descriptive_stats, Descriptive};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}, field `{field}`: {message}")]
    Field {
        line: u64,
        field: String,
        message: String,
    },
    #[error("duplicate match_id `{match_id}` at line {line}")]
    DuplicateMatch { match_id: String, line: u64 },
    #[error("no {kind} rating for `{team}` in season {season}")]
    UnresolvedRating {
        kind: RatingKind,
        team: TeamId,
        season: Season,
    },
    #[error("knockout pairing failed for {season} {stage}: {message}")]
    Pairing {
        season: Season,
        stage: String,
        message: String,
    },
    #[error("standings for {season} group {group}: {message}")]
    Standings {
        season: Season,
        group: String,
        message: String,
    },
    #[error("clubs `{a}` and `{b}` share coefficient {value} in {season} group {group}")]
    EqualCoefficients {
        season: Season,
        group: String,
        a: TeamId,
        b: TeamId,
        value: f64,
    },
    #[error("statistics of an empty list are undefined")]
    EmptyInput,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
