//! Synthetic Champions League seasons for demos and tests.
//!
//! Each club has a latent strength that drifts from season to season.
//! Match outcomes follow the Elo win expectancy of the latent strengths
//! (home advantage 65, draw factor 0.30). The observed Elo snapshot is the
//! previous season's strength plus small noise; the observed coefficient
//! is a noisy, lagged transform of it, so it is the weaker predictor by
//! construction. The season layout is fixed: 8 groups of 4, the top two
//! advance, two-legged ties from the round of 16 to the semi-finals and a
//! one-off final, with single-match quarter- and semi-finals in 2019/20.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{
    write_matches, CoefficientRow, Competition, DataError, GroupStanding, MatchRecord, RatingRow,
    Season, Stage, TeamId, STANDINGS_HEADER,
};
use crate::elo::{win_expectancy, write_snapshot_csv};
use crate::coefficient::write_coefficient_csv;
use crate::seed::SeedTree;

const GROUP_LETTERS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];
const HOME_ADVANTAGE: f64 = 65.0;
const DRAW_FACTOR: f64 = 0.30;
/// Season whose quarter- and semi-finals were single matches.
const SINGLE_LEG_SEASON: Season = Season(2019);
/// Season played without spectators.
/// Spread of true strength, kept stationary by the yearly drift.
const STRENGTH_SD: f64 = 160.0;
const PERSISTENCE: f64 = 0.97;
const CLOSED_DOORS_SEASON: Season = Season(2020);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub first_season: Season,
    pub last_season: Season,
    pub clubs: usize,
    pub associations: usize,
    /// Noise on the observed Elo snapshot.
    pub elo_noise: f64,
    /// Noise on the observed coefficient.
    pub coefficient_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            first_season: Season(2003),
            last_season: Season(2021),
            clubs: 96,
            associations: 16,
            elo_noise: 25.0,
            coefficient_noise: 18.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub matches: Vec<MatchRecord>,
    pub standings: Vec<GroupStanding>,
    pub coefficients: Vec<CoefficientRow>,
    pub elo: Vec<RatingRow>,
}

pub const SYNTH_FILES: [&str; 4] = ["matches.csv", "standings.csv", "coefficients.csv", "elo.csv"];

impl SyntheticData {
    /// Writes the four input files (`matches.csv`, `standings.csv`,
    /// `coefficients.csv`, `elo.csv`) into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), DataError> {
        let create = |name: &str| {
            let path = dir.join(name);
            std::fs::File::create(&path).map_err(|source| DataError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        write_matches(create(SYNTH_FILES[0])?, &self.matches)?;
        let mut w = csv::Writer::from_writer(create(SYNTH_FILES[1])?);
        w.write_record(STANDINGS_HEADER)?;
        for s in &self.standings {
            w.write_record([s.season.to_string(), s.group.clone(), s.team.0.clone(), s.rank.to_string()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        write_coefficient_csv(create(SYNTH_FILES[2])?, &self.coefficients)?;
        write_snapshot_csv(create(SYNTH_FILES[3])?, &self.elo)?;
        Ok(())
    }
}

struct Generator {
    rng: ChaCha8Rng,
    matches: Vec<MatchRecord>,
    closed_doors: bool,
}

impl Generator {
    /// Samples goals for one match between clubs of the given strengths.
    fn score(&mut self, home: f64, away: f64, neutral: bool) -> (u32, u32) {
        let h = if neutral { 0.0 } else { HOME_ADVANTAGE };
        let w = win_expectancy(home - away + h, 400.0);
        let draw = DRAW_FACTOR * 4.0 * w * (1.0 - w);
        let u: f64 = self.rng.gen();
        let loser_goals = [0, 0, 0, 1, 1, 2][self.rng.gen_range(0..6)];
        let margin = [1, 1, 1, 2, 2, 3][self.rng.gen_range(0..6)];
        if u < (1.0 - draw) * w {
            (loser_goals + margin, loser_goals)
        } else if u < (1.0 - draw) * w + draw {
            (loser_goals, loser_goals)
        } else {
            (loser_goals, loser_goals + margin)
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn play(
        &mut self,
        id: String,
        date: NaiveDate,
        season: Season,
        stage: Stage,
        home: &TeamId,
        away: &TeamId,
        strength: &BTreeMap<TeamId, f64>,
        neutral: bool,
        single_leg: bool,
    ) -> (u32, u32) {
        let (hg, ag) = self.score(strength[home], strength[away], neutral);
        self.matches.push(MatchRecord {
            match_id: id,
            date,
            season,
            competition: Competition::ChampionsLeague,
            stage,
            home_team: home.clone(),
            away_team: away.clone(),
            home_goals: hg,
            away_goals: ag,
            neutral_venue: neutral,
            behind_closed_doors: self.closed_doors,
            single_leg,
            winner: None,
        });
        (hg, ag)
    }

    fn coin(&mut self) -> bool {
        self.rng.gen()
    }
}

fn date(season: Season, month: u32, day: u32) -> NaiveDate {
    let year = if month >= 7 { season.0 } else { season.0 + 1 };
    NaiveDate::from_ymd_opt(year, month, day).expect("valid calendar date")
}

/// Generates every season from `first_season` to `last_season`.
pub fn generate(config: &SynthConfig) -> SyntheticData {
    let tree = SeedTree::new(config.seed).named("synth");
    let mut rng = tree.child(0).rng();
    let clubs: Vec<TeamId> = (0..config.clubs).map(|i| TeamId::from(format!("club-{i:03}"))).collect();
    let association: BTreeMap<&TeamId, String> = clubs
        .iter()
        .enumerate()
        .map(|(i, c)| (c, format!("AS{:02}", i % config.associations.max(1))))
        .collect();
    let start = Normal::new(1500.0, STRENGTH_SD).expect("valid normal");
    let drift = Normal::new(0.0, STRENGTH_SD * (1.0 - PERSISTENCE * PERSISTENCE).sqrt()).expect("valid normal");
    let elo_noise = Normal::new(0.0, config.elo_noise.max(1e-9)).expect("valid normal");
    let coef_noise = Normal::new(0.0, config.coefficient_noise.max(1e-9)).expect("valid normal");

    let mut strength: BTreeMap<TeamId, f64> = clubs.iter().map(|c| (c.clone(), start.sample(&mut rng))).collect();
    let mut history: BTreeMap<TeamId, Vec<f64>> = strength.iter().map(|(c, s)| (c.clone(), vec![*s; 5])).collect();

    let mut out = SyntheticData {
        matches: Vec::new(),
        standings: Vec::new(),
        coefficients: Vec::new(),
        elo: Vec::new(),
    };
    let mut season = config.first_season;
    while season <= config.last_season {
        // ratings observed before the season, from last season's strength
        for c in &clubs {
            let past = &history[c];
            let lagged: f64 = past[past.len() - 5..].iter().sum::<f64>() / 5.0;
            out.elo.push(RatingRow {
                season,
                team: c.clone(),
                rating: (strength[c] + elo_noise.sample(&mut rng)).round(),
            });
            let points = (40.0 + (lagged - 1500.0) / 4.0 + coef_noise.sample(&mut rng)).max(3.0);
            out.coefficients.push(CoefficientRow {
                season,
                team: c.clone(),
                association: association[c].clone(),
                uefa_points: (points * 1000.0).round() / 1000.0,
            });
        }
        // this season's true strength
        for c in &clubs {
            let s = strength.get_mut(c).expect("known club");
            *s = 1500.0 + PERSISTENCE * (*s - 1500.0) + drift.sample(&mut rng);
        }

        let mut g = Generator {
            rng: tree.child(season.0 as u64).rng(),
            matches: Vec::new(),
            closed_doors: season == CLOSED_DOORS_SEASON,
        };
        play_season(&mut g, season, &clubs, &strength, &out.coefficients, &mut out.standings);
        out.matches.append(&mut g.matches);

        for c in &clubs {
            history.get_mut(c).expect("known club").push(strength[c]);
        }
        season = season.next();
    }
    out
}

fn play_season(
    g: &mut Generator,
    season: Season,
    clubs: &[TeamId],
    strength: &BTreeMap<TeamId, f64>,
    coefficients: &[CoefficientRow],
    standings: &mut Vec<GroupStanding>,
) {
    let coef: BTreeMap<&TeamId, f64> = coefficients
        .iter()
        .filter(|r| r.season == season)
        .map(|r| (&r.team, r.uefa_points))
        .collect();
    // the 24 strongest clubs qualify directly, eight more at random
    let mut by_strength: Vec<&TeamId> = clubs.iter().collect();
    by_strength.sort_by(|a, b| strength[*b].total_cmp(&strength[*a]).then(a.cmp(b)));
    let mut field: Vec<&TeamId> = by_strength[..24].to_vec();
    let mut rest: Vec<&TeamId> = by_strength[24..].to_vec();
    rest.shuffle(&mut g.rng);
    field.extend(rest.into_iter().take(8));
    field.sort_by(|a, b| coef[*b].total_cmp(&coef[*a]).then(a.cmp(b)));

    // one club from each pot per group
    let mut groups: Vec<Vec<TeamId>> = vec![Vec::new(); 8];
    for pot in field.chunks(8) {
        let mut pot: Vec<&TeamId> = pot.to_vec();
        pot.shuffle(&mut g.rng);
        for (grp, c) in groups.iter_mut().zip(pot) {
            grp.push(c.clone());
        }
    }

    const ROUNDS: [[(usize, usize); 2]; 6] = [
        [(0, 1), (2, 3)],
        [(3, 0), (1, 2)],
        [(0, 2), (3, 1)],
        [(2, 0), (1, 3)],
        [(1, 0), (3, 2)],
        [(0, 3), (2, 1)],
    ];
    let mut winners = Vec::new();
    let mut runners_up = Vec::new();
    for (gi, grp) in groups.iter().enumerate() {
        let mut table: Vec<(i32, i32, i32, u64, usize)> = (0..4).map(|i| (0, 0, 0, 0, i)).collect();
        for (r, round) in ROUNDS.iter().enumerate() {
            let day = date(season, 9, 15) + Days::new(14 * r as u64);
            for (k, &(h, a)) in round.iter().enumerate() {
                let id = format!("{}-G{}-{}{}", season.0, GROUP_LETTERS[gi], r + 1, k + 1);
                let (hg, ag) = g.play(id, day, season, Stage::Group, &grp[h], &grp[a], strength, false, false);
                let (hp, ap) = match hg.cmp(&ag) {
                    std::cmp::Ordering::Greater => (3, 0),
                    std::cmp::Ordering::Equal => (1, 1),
                    std::cmp::Ordering::Less => (0, 3),
                };
                let d = hg as i32 - ag as i32;
                table[h].0 += hp;
                table[h].1 += d;
                table[h].2 += hg as i32;
                table[a].0 += ap;
                table[a].1 -= d;
                table[a].2 += ag as i32;
            }
        }
        for row in table.iter_mut() {
            row.3 = g.rng.gen();
        }
        table.sort_by_key(|x| std::cmp::Reverse((x.0, x.1, x.2, x.3)));
        for (rank, row) in table.iter().enumerate() {
            standings.push(GroupStanding {
                season,
                group: GROUP_LETTERS[gi].to_owned(),
                team: grp[row.4].clone(),
                rank: rank as u8 + 1,
            });
        }
        winners.push(grp[table[0].4].clone());
        runners_up.push(grp[table[1].4].clone());
    }

    // round of 16: runners-up host the first leg against a winner of another group
    let mut order: Vec<usize> = (0..8).collect();
    loop {
        order.shuffle(&mut g.rng);
        if order.iter().enumerate().all(|(i, &j)| i != j) {
            break;
        }
    }
    let mut ties: Vec<(TeamId, TeamId)> = order
        .iter()
        .enumerate()
        .map(|(i, &j)| (runners_up[i].clone(), winners[j].clone()))
        .collect();
    let rounds = [
        (Stage::RoundOf16, date(season, 2, 15)),
        (Stage::QuarterFinal, date(season, 4, 5)),
        (Stage::SemiFinal, date(season, 4, 28)),
    ];
    for (stage, first_day) in rounds {
        let single = season == SINGLE_LEG_SEASON && stage != Stage::RoundOf16;
        if single {
            g.closed_doors = true;
        }
        let mut qualified = Vec::new();
        for (t, (host1, host2)) in ties.iter().enumerate() {
            let id = |leg: usize| format!("{}-{}-{}-{}", season.0, stage.code(), t + 1, leg);
            let winner = if single {
                let day = first_day + Days::new(120);
                let (hg, ag) = g.play(id(1), day, season, stage, host1, host2, strength, true, true);
                let w = match hg.cmp(&ag) {
                    std::cmp::Ordering::Greater => host1.clone(),
                    std::cmp::Ordering::Less => host2.clone(),
                    std::cmp::Ordering::Equal => [host1, host2][g.coin() as usize].clone(),
                };
                g.matches.last_mut().expect("just played").winner = Some(w.clone());
                w
            } else {
                let (h1, a1) = g.play(id(1), first_day, season, stage, host1, host2, strength, false, false);
                let day2 = first_day + Days::new(21);
                let (h2, a2) = g.play(id(2), day2, season, stage, host2, host1, strength, false, false);
                let (goals1, goals2) = (h1 + a2, a1 + h2);
                let w = if goals1 != goals2 {
                    if goals1 > goals2 { host1 } else { host2 }
                } else if season < Season(2021) && a1 != a2 {
                    if a2 > a1 { host1 } else { host2 }
                } else {
                    [host1, host2][g.coin() as usize]
                }
                .clone();
                g.matches.last_mut().expect("just played").winner = Some(w.clone());
                w
            };
            qualified.push(winner);
        }
        qualified.shuffle(&mut g.rng);
        ties = qualified
            .chunks(2)
            .map(|p| (p[0].clone(), p.get(1).cloned().unwrap_or_else(|| p[0].clone())))
            .collect();
    }
    let (a, b) = &ties[0];
    let day = date(season, 5, 28) + Days::new(if season == SINGLE_LEG_SEASON { 80 } else { 0 });
    g.play(format!("{}-F", season.0), day, season, Stage::Final, a, b, strength, true, false);
}
