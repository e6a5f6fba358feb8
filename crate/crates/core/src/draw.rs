//! League-phase draw: pots of equal size, every club meets one home and one
//! away opponent from each pot, clubs of one association kept apart.
//!
//! The draw is a constraint search. Each variable is a "home slot": the club
//! of pot `q` that club `a` hosts. Within a block (pot `p` hosting pot `q`)
//! the slots form a bijection, so the search keeps each block's remaining
//! domains checked for a perfect matching, picks the slot with the fewest
//! candidates first and tries candidates in seeded random order. It
//! backtracks fully, so it returns a schedule whenever one exists, and every
//! valid schedule has a positive probability of being drawn. It does not
//! sample schedules uniformly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TeamId;
use crate::seed::SeedTree;

/// Associations need at least this many clubs in the league before one of
/// their clubs may be drawn against a compatriot.
pub const EXCEPTION_MIN_CLUBS: usize = 4;
pub const DEFAULT_NODE_LIMIT: u64 = 2_000_000;
pub const POTS_HEADER: [&str; 3] = ["club", "pot", "association"];
pub const SCHEDULE_HEADER: [&str; 3] = ["home", "away", "away_pot"];
const MAX_CLUBS: usize = 128;

#[derive(Debug, Error)]
pub enum DrawError {
    #[error("draw input: {0}")]
    Input(String),
    #[error("no valid schedule exists: {detail} (tightest slot: {club} hosting pot {pot}; {nodes} search nodes)")]
    Infeasible {
        club: TeamId,
        pot: usize,
        detail: String,
        nodes: u64,
    },
    #[error("search stopped after {nodes} nodes without finding or ruling out a schedule")]
    SearchLimit { nodes: u64 },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotRow {
    pub club: TeamId,
    /// 1-based.
    pub pot: usize,
    pub association: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawInput {
    /// `pots[0]` is pot 1.
    pub pots: Vec<Vec<TeamId>>,
    pub association: BTreeMap<TeamId, String>,
    pub allow_same_association_exception: bool,
}

impl DrawInput {
    /// Checks that pots are non-empty, of equal size (at least 3), disjoint,
    /// and that every club has an association.
    pub fn new(
        pots: Vec<Vec<TeamId>>,
        association: BTreeMap<TeamId, String>,
        allow_same_association_exception: bool,
    ) -> Result<Self, DrawError> {
        if pots.is_empty() {
            return Err(DrawError::Input("no pots".into()));
        }
        let size = pots[0].len();
        if size < 3 {
            return Err(DrawError::Input(format!("pots need at least 3 clubs, pot 1 has {size}")));
        }
        let mut seen = BTreeSet::new();
        for (i, pot) in pots.iter().enumerate() {
            if pot.len() != size {
                return Err(DrawError::Input(format!(
                    "pot {} has {} clubs, pot 1 has {size}",
                    i + 1,
                    pot.len()
                )));
            }
            for c in pot {
                if !seen.insert(c.clone()) {
                    return Err(DrawError::Input(format!("club `{c}` appears twice")));
                }
                if !association.contains_key(c) {
                    return Err(DrawError::Input(format!("club `{c}` has no association")));
                }
            }
        }
        if seen.len() > MAX_CLUBS {
            return Err(DrawError::Input(format!("at most {MAX_CLUBS} clubs are supported")));
        }
        let association = association.into_iter().filter(|(c, _)| seen.contains(c)).collect();
        Ok(DrawInput {
            pots,
            association,
            allow_same_association_exception,
        })
    }

    /// Builds the input from `club,pot,association` rows; clubs keep file order within a pot.
    pub fn from_rows(rows: &[PotRow], allow_exception: bool) -> Result<Self, DrawError> {
        let n_pots = rows.iter().map(|r| r.pot).max().unwrap_or(0);
        if rows.iter().any(|r| r.pot == 0) {
            return Err(DrawError::Input("pots are numbered from 1".into()));
        }
        let mut pots = vec![Vec::new(); n_pots];
        let mut association = BTreeMap::new();
        for r in rows {
            pots[r.pot - 1].push(r.club.clone());
            association.insert(r.club.clone(), r.association.clone());
        }
        DrawInput::new(pots, association, allow_exception)
    }

    pub fn rows(&self) -> Vec<PotRow> {
        self.pots
            .iter()
            .enumerate()
            .flat_map(|(i, pot)| {
                pot.iter().map(move |c| PotRow {
                    club: c.clone(),
                    pot: i + 1,
                    association: self.association[c].clone(),
                })
            })
            .collect()
    }

    pub fn n_pots(&self) -> usize {
        self.pots.len()
    }

    pub fn pot_size(&self) -> usize {
        self.pots[0].len()
    }

    /// Clubs in pot order.
    pub fn clubs(&self) -> impl Iterator<Item = &TeamId> {
        self.pots.iter().flatten()
    }

    /// 1-based pot of `club`.
    pub fn pot_of(&self, club: &TeamId) -> Option<usize> {
        self.pots.iter().position(|p| p.contains(club)).map(|i| i + 1)
    }

    pub fn association_size(&self, association: &str) -> usize {
        self.association.values().filter(|a| *a == association).count()
    }

    /// The 36 clubs of the 2024/25 league phase, in their drawn pots.
    pub fn league_2024() -> DrawInput {
        parse_pots(include_str!("../fixtures/pots_2024_25.csv").as_bytes(), false)
            .expect("bundled pots are valid")
    }

    /// Eight clubs in two pots of four. Association A has three clubs and C
    /// two, which leaves 288 valid schedules: few enough to enumerate.
    pub fn scaled() -> DrawInput {
        let rows = [
            ("a1", 1, "A"),
            ("a2", 1, "A"),
            ("c1", 1, "C"),
            ("d1", 1, "D"),
            ("a3", 2, "A"),
            ("c2", 2, "C"),
            ("g1", 2, "G"),
            ("h1", 2, "H"),
        ]
        .map(|(club, pot, association)| PotRow {
            club: TeamId::from(club),
            pot,
            association: association.to_owned(),
        });
        DrawInput::from_rows(&rows, false).expect("scaled instance is valid")
    }
}

pub fn parse_pots<R: Read>(reader: R, allow_exception: bool) -> Result<DrawInput, DrawError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != POTS_HEADER {
        return Err(DrawError::Input(format!(
            "pots header must be `{}`, found `{}`",
            POTS_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    DrawInput::from_rows(&rows, allow_exception)
}

pub fn read_pots(path: &Path, allow_exception: bool) -> Result<DrawInput, DrawError> {
    let file = std::fs::File::open(path).map_err(|source| DrawError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_pots(file, allow_exception)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fixture {
    pub home: TeamId,
    pub away: TeamId,
    /// 1-based pot of the away club.
    pub away_pot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub fixtures: Vec<Fixture>,
}

impl Schedule {
    /// Opponents of `club` as (opponent, club plays at home).
    pub fn opponents(&self, club: &TeamId) -> Vec<(TeamId, bool)> {
        self.fixtures
            .iter()
            .filter_map(|f| {
                if &f.home == club {
                    Some((f.away.clone(), true))
                } else if &f.away == club {
                    Some((f.home.clone(), false))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DrawError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(SCHEDULE_HEADER)?;
        for f in &self.fixtures {
            wtr.write_record([f.home.as_str(), f.away.as_str(), &f.away_pot.to_string()])?;
        }
        wtr.flush().map_err(|source| DrawError::Io {
            path: "<schedule>".into(),
            source,
        })
    }

    pub fn parse_csv<R: Read>(reader: R) -> Result<Schedule, DrawError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != SCHEDULE_HEADER {
            return Err(DrawError::Input(format!(
                "schedule header must be `{}`, found `{}`",
                SCHEDULE_HEADER.join(","),
                header.join(",")
            )));
        }
        let mut fixtures = Vec::new();
        for rec in rdr.deserialize() {
            fixtures.push(rec?);
        }
        Ok(Schedule { fixtures })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    UnknownClub,
    SelfPlay,
    PotCount,
    HomeAway,
    DistinctOpponents,
    Association,
    ExceptionLimit,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::UnknownClub => "unknown-club",
            Rule::SelfPlay => "self-play",
            Rule::PotCount => "pot-count",
            Rule::HomeAway => "home-away",
            Rule::DistinctOpponents => "distinct-opponents",
            Rule::Association => "association",
            Rule::ExceptionLimit => "exception-limit",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub clubs: Vec<TeamId>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks every schedule rule. Violations are returned as data.
pub fn validate(input: &DrawInput, schedule: &Schedule) -> ValidityReport {
    let clubs: Vec<&TeamId> = input.clubs().collect();
    let index: BTreeMap<&TeamId, usize> = clubs.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let size = input.pot_size();
    let pot = |i: usize| i / size + 1;
    let mut assoc_size: BTreeMap<&str, usize> = BTreeMap::new();
    for a in input.association.values() {
        *assoc_size.entry(a).or_default() += 1;
    }
    let assoc: Vec<&str> = clubs.iter().map(|c| input.association[*c].as_str()).collect();

    let mut v = Vec::new();
    let mut games: Vec<Vec<(usize, bool)>> = vec![Vec::new(); clubs.len()];
    let mut same_association = vec![0usize; clubs.len()];
    for f in &schedule.fixtures {
        let (home, away) = match (index.get(&f.home), index.get(&f.away)) {
            (Some(&h), Some(&a)) => (h, a),
            _ => {
                v.push(Violation {
                    rule: Rule::UnknownClub,
                    clubs: [&f.home, &f.away]
                        .into_iter()
                        .filter(|c| !index.contains_key(c))
                        .cloned()
                        .collect(),
                    detail: "club is not in any pot".into(),
                });
                continue;
            }
        };
        if home == away {
            v.push(Violation {
                rule: Rule::SelfPlay,
                clubs: vec![f.home.clone()],
                detail: "club drawn against itself".into(),
            });
            continue;
        }
        if pot(away) != f.away_pot {
            v.push(Violation {
                rule: Rule::PotCount,
                clubs: vec![f.home.clone(), f.away.clone()],
                detail: format!("fixture lists away pot {} for a club of another pot", f.away_pot),
            });
        }
        if assoc[home] == assoc[away] {
            let eligible =
                input.allow_same_association_exception && assoc_size[assoc[home]] >= EXCEPTION_MIN_CLUBS;
            if eligible {
                same_association[home] += 1;
                same_association[away] += 1;
            } else {
                v.push(Violation {
                    rule: Rule::Association,
                    clubs: vec![f.home.clone(), f.away.clone()],
                    detail: format!("both clubs belong to {}", assoc[home]),
                });
            }
        }
        games[home].push((away, true));
        games[away].push((home, false));
    }
    for (c, g) in games.iter_mut().enumerate() {
        let club = clubs[c];
        if same_association[c] > 1 {
            v.push(Violation {
                rule: Rule::ExceptionLimit,
                clubs: vec![club.clone()],
                detail: format!("{} fixtures against clubs of the same association", same_association[c]),
            });
        }
        g.sort_unstable();
        if g.windows(2).any(|w| w[0].0 == w[1].0) {
            v.push(Violation {
                rule: Rule::DistinctOpponents,
                clubs: vec![club.clone()],
                detail: "meets the same opponent twice".into(),
            });
        }
        for p in 1..=input.n_pots() {
            let (home, away) = g
                .iter()
                .filter(|(o, _)| pot(*o) == p)
                .fold((0, 0), |(h, a), (_, at_home)| if *at_home { (h + 1, a) } else { (h, a + 1) });
            if home + away != 2 {
                v.push(Violation {
                    rule: Rule::PotCount,
                    clubs: vec![club.clone()],
                    detail: format!("{} opponents from pot {p}, expected 2", home + away),
                });
            } else if home != 1 {
                v.push(Violation {
                    rule: Rule::HomeAway,
                    clubs: vec![club.clone()],
                    detail: format!("{home} home and {away} away fixtures against pot {p}"),
                });
            }
        }
        let home = g.iter().filter(|(_, h)| *h).count();
        let away = g.len() - home;
        if home != input.n_pots() || away != input.n_pots() {
            v.push(Violation {
                rule: Rule::HomeAway,
                clubs: vec![club.clone()],
                detail: format!("{home} home and {away} away fixtures in total"),
            });
        }
    }
    v.sort();
    v.dedup();
    ValidityReport {
        valid: v.is_empty(),
        violations: v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawOptions {
    pub node_limit: u64,
}

impl Default for DrawOptions {
    fn default() -> Self {
        DrawOptions {
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrawOutcome {
    pub schedule: Schedule,
    /// True when no exception-free schedule existed.
    pub exceptions_used: bool,
    pub nodes: u64,
}

/// Draws a schedule for `input` with the given seed.
pub fn draw(input: &DrawInput, seed: u64) -> Result<Schedule, DrawError> {
    draw_with(input, seed, DrawOptions::default()).map(|o| o.schedule)
}

pub fn draw_with(input: &DrawInput, seed: u64, options: DrawOptions) -> Result<DrawOutcome, DrawError> {
    let tree = SeedTree::new(seed).named("draw");
    let mut strict = Solver::new(input, false, tree.child(0).rng(), options.node_limit);
    if let Some(state) = strict.run() {
        return Ok(DrawOutcome {
            schedule: strict.schedule(&state),
            exceptions_used: false,
            nodes: strict.nodes,
        });
    }
    if strict.nodes > strict.limit {
        return Err(DrawError::SearchLimit { nodes: strict.nodes });
    }
    let eligible = input
        .association
        .values()
        .any(|a| input.association_size(a) >= EXCEPTION_MIN_CLUBS);
    if !(input.allow_same_association_exception && eligible) {
        return Err(strict.infeasible("no exception-free schedule exists"));
    }
    let mut relaxed = Solver::new(input, true, tree.child(1).rng(), options.node_limit);
    if let Some(state) = relaxed.run() {
        return Ok(DrawOutcome {
            schedule: relaxed.schedule(&state),
            exceptions_used: true,
            nodes: strict.nodes + relaxed.nodes,
        });
    }
    if relaxed.nodes > relaxed.limit {
        return Err(DrawError::SearchLimit {
            nodes: strict.nodes + relaxed.nodes,
        });
    }
    Err(relaxed.infeasible("no schedule exists even with one same-association fixture per club"))
}

type Mask = u128;

fn bits(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

#[derive(Clone)]
struct State {
    dom: Vec<Mask>,
    value: Vec<Option<usize>>,
    exceptions: Vec<u8>,
}

struct Solver {
    clubs: Vec<TeamId>,
    k: usize,
    pot: Vec<usize>,
    members: Vec<Mask>,
    compatriots: Vec<Mask>,
    exceptions: bool,
    rng: ChaCha8Rng,
    nodes: u64,
    limit: u64,
    wipeouts: Vec<u64>,
}

impl Solver {
    fn new(input: &DrawInput, exceptions: bool, rng: ChaCha8Rng, limit: u64) -> Self {
        let clubs: Vec<TeamId> = input.clubs().cloned().collect();
        let k = input.n_pots();
        let size = input.pot_size();
        let pot: Vec<usize> = (0..clubs.len()).map(|i| i / size).collect();
        let members = (0..k)
            .map(|p| (p * size..(p + 1) * size).fold(0, |m, i| m | 1 << i))
            .collect();
        let assoc: Vec<&String> = clubs.iter().map(|c| &input.association[c]).collect();
        let compatriots: Vec<Mask> = (0..clubs.len())
            .map(|i| {
                (0..clubs.len())
                    .filter(|&j| j != i && assoc[i] == assoc[j])
                    .fold(0, |m, j| m | 1 << j)
            })
            .collect();
        let vars = clubs.len() * k;
        Solver {
            clubs,
            k,
            pot,
            members,
            compatriots,
            exceptions,
            rng,
            nodes: 0,
            limit,
            wipeouts: vec![0; vars],
        }
    }

    fn eligible(&self, club: usize) -> bool {
        self.exceptions && self.compatriots[club].count_ones() as usize + 1 >= EXCEPTION_MIN_CLUBS
    }

    fn run(&mut self) -> Option<State> {
        let n = self.clubs.len();
        let mut dom = vec![0; n * self.k];
        for a in 0..n {
            let banned = if self.eligible(a) { 0 } else { self.compatriots[a] };
            for q in 0..self.k {
                dom[a * self.k + q] = self.members[q] & !(1 << a) & !banned;
            }
        }
        let state = State {
            dom,
            value: vec![None; n * self.k],
            exceptions: vec![0; n],
        };
        if !self.consistent(&state) {
            return None;
        }
        self.search(state)
    }

    fn search(&mut self, state: State) -> Option<State> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return None;
        }
        let mut var = None;
        let mut fewest = u32::MAX;
        for (v, d) in state.dom.iter().enumerate() {
            if state.value[v].is_none() {
                let n = d.count_ones();
                if n < fewest {
                    fewest = n;
                    var = Some(v);
                    if n == 1 {
                        break;
                    }
                }
            }
        }
        let Some(var) = var else {
            return Some(state);
        };
        let mut candidates: Vec<usize> = bits(state.dom[var]).collect();
        candidates.shuffle(&mut self.rng);
        for b in candidates {
            let mut next = state.clone();
            if self.assign(&mut next, var, b) {
                if let Some(done) = self.search(next) {
                    return Some(done);
                }
                if self.nodes > self.limit {
                    return None;
                }
            }
        }
        None
    }

    fn assign(&mut self, s: &mut State, var: usize, b: usize) -> bool {
        let k = self.k;
        let a = var / k;
        let q = var % k;
        s.value[var] = Some(b);
        s.dom[var] = 1 << b;
        let p = self.pot[a];
        // one host per club within the block
        for a2 in bits(self.members[p]) {
            let v2 = a2 * k + q;
            if v2 != var && s.value[v2].is_none() {
                s.dom[v2] &= !(1 << b);
            }
        }
        // the reverse fixture would repeat the pairing
        let rev = b * k + p;
        if s.value[rev].is_none() {
            s.dom[rev] &= !(1 << a);
        }
        let mut widespread = false;
        if self.compatriots[a] >> b & 1 == 1 {
            widespread = true;
            s.exceptions[a] += 1;
            s.exceptions[b] += 1;
            for c in [a, b] {
                if s.exceptions[c] > 1 {
                    return false;
                }
                for q2 in 0..k {
                    let v = c * k + q2;
                    if s.value[v].is_none() {
                        s.dom[v] &= !self.compatriots[c];
                    }
                }
                for d in bits(self.compatriots[c]) {
                    let v = d * k + self.pot[c];
                    if s.value[v].is_none() {
                        s.dom[v] &= !(1 << c);
                    }
                }
            }
        }
        if widespread {
            self.consistent(s)
        } else {
            self.nonempty(s) && self.block_matchable(s, p, q) && self.block_matchable(s, q, p)
        }
    }

    fn nonempty(&mut self, s: &State) -> bool {
        for (v, &d) in s.dom.iter().enumerate() {
            if d == 0 {
                self.wipeouts[v] += 1;
                return false;
            }
        }
        true
    }

    fn consistent(&mut self, s: &State) -> bool {
        if !self.nonempty(s) {
            return false;
        }
        for p in 0..self.k {
            for q in 0..self.k {
                if !self.block_matchable(s, p, q) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the open slots of block (p hosts q) can still be filled with
    /// distinct clubs (Kuhn's augmenting paths on bitmasks).
    fn block_matchable(&self, s: &State, p: usize, q: usize) -> bool {
        let k = self.k;
        let mut slots = [0 as Mask; MAX_CLUBS];
        let mut n = 0;
        for a in bits(self.members[p]) {
            if s.value[a * k + q].is_none() {
                slots[n] = s.dom[a * k + q];
                n += 1;
            }
        }
        let mut owner = [usize::MAX; MAX_CLUBS];
        fn augment(i: usize, slots: &[Mask], seen: &mut Mask, owner: &mut [usize; MAX_CLUBS]) -> bool {
            for b in bits(slots[i] & !*seen) {
                *seen |= 1 << b;
                if owner[b] == usize::MAX || augment(owner[b], slots, seen, owner) {
                    owner[b] = i;
                    return true;
                }
            }
            false
        }
        (0..n).all(|i| augment(i, &slots[..n], &mut 0, &mut owner))
    }

    fn schedule(&self, s: &State) -> Schedule {
        let k = self.k;
        let fixtures = (0..s.value.len())
            .map(|v| {
                let b = s.value[v].expect("complete assignment");
                Fixture {
                    home: self.clubs[v / k].clone(),
                    away: self.clubs[b].clone(),
                    away_pot: v % k + 1,
                }
            })
            .collect();
        Schedule { fixtures }
    }

    fn infeasible(&self, detail: &str) -> DrawError {
        let (var, _) = self
            .wipeouts
            .iter()
            .enumerate()
            .max_by_key(|&(v, &w)| (w, std::cmp::Reverse(v)))
            .unwrap_or((0, &0));
        DrawError::Infeasible {
            club: self.clubs[var / self.k].clone(),
            pot: var % self.k + 1,
            detail: detail.to_owned(),
            nodes: self.nodes,
        }
    }
}

/// Per-club opponent strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClubBalance {
    pub club: TeamId,
    pub opponents: usize,
    pub mean: f64,
    pub sum: f64,
    /// 1 = hardest schedule; equal sums share the best rank.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub clubs: Vec<ClubBalance>,
    /// Largest minus smallest opponent-strength sum.
    pub spread: f64,
}

pub fn balance_metrics(schedule: &Schedule, strengths: &BTreeMap<TeamId, f64>) -> Result<BalanceReport, DrawError> {
    let mut sums: BTreeMap<&TeamId, (usize, f64)> = BTreeMap::new();
    for f in &schedule.fixtures {
        for (club, opp) in [(&f.home, &f.away), (&f.away, &f.home)] {
            let s = strengths
                .get(opp)
                .ok_or_else(|| DrawError::Input(format!("no strength for `{opp}`")))?;
            let e = sums.entry(club).or_default();
            e.0 += 1;
            e.1 += s;
        }
    }
    let all: Vec<f64> = sums.values().map(|v| v.1).collect();
    let clubs: Vec<ClubBalance> = sums
        .iter()
        .map(|(club, &(n, sum))| ClubBalance {
            club: (*club).clone(),
            opponents: n,
            mean: sum / n as f64,
            sum,
            rank: 1 + all.iter().filter(|&&o| o > sum).count(),
        })
        .collect();
    let spread = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - all.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(BalanceReport {
        clubs,
        spread: if all.is_empty() { 0.0 } else { spread },
    })
}
