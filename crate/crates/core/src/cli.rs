//! The `ucl` command line.
//!
//! Every subcommand reads its inputs, writes its outputs under `--out-dir`
//! and nothing else. Exit status is 0 on success, 1 for bad input or usage
//! and 2 when a model cannot be fitted or a draw has no solution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficient::{write_coefficient_csv, CoefficientLedger, CoefficientError, RulesTable, DEFAULT_WINDOW};
use crate::data::{
    parse_coefficients, parse_elo_snapshots, parse_matches, parse_standings, season_coverage, DataError,
    RatingKind, RatingTable, SampleFamily, Season, SeasonCoverage, TeamId,
};
use crate::draw::{draw_with, read_pots, validate, DrawError, DrawInput, DrawOptions, Schedule, DEFAULT_NODE_LIMIT};
use crate::elo::{rate_history, write_snapshot_csv, EloError, EloParams};
use crate::evaluation::{
    fingerprint, fit_model, render_full, render_naive, render_period, render_suite, run_all, EvalError,
    Fingerprint, FullReport, ModelEntry, NaiveTable, Period, PeriodReport, SampleSet, SuiteReport, SuiteSpec,
};
use crate::simulate::{
    compare_seedings, simulate_league, OutcomeModel, SeedingStudy, SimError, DEFAULT_DRAW_FACTOR,
};
use crate::synth::{generate, SynthConfig};

const AFTER_HELP: &str = "\
Input files (CSV, header required):
  matches.csv       match_id,date,season,competition,stage,home_team,away_team,
                    home_goals,away_goals,neutral,closed_doors,single_leg[,winner]
  standings.csv     season,group,team,rank
  coefficients.csv  season,team,association,uefa_points
  elo.csv           season,team,rating
  pots.csv          club,pot,association
  schedule.csv      home,away,away_pot
  strengths.csv     club,rating
  associations.csv  club,association

Config (TOML, every key optional):
  [elo]        scale, k_factor, home_advantage, initial_rating, mov_rule
  [coefficient] window, rules (path to a rules TOML)
  [draw]       node_limit, allow_exception
  [simulate]   runs, draws, draw_factor

Exit status: 0 success, 1 invalid input or usage, 2 fit failure or infeasible draw.";

#[derive(Debug, Parser)]
#[command(name = "ucl", version, about = "Club ratings, outcome models and league-phase draws", after_help = AFTER_HELP)]
pub struct Cli {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataDir {
    /// Directory holding matches.csv, standings.csv, coefficients.csv and elo.csv.
    #[arg(long)]
    pub data_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the input files and report sizes, hashes and sample fingerprints.
    Ingest(DataDir),
    /// Replay matches through the Elo engine; writes the timeline and June 30 snapshots.
    RateElo {
        #[arg(long)]
        matches: PathBuf,
    },
    /// Compute club coefficients from UEFA matches.
    Coef {
        #[arg(long)]
        matches: PathBuf,
        /// club,association rows.
        #[arg(long)]
        associations: PathBuf,
    },
    /// Fit one model to one sample.
    Fit {
        #[command(flatten)]
        data: DataDir,
        #[arg(long)]
        family: SampleFamily,
        #[arg(long, default_value = "all")]
        period: Period,
        /// (1) coefficient, (2) Elo, (3) both.
        #[arg(long, default_value = "(2)")]
        model: String,
    },
    /// Run every evaluation: naive accuracies, model suites and period splits.
    Suite(DataDir),
    /// Draw a league-phase schedule.
    Draw {
        /// Pots file; the bundled 2024/25 pots when omitted.
        #[arg(long)]
        pots: Option<PathBuf>,
        #[arg(long, value_parser = clap::builder::BoolishValueParser::new())]
        allow_exception: Option<bool>,
    },
    /// Check a schedule against the draw rules.
    Validate {
        #[arg(long)]
        pots: Option<PathBuf>,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Simulate a schedule, or compare two seeding ratings when no schedule is given.
    Simulate {
        /// club,rating rows used as true strength (Elo scale).
        #[arg(long)]
        strengths: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long)]
        pots: Option<PathBuf>,
        /// club,rating rows for the first seeding policy.
        #[arg(long)]
        rating_a: Option<PathBuf>,
        #[arg(long)]
        rating_b: Option<PathBuf>,
        /// A three-way fit from `fit --family group-match-trinomial --model (2)`.
        #[arg(long)]
        model_json: Option<PathBuf>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        draws: Option<u64>,
    },
    /// Render a JSON report as text tables.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a synthetic dataset in the input layout.
    Synth {
        #[arg(long)]
        first_season: Option<Season>,
        #[arg(long)]
        last_season: Option<Season>,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub elo: EloParams,
    pub coefficient: CoefficientConfig,
    pub draw: DrawConfig,
    pub simulate: SimulateConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientConfig {
    pub window: u32,
    pub rules: Option<PathBuf>,
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        CoefficientConfig {
            window: DEFAULT_WINDOW,
            rules: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrawConfig {
    pub node_limit: u64,
    pub allow_exception: bool,
}

impl Default for DrawConfig {
    fn default() -> Self {
        DrawConfig {
            node_limit: DEFAULT_NODE_LIMIT,
            allow_exception: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub runs: u64,
    pub draws: u64,
    pub draw_factor: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            runs: 10_000,
            draws: 20,
            draw_factor: DEFAULT_DRAW_FACTOR,
        }
    }
}

/// Failure of a subcommand, split by exit status.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Unsolvable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Unsolvable(_) => 2,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Unsolvable(m) => f.write_str(m),
        }
    }
}

fn invalid(e: impl Display) -> CliError {
    CliError::Invalid(e.to_string())
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        invalid(e)
    }
}
impl From<EloError> for CliError {
    fn from(e: EloError) -> Self {
        invalid(e)
    }
}
impl From<CoefficientError> for CliError {
    fn from(e: CoefficientError) -> Self {
        invalid(e)
    }
}
impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Fit { .. } => CliError::Unsolvable(e.to_string()),
            EvalError::UnknownModel(_) => invalid(e),
            EvalError::Data(d) => d.into(),
        }
    }
}
impl From<DrawError> for CliError {
    fn from(e: DrawError) -> Self {
        match e {
            DrawError::Infeasible { .. } | DrawError::SearchLimit { .. } => CliError::Unsolvable(e.to_string()),
            _ => invalid(e),
        }
    }
}
impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Draw(d) => d.into(),
            other => invalid(other),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors; usage mistakes share the input status
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command; returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let config = match &cli.config {
        Some(p) => {
            let text = read_text(p)?;
            toml::from_str::<Config>(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))?
        }
        None => Config::default(),
    };
    config.elo.validate()?;
    let out = Output::new(&cli.out_dir)?;
    match &cli.command {
        Command::Ingest(d) => ingest(&out, &d.data_dir),
        Command::RateElo { matches } => {
            let records = parse_matches(matches)?;
            let timeline = rate_history(&records, &config.elo)?;
            let mut csv = csv::Writer::from_writer(Vec::new());
            csv.write_record(["date", "match_id", "home", "away", "delta", "home_after", "away_after"])
                .map_err(invalid)?;
            for e in &timeline.entries {
                csv.write_record([
                    e.date.to_string(),
                    e.match_id.clone(),
                    e.home.0.clone(),
                    e.away.0.clone(),
                    format!("{:.6}", e.delta),
                    format!("{:.6}", e.home_after),
                    format!("{:.6}", e.away_after),
                ])
                .map_err(invalid)?;
            }
            let timeline_csv = csv.into_inner().map_err(invalid)?;
            // the opening season has no earlier snapshot to draw on
            let seasons: Vec<Season> = seasons_of(records.iter().map(|r| r.season))
                .into_iter()
                .filter(|s| s.previous().last_day() >= timeline.start)
                .collect();
            let mut snapshot = Vec::new();
            write_snapshot_csv(&mut snapshot, &timeline.season_snapshots(&seasons)?).map_err(invalid)?;
            Ok(vec![out.write("elo_timeline.csv", &timeline_csv)?, out.write("elo.csv", &snapshot)?])
        }
        Command::Coef { matches, associations } => {
            let records = parse_matches(matches)?;
            let membership: BTreeMap<TeamId, String> = read_pairs(associations, "association")?
                .into_iter()
                .collect();
            let rules = match &config.coefficient.rules {
                Some(p) => RulesTable::load(p)?,
                None => RulesTable::default(),
            };
            let ledger = CoefficientLedger::from_matches(&records, &rules, membership)?;
            let mut seasons = seasons_of(records.iter().map(|r| r.season));
            if let Some(last) = seasons.last().copied() {
                seasons.push(last.next());
            }
            let rows = ledger.coefficient_rows(&seasons, config.coefficient.window)?;
            let mut buf = Vec::new();
            write_coefficient_csv(&mut buf, &rows).map_err(invalid)?;
            Ok(vec![out.write("coefficients.csv", &buf)?])
        }
        Command::Fit {
            data,
            family,
            period,
            model,
        } => {
            let samples = load_samples(&data.data_dir)?;
            let spec = SuiteSpec {
                family: *family,
                period: *period,
            };
            let entry = fit_model(samples.get(*family), spec, model)?;
            let json = serde_json::to_string_pretty(&FitOutput { spec, entry }).expect("fit serializes");
            Ok(vec![out.write("fit.json", json.as_bytes())?])
        }
        Command::Suite(d) => {
            let samples = load_samples(&d.data_dir)?;
            let report = run_all(&samples)?;
            Ok(vec![
                out.write("suite.json", report.to_json().as_bytes())?,
                out.write("suite.txt", render_full(&report).as_bytes())?,
            ])
        }
        Command::Draw { pots, allow_exception } => {
            let allow = allow_exception.unwrap_or(config.draw.allow_exception);
            let input = load_pots(pots.as_deref(), allow)?;
            let outcome = draw_with(
                &input,
                cli.seed,
                DrawOptions {
                    node_limit: config.draw.node_limit,
                },
            )?;
            let report = validate(&input, &outcome.schedule);
            if !report.valid {
                return Err(invalid(format!("drawn schedule fails validation: {:?}", report.violations)));
            }
            let mut csv = Vec::new();
            outcome.schedule.write_csv(&mut csv)?;
            let json = serde_json::to_string_pretty(&DrawOutput {
                seed: cli.seed,
                exceptions_used: outcome.exceptions_used,
                nodes: outcome.nodes,
                schedule: &outcome.schedule,
            })
            .expect("draw serializes");
            Ok(vec![out.write("schedule.csv", &csv)?, out.write("schedule.json", json.as_bytes())?])
        }
        Command::Validate { pots, schedule } => {
            let input = load_pots(pots.as_deref(), config.draw.allow_exception)?;
            let schedule = read_schedule(schedule)?;
            let report = validate(&input, &schedule);
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            let path = out.write("validity.json", json.as_bytes())?;
            if report.valid {
                Ok(vec![path])
            } else {
                Err(invalid(format!(
                    "schedule breaks {} rule(s); see {}",
                    report.violations.len(),
                    path.display()
                )))
            }
        }
        Command::Simulate {
            strengths,
            schedule,
            pots,
            rating_a,
            rating_b,
            model_json,
            runs,
            draws,
        } => {
            let strength = read_ratings(strengths)?;
            let model = match model_json {
                Some(p) => {
                    let fit: FitOutput = serde_json::from_str(&read_text(p)?)
                        .map_err(|e| invalid(format!("{}: {e}", p.display())))?;
                    OutcomeModel::from_report(&fit.entry.report)?
                }
                None => OutcomeModel::EloImplied {
                    params: config.elo.clone(),
                    draw_factor: config.simulate.draw_factor,
                },
            };
            let runs = runs.unwrap_or(config.simulate.runs);
            if let Some(s) = schedule {
                let schedule = read_schedule(s)?;
                let dist = simulate_league(&schedule, &strength, &model, runs, cli.seed)?;
                let mut csv = Vec::new();
                dist.write_csv(&mut csv).map_err(invalid)?;
                return Ok(vec![
                    out.write("standings.json", dist.to_json().as_bytes())?,
                    out.write("ranks.csv", &csv)?,
                ]);
            }
            let (Some(a), Some(b)) = (rating_a, rating_b) else {
                return Err(invalid("simulate needs --schedule, or both --rating-a and --rating-b"));
            };
            let population = load_pots(pots.as_deref(), config.draw.allow_exception)?;
            let study = SeedingStudy {
                draws: draws.unwrap_or(config.simulate.draws),
                runs,
            };
            let report = compare_seedings(
                &population,
                &read_ratings(a)?,
                &read_ratings(b)?,
                &strength,
                &model,
                study,
                cli.seed,
            )?;
            Ok(vec![out.write("fairness.json", report.to_json().as_bytes())?])
        }
        Command::Report { input } => {
            let text = read_text(input)?;
            let rendered = render_json(&text).ok_or_else(|| {
                invalid(format!("{}: not a suite, period, naive or fit report", input.display()))
            })?;
            print!("{rendered}");
            Ok(vec![out.write("report.txt", rendered.as_bytes())?])
        }
        Command::Synth {
            first_season,
            last_season,
        } => {
            let mut sc = SynthConfig {
                seed: cli.seed,
                ..SynthConfig::default()
            };
            sc.first_season = first_season.unwrap_or(sc.first_season);
            sc.last_season = last_season.unwrap_or(sc.last_season);
            if sc.first_season > sc.last_season {
                return Err(invalid("first season after last season"));
            }
            generate(&sc).write_dir(&out.dir)?;
            Ok(crate::synth::SYNTH_FILES.iter().map(|f| out.dir.join(f)).collect())
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FitOutput {
    spec: SuiteSpec,
    entry: ModelEntry,
}

#[derive(Serialize)]
struct DrawOutput<'a> {
    seed: u64,
    exceptions_used: bool,
    nodes: u64,
    schedule: &'a Schedule,
}

#[derive(Serialize)]
struct FileSummary {
    name: String,
    rows: usize,
    sha256: String,
}

#[derive(Serialize)]
struct IngestOutput {
    files: Vec<FileSummary>,
    coverage: BTreeMap<Season, SeasonCoverage>,
    samples: BTreeMap<String, Fingerprint>,
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| invalid(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn seasons_of(it: impl Iterator<Item = Season>) -> Vec<Season> {
    let mut v: Vec<Season> = it.collect();
    v.sort();
    v.dedup();
    v
}

fn load_pots(path: Option<&Path>, allow: bool) -> Result<DrawInput, CliError> {
    Ok(match path {
        Some(p) => read_pots(p, allow)?,
        None => DrawInput::from_rows(&DrawInput::league_2024().rows(), allow)?,
    })
}

fn read_schedule(path: &Path) -> Result<Schedule, CliError> {
    let f = fs::File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(Schedule::parse_csv(f)?)
}

/// Two-column `club,<value>` file.
fn read_pairs(path: &Path, value: &str) -> Result<Vec<(TeamId, String)>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let header = rdr.headers().map_err(invalid)?.clone();
    if header.iter().collect::<Vec<_>>() != ["club", value] {
        return Err(invalid(format!(
            "{}: header must be `club,{value}`, found `{}`",
            path.display(),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            Ok((TeamId::from(r[0].trim()), r[1].trim().to_owned()))
        })
        .collect()
}

fn read_ratings(path: &Path) -> Result<BTreeMap<TeamId, f64>, CliError> {
    read_pairs(path, "rating")?
        .into_iter()
        .map(|(club, v)| {
            let x: f64 = v
                .parse()
                .map_err(|_| invalid(format!("{}: rating `{v}` for {club} is not a number", path.display())))?;
            if !x.is_finite() {
                return Err(invalid(format!("{}: rating for {club} is not finite", path.display())));
            }
            Ok((club, x))
        })
        .collect()
}

fn load_samples(dir: &Path) -> Result<SampleSet, CliError> {
    let matches = parse_matches(dir.join("matches.csv"))?;
    let standings = parse_standings(dir.join("standings.csv"))?;
    let uefa = RatingTable::from_coefficients(&parse_coefficients(dir.join("coefficients.csv"))?);
    let elo = RatingTable::from_ratings(RatingKind::Elo, &parse_elo_snapshots(dir.join("elo.csv"))?);
    Ok(SampleSet::build(&matches, &standings, &uefa, &elo)?)
}

fn ingest(out: &Output, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let matches = parse_matches(dir.join("matches.csv"))?;
    let standings = parse_standings(dir.join("standings.csv"))?;
    let coefficients = parse_coefficients(dir.join("coefficients.csv"))?;
    let elo = parse_elo_snapshots(dir.join("elo.csv"))?;
    let rows = [matches.len(), standings.len(), coefficients.len(), elo.len()];
    let files = crate::synth::SYNTH_FILES
        .iter()
        .zip(rows)
        .map(|(name, rows)| {
            let bytes = fs::read(dir.join(name)).map_err(|e| invalid(format!("{name}: {e}")))?;
            let digest = Sha256::digest(&bytes);
            Ok(FileSummary {
                name: name.to_string(),
                rows,
                sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let uefa = RatingTable::from_coefficients(&coefficients);
    let elo = RatingTable::from_ratings(RatingKind::Elo, &elo);
    let set = SampleSet::build(&matches, &standings, &uefa, &elo)?;
    let samples = [
        SampleFamily::GroupMatch,
        SampleFamily::Knockout,
        SampleFamily::GroupRanking,
        SampleFamily::GroupRankingElo,
        SampleFamily::GroupMatchTrinomial,
    ]
    .into_iter()
    .map(|f| (f.to_string(), fingerprint(set.get(f))))
    .collect();
    let report = IngestOutput {
        files,
        coverage: season_coverage(&matches),
        samples,
    };
    let json = serde_json::to_string_pretty(&report).expect("ingest serializes");
    Ok(vec![out.write("ingest.json", json.as_bytes())?])
}

/// Renders any of the JSON reports this tool writes.
pub fn render_json(text: &str) -> Option<String> {
    if let Ok(r) = serde_json::from_str::<FullReport>(text) {
        return Some(render_full(&r));
    }
    if let Ok(r) = serde_json::from_str::<SuiteReport>(text) {
        return Some(render_suite(&r));
    }
    if let Ok(r) = serde_json::from_str::<PeriodReport>(text) {
        return Some(render_period(&r));
    }
    if let Ok(r) = serde_json::from_str::<NaiveTable>(text) {
        return Some(render_naive(&r));
    }
    if let Ok(r) = serde_json::from_str::<FitOutput>(text) {
        let single = SuiteReport {
            family: r.spec.family,
            period: r.spec.period,
            fingerprint: Fingerprint {
                rows: r.entry.report.n,
                sha256: String::new(),
            },
            outcomes: BTreeMap::new(),
            naive: Vec::new(),
            models: vec![r.entry],
            notes: Vec::new(),
        };
        return Some(render_suite(&single));
    }
    None
}
