//! Oracles shared by the integration tests. None of them call the solver or
//! the simulator they check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ucl_core::data::TeamId;
use ucl_core::draw::{DrawInput, Fixture, PotRow, Schedule};
use ucl_core::simulate::{outcome_probs, OutcomeModel};

pub type FixtureSet = Vec<(String, String)>;

pub fn fixture_set(schedule: &Schedule) -> FixtureSet {
    let mut v: FixtureSet = schedule
        .fixtures
        .iter()
        .map(|f| (f.home.0.clone(), f.away.0.clone()))
        .collect();
    v.sort();
    v
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every valid schedule of a two-pot instance without exceptions. Each
/// ordered pot pair (p, q) is a bijection "club i of p hosts club σ(i) of q";
/// a schedule is valid when no pair meets twice, nobody plays itself and no
/// fixture joins two clubs of one association.
pub fn two_pot_schedules(input: &DrawInput) -> BTreeSet<FixtureSet> {
    assert_eq!(input.pots.len(), 2, "oracle handles two pots");
    let k = input.pot_size();
    let perms = permutations(k);
    let pots = &input.pots;
    let assoc = |c: &TeamId| &input.association[c];
    let by_name: BTreeMap<&str, &TeamId> = input.clubs().map(|c| (c.as_str(), c)).collect();
    let mut out = BTreeSet::new();
    for s11 in &perms {
        for s12 in &perms {
            for s21 in &perms {
                for s22 in &perms {
                    let mut fixtures: FixtureSet = Vec::new();
                    for (p, q, s) in [(0, 0, s11), (0, 1, s12), (1, 0, s21), (1, 1, s22)] {
                        for i in 0..k {
                            fixtures.push((pots[p][i].0.clone(), pots[q][s[i]].0.clone()));
                        }
                    }
                    let mut pairs = BTreeSet::new();
                    let ok = fixtures.iter().all(|(h, a)| {
                        let key = if h < a { (h, a) } else { (a, h) };
                        h != a && pairs.insert(key) && assoc(by_name[h.as_str()]) != assoc(by_name[a.as_str()])
                    });
                    if ok {
                        fixtures.sort();
                        out.insert(fixtures);
                    }
                }
            }
        }
    }
    out
}

/// Two pots of five. Association A has four clubs, so an exception-free
/// schedule does not exist but one with exceptions does.
pub fn exception_rows() -> Vec<PotRow> {
    let assoc = ["A", "A", "A", "B", "C", "A", "D", "E", "F", "G"];
    (0..10)
        .map(|i| PotRow {
            club: TeamId::from(format!("c{i}")),
            pot: i / 5 + 1,
            association: assoc[i].to_owned(),
        })
        .collect()
}

/// Double round robin between `clubs`, as a schedule.
pub fn round_robin(clubs: &[&str]) -> Schedule {
    let mut fixtures = Vec::new();
    for h in clubs {
        for a in clubs {
            if h != a {
                fixtures.push(Fixture {
                    home: TeamId::from(*h),
                    away: TeamId::from(*a),
                    away_pot: 1,
                });
            }
        }
    }
    Schedule { fixtures }
}

/// Exact rank distribution of a small league: every outcome combination is
/// enumerated, clubs level on points are ordered by points among
/// themselves, and clubs still level take each of their places with equal
/// probability. Returns `probs[club][rank]` with clubs in sorted order.
pub fn exact_ranks(schedule: &Schedule, strengths: &BTreeMap<TeamId, f64>, model: &OutcomeModel) -> Vec<Vec<f64>> {
    let clubs: Vec<TeamId> = strengths.keys().cloned().collect();
    let n = clubs.len();
    let idx = |c: &TeamId| clubs.iter().position(|x| x == c).unwrap();
    let games: Vec<(usize, usize, [f64; 3])> = schedule
        .fixtures
        .iter()
        .map(|f| {
            let p = outcome_probs(model, strengths[&f.home] - strengths[&f.away], true);
            (idx(&f.home), idx(&f.away), [p.win, p.draw, p.loss])
        })
        .collect();
    let m = games.len();
    let mut probs = vec![vec![0.0; n]; n];
    let total = 3usize.pow(m as u32);
    let mut outcome = vec![0usize; m];
    for code in 0..total {
        let mut c = code;
        let mut p = 1.0;
        for (g, o) in outcome.iter_mut().enumerate() {
            *o = c % 3;
            c /= 3;
            p *= games[g].2[*o];
        }
        let mut pts = vec![0u32; n];
        for (g, &o) in outcome.iter().enumerate() {
            let (h, a, _) = games[g];
            match o {
                0 => pts[h] += 3,
                1 => {
                    pts[h] += 1;
                    pts[a] += 1
                }
                _ => pts[a] += 3,
            }
        }
        // points among the clubs level with each club
        let h2h: Vec<u32> = (0..n)
            .map(|x| {
                outcome
                    .iter()
                    .enumerate()
                    .filter(|(g, _)| {
                        let (h, a, _) = games[*g];
                        (h == x || a == x) && pts[h] == pts[a]
                    })
                    .map(|(g, &o)| {
                        let (h, _, _) = games[g];
                        match (o, h == x) {
                            (0, true) | (2, false) => 3,
                            (1, _) => 1,
                            _ => 0,
                        }
                    })
                    .sum()
            })
            .collect();
        for x in 0..n {
            let above = (0..n).filter(|&y| (pts[y], h2h[y]) > (pts[x], h2h[x])).count();
            let level = (0..n).filter(|&y| (pts[y], h2h[y]) == (pts[x], h2h[x])).count();
            for r in above..above + level {
                probs[x][r] += p / level as f64;
            }
        }
    }
    probs
}

pub fn fixtures() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Runs the `ucl` binary with `args` from `cwd`.
pub fn ucl(cwd: &std::path::Path, args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_ucl"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("ucl runs")
}

/// Every file under `dir` with its contents.
pub fn tree(dir: &std::path::Path) -> BTreeMap<std::path::PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Writes a `club,rating` file over the bundled league clubs.
pub fn write_ratings(path: &std::path::Path, f: impl Fn(usize) -> f64) {
    let mut s = String::from("club,rating\n");
    for (i, c) in DrawInput::league_2024().clubs().enumerate() {
        s.push_str(&format!("\"{}\",{}\n", c, f(i)));
    }
    std::fs::write(path, s).unwrap();
}

/// Runs every subcommand once with outputs under `work/<command>`; returns
/// the exit status of each. Inputs are written to `work/in`.
pub fn run_battery(work: &std::path::Path, seed: &str) -> Vec<(String, i32)> {
    let input = work.join("in");
    std::fs::create_dir_all(&input).unwrap();
    write_ratings(&input.join("strength.csv"), |i| 2000.0 - 11.0 * i as f64 + ((i * 7) % 5) as f64 * 20.0);
    write_ratings(&input.join("coef.csv"), |i| 120.0 - 2.5 * i as f64 + ((i * 3) % 7) as f64 * 4.0);
    let data = fixtures().join("synthetic");
    let coefficients = std::fs::read_to_string(data.join("coefficients.csv")).unwrap();
    let mut members: BTreeMap<String, String> = BTreeMap::new();
    for line in coefficients.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        members.insert(f[1].to_owned(), f[2].to_owned());
    }
    let mut assoc = String::from("club,association\n");
    for (c, a) in &members {
        assoc.push_str(&format!("{c},{a}\n"));
    }
    std::fs::write(input.join("associations.csv"), assoc).unwrap();

    let p = |x: std::path::PathBuf| x.to_string_lossy().into_owned();
    let data_s = p(data.clone());
    let matches = p(data.join("matches.csv"));
    let out = |name: &str| p(work.join(name));
    let schedule = p(work.join("draw").join("schedule.csv"));
    let fit = p(work.join("fit").join("fit.json"));
    let suite = p(work.join("suite").join("suite.json"));
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("synth", vec!["synth".into()]),
        ("ingest", vec!["ingest".into(), "--data-dir".into(), data_s.clone()]),
        ("rate-elo", vec!["rate-elo".into(), "--matches".into(), matches.clone()]),
        (
            "coef",
            vec![
                "coef".into(),
                "--matches".into(),
                matches,
                "--associations".into(),
                p(input.join("associations.csv")),
            ],
        ),
        (
            "fit",
            vec![
                "fit".into(),
                "--data-dir".into(),
                data_s.clone(),
                "--family".into(),
                "group-match-trinomial".into(),
                "--model".into(),
                "(2)".into(),
            ],
        ),
        ("suite", vec!["suite".into(), "--data-dir".into(), data_s]),
        ("report", vec!["report".into(), "--input".into(), suite]),
        ("draw", vec!["draw".into()]),
        ("validate", vec!["validate".into(), "--schedule".into(), schedule.clone()]),
        (
            "simulate-schedule",
            vec![
                "simulate".into(),
                "--strengths".into(),
                p(input.join("strength.csv")),
                "--schedule".into(),
                schedule,
                "--model-json".into(),
                fit,
                "--runs".into(),
                "3000".into(),
            ],
        ),
        (
            "simulate-seedings",
            vec![
                "simulate".into(),
                "--strengths".into(),
                p(input.join("strength.csv")),
                "--rating-a".into(),
                p(input.join("coef.csv")),
                "--rating-b".into(),
                p(input.join("strength.csv")),
                "--draws".into(),
                "3".into(),
                "--runs".into(),
                "500".into(),
            ],
        ),
    ];
    commands
        .into_iter()
        .map(|(name, mut args)| {
            args.extend(["--seed".into(), seed.into(), "--out-dir".into(), out(name)]);
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            let o = ucl(work, &args);
            (name.to_owned(), o.status.code().unwrap_or(-1))
        })
        .collect()
}

// 20 rows, overlapping classes
pub const X20: [f64; 20] = [
    -2.1, -1.7, -1.3, -1.1, -0.8, -0.6, -0.4, -0.3, -0.1, 0.0, 0.2, 0.3, 0.5, 0.6, 0.9, 1.1, 1.4, 1.6, 1.9, 2.4,
];
pub const Y20: [u8; 20] = [0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1, 1];

pub fn ll(b0: f64, b1: f64) -> f64 {
    X20.iter()
        .zip(Y20)
        .map(|(&x, y)| {
            let p = 1.0 / (1.0 + (-(b0 + b1 * x)).exp());
            if y == 1 {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}

/// Exhaustive grid over [-4, 4]², then repeated exhaustive grids around the best point.
pub fn grid_optimum() -> (f64, f64, f64) {
    let (mut c0, mut c1, mut half) = (0.0, 0.0, 4.0);
    let steps = 80;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for _ in 0..8 {
        for i in 0..=steps {
            for j in 0..=steps {
                let b0 = c0 - half + 2.0 * half * i as f64 / steps as f64;
                let b1 = c1 - half + 2.0 * half * j as f64 / steps as f64;
                let v = ll(b0, b1);
                if v > best.0 {
                    best = (v, b0, b1);
                }
            }
        }
        c0 = best.1;
        c1 = best.2;
        half *= 0.1;
    }
    best
}

/// Concordant-pair fraction, ties worth one half.
pub fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] && !labels[j] {
                den += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}

pub fn noisy_sample(n: usize, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-300.0..300.0)).collect();
    let y = x
        .iter()
        .map(|v| u8::from(rng.gen::<f64>() < 1.0 / (1.0 + (-v / 150.0f64).exp())))
        .collect();
    (x, y)
}
