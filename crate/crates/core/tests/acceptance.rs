//! Acceptance run: one PASS/FAIL line per criterion with its wall time.
//! Exits non-zero when a criterion fails for any reason other than missing
//! external data.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucl_core::data::{
    parse_coefficients, parse_elo_snapshots, parse_matches, parse_standings, RatingKind, RatingTable, SampleFamily,
    TeamId,
};
use ucl_core::draw::{draw, validate, DrawInput};
use ucl_core::elo::{expected_score, EloParams, EloState, MatchResult};
use ucl_core::evaluation::{run_all, FullReport, SampleSet};
use ucl_core::glm::{
    cox_snell_r2, cox_snell_upper_bound, fit_logistic, log_likelihood, mcfadden_r2, nagelkerke_r2, roc_auc,
    DesignMatrix, ModelReport,
};
use ucl_core::simulate::{simulate_league, OutcomeModel};

enum Outcome {
    Pass(String),
    Fail(String),
    /// Needs data this checkout does not have; reported as a failure.
    Unavailable(String),
}

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn elo_engine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let clubs: Vec<TeamId> = (0..40).map(|i| TeamId::from(format!("c{i}"))).collect();
    let p = EloParams::default();
    let mut state = EloState::default();
    let start = 40.0 * p.initial_rating;
    for c in &clubs {
        state.ratings.insert(c.clone(), p.initial_rating);
    }
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let pair: Vec<&TeamId> = clubs.choose_multiple(&mut rng, 2).collect();
        let result = MatchResult::from_goals(rng.gen_range(0..6), rng.gen_range(0..6));
        state = state.update(pair[0], pair[1], result, &p, rng.gen()).map_err(|e| e.to_string())?.0;
        worst = worst.max((state.total() - start).abs());
    }
    ensure(worst <= 1e-9, || format!("rating sum drifted by {worst:e}"))?;

    let neutral = EloParams { home_advantage: 0.0, ..p };
    let mut asym: f64 = 0.0;
    for _ in 0..10_000 {
        let (low, gap) = (rng.gen_range(800.0..2200.0), rng.gen_range(0.5..600.0));
        let s = expected_score(low, low + gap, &neutral, true).unwrap() + expected_score(low + gap, low, &neutral, true).unwrap();
        asym = asym.max((s - 1.0).abs());
        let (a, b) = (TeamId::from("low"), TeamId::from("high"));
        let mut st = EloState::default();
        st.ratings.insert(a.clone(), low);
        st.ratings.insert(b.clone(), low + gap);
        let (home, away) = if rng.gen() { (&a, &b) } else { (&b, &a) };
        let next = st.update(home, away, MatchResult::draw(), &neutral, true).unwrap().0;
        ensure(next.rating(&a, &neutral) > low, || format!("draw lowered {low} against {}", low + gap))?;
    }
    ensure(asym <= 1e-12, || format!("symmetry error {asym:e}"))?;
    Ok(format!("sum drift {worst:.1e}, symmetry {asym:.1e}"))
}

fn glm_oracle() -> Check {
    let d = DesignMatrix::binary(&[("x", &X20)], &Y20).unwrap();
    let m = fit_logistic(&d).map_err(|e| e.to_string())?;
    let (best, _, _) = grid_optimum();
    let gap = (m.log_lik_fit - best).abs();
    ensure(gap < 1e-6, || format!("log-likelihood {} vs grid {best}", m.log_lik_fit))?;
    let par = m.parameters();
    let h = 1e-6;
    let norm = (0..par.len())
        .map(|k| {
            let (mut up, mut down) = (par.clone(), par.clone());
            up[k] += h;
            down[k] -= h;
            ((log_likelihood(&d, &up, None) - log_likelihood(&d, &down, None)) / (2.0 * h)).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    ensure(norm < 1e-5, || format!("gradient norm {norm:e}"))?;
    Ok(format!("grid gap {gap:.1e}, gradient {norm:.1e}"))
}

fn metrics() -> Check {
    let y = [1, 0, 1, 1, 0, 1, 0, 1, 1, 1];
    let null = fit_logistic(&DesignMatrix::binary(&[], &y).unwrap()).map_err(|e| e.to_string())?;
    let r2 = [cox_snell_r2(&null), nagelkerke_r2(&null), mcfadden_r2(&null).unwrap_or(f64::NAN)];
    ensure(r2.iter().all(|v| v.abs() < 1e-12), || format!("null model R2 {r2:?}"))?;

    for (pos, n) in [(7usize, 10usize), (1, 20), (61, 100)] {
        let y: Vec<u8> = (0..n).map(|i| u8::from(i < pos)).collect();
        let m = fit_logistic(&DesignMatrix::binary(&[], &y).unwrap()).map_err(|e| e.to_string())?;
        let p = pos as f64 / n as f64;
        let closed = 1.0 - (p.powf(p) * (1.0 - p).powf(1.0 - p)).powi(2);
        let got = cox_snell_upper_bound(&m);
        ensure((got - closed).abs() < 1e-12, || format!("bound {got} vs {closed} at p = {p}"))?;
    }

    let sep = roc_auc(&[0.1, 0.2, 0.3, 0.7, 0.8, 0.9], &[false, false, false, true, true, true]).unwrap();
    ensure(sep == 1.0, || format!("separated AUC {sep}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let scores: Vec<f64> = (0..10_000).map(|_| rng.gen()).collect();
    let mut labels: Vec<bool> = (0..10_000).map(|i| i % 2 == 0).collect();
    labels.shuffle(&mut rng);
    let shuffled = roc_auc(&scores, &labels).unwrap();
    ensure((shuffled - 0.5).abs() < 0.02, || format!("shuffled AUC {shuffled}"))?;

    for n in 2..=200usize {
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..12) as f64 / 4.0).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        labels[0] = true;
        labels[n - 1] = false;
        let (fast, slow) = (roc_auc(&scores, &labels).unwrap(), brute_auc(&scores, &labels));
        ensure(fast == slow, || format!("n = {n}: AUC {fast} vs pair count {slow}"))?;
    }
    Ok(format!("shuffled AUC {shuffled:.4}"))
}

fn affine_rescaling() -> Check {
    let (x, y) = noisy_sample(500, 21);
    let scaled: Vec<f64> = x.iter().map(|v| v / 100.0).collect();
    let d1 = DesignMatrix::binary(&[("Elo", &x)], &y).unwrap();
    let d2 = DesignMatrix::binary(&[("Elo", &scaled)], &y).unwrap();
    let (m1, m2) = (fit_logistic(&d1).unwrap(), fit_logistic(&d2).unwrap());
    let (r1, r2) = (ModelReport::new(&m1, &d1).unwrap(), ModelReport::new(&m2, &d2).unwrap());
    let diffs = [
        r1.log_lik_fit - r2.log_lik_fit,
        r1.cox_snell_r2 - r2.cox_snell_r2,
        r1.nagelkerke_r2 - r2.nagelkerke_r2,
        r1.mcfadden_r2.unwrap() - r2.mcfadden_r2.unwrap(),
        r1.classification_rate - r2.classification_rate,
        r1.auc[0].1 - r2.auc[0].1,
    ];
    let worst = diffs.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    ensure(worst < 1e-9, || format!("fit statistics differ by {worst:e}"))?;
    let b1 = m1.coefficient("Elo").unwrap().estimate;
    let b2 = m2.coefficient("Elo").unwrap().estimate;
    ensure((b2 - 100.0 * b1).abs() < 1e-6, || format!("slope {b2} vs 100 x {b1}"))?;
    Ok(format!("max statistic gap {worst:.1e}"))
}

fn load(dir: &Path) -> Result<FullReport, String> {
    let e = |x: &dyn std::fmt::Display| x.to_string();
    let matches = parse_matches(dir.join("matches.csv")).map_err(|x| e(&x))?;
    let standings = parse_standings(dir.join("standings.csv")).map_err(|x| e(&x))?;
    let uefa = RatingTable::from_coefficients(&parse_coefficients(dir.join("coefficients.csv")).map_err(|x| e(&x))?);
    let elo = RatingTable::from_ratings(
        RatingKind::Elo,
        &parse_elo_snapshots(dir.join("elo.csv")).map_err(|x| e(&x))?,
    );
    let samples = SampleSet::build(&matches, &standings, &uefa, &elo).map_err(|x| e(&x))?;
    run_all(&samples).map_err(|x| e(&x))
}

fn model_two(report: &FullReport, family: SampleFamily) -> Result<&ModelReport, String> {
    report
        .suites
        .iter()
        .find(|s| s.family == family)
        .and_then(|s| s.model("(2)"))
        .map(|m| &m.report)
        .ok_or_else(|| format!("no model (2) for {}", family.label()))
}

fn replication_on(dir: &Path) -> Check {
    let report = load(dir)?;
    let sizes: Vec<usize> = report.naive.rows.iter().map(|r| r.n).collect();
    ensure(sizes == [1402, 260, 912], || format!("sample sizes {sizes:?}"))?;
    let want = [(70.68, 73.32), (61.92, 65.00), (75.22, 78.51)];
    for (row, (u, e)) in report.naive.rows.iter().zip(want) {
        ensure((row.uefa - u).abs() <= 0.5 && (row.elo - e).abs() <= 0.5, || {
            format!("{}: naive {:.2}/{:.2}, expected {u}/{e}", row.sample, row.uefa, row.elo)
        })?;
    }
    let m = model_two(&report, SampleFamily::GroupMatch)?;
    let auc = m.auc[0].1;
    ensure((m.nagelkerke_r2 - 0.367).abs() <= 0.01 && (auc - 0.814).abs() <= 0.01, || {
        format!("group model (2): Nagelkerke {:.3}, AUC {auc:.3}", m.nagelkerke_r2)
    })?;
    Ok(format!("naive and model (2) within tolerance on {}", dir.display()))
}

/// The bundled synthetic data has no target figures, but it does
/// pin down the pipeline: sample construction, the golden report and the
/// Elo-over-coefficient ordering the synthetic generator builds in.
fn synthetic_gates() -> Check {
    let dir = fixtures().join("synthetic");
    let report = load(&dir)?;
    let golden = std::fs::read_to_string(fixtures().join("golden/suite.json")).map_err(|e| e.to_string())?;
    ensure(report.to_json() == golden, || "suite differs from the golden report".into())?;
    let sizes: Vec<usize> = report.naive.rows.iter().map(|r| r.n).collect();
    ensure(sizes[1..] == [260, 912], || format!("knockout and ranking sizes {sizes:?}"))?;
    let group = report.suites.iter().find(|s| s.family == SampleFamily::GroupMatch).unwrap();
    let (uefa, elo) = (&group.model("(1)").unwrap().report, &group.model("(2)").unwrap().report);
    ensure(elo.auc[0].1 > uefa.auc[0].1 && elo.nagelkerke_r2 > uefa.nagelkerke_r2, || {
        "Elo does not beat the coefficient on group matches".into()
    })?;
    Ok(format!("sizes {sizes:?}, group AUC {:.3} vs {:.3}", elo.auc[0].1, uefa.auc[0].1))
}

fn replication() -> Outcome {
    match std::env::var_os("UCL_REPLICATION_DATA") {
        Some(dir) => match replication_on(Path::new(&dir)) {
            Ok(s) => Outcome::Pass(s),
            Err(s) => Outcome::Fail(s),
        },
        None => match synthetic_gates() {
            Ok(s) => Outcome::Unavailable(format!(
                "match dataset not supplied (set UCL_REPLICATION_DATA); synthetic gates pass: {s}"
            )),
            Err(s) => Outcome::Fail(s),
        },
    }
}

fn draws() -> Check {
    let league = DrawInput::league_2024();
    for seed in 0..10_000 {
        let s = draw(&league, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        let r = validate(&league, &s);
        ensure(r.valid, || format!("seed {seed}: {:?}", r.violations))?;
    }
    let scaled = DrawInput::scaled();
    let oracle = two_pot_schedules(&scaled);
    let mut seen = BTreeSet::new();
    for seed in 0..10_000 {
        let s = draw(&scaled, seed).map_err(|e| e.to_string())?;
        seen.insert(fixture_set(&s));
    }
    let outside = seen.difference(&oracle).count();
    ensure(outside == 0, || format!("{outside} drawn schedules are not valid"))?;
    ensure(seen == oracle, || format!("drew {} of {} valid schedules", seen.len(), oracle.len()))?;
    Ok(format!("10000 league draws valid, scaled support {} = oracle", seen.len()))
}

fn simulator() -> Check {
    let s: BTreeMap<TeamId, f64> = [("a", 1550.0), ("b", 1550.0), ("c", 1650.0), ("d", 1450.0)]
        .into_iter()
        .map(|(c, v)| (TeamId::from(c), v))
        .collect();
    let schedule = round_robin(&["a", "b", "c", "d"]);
    let runs = 1_000_000;
    let models = [
        OutcomeModel::elo_implied(EloParams::default()),
        OutcomeModel::Trinomial {
            home: (0.44, 0.0053),
            draw: (-0.11, 0.0023),
        },
    ];
    let mut notes = Vec::new();
    for model in &models {
        let exact = exact_ranks(&schedule, &s, model);
        let sim = simulate_league(&schedule, &s, model, runs, 17).map_err(|e| e.to_string())?;
        let mut gap: f64 = 0.0;
        for (i, c) in s.keys().enumerate() {
            let got = &sim.club(c).unwrap().rank_probabilities;
            for r in 0..4 {
                gap = gap.max((got[r] - exact[i][r]).abs());
            }
        }
        ensure(gap < 0.005, || format!("rank probabilities off by {gap}"))?;
        // a and b are equal in strength: top-two chances agree within 2 SE
        let q = |c: &str| {
            let r = &sim.club(&TeamId::from(c)).unwrap().rank_probabilities;
            r[0] + r[1]
        };
        let (qa, qb) = (q("a"), q("b"));
        let se = ((qa * (1.0 - qa) + qb * (1.0 - qb)) / runs as f64).sqrt();
        ensure((qa - qb).abs() < 2.0 * se, || format!("equal clubs {qa} vs {qb}, se {se}"))?;
        notes.push(format!("gap {gap:.4}"));
    }
    Ok(notes.join(", "))
}

fn determinism() -> Check {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_battery(a.path(), "2024");
    let rb = run_battery(b.path(), "2024");
    for (name, code) in &ra {
        ensure(*code == 0, || format!("{name} exited {code}"))?;
    }
    ensure(ra == rb, || "exit codes differ".into())?;
    let mut files = 0;
    for (name, _) in &ra {
        let (ta, tb) = (tree(&a.path().join(name)), tree(&b.path().join(name)));
        ensure(ta == tb, || format!("{name} output differs between runs"))?;
        files += ta.len();
    }
    Ok(format!("{} commands, {files} files identical", ra.len()))
}

fn main() {
    type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);
    fn wrap(c: Check) -> Outcome {
        match c {
            Ok(s) => Outcome::Pass(s),
            Err(s) => Outcome::Fail(s),
        }
    }
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 8] = [
        ("Elo engine conservation, symmetry and draw direction", secs(1), || wrap(elo_engine())),
        ("logistic fit against grid oracle and gradient", secs(5), || wrap(glm_oracle())),
        ("pseudo-R2 and ROC metrics", None, || wrap(metrics())),
        ("affine rescaling of the regressor", None, || wrap(affine_rescaling())),
        ("real-data baseline and model figures", secs(60), replication),
        ("league draw validity and sampler support", secs(30), || wrap(draws())),
        ("simulator against exact enumeration", None, || wrap(simulator())),
        ("byte-identical reruns of every command", None, || wrap(determinism())),
    ];
    let mut hard_failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut outcome = check();
        let took = t.elapsed();
        if let (Outcome::Pass(s), Some(b)) = (&outcome, budget) {
            if took > *b {
                outcome = Outcome::Fail(format!("took longer than {}s ({s})", b.as_secs()));
            }
        }
        let (tag, detail) = match &outcome {
            Outcome::Pass(s) => ("PASS", s),
            Outcome::Fail(s) => {
                hard_failures += 1;
                ("FAIL", s)
            }
            Outcome::Unavailable(s) => ("FAIL", s),
        };
        println!("{tag} [{}] {name} ({:.2}s): {detail}", i + 1, took.as_secs_f64());
    }
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
