//! End-to-end acceptance suite.
//!
//! Each test prints one `[PASS]`/`[FAIL]` line per checked quantity (run
//! with `--nocapture` to see them) and panics if any check in the group
//! fails. Reference values come from the published 2024/25 analysis this
//! engine reimplements; tolerances are pinned in the constants below.

use std::path::{Path, PathBuf};

use leaguesim::domain::{Fixture, ModelParams, Schedule, TeamRecord};
use leaguesim::draw::{generate_schedule, validate_schedule, PotAssignment};
use leaguesim::fit::{fit, FitOptions, ModelKind};
use leaguesim::io::{emit_curve_csv, parse_matches_csv, parse_teams_csv};
use leaguesim::montecarlo::{
    qualification_credit, rho_sweep, summarize_matches, threshold_curve, Credit, ScheduleSource,
    SeasonSimulator, SimConfig,
};
use leaguesim::scoreline::{expected_goals, outcome_probs, scoreline_matrix, tau, GoalRates};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

/// Collects per-check results and reports them as one block.
struct Gate {
    name: &'static str,
    failures: Vec<String>,
}

impl Gate {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, what: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {what}: {detail}", self.name);
        if !pass {
            self.failures.push(format!("{what}: {detail}"));
        }
    }

    fn within(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check(
            what,
            (got - want).abs() <= tol,
            format!("{got:.6} vs {want} (tolerance {tol})"),
        );
    }

    fn finish(self) {
        assert!(
            self.failures.is_empty(),
            "{}: {} check(s) failed:\n  {}",
            self.name,
            self.failures.len(),
            self.failures.join("\n  ")
        );
    }
}

/// National-league coefficients (independent model).
fn params_national() -> ModelParams {
    ModelParams::new(0.225, 0.207, 0.220, 0.0, 1778.0, 143.0).unwrap()
}

/// Champions-League Dixon-Coles coefficients with the pooled
/// standardisation constants of the bundled training matches.
fn params_ucl_dc() -> ModelParams {
    let matches = parse_matches_csv(&data("ucl_2024_25_results.csv")).unwrap();
    let n = matches.len() as f64;
    let mean = matches
        .iter()
        .map(|m| m.home_elo + m.away_elo)
        .sum::<f64>()
        / (2.0 * n);
    let ss = matches
        .iter()
        .map(|m| (m.home_elo - mean).powi(2) + (m.away_elo - mean).powi(2))
        .sum::<f64>();
    let sd = (ss / (2.0 * n - 1.0)).sqrt();
    ModelParams::new(0.242, 0.286, 0.301, 0.105, mean, sd).unwrap()
}

fn ucl_teams() -> Vec<TeamRecord> {
    parse_teams_csv(&data("ucl_2024_25_teams.csv")).unwrap()
}

fn official_schedule(teams: &[TeamRecord]) -> Schedule {
    leaguesim::io::parse_schedule_csv(&data("ucl_2024_25_schedule.csv"), teams).unwrap()
}

/// Equal-Elo goal rates and exact-enumeration outcome shares
/// under the national-league coefficients.
#[test]
fn predictor_reference_values() {
    let mut gate = Gate::new("predictor reference");
    let start = std::time::Instant::now();

    let rates = expected_goals(&params_national(), 1405.0, 1405.0).unwrap();
    gate.within("equal-Elo lambda", rates.lambda(), 1.56, 0.005);
    gate.within("equal-Elo mu", rates.mu(), 1.25, 0.005);

    let matrix = scoreline_matrix(rates, 0.0, 40).unwrap();
    let o = outcome_probs(&matrix);
    gate.within("home-win share (pp)", 100.0 * o.home, 44.3, 0.2);
    gate.within("draw share (pp)", 100.0 * o.draw, 24.9, 0.2);
    gate.within("away-win share (pp)", 100.0 * o.away, 30.8, 0.2);

    let elapsed = start.elapsed();
    gate.check(
        "runtime",
        elapsed.as_secs_f64() < 1.0,
        format!("{elapsed:?} (budget 1s)"),
    );
    gate.finish();
}

/// Low-score correction sizes at the fitted dependence
/// parameter.
#[test]
fn low_score_correction_reference() {
    let mut gate = Gate::new("low-score correction");
    let start = std::time::Instant::now();

    let p = params_ucl_dc();
    let rates = expected_goals(&p, 1700.0, 1700.0).unwrap();
    let one_one_reduction = 100.0 * (1.0 - tau(1, 1, rates, p.rho).unwrap());
    let nil_nil_reduction = 100.0 * (1.0 - tau(0, 0, rates, p.rho).unwrap());
    gate.check(
        "1:1 mass reduction",
        (one_one_reduction - 10.5).abs() < 1e-9,
        format!("{one_one_reduction:.4}% vs 10.5% exactly"),
    );
    gate.within("0:0 mass reduction (pp)", nil_nil_reduction, 23.0, 0.1);

    let elapsed = start.elapsed();
    gate.check(
        "runtime",
        elapsed.as_secs_f64() < 1.0,
        format!("{elapsed:?} (budget 1s)"),
    );
    gate.finish();
}

/// Average draw counts across the dependence sweep with
/// random schedules.
#[test]
fn draw_count_sensitivity_reference() {
    let mut gate = Gate::new("draw-count sweep");
    let start = std::time::Instant::now();

    let teams = ucl_teams();
    let pots = PotAssignment::from_teams(&teams).unwrap();
    let params = params_ucl_dc();
    let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.02).collect();
    let config = SimConfig {
        n_runs: 10_000,
        master_seed: 99,
        ..SimConfig::default()
    };
    let sweep = rho_sweep(&pots, &params, &grid, &config).unwrap();

    gate.check(
        "grid size",
        sweep.rho_grid.len() == 11,
        format!("{} points", sweep.rho_grid.len()),
    );
    gate.within("avg draws at rho=0", sweep.avg_draws[0], 28.19, 0.5);
    gate.within("avg draws at rho=0.2", sweep.avg_draws[10], 22.94, 0.5);
    gate.check(
        "monotone decreasing",
        sweep.avg_draws.windows(2).all(|w| w[0] > w[1]),
        format!("{:?}", sweep.avg_draws),
    );

    let elapsed = start.elapsed();
    gate.check(
        "runtime",
        elapsed.as_secs_f64() < 120.0,
        format!("{elapsed:?} (budget 120s)"),
    );
    gate.finish();
}

/// Points-threshold probabilities under the official schedule.
#[test]
fn official_schedule_thresholds() {
    let mut gate = Gate::new("official-schedule thresholds");
    let teams = ucl_teams();
    let schedule = official_schedule(&teams);
    let pots = PotAssignment::from_teams(&teams).unwrap();
    gate.check(
        "official schedule valid",
        validate_schedule(&schedule, &pots).is_empty(),
        format!("{} fixtures", schedule.fixtures().len()),
    );

    let params = params_ucl_dc();
    let config = SimConfig {
        n_runs: 10_000,
        master_seed: 20_250_811,
        ..SimConfig::default()
    };
    let result = threshold_curve(ScheduleSource::Fixed(&schedule), &params, &config).unwrap();
    let p15 = 100.0 * result.direct.probability_at(15).unwrap();
    let p16 = 100.0 * result.direct.probability_at(16).unwrap();
    gate.within("P(direct | 15 pts) (pp)", p15, 22.3, 2.0);
    gate.within("P(direct | 16 pts) (pp)", p16, 74.5, 2.0);

    // Cross-check the published schedule sensitivity: random schedules move
    // these thresholds by at most three percentage points.
    let random = threshold_curve(ScheduleSource::Random(&pots), &params, &config).unwrap();
    for points in [15u32, 16] {
        let fixed = 100.0 * result.direct.probability_at(points).unwrap();
        let rand = 100.0 * random.direct.probability_at(points).unwrap();
        gate.check(
            &format!("random-draw sensitivity at {points} pts"),
            (fixed - rand).abs() <= 3.0,
            format!("official {fixed:.1} vs random {rand:.1} (pp)"),
        );
    }
    gate.finish();
}

/// Bulk parameter recovery on synthetic data. At least 47 of
/// 50 datasets must recover every parameter within three standard errors,
/// and the Dixon-Coles fit must never score below the nested independent
/// fit.
#[test]
fn parameter_recovery_bulk() {
    use rand::Rng;
    use rayon::prelude::*;

    let mut gate = Gate::new("parameter recovery");
    let start = std::time::Instant::now();

    let truth = ModelParams::new(0.24, 0.28, 0.3, 0.08, 1778.0, 143.0).unwrap();
    let n_matches = 5_000;

    let results: Vec<(bool, bool)> = (0..50u64)
        .into_par_iter()
        .map(|dataset| {
            let mut rng = ChaCha8Rng::seed_from_u64(5_000 + dataset);
            let mut matches = Vec::with_capacity(n_matches);
            for i in 0..n_matches {
                let home_elo = truth.elo_mean + truth.elo_sd * rng.random_range(-2.0..2.0);
                let away_elo = truth.elo_mean + truth.elo_sd * rng.random_range(-2.0..2.0);
                let rates = expected_goals(&truth, home_elo, away_elo).unwrap();
                let matrix = scoreline_matrix(rates, truth.rho, 14).unwrap();
                let s = leaguesim::scoreline::sample_scoreline(&matrix, &mut rng);
                matches.push(
                    leaguesim::domain::MatchObservation::new(
                        format!("h{i}"),
                        format!("a{i}"),
                        s.home_goals,
                        s.away_goals,
                        home_elo,
                        away_elo,
                    )
                    .unwrap(),
                );
            }
            let dc = fit(&matches, ModelKind::DixonColes, &FitOptions::default()).unwrap();
            let ind = fit(&matches, ModelKind::Independent, &FitOptions::default()).unwrap();
            let nested_ok = dc.log_likelihood >= ind.log_likelihood - 1e-6;

            let ses = dc.std_errors.as_ref().expect("standard errors");
            let scale = dc.params.elo_sd / truth.elo_sd;
            let est = [dc.params.beta0, dc.params.beta1, dc.params.beta2, dc.params.rho];
            let tru = [truth.beta0, truth.beta1 * scale, truth.beta2, truth.rho];
            let recovered = (0..4).all(|k| (est[k] - tru[k]).abs() <= 3.0 * ses[k]);
            (recovered, nested_ok)
        })
        .collect();

    let recovered = results.iter().filter(|r| r.0).count();
    let nested = results.iter().filter(|r| r.1).count();
    gate.check(
        "recovery within 3 se",
        recovered >= 47,
        format!("{recovered}/50 datasets (need >= 47)"),
    );
    gate.check(
        "nested likelihood ordering",
        nested == 50,
        format!("{nested}/50 datasets"),
    );

    let elapsed = start.elapsed();
    gate.check(
        "runtime",
        elapsed.as_secs_f64() < 300.0,
        format!("{elapsed:?} (budget 300s)"),
    );
    gate.finish();
}

/// Monte Carlo credits agree with full outcome enumeration on
/// a four-team toy league with a top-2 cutoff.
#[test]
fn toy_league_exact_oracle() {
    let mut gate = Gate::new("toy-league oracle");

    let elos = [1790.0, 1730.0, 1685.0, 1650.0];
    let teams: Vec<TeamRecord> = elos
        .iter()
        .enumerate()
        .map(|(i, &e)| TeamRecord::new(format!("t{i}"), format!("Team {i}"), e, None, None).unwrap())
        .collect();
    // Four fixtures; every team plays twice.
    let fixtures = vec![
        Fixture::new("t0", "t1").unwrap(),
        Fixture::new("t2", "t3").unwrap(),
        Fixture::new("t3", "t0").unwrap(),
        Fixture::new("t1", "t2").unwrap(),
    ];
    let schedule = Schedule::new(fixtures.clone(), teams.clone()).unwrap();
    let params = ModelParams::new(0.21, 0.25, 0.27, 0.06, 1710.0, 60.0).unwrap();
    let config = SimConfig {
        n_runs: 1,
        master_seed: 0,
        max_goals: 10,
        top_k_direct: 2,
        top_k_playoff: 3,
    };

    // Oracle: enumerate all 3^4 win/draw/loss combinations exactly.
    let outcome_table: Vec<[f64; 3]> = fixtures
        .iter()
        .map(|f| {
            let home = teams.iter().find(|t| t.team_id == f.home_id).unwrap();
            let away = teams.iter().find(|t| t.team_id == f.away_id).unwrap();
            let rates = expected_goals(&params, home.elo, away.elo).unwrap();
            let o = outcome_probs(&scoreline_matrix(rates, params.rho, config.max_goals).unwrap());
            [o.home, o.draw, o.away]
        })
        .collect();
    let idx_of = |id: &str| teams.iter().position(|t| t.team_id == id).unwrap();
    let mut expected_credit = [0.0f64; 4];
    for combo in 0..(3usize.pow(4)) {
        let mut prob = 1.0;
        let mut points = [0u32; 4];
        let mut c = combo;
        for (f, table) in fixtures.iter().zip(&outcome_table) {
            let outcome = c % 3;
            c /= 3;
            prob *= table[outcome];
            let (h, a) = (idx_of(&f.home_id), idx_of(&f.away_id));
            match outcome {
                0 => points[h] += 3,
                1 => {
                    points[h] += 1;
                    points[a] += 1;
                }
                _ => points[a] += 3,
            }
        }
        let mut rows: Vec<leaguesim::domain::StandingsRow> = (0..4)
            .map(|i| leaguesim::domain::StandingsRow {
                team_id: format!("t{i}"),
                points: points[i],
                wins: 0,
                draws: 0,
                losses: 0,
                goals_for: 0,
                goals_against: 0,
            })
            .collect();
        rows.sort_by_key(|r| std::cmp::Reverse(r.points));
        let credits = qualification_credit(&rows, 2);
        for (row, credit) in rows.iter().zip(&credits) {
            expected_credit[idx_of(&row.team_id)] +=
                prob * (*credit.numer() as f64 / *credit.denom() as f64);
        }
    }

    // Monte Carlo side: one million seeded runs.
    let n_runs = 1_000_000u64;
    let simulator = SeasonSimulator::new(&schedule, &params, &config).unwrap();
    let mut credit_sum = [0.0f64; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    for _ in 0..n_runs {
        let outcome = simulator.run(&mut rng);
        for (row, credit) in outcome.standings.iter().zip(&outcome.direct_credit) {
            credit_sum[idx_of(&row.team_id)] += *credit.numer() as f64 / *credit.denom() as f64;
        }
    }

    for i in 0..4 {
        let mc = credit_sum[i] / n_runs as f64;
        let exact = expected_credit[i];
        // Spread of a [0,1]-valued credit is bounded by the Bernoulli case.
        let sigma = (exact * (1.0 - exact) / n_runs as f64).sqrt();
        gate.check(
            &format!("team t{i} credit"),
            (mc - exact).abs() <= 3.0 * sigma,
            format!("mc {mc:.6} vs exact {exact:.6} (3 sigma = {:.6})", 3.0 * sigma),
        );
    }
    gate.finish();
}

/// Per-run identities, matrix normalisation, schedule
/// validity in bulk, and byte-identical output across worker counts.
#[test]
fn simulation_invariants() {
    let mut gate = Gate::new("invariants");

    let teams = ucl_teams();
    let schedule = official_schedule(&teams);
    let pots = PotAssignment::from_teams(&teams).unwrap();
    let params = params_ucl_dc();
    let config = SimConfig {
        n_runs: 200,
        master_seed: 31,
        ..SimConfig::default()
    };

    // Per-run identities over a batch of seeded runs.
    let simulator = SeasonSimulator::new(&schedule, &params, &config).unwrap();
    let mut identities_ok = true;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = simulator.run(&mut rng);
        let points: u32 = out.standings.iter().map(|r| r.points).sum();
        identities_ok &= points == 3 * 144 - out.draws;
        identities_ok &=
            out.direct_credit.iter().sum::<Credit>() == Credit::from_integer(8);
        identities_ok &=
            out.playoff_credit.iter().sum::<Credit>() == Credit::from_integer(24);
    }
    gate.check(
        "per-run identities (sum points = 432 - draws, credits 8/24)",
        identities_ok,
        "200 runs".into(),
    );

    // Matrix normalisation across a sweep of rates and rho values.
    let mut norm_ok = true;
    let mut worst: f64 = 0.0;
    for &(lambda, mu) in &[(0.4, 0.5), (1.0, 1.0), (1.72, 1.27), (3.1, 0.7), (2.4, 2.2)] {
        let rates = GoalRates::new(lambda, mu).unwrap();
        let (lo, hi) = leaguesim::scoreline::rho_bounds(rates);
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let rho = lo + t * (hi - lo);
            let rho = rho.clamp(lo + 1e-9, hi - 1e-9);
            let m = scoreline_matrix(rates, rho, 10).unwrap();
            let total: f64 = m.iter().map(|(_, p)| p).sum();
            worst = worst.max((total - 1.0).abs());
            norm_ok &= (total - 1.0).abs() < 1e-12;
        }
    }
    gate.check(
        "matrix normalisation to 1e-12",
        norm_ok,
        format!("worst |sum - 1| = {worst:.2e}"),
    );

    // 1,000 generated schedules, zero violations.
    let mut violations = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1_000 {
        let s = generate_schedule(&pots, &mut rng).unwrap();
        violations += validate_schedule(&s, &pots).len();
    }
    gate.check(
        "1000 generated schedules valid",
        violations == 0,
        format!("{violations} violations"),
    );

    // Identical bytes from one worker thread and from many.
    let emit = |threads: usize| -> Vec<u8> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let result = pool
            .install(|| threshold_curve(ScheduleSource::Random(&pots), &params, &config))
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        emit_curve_csv(&[&result.direct, &result.playoff], &path).unwrap();
        std::fs::read(&path).unwrap()
    };
    let single = emit(1);
    let many = emit(8);
    gate.check(
        "byte-identical output across 1 and 8 worker threads",
        single == many,
        format!("{} bytes", single.len()),
    );
    gate.finish();
}

/// Descriptive statistics of the bundled 2024/25 league-phase
/// results file.
#[test]
fn descriptive_statistics_reference() {
    let mut gate = Gate::new("descriptive statistics");

    let matches = parse_matches_csv(&data("ucl_2024_25_results.csv")).unwrap();
    gate.check(
        "match count",
        matches.len() == 144,
        format!("{}", matches.len()),
    );
    let s = summarize_matches(&matches).unwrap();

    let two_dp = |v: f64| format!("{:.2}", v);
    for (what, got, want) in [
        ("home-win share %", 100.0 * s.home_win_share, "53.47"),
        ("draw share %", 100.0 * s.draw_share, "12.50"),
        ("away-win share %", 100.0 * s.away_win_share, "34.03"),
        ("avg points per match", s.avg_points_per_match, "2.88"),
        ("avg home goals", s.avg_home_goals, "1.88"),
        ("avg away goals", s.avg_away_goals, "1.39"),
        ("avg total goals", s.avg_total_goals, "3.26"),
        ("lopsided share %", 100.0 * s.lopsided_share, "15.97"),
    ] {
        let got_str = two_dp(got);
        gate.check(what, got_str == want, format!("{got_str} vs {want}"));
    }
    gate.finish();
}
