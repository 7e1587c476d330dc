//! Benchmarks for the hot paths: scoreline-table construction, schedule
//! generation, single-season simulation, and the full threshold-curve
//! estimation loop.
//!
//! With the default `parallel` feature the curve benchmark runs once on a
//! single-thread rayon pool and once on an unconstrained pool, so the
//! data-parallel speedup is visible in one report. Build the benches with
//! `--no-default-features` to measure the plain sequential fallback.

use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use leaguesim::domain::ModelParams;
use leaguesim::draw::{generate_schedule, PotAssignment};
use leaguesim::io::{parse_schedule_csv, parse_teams_csv};
use leaguesim::montecarlo::{threshold_curve, ScheduleSource, SeasonSimulator, SimConfig};
use leaguesim::scoreline::{scoreline_matrix, GoalRates};

fn data(file: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

fn params() -> ModelParams {
    ModelParams::new(0.242, 0.286, 0.301, 0.105, 1778.02, 140.43).unwrap()
}

fn bench_scoreline_matrix(c: &mut Criterion) {
    let rates = GoalRates::new(1.72, 1.27).unwrap();
    c.bench_function("scoreline_matrix max_goals=10", |b| {
        b.iter(|| scoreline_matrix(std::hint::black_box(rates), 0.105, 10).unwrap())
    });
}

fn bench_generate_schedule(c: &mut Criterion) {
    let teams = parse_teams_csv(&data("ucl_2024_25_teams.csv")).unwrap();
    let pots = PotAssignment::from_teams(&teams).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("generate_schedule 36 teams", |b| {
        b.iter(|| generate_schedule(&pots, &mut rng).unwrap())
    });
}

fn bench_single_season(c: &mut Criterion) {
    let teams = parse_teams_csv(&data("ucl_2024_25_teams.csv")).unwrap();
    let schedule = parse_schedule_csv(&data("ucl_2024_25_schedule.csv"), &teams).unwrap();
    let simulator = SeasonSimulator::new(&schedule, &params(), &SimConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("season run (144 fixtures)", |b| {
        b.iter(|| simulator.run(&mut rng))
    });
}

fn bench_threshold_curve(c: &mut Criterion) {
    let teams = parse_teams_csv(&data("ucl_2024_25_teams.csv")).unwrap();
    let schedule = parse_schedule_csv(&data("ucl_2024_25_schedule.csv"), &teams).unwrap();
    let p = params();
    let config = SimConfig {
        n_runs: 1_000,
        master_seed: 9,
        ..SimConfig::default()
    };

    let mut group = c.benchmark_group("threshold_curve 1k runs");
    group.sample_size(20);
    if cfg!(feature = "parallel") {
        for threads in [1usize, 0] {
            let label = if threads == 1 {
                "1 worker thread".to_string()
            } else {
                format!("{} worker threads", std::thread::available_parallelism().map_or(0, |n| n.get()))
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            group.bench_function(&label, |b| {
                b.iter(|| {
                    pool.install(|| {
                        threshold_curve(ScheduleSource::Fixed(&schedule), &p, &config).unwrap()
                    })
                })
            });
        }
    } else {
        group.bench_function("sequential fallback", |b| {
            b.iter(|| threshold_curve(ScheduleSource::Fixed(&schedule), &p, &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_scoreline_matrix,
    bench_generate_schedule,
    bench_single_season,
    bench_threshold_curve
);
criterion_main!(benches);
