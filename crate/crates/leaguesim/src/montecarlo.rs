//! Seeded, reproducible Monte Carlo simulation of full league phases.
//!
//! Every run `i` draws from its own random stream derived as a pure
//! function of `(master_seed, i)`, and per-run results are reduced in run
//! order, so curves are bit-identical whatever the worker count — including
//! the sequential build without the `parallel` feature.
//!
//! Points follow the 3/1/0 rule. Final tables are ranked by points alone;
//! ties straddling a cutoff are settled fractionally: each of the `n` tied
//! teams receives `s/n` qualification credit for the `s` remaining slots.
//! Credits are kept as exact rationals so the per-run identities (for the
//! 36-team format: direct credits sum to 8, play-off credits to 24) hold
//! exactly rather than up to rounding.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{
    CurveEntry, Cutoff, MatchObservation, ModelParams, Schedule, StandingsRow, ThresholdCurve,
};
use crate::draw::{self, PotAssignment};
use crate::error::{Error, Result};
use crate::scoreline::{self, ScorelineMatrix};

/// Exact fractional qualification credit.
pub type Credit = Ratio<u64>;

/// Simulation configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_runs: u64,
    pub master_seed: u64,
    /// Scoreline grids cover `0..=max_goals` goals per team.
    pub max_goals: u32,
    /// Ranks qualifying directly (top 8 in the 36-team format).
    pub top_k_direct: usize,
    /// Ranks reaching at least the play-offs (top 24).
    pub top_k_playoff: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_runs: 10_000,
            master_seed: 0,
            max_goals: 10,
            top_k_direct: 8,
            top_k_playoff: 24,
        }
    }
}

impl SimConfig {
    fn validate(&self, n_teams: usize) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::InvalidArgument("n_runs must be >= 1".into()));
        }
        if !(0 < self.top_k_direct
            && self.top_k_direct < self.top_k_playoff
            && self.top_k_playoff < n_teams)
        {
            return Err(Error::InvalidArgument(format!(
                "cutoffs must satisfy 0 < direct ({}) < playoff ({}) < team count ({n_teams})",
                self.top_k_direct, self.top_k_playoff
            )));
        }
        Ok(())
    }
}

/// Result of one simulated season.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Final table, sorted by points descending (ties left in team order).
    pub standings: Vec<StandingsRow>,
    /// Credit per standings row for the direct cutoff.
    pub direct_credit: Vec<Credit>,
    /// Credit per standings row for the play-off cutoff.
    pub playoff_credit: Vec<Credit>,
    /// Number of drawn matches in this run.
    pub draws: u32,
}

/// Where the schedule for each run comes from.
#[derive(Debug, Clone, Copy)]
pub enum ScheduleSource<'a> {
    /// One fixed schedule reused by every run.
    Fixed(&'a Schedule),
    /// A fresh random schedule generated per run from the pot assignment.
    Random(&'a PotAssignment),
}

/// Threshold curves plus run-level summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub direct: ThresholdCurve,
    pub playoff: ThresholdCurve,
    /// Mean number of drawn matches per run.
    pub avg_draws: f64,
    pub n_runs: u64,
}

/// Output of a dependence-parameter sensitivity sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rho_grid: Vec<f64>,
    /// Mean drawn matches per run, one entry per grid point.
    pub avg_draws: Vec<f64>,
    /// `(direct, playoff)` curve pair per grid point.
    pub curves: Vec<(ThresholdCurve, ThresholdCurve)>,
}

/// Summary statistics over a set of played matches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchSummary {
    pub n_matches: usize,
    pub home_win_share: f64,
    pub draw_share: f64,
    pub away_win_share: f64,
    /// 3/1/0 points handed out per match on average: `3 - draw_share`.
    pub avg_points_per_match: f64,
    pub avg_home_goals: f64,
    pub avg_away_goals: f64,
    pub avg_total_goals: f64,
    /// Share of matches decided by four or more goals.
    pub lopsided_share: f64,
}

/// Fractional qualification credit for the top `k` ranks.
///
/// `standings` must be sorted by points descending. Teams strictly above
/// the points value at rank `k` receive 1, teams strictly below receive 0,
/// and the tied group straddling the boundary shares the remaining slots
/// evenly.
pub fn qualification_credit(standings: &[StandingsRow], k: usize) -> Vec<Credit> {
    let n = standings.len();
    debug_assert!(standings.windows(2).all(|w| w[0].points >= w[1].points));
    if k == 0 {
        return vec![Credit::from_integer(0); n];
    }
    if k >= n {
        return vec![Credit::from_integer(1); n];
    }
    let threshold = standings[k - 1].points;
    let above = standings.iter().filter(|r| r.points > threshold).count();
    let tied = standings.iter().filter(|r| r.points == threshold).count();
    let slots = (k - above) as u64;
    standings
        .iter()
        .map(|r| {
            if r.points > threshold {
                Credit::from_integer(1)
            } else if r.points == threshold {
                Credit::new(slots, tied as u64)
            } else {
                Credit::from_integer(0)
            }
        })
        .collect()
}

/// The child generator for run `i`: same 256-bit key for every run, with
/// the ChaCha stream counter set to the run index.
fn run_rng(master_seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run_index);
    rng
}

/// Scoreline matrices for every ordered team pair that can occur.
struct MatchTable {
    n_teams: usize,
    matrices: HashMap<(u32, u32), ScorelineMatrix>,
}

impl MatchTable {
    fn for_pairs<I: Iterator<Item = (u32, u32)>>(
        teams: &[f64],
        params: &ModelParams,
        max_goals: u32,
        pairs: I,
    ) -> Result<Self> {
        let mut matrices = HashMap::new();
        for (h, a) in pairs {
            if let std::collections::hash_map::Entry::Vacant(e) = matrices.entry((h, a)) {
                let rates =
                    scoreline::expected_goals(params, teams[h as usize], teams[a as usize])?;
                e.insert(scoreline::scoreline_matrix(rates, params.rho, max_goals)?);
            }
        }
        Ok(Self {
            n_teams: teams.len(),
            matrices,
        })
    }

    fn all_pairs(teams: &[f64], params: &ModelParams, max_goals: u32) -> Result<Self> {
        let n = teams.len() as u32;
        let pairs = (0..n).flat_map(move |h| (0..n).filter(move |&a| a != h).map(move |a| (h, a)));
        Self::for_pairs(teams, params, max_goals, pairs)
    }

    fn matrix(&self, home: u32, away: u32) -> &ScorelineMatrix {
        &self.matrices[&(home, away)]
    }
}

/// Per-team season tallies, indexed like the team list.
#[derive(Clone, Copy, Default)]
struct Tally {
    wins: u32,
    draws: u32,
    losses: u32,
    goals_for: u32,
    goals_against: u32,
}

impl Tally {
    fn points(&self) -> u32 {
        3 * self.wins + self.draws
    }
}

/// Simulate one season over indexed fixtures; the workhorse shared by the
/// public entry points.
fn run_season<R: Rng + ?Sized>(
    fixtures: &[(u32, u32)],
    table: &MatchTable,
    rng: &mut R,
) -> (Vec<Tally>, u32) {
    let mut tallies = vec![Tally::default(); table.n_teams];
    let mut drawn_matches = 0u32;
    for &(h, a) in fixtures {
        let s = scoreline::sample_scoreline(table.matrix(h, a), rng);
        let (home, away) = (h as usize, a as usize);
        tallies[home].goals_for += s.home_goals;
        tallies[home].goals_against += s.away_goals;
        tallies[away].goals_for += s.away_goals;
        tallies[away].goals_against += s.home_goals;
        match s.home_goals.cmp(&s.away_goals) {
            std::cmp::Ordering::Greater => {
                tallies[home].wins += 1;
                tallies[away].losses += 1;
            }
            std::cmp::Ordering::Equal => {
                tallies[home].draws += 1;
                tallies[away].draws += 1;
                drawn_matches += 1;
            }
            std::cmp::Ordering::Less => {
                tallies[away].wins += 1;
                tallies[home].losses += 1;
            }
        }
    }
    (tallies, drawn_matches)
}

/// Team indices sorted by points descending; ties stay in index order.
fn ranking(tallies: &[Tally]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tallies.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(tallies[i].points()));
    order
}

fn resolve_fixtures(schedule: &Schedule) -> Result<Vec<(u32, u32)>> {
    let index: HashMap<&str, u32> = schedule
        .teams()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.team_id.as_str(), i as u32))
        .collect();
    schedule
        .fixtures()
        .iter()
        .map(|f| {
            // Schedule construction guarantees both ids resolve.
            Ok((index[f.home_id.as_str()], index[f.away_id.as_str()]))
        })
        .collect()
}

/// A schedule bound to precomputed scoreline tables, ready to be run many
/// times without rebuilding anything.
pub struct SeasonSimulator {
    team_ids: Vec<String>,
    fixtures: Vec<(u32, u32)>,
    table: MatchTable,
    config: SimConfig,
}

impl SeasonSimulator {
    pub fn new(schedule: &Schedule, params: &ModelParams, config: &SimConfig) -> Result<Self> {
        config.validate(schedule.teams().len())?;
        let elos: Vec<f64> = schedule.teams().iter().map(|t| t.elo).collect();
        let fixtures = resolve_fixtures(schedule)?;
        let table = MatchTable::for_pairs(
            &elos,
            params,
            config.max_goals,
            fixtures.iter().copied(),
        )?;
        Ok(Self {
            team_ids: schedule.teams().iter().map(|t| t.team_id.clone()).collect(),
            fixtures,
            table,
            config: *config,
        })
    }

    /// Play out one season.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> RunOutcome {
        let (tallies, draws) = run_season(&self.fixtures, &self.table, rng);
        let order = ranking(&tallies);
        let standings: Vec<StandingsRow> = order
            .iter()
            .map(|&i| {
                let t = &tallies[i];
                StandingsRow {
                    team_id: self.team_ids[i].clone(),
                    points: t.points(),
                    wins: t.wins,
                    draws: t.draws,
                    losses: t.losses,
                    goals_for: t.goals_for,
                    goals_against: t.goals_against,
                }
            })
            .collect();
        let direct_credit = qualification_credit(&standings, self.config.top_k_direct);
        let playoff_credit = qualification_credit(&standings, self.config.top_k_playoff);
        RunOutcome {
            standings,
            direct_credit,
            playoff_credit,
            draws,
        }
    }
}

/// Simulate one full season on the given schedule.
pub fn simulate_run<R: Rng + ?Sized>(
    schedule: &Schedule,
    params: &ModelParams,
    config: &SimConfig,
    rng: &mut R,
) -> Result<RunOutcome> {
    Ok(SeasonSimulator::new(schedule, params, config)?.run(rng))
}

/// Compact per-run record carried from the workers to the reducer.
struct RunRecord {
    /// `(points, direct credit, playoff credit)` per team.
    rows: Vec<(u32, Credit, Credit)>,
    draws: u32,
}

#[cfg(feature = "parallel")]
fn map_runs<T, F>(n_runs: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n_runs).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_runs<T, F>(n_runs: u64, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T>,
{
    (0..n_runs).map(f).collect()
}

/// Estimate the probability of clearing each cutoff as a function of the
/// points total.
///
/// Every team in every run contributes one observation at its final points
/// value; the estimate for a points value pools the credit over all its
/// observations. With [`ScheduleSource::Random`] a fresh schedule is drawn
/// per run from the run's own random stream.
pub fn threshold_curve(
    source: ScheduleSource<'_>,
    params: &ModelParams,
    config: &SimConfig,
) -> Result<SimulationResult> {
    let (teams, fixed_fixtures) = match source {
        ScheduleSource::Fixed(schedule) => (
            schedule.teams().to_vec(),
            Some(resolve_fixtures(schedule)?),
        ),
        ScheduleSource::Random(pots) => {
            let mut teams = pots.teams();
            teams.sort_by(|a, b| a.team_id.cmp(&b.team_id));
            (teams, None)
        }
    };
    config.validate(teams.len())?;
    let elos: Vec<f64> = teams.iter().map(|t| t.elo).collect();
    let table = match &fixed_fixtures {
        Some(fixtures) => MatchTable::for_pairs(
            &elos,
            params,
            config.max_goals,
            fixtures.iter().copied(),
        )?,
        None => MatchTable::all_pairs(&elos, params, config.max_goals)?,
    };
    let index: HashMap<&str, u32> = teams
        .iter()
        .enumerate()
        .map(|(i, t)| (t.team_id.as_str(), i as u32))
        .collect();
    let pots = match source {
        ScheduleSource::Random(pots) => Some(pots),
        ScheduleSource::Fixed(_) => None,
    };

    let records = map_runs(config.n_runs, |run| -> Result<RunRecord> {
        let mut rng = run_rng(config.master_seed, run);
        let generated;
        let fixtures: &[(u32, u32)] = match (&fixed_fixtures, pots) {
            (Some(f), _) => f,
            (None, Some(pots)) => {
                let schedule = draw::generate_schedule(pots, &mut rng)?;
                generated = schedule
                    .fixtures()
                    .iter()
                    .map(|f| (index[f.home_id.as_str()], index[f.away_id.as_str()]))
                    .collect::<Vec<_>>();
                &generated
            }
            (None, None) => unreachable!("source is either fixed or random"),
        };
        let (tallies, draws) = run_season(fixtures, &table, &mut rng);
        let order = ranking(&tallies);
        let points: Vec<u32> = order.iter().map(|&i| tallies[i].points()).collect();
        let rows_sorted: Vec<StandingsRow> = points
            .iter()
            .map(|&p| StandingsRow {
                team_id: String::new(),
                points: p,
                wins: 0,
                draws: 0,
                losses: 0,
                goals_for: 0,
                goals_against: 0,
            })
            .collect();
        let direct = qualification_credit(&rows_sorted, config.top_k_direct);
        let playoff = qualification_credit(&rows_sorted, config.top_k_playoff);
        Ok(RunRecord {
            rows: points
                .into_iter()
                .zip(direct)
                .zip(playoff)
                .map(|((p, d), q)| (p, d, q))
                .collect(),
            draws,
        })
    })?;

    // Order-deterministic reduction.
    #[derive(Default)]
    struct Acc {
        direct: f64,
        playoff: f64,
        count: u64,
    }
    let mut by_points: BTreeMap<u32, Acc> = BTreeMap::new();
    let mut total_draws = 0u64;
    for record in &records {
        total_draws += u64::from(record.draws);
        for (points, direct, playoff) in &record.rows {
            let acc = by_points.entry(*points).or_default();
            acc.direct += ratio_to_f64(*direct);
            acc.playoff += ratio_to_f64(*playoff);
            acc.count += 1;
        }
    }

    let mut direct = ThresholdCurve::new(Cutoff::RoundOf16);
    let mut playoff = ThresholdCurve::new(Cutoff::Playoff);
    for (points, acc) in by_points {
        let n = acc.count;
        direct.entries.insert(
            points,
            CurveEntry {
                probability: acc.direct / n as f64,
                sample_count: n,
            },
        );
        playoff.entries.insert(
            points,
            CurveEntry {
                probability: acc.playoff / n as f64,
                sample_count: n,
            },
        );
    }
    Ok(SimulationResult {
        direct,
        playoff,
        avg_draws: total_draws as f64 / config.n_runs as f64,
        n_runs: config.n_runs,
    })
}

fn ratio_to_f64(r: Credit) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Sensitivity sweep over the dependence parameter with random schedules.
///
/// Each grid point reuses the same master seed (common random numbers), so
/// differences along the grid reflect the parameter, not resampling noise.
pub fn rho_sweep(
    pots: &PotAssignment,
    base_params: &ModelParams,
    rho_grid: &[f64],
    config: &SimConfig,
) -> Result<SweepResult> {
    if rho_grid.is_empty() {
        return Err(Error::InvalidArgument("rho grid is empty".into()));
    }
    if rho_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "rho grid must be strictly increasing".into(),
        ));
    }

    // Global admissible interval across every ordered team pair.
    let teams = pots.teams();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for h in &teams {
        for a in &teams {
            if h.team_id == a.team_id {
                continue;
            }
            let rates = scoreline::expected_goals(base_params, h.elo, a.elo)?;
            let (l, u) = scoreline::rho_bounds(rates);
            lo = lo.max(l);
            hi = hi.min(u);
        }
    }
    for (g, &rho) in rho_grid.iter().enumerate() {
        if !rho.is_finite() || rho < lo || rho > hi {
            return Err(Error::InvalidRho {
                rho,
                detail: format!("grid point {g} outside the admissible interval [{lo:.4}, {hi:.4}]"),
            });
        }
    }

    let mut avg_draws = Vec::with_capacity(rho_grid.len());
    let mut curves = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let params = base_params.with_rho(rho);
        let result = threshold_curve(ScheduleSource::Random(pots), &params, config)?;
        avg_draws.push(result.avg_draws);
        curves.push((result.direct, result.playoff));
    }
    Ok(SweepResult {
        rho_grid: rho_grid.to_vec(),
        avg_draws,
        curves,
    })
}

/// Outcome shares, goal averages and the lopsided-match share of a set of
/// played matches.
pub fn summarize_matches(matches: &[MatchObservation]) -> Result<MatchSummary> {
    if matches.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot summarize an empty match list".into(),
        ));
    }
    let n = matches.len() as f64;
    let mut home_wins = 0usize;
    let mut draws = 0usize;
    let mut away_wins = 0usize;
    let mut lopsided = 0usize;
    let mut home_goals = 0u64;
    let mut away_goals = 0u64;
    for m in matches {
        match m.home_goals.cmp(&m.away_goals) {
            std::cmp::Ordering::Greater => home_wins += 1,
            std::cmp::Ordering::Equal => draws += 1,
            std::cmp::Ordering::Less => away_wins += 1,
        }
        if m.goal_difference().abs() >= 4 {
            lopsided += 1;
        }
        home_goals += u64::from(m.home_goals);
        away_goals += u64::from(m.away_goals);
    }
    let draw_share = draws as f64 / n;
    Ok(MatchSummary {
        n_matches: matches.len(),
        home_win_share: home_wins as f64 / n,
        draw_share,
        away_win_share: away_wins as f64 / n,
        avg_points_per_match: 3.0 - draw_share,
        avg_home_goals: home_goals as f64 / n,
        avg_away_goals: away_goals as f64 / n,
        avg_total_goals: (home_goals + away_goals) as f64 / n,
        lopsided_share: lopsided as f64 / n,
    })
}
