//! Random generation and validation of league-phase schedules.
//!
//! Format constraints for the 36-team incomplete round robin: every team
//! plays eight matches (four home, four away) against two opponents from
//! each of the four seeding pots — its own pot included — one of the two at
//! home and one away, and no pair of teams meets twice.
//!
//! Generation works pot-pair by pot-pair. For two distinct pots a schedule
//! fragment is a pair of edge-disjoint perfect matchings between the two
//! nine-team sets (one oriented each way). Within a pot the fragment is a
//! uniform 2-regular simple graph on nine vertices — a disjoint union of
//! cycles, each of length at least three — with every cycle oriented in one
//! consistent direction so that each team hosts exactly one own-pot
//! opponent. Association-related pairing restrictions are deliberately not
//! enforced; [`association_clashes`] reports them informationally.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{Fixture, Schedule, TeamRecord};
use crate::error::{Error, Result};

/// Number of teams per pot in the 36-team format.
pub const POT_SIZE: usize = 9;
/// Number of pots.
pub const NUM_POTS: usize = 4;

/// The allocation of 36 teams to four seeding pots of nine.
#[derive(Debug, Clone, PartialEq)]
pub struct PotAssignment {
    pots: [Vec<TeamRecord>; NUM_POTS],
}

impl PotAssignment {
    /// Group teams by their `pot` field. Every team must carry a pot and
    /// each pot must hold exactly nine distinct teams.
    pub fn from_teams(teams: &[TeamRecord]) -> Result<Self> {
        let mut pots: [Vec<TeamRecord>; NUM_POTS] = Default::default();
        let mut seen = std::collections::HashSet::new();
        for t in teams {
            if !seen.insert(t.team_id.clone()) {
                return Err(Error::DuplicateTeamId(t.team_id.clone()));
            }
            let p = t.pot.ok_or_else(|| {
                Error::InvalidArgument(format!("team `{}` has no pot assignment", t.team_id))
            })?;
            pots[(p - 1) as usize].push(t.clone());
        }
        for (i, pot) in pots.iter().enumerate() {
            if pot.len() != POT_SIZE {
                return Err(Error::InvalidArgument(format!(
                    "pot {} has {} teams, expected {POT_SIZE}",
                    i + 1,
                    pot.len()
                )));
            }
        }
        Ok(Self { pots })
    }

    /// Teams in pot `p` (1-based).
    pub fn pot(&self, p: u8) -> &[TeamRecord] {
        &self.pots[(p - 1) as usize]
    }

    /// All 36 teams, pot by pot.
    pub fn teams(&self) -> Vec<TeamRecord> {
        self.pots.iter().flatten().cloned().collect()
    }
}

/// One violated schedule constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Team does not appear in exactly eight fixtures.
    FixtureCount { team_id: String, count: usize },
    /// Home/away appearances are not split 4/4.
    HomeAwaySplit {
        team_id: String,
        home: usize,
        away: usize,
    },
    /// Team does not meet exactly two opponents from the pot.
    PotQuota {
        team_id: String,
        pot: u8,
        count: usize,
    },
    /// The two meetings with a pot are not one home and one away.
    PotOrientation {
        team_id: String,
        pot: u8,
        home: usize,
        away: usize,
    },
    /// A pair of teams meets more than once.
    DuplicatePairing { a: String, b: String, count: usize },
    /// Fixture references a team outside the pot assignment.
    UnknownTeam { team_id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FixtureCount { team_id, count } => {
                write!(f, "{team_id}: plays {count} fixtures, expected 8")
            }
            Violation::HomeAwaySplit {
                team_id,
                home,
                away,
            } => write!(f, "{team_id}: {home} home / {away} away, expected 4/4"),
            Violation::PotQuota {
                team_id,
                pot,
                count,
            } => write!(f, "{team_id}: meets {count} opponents from pot {pot}, expected 2"),
            Violation::PotOrientation {
                team_id,
                pot,
                home,
                away,
            } => write!(
                f,
                "{team_id}: pot {pot} meetings split {home} home / {away} away, expected 1/1"
            ),
            Violation::DuplicatePairing { a, b, count } => {
                write!(f, "{a} and {b} meet {count} times")
            }
            Violation::UnknownTeam { team_id } => {
                write!(f, "fixture references unknown team {team_id}")
            }
        }
    }
}

const MAX_ATTEMPTS: u32 = 1_000;

/// Generate a random valid schedule for the given pot assignment.
///
/// Deterministic for a fixed random stream; fixtures are emitted in a
/// canonical sorted order so equal draws produce byte-equal schedules.
pub fn generate_schedule<R: Rng + ?Sized>(
    pots: &PotAssignment,
    rng: &mut R,
) -> Result<Schedule> {
    let mut fixtures: Vec<Fixture> = Vec::with_capacity(144);

    for p in 0..NUM_POTS {
        for q in (p + 1)..NUM_POTS {
            let (first, second) = cross_pot_matchings(rng)?;
            for (i, &j) in first.iter().enumerate() {
                fixtures.push(fixture(&pots.pots[p][i], &pots.pots[q][j]));
            }
            for (i, &j) in second.iter().enumerate() {
                fixtures.push(fixture(&pots.pots[q][j], &pots.pots[p][i]));
            }
        }
    }
    for pot in &pots.pots {
        for (home, away) in own_pot_cycle_fixtures(rng)? {
            fixtures.push(fixture(&pot[home], &pot[away]));
        }
    }

    fixtures.sort();
    let mut teams = pots.teams();
    teams.sort_by(|a, b| a.team_id.cmp(&b.team_id));
    Schedule::new(fixtures, teams)
}

fn fixture(home: &TeamRecord, away: &TeamRecord) -> Fixture {
    Fixture {
        home_id: home.team_id.clone(),
        away_id: away.team_id.clone(),
    }
}

/// Two uniform random perfect matchings on the complete bipartite graph
/// K_{9,9}, resampled until they share no edge. The first is oriented
/// left-pot-home, the second right-pot-home.
fn cross_pot_matchings<R: Rng + ?Sized>(rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    for _ in 0..MAX_ATTEMPTS {
        let a = random_permutation(POT_SIZE, rng);
        let b = random_permutation(POT_SIZE, rng);
        if a.iter().zip(&b).all(|(x, y)| x != y) {
            return Ok((a, b));
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_ATTEMPTS,
    })
}

fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Uniform random 2-regular simple graph on nine vertices via
/// configuration-model sampling (reject self-loops and parallel edges),
/// then orient each cycle in one uniformly chosen direction.
fn own_pot_cycle_fixtures<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<(usize, usize)>> {
    'attempt: for _ in 0..MAX_ATTEMPTS {
        // Two half-edge stubs per vertex, paired off uniformly at random.
        let mut stubs: Vec<usize> = (0..POT_SIZE).flat_map(|v| [v, v]).collect();
        stubs.shuffle(rng);
        let mut adjacency: Vec<Vec<usize>> = (0..POT_SIZE).map(|_| Vec::with_capacity(2)).collect();
        let mut edges = std::collections::HashSet::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v {
                continue 'attempt;
            }
            if !edges.insert((u.min(v), u.max(v))) {
                continue 'attempt;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }

        // Walk each cycle once, flipping a fair coin for its direction.
        let mut visited = [false; POT_SIZE];
        let mut oriented = Vec::with_capacity(POT_SIZE);
        for start in 0..POT_SIZE {
            if visited[start] {
                continue;
            }
            let mut cycle = vec![start];
            visited[start] = true;
            let mut prev = start;
            let mut cur = adjacency[start][0];
            while cur != start {
                visited[cur] = true;
                cycle.push(cur);
                let next = if adjacency[cur][0] == prev {
                    adjacency[cur][1]
                } else {
                    adjacency[cur][0]
                };
                prev = cur;
                cur = next;
            }
            if rng.random::<bool>() {
                cycle.reverse();
            }
            for i in 0..cycle.len() {
                oriented.push((cycle[i], cycle[(i + 1) % cycle.len()]));
            }
        }
        return Ok(oriented);
    }
    Err(Error::GenerationFailure {
        attempts: MAX_ATTEMPTS,
    })
}

/// Check a schedule against the format constraints. The returned list is
/// empty exactly when the schedule is valid; entries are sorted for
/// deterministic reporting.
pub fn validate_schedule(schedule: &Schedule, pots: &PotAssignment) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut pot_of: HashMap<&str, u8> = HashMap::new();
    for p in 1..=NUM_POTS as u8 {
        for t in pots.pot(p) {
            pot_of.insert(t.team_id.as_str(), p);
        }
    }

    let mut ids: Vec<&str> = pot_of.keys().copied().collect();
    ids.sort_unstable();

    // (team, pot) -> (home meetings, away meetings); team -> home/away count.
    let mut home_count: HashMap<&str, usize> = HashMap::new();
    let mut away_count: HashMap<&str, usize> = HashMap::new();
    let mut pot_meetings: HashMap<(&str, u8), (usize, usize)> = HashMap::new();
    let mut pair_count: HashMap<(&str, &str), usize> = HashMap::new();

    for fx in schedule.fixtures() {
        let (h, a) = (fx.home_id.as_str(), fx.away_id.as_str());
        let (hp, ap) = (pot_of.get(h).copied(), pot_of.get(a).copied());
        for (id, known) in [(h, hp.is_some()), (a, ap.is_some())] {
            if !known {
                violations.push(Violation::UnknownTeam {
                    team_id: id.to_string(),
                });
            }
        }
        let (Some(hp), Some(ap)) = (hp, ap) else {
            continue;
        };
        *home_count.entry(h).or_default() += 1;
        *away_count.entry(a).or_default() += 1;
        pot_meetings.entry((h, ap)).or_default().0 += 1;
        pot_meetings.entry((a, hp)).or_default().1 += 1;
        *pair_count.entry((h.min(a), h.max(a))).or_default() += 1;
    }

    for &id in &ids {
        let home = home_count.get(id).copied().unwrap_or(0);
        let away = away_count.get(id).copied().unwrap_or(0);
        if home + away != 2 * NUM_POTS {
            violations.push(Violation::FixtureCount {
                team_id: id.to_string(),
                count: home + away,
            });
        }
        if home != NUM_POTS || away != NUM_POTS {
            violations.push(Violation::HomeAwaySplit {
                team_id: id.to_string(),
                home,
                away,
            });
        }
        for p in 1..=NUM_POTS as u8 {
            let (h, a) = pot_meetings.get(&(id, p)).copied().unwrap_or((0, 0));
            if h + a != 2 {
                violations.push(Violation::PotQuota {
                    team_id: id.to_string(),
                    pot: p,
                    count: h + a,
                });
            }
            if h != 1 || a != 1 {
                violations.push(Violation::PotOrientation {
                    team_id: id.to_string(),
                    pot: p,
                    home: h,
                    away: a,
                });
            }
        }
    }

    let mut pairs: Vec<(&str, &str, usize)> = pair_count
        .into_iter()
        .filter(|&(_, c)| c > 1)
        .map(|((a, b), c)| (a, b, c))
        .collect();
    pairs.sort_unstable();
    for (a, b, count) in pairs {
        violations.push(Violation::DuplicatePairing {
            a: a.to_string(),
            b: b.to_string(),
            count,
        });
    }

    violations
}

/// Same-association pairings in a schedule. Informational only: the format
/// does not forbid them here, but real draws restrict them, so reports
/// surface the pairings when association data is available.
pub fn association_clashes(schedule: &Schedule) -> Vec<(String, String)> {
    let assoc: HashMap<&str, &str> = schedule
        .teams()
        .iter()
        .filter_map(|t| t.association.as_deref().map(|a| (t.team_id.as_str(), a)))
        .collect();
    let mut clashes: Vec<(String, String)> = schedule
        .fixtures()
        .iter()
        .filter(|fx| {
            matches!(
                (assoc.get(fx.home_id.as_str()), assoc.get(fx.away_id.as_str())),
                (Some(x), Some(y)) if x == y
            )
        })
        .map(|fx| (fx.home_id.clone(), fx.away_id.clone()))
        .collect();
    clashes.sort();
    clashes
}

/// Synthetic 36-team pot assignment shared by tests across modules.
#[cfg(test)]
pub(crate) fn test_pots() -> PotAssignment {
    let mut teams = Vec::new();
    for p in 1..=4u8 {
        for i in 0..POT_SIZE {
            teams.push(
                TeamRecord::new(
                    format!("p{p}t{i}"),
                    format!("Pot {p} Team {i}"),
                    1500.0 + f64::from(p) * 50.0 + i as f64,
                    Some(p),
                    Some(format!("A{}", i % 5)),
                )
                .unwrap(),
            );
        }
    }
    PotAssignment::from_teams(&teams).unwrap()
}
