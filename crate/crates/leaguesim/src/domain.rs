//! Core value types shared by every module. All types are immutable once
//! constructed and validate their invariants in the constructor.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// One club: identity, Elo rating and (when known) its seeding pot and
/// national association.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamRecord {
    pub team_id: String,
    pub name: String,
    pub elo: f64,
    /// Seeding pot 1–4; training-only data may omit it.
    pub pot: Option<u8>,
    pub association: Option<String>,
}

impl TeamRecord {
    pub fn new(
        team_id: impl Into<String>,
        name: impl Into<String>,
        elo: f64,
        pot: Option<u8>,
        association: Option<String>,
    ) -> Result<Self> {
        let team_id = team_id.into();
        if team_id.is_empty() {
            return Err(Error::InvalidArgument("team_id must be non-empty".into()));
        }
        if !elo.is_finite() || elo <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "elo must be finite and > 0, got {elo}"
            )));
        }
        if let Some(p) = pot {
            if !(1..=4).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "pot must be in 1..=4, got {p}"
                )));
            }
        }
        Ok(Self {
            team_id,
            name: name.into(),
            elo,
            pot,
            association,
        })
    }
}

/// One played match, used as training data.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchObservation {
    pub home_id: String,
    pub away_id: String,
    pub home_goals: u32,
    pub away_goals: u32,
    /// Elo ratings of the two sides at the time of the match.
    pub home_elo: f64,
    pub away_elo: f64,
}

impl MatchObservation {
    pub fn new(
        home_id: impl Into<String>,
        away_id: impl Into<String>,
        home_goals: u32,
        away_goals: u32,
        home_elo: f64,
        away_elo: f64,
    ) -> Result<Self> {
        let home_id = home_id.into();
        let away_id = away_id.into();
        if home_id == away_id {
            return Err(Error::InvalidArgument(format!(
                "a team cannot play itself: `{home_id}`"
            )));
        }
        if !home_elo.is_finite() || !away_elo.is_finite() {
            return Err(Error::InvalidArgument("Elo ratings must be finite".into()));
        }
        Ok(Self {
            home_id,
            away_id,
            home_goals,
            away_goals,
            home_elo,
            away_elo,
        })
    }

    pub fn goal_difference(&self) -> i64 {
        i64::from(self.home_goals) - i64::from(self.away_goals)
    }
}

/// An unplayed match: who hosts whom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixture {
    pub home_id: String,
    pub away_id: String,
}

impl Fixture {
    pub fn new(home_id: impl Into<String>, away_id: impl Into<String>) -> Result<Self> {
        let home_id = home_id.into();
        let away_id = away_id.into();
        if home_id == away_id {
            return Err(Error::InvalidArgument(format!(
                "a team cannot host itself: `{home_id}`"
            )));
        }
        Ok(Self { home_id, away_id })
    }
}

/// A set of oriented fixtures together with the participating teams.
///
/// Construction checks structural consistency only (known, distinct team
/// ids; no self-pairings). Format-level constraints — eight fixtures per
/// team, two opponents per pot, one home and one away — are the job of
/// [`crate::draw::validate_schedule`], so that smaller test leagues can be
/// simulated with the same machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    fixtures: Vec<Fixture>,
    teams: Vec<TeamRecord>,
}

impl Schedule {
    pub fn new(fixtures: Vec<Fixture>, teams: Vec<TeamRecord>) -> Result<Self> {
        if teams.is_empty() {
            return Err(Error::InvalidArgument(
                "a schedule needs at least one team".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &teams {
            if !seen.insert(t.team_id.as_str()) {
                return Err(Error::DuplicateTeamId(t.team_id.clone()));
            }
        }
        for f in &fixtures {
            for id in [&f.home_id, &f.away_id] {
                if !seen.contains(id.as_str()) {
                    return Err(Error::InvalidArgument(format!(
                        "fixture references unknown team `{id}`"
                    )));
                }
            }
        }
        Ok(Self { fixtures, teams })
    }

    pub fn fixtures(&self) -> &[Fixture] {
        &self.fixtures
    }

    pub fn teams(&self) -> &[TeamRecord] {
        &self.teams
    }
}

/// Fitted (or externally supplied) model coefficients, together with the
/// Elo standardisation constants they were estimated under.
///
/// Predictions must reuse the training-time constants, so the two travel
/// with the coefficients rather than being recomputed downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Intercept.
    pub beta0: f64,
    /// Effect of the standardised Elo difference.
    pub beta1: f64,
    /// Home effect.
    pub beta2: f64,
    /// Dixon-Coles dependence parameter; 0 for the independent model.
    pub rho: f64,
    pub elo_mean: f64,
    pub elo_sd: f64,
}

impl ModelParams {
    pub fn new(
        beta0: f64,
        beta1: f64,
        beta2: f64,
        rho: f64,
        elo_mean: f64,
        elo_sd: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("beta0", beta0),
            ("beta1", beta1),
            ("beta2", beta2),
            ("rho", rho),
            ("elo_mean", elo_mean),
            ("elo_sd", elo_sd),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        if elo_sd <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "elo_sd must be > 0, got {elo_sd}"
            )));
        }
        Ok(Self {
            beta0,
            beta1,
            beta2,
            rho,
            elo_mean,
            elo_sd,
        })
    }

    /// Same coefficients with a different dependence parameter.
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }
}

/// A final score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scoreline {
    pub home_goals: u32,
    pub away_goals: u32,
}

/// One team's line in a league table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandingsRow {
    pub team_id: String,
    pub points: u32,
    pub wins: u32,
    pub draws: u32,
    pub losses: u32,
    pub goals_for: u32,
    pub goals_against: u32,
}

/// Qualification cutoff a threshold curve refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cutoff {
    /// Direct qualification: top 8.
    RoundOf16,
    /// At least the play-off round: ranks 1–24.
    Playoff,
}

impl Cutoff {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cutoff::RoundOf16 => "ROUND_OF_16",
            Cutoff::Playoff => "PLAYOFF",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ROUND_OF_16" => Ok(Cutoff::RoundOf16),
            "PLAYOFF" => Ok(Cutoff::Playoff),
            other => Err(Error::InvalidArgument(format!(
                "unknown cutoff `{other}` (expected ROUND_OF_16 or PLAYOFF)"
            ))),
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Estimated qualification probability and the number of team-run
/// observations it is based on, for one points total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveEntry {
    pub probability: f64,
    pub sample_count: u64,
}

/// Points total → estimated probability of clearing a cutoff.
///
/// Points values never observed in the simulation are absent from the map.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub cutoff: Cutoff,
    pub entries: BTreeMap<u32, CurveEntry>,
}

impl ThresholdCurve {
    pub fn new(cutoff: Cutoff) -> Self {
        Self {
            cutoff,
            entries: BTreeMap::new(),
        }
    }

    pub fn probability_at(&self, points: u32) -> Option<f64> {
        self.entries.get(&points).map(|e| e.probability)
    }
}
