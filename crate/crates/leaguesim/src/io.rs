//! File formats: CSV ingestion and emission, the flat key-value parameter
//! file, and run manifests.
//!
//! All CSVs are UTF-8, comma-separated, `.` decimal point, LF line endings,
//! so emitted files diff byte-exactly across platforms. Parameter files
//! carry the Elo standardisation constants next to the coefficients; the
//! two must never be separated, because predictions with foreign constants
//! are silently wrong.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::domain::{
    CurveEntry, Cutoff, Fixture, MatchObservation, ModelParams, Schedule, TeamRecord,
    ThresholdCurve,
};
use crate::error::{Error, Result};
use crate::fit::{FitResult, ModelKind};
use crate::montecarlo::{MatchSummary, SweepResult};

/// Points totals backed by fewer observations than this are flagged
/// `low_sample` in emitted curves.
pub const LOW_SAMPLE_THRESHOLD: u64 = 50;

const TEAMS_HEADER: [&str; 5] = ["team_id", "name", "elo", "pot", "association"];
const MATCHES_HEADER: [&str; 6] = [
    "home_id",
    "away_id",
    "home_goals",
    "away_goals",
    "home_elo",
    "away_elo",
];
const SCHEDULE_HEADER: [&str; 2] = ["home_id", "away_id"];
const CURVE_HEADER: [&str; 5] = [
    "cutoff",
    "points",
    "probability",
    "sample_count",
    "low_sample_flag",
];

fn open_reader(path: &Path, expected_header: &[&str]) -> Result<csv::Reader<fs::File>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::parse(path, 0, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected_header {
        return Err(Error::parse(
            path,
            1,
            format!(
                "unexpected header `{}`, expected `{}`",
                got.join(","),
                expected_header.join(",")
            ),
        ));
    }
    Ok(reader)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    idx: usize,
    what: &str,
) -> Result<T> {
    let raw = record.get(idx).ok_or_else(|| {
        Error::parse(path, record_line(record), format!("missing {what} column"))
    })?;
    raw.trim().parse().map_err(|_| {
        Error::parse(
            path,
            record_line(record),
            format!("cannot parse {what} from `{raw}`"),
        )
    })
}

/// Read a team table. `pot` and `association` may be empty.
pub fn parse_teams_csv(path: &Path) -> Result<Vec<TeamRecord>> {
    let mut reader = open_reader(path, &TEAMS_HEADER)?;
    let mut teams: Vec<TeamRecord> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let team_id: String = parse_field(path, &record, 0, "team_id")?;
        if !seen.insert(team_id.clone()) {
            return Err(Error::DuplicateTeamId(team_id));
        }
        let name: String = parse_field(path, &record, 1, "name")?;
        let elo: f64 = parse_field(path, &record, 2, "elo")?;
        let pot_raw = record.get(3).unwrap_or("").trim();
        let pot = if pot_raw.is_empty() {
            None
        } else {
            Some(pot_raw.parse::<u8>().map_err(|_| {
                Error::parse(path, line, format!("cannot parse pot from `{pot_raw}`"))
            })?)
        };
        let assoc_raw = record.get(4).unwrap_or("").trim();
        let association = if assoc_raw.is_empty() {
            None
        } else {
            Some(assoc_raw.to_string())
        };
        teams.push(
            TeamRecord::new(team_id, name, elo, pot, association)
                .map_err(|e| Error::parse(path, line, e.to_string()))?,
        );
    }
    Ok(teams)
}

/// Read played matches with the Elo ratings in effect at match time.
pub fn parse_matches_csv(path: &Path) -> Result<Vec<MatchObservation>> {
    let mut reader = open_reader(path, &MATCHES_HEADER)?;
    let mut matches = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let m = MatchObservation::new(
            parse_field::<String>(path, &record, 0, "home_id")?,
            parse_field::<String>(path, &record, 1, "away_id")?,
            parse_field::<u32>(path, &record, 2, "home_goals")?,
            parse_field::<u32>(path, &record, 3, "away_goals")?,
            parse_field::<f64>(path, &record, 4, "home_elo")?,
            parse_field::<f64>(path, &record, 5, "away_elo")?,
        )
        .map_err(|e| Error::parse(path, line, e.to_string()))?;
        matches.push(m);
    }
    Ok(matches)
}

/// Read a fixture list and resolve it against a team table.
pub fn parse_schedule_csv(path: &Path, teams: &[TeamRecord]) -> Result<Schedule> {
    let mut reader = open_reader(path, &SCHEDULE_HEADER)?;
    let mut fixtures = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let fx = Fixture::new(
            parse_field::<String>(path, &record, 0, "home_id")?,
            parse_field::<String>(path, &record, 1, "away_id")?,
        )
        .map_err(|e| Error::parse(path, line, e.to_string()))?;
        fixtures.push(fx);
    }
    Schedule::new(fixtures, teams.to_vec())
}

pub fn emit_schedule_csv(schedule: &Schedule, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("home_id,away_id\n");
    for fx in schedule.fixtures() {
        writeln!(out, "{},{}", fx.home_id, fx.away_id).expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write threshold curves, sorted by cutoff then points, probabilities with
/// six decimal places.
pub fn emit_curve_csv(curves: &[&ThresholdCurve], path: &Path) -> Result<()> {
    let mut sorted: Vec<&&ThresholdCurve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.cutoff);
    let mut out = String::new();
    out.push_str(&CURVE_HEADER.join(","));
    out.push('\n');
    for curve in sorted {
        for (points, entry) in &curve.entries {
            writeln!(
                out,
                "{},{},{:.6},{},{}",
                curve.cutoff,
                points,
                entry.probability,
                entry.sample_count,
                u8::from(entry.sample_count < LOW_SAMPLE_THRESHOLD)
            )
            .expect("string write");
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read curves back from [`emit_curve_csv`] output, grouped by cutoff in
/// file order.
pub fn parse_curve_csv(path: &Path) -> Result<Vec<ThresholdCurve>> {
    let mut reader = open_reader(path, &CURVE_HEADER)?;
    let mut curves: Vec<ThresholdCurve> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let cutoff = Cutoff::parse(record.get(0).unwrap_or("").trim())
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        let points: u32 = parse_field(path, &record, 1, "points")?;
        let probability: f64 = parse_field(path, &record, 2, "probability")?;
        let sample_count: u64 = parse_field(path, &record, 3, "sample_count")?;
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::parse(
                path,
                line,
                format!("probability {probability} outside [0, 1]"),
            ));
        }
        if curves.last().map(|c| c.cutoff) != Some(cutoff) {
            curves.push(ThresholdCurve::new(cutoff));
        }
        curves.last_mut().expect("just pushed").entries.insert(
            points,
            CurveEntry {
                probability,
                sample_count,
            },
        );
    }
    Ok(curves)
}

pub fn emit_sweep_draws_csv(sweep: &SweepResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("rho,avg_draws\n");
    for (rho, draws) in sweep.rho_grid.iter().zip(&sweep.avg_draws) {
        writeln!(out, "{rho},{draws:.4}").expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn emit_sweep_curves_csv(sweep: &SweepResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("rho,cutoff,points,probability,sample_count,low_sample_flag\n");
    for (rho, (direct, playoff)) in sweep.rho_grid.iter().zip(&sweep.curves) {
        for curve in [direct, playoff] {
            for (points, entry) in &curve.entries {
                writeln!(
                    out,
                    "{},{},{},{:.6},{},{}",
                    rho,
                    curve.cutoff,
                    points,
                    entry.probability,
                    entry.sample_count,
                    u8::from(entry.sample_count < LOW_SAMPLE_THRESHOLD)
                )
                .expect("string write");
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write fitted coefficients plus their standardisation constants as a flat
/// key-value file. Values use Rust's shortest round-trip float formatting.
pub fn write_params_file(result: &FitResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "model = {}", result.model.as_str()).expect("string write");
    let p = &result.params;
    for (k, v) in [
        ("beta0", p.beta0),
        ("beta1", p.beta1),
        ("beta2", p.beta2),
        ("rho", p.rho),
        ("elo_mean", p.elo_mean),
        ("elo_sd", p.elo_sd),
    ] {
        writeln!(out, "{k} = {v}").expect("string write");
    }
    writeln!(out, "# log_likelihood = {}", result.log_likelihood).expect("string write");
    writeln!(out, "# n_obs = {}", result.n_obs).expect("string write");
    writeln!(out, "# converged = {}", result.converged).expect("string write");
    if let Some(ses) = &result.std_errors {
        let joined: Vec<String> = ses.iter().map(|s| s.to_string()).collect();
        writeln!(out, "# std_errors = {}", joined.join(", ")).expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Hand-written key-value parameter files are accepted too; only the seven
/// `key = value` lines matter, `#` starts a comment.
pub fn read_params_file(path: &Path) -> Result<(ModelParams, ModelKind)> {
    let text = fs::read_to_string(path)?;
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(
                path,
                (i + 1) as u64,
                format!("expected `key = value`, got `{raw}`"),
            ));
        };
        values.insert(key.trim().to_string(), value.trim().to_string());
    }
    let get = |key: &str| -> Result<&String> {
        values
            .get(key)
            .ok_or_else(|| Error::parse(path, 0, format!("missing key `{key}`")))
    };
    let num = |key: &str| -> Result<f64> {
        get(key)?
            .parse()
            .map_err(|_| Error::parse(path, 0, format!("cannot parse `{key}` as a number")))
    };
    let model = ModelKind::parse(get("model")?)?;
    let params = ModelParams::new(
        num("beta0")?,
        num("beta1")?,
        num("beta2")?,
        num("rho")?,
        num("elo_mean")?,
        num("elo_sd")?,
    )?;
    if model == ModelKind::Independent && params.rho != 0.0 {
        return Err(Error::parse(
            path,
            0,
            format!("independent model with non-zero rho {}", params.rho),
        ));
    }
    Ok((params, model))
}

/// Everything needed to reproduce a command's outputs byte for byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    /// `(label, path)` pairs of the consumed input files.
    pub inputs: Vec<(String, String)>,
    /// Fitted-parameter file or inline literals.
    pub params_source: String,
    pub n_runs: u64,
    pub seed: u64,
    pub max_goals: u32,
    pub top_k_direct: usize,
    pub top_k_playoff: usize,
    pub output_dir: String,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            params_source: String::new(),
            n_runs: 0,
            seed: 0,
            max_goals: 0,
            top_k_direct: 0,
            top_k_playoff: 0,
            output_dir: String::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "command = {}", manifest.command).expect("string write");
    writeln!(out, "version = {}", manifest.version).expect("string write");
    writeln!(out, "seed = {}", manifest.seed).expect("string write");
    writeln!(out, "runs = {}", manifest.n_runs).expect("string write");
    writeln!(out, "max_goals = {}", manifest.max_goals).expect("string write");
    writeln!(out, "top_k_direct = {}", manifest.top_k_direct).expect("string write");
    writeln!(out, "top_k_playoff = {}", manifest.top_k_playoff).expect("string write");
    writeln!(out, "params_source = {}", manifest.params_source).expect("string write");
    writeln!(out, "output_dir = {}", manifest.output_dir).expect("string write");
    for (label, p) in &manifest.inputs {
        writeln!(out, "input.{label} = {p}").expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a manifest back as a key-value map.
pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut values = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(
                path,
                (i + 1) as u64,
                format!("expected `key = value`, got `{raw}`"),
            ));
        };
        values.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(values)
}

/// Render a match summary in the one-row league-table layout used by the
/// `stats` subcommand.
pub fn format_match_summary(s: &MatchSummary) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:>8}  {:>9} {:>7} {:>9}  {:>10}  {:>6} {:>6} {:>6}  {:>9}",
        "matches", "home win", "draw", "away win", "pts/match", "home", "away", "total", "lopsided"
    )
    .expect("string write");
    writeln!(
        out,
        "{:>8}  {:>8.2}% {:>6.2}% {:>8.2}%  {:>10.2}  {:>6.2} {:>6.2} {:>6.2}  {:>8.2}%",
        s.n_matches,
        100.0 * s.home_win_share,
        100.0 * s.draw_share,
        100.0 * s.away_win_share,
        s.avg_points_per_match,
        s.avg_home_goals,
        s.avg_away_goals,
        s.avg_total_goals,
        100.0 * s.lopsided_share
    )
    .expect("string write");
    out
}
