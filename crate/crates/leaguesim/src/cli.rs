//! Command-line surface: `fit`, `simulate`, `draw`, `sweep`, `stats`,
//! `validate`. Every result-producing command writes a manifest next to its
//! outputs so a run can be reproduced from the manifest plus the referenced
//! inputs alone.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::ModelParams;
use crate::draw::{self, PotAssignment};
use crate::error::{Error, Result};
use crate::fit::{self, FitOptions, ModelKind};
use crate::io;
use crate::montecarlo::{self, ScheduleSource, SimConfig};

#[derive(Parser)]
#[command(
    name = "leaguesim",
    version,
    about = "Scoreline-model fitting, schedule draws and Monte Carlo qualification thresholds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit model coefficients to observed matches by maximum likelihood
    Fit(FitArgs),
    /// Simulate league phases and emit qualification threshold curves
    Simulate(SimulateArgs),
    /// Generate a random valid schedule from seeding pots
    Draw(DrawArgs),
    /// Sweep the dependence parameter over a grid with random schedules
    Sweep(SweepArgs),
    /// Print summary statistics for a match results file
    Stats(StatsArgs),
    /// Check a schedule against the format constraints
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Independent,
    DixonColes,
}

impl From<ModelArg> for ModelKind {
    fn from(value: ModelArg) -> Self {
        match value {
            ModelArg::Independent => ModelKind::Independent,
            ModelArg::DixonColes => ModelKind::DixonColes,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Match results CSV (home_id,away_id,home_goals,away_goals,home_elo,away_elo)
    #[arg(long)]
    matches: PathBuf,
    #[arg(long, value_enum, default_value = "dixon-coles")]
    model: ModelArg,
    /// Output parameter file
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Team table CSV (team_id,name,elo,pot,association)
    #[arg(long)]
    teams: PathBuf,
    /// Parameter file as written by `fit`
    #[arg(long)]
    params: PathBuf,
    /// Fixed schedule CSV to reuse in every run
    #[arg(long, conflicts_with = "random_draws")]
    schedule: Option<PathBuf>,
    /// Draw a fresh random schedule per run from the team pots
    #[arg(long)]
    random_draws: bool,
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    /// Master seed; omitted = drawn from the OS and recorded in the manifest
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    max_goals: u32,
    /// Output directory for curves.csv and manifest.txt
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DrawArgs {
    #[arg(long)]
    teams: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output schedule CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    teams: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// Grid as start:stop:step
    #[arg(long, default_value = "0:0.2:0.02")]
    rho_grid: String,
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    max_goals: u32,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    matches: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    teams: PathBuf,
}

/// Run the command line. Returns the process exit code: 0 on success, 1 on
/// an operational failure (including an invalid schedule under `validate`),
/// 2 on usage errors.
pub fn run_cli<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Fit(args) => cmd_fit(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Draw(args) => cmd_draw(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn cmd_fit(args: FitArgs) -> Result<u8> {
    let matches = io::parse_matches_csv(&args.matches)?;
    let model: ModelKind = args.model.into();
    let options = FitOptions {
        max_iterations: args.max_iters,
        tolerance: args.tol,
        ..FitOptions::default()
    };
    let result = fit::fit(&matches, model, &options)?;
    io::write_params_file(&result, &args.out)?;

    let mut manifest = io::RunManifest::new("fit");
    manifest
        .inputs
        .push(("matches".into(), path_str(&args.matches)));
    manifest.params_source = path_str(&args.out);
    manifest.output_dir = path_str(args.out.parent().unwrap_or(Path::new(".")));
    io::write_manifest(&manifest, &manifest_path(&args.out))?;

    println!(
        "fitted {} model on {} matches: log-likelihood {:.4}{}",
        result.model.as_str(),
        result.n_obs,
        result.log_likelihood,
        if result.converged {
            ""
        } else {
            " (iteration cap reached)"
        }
    );
    let labels = ["beta0 (constant)", "beta1 (elo diff)", "beta2 (home)", "rho"];
    let values = [
        result.params.beta0,
        result.params.beta1,
        result.params.beta2,
        result.params.rho,
    ];
    for i in 0..model.dim() {
        match &result.std_errors {
            Some(ses) => println!("  {:<17} {:>9.4}  (se {:.4})", labels[i], values[i], ses[i]),
            None => println!("  {:<17} {:>9.4}", labels[i], values[i]),
        }
    }
    println!(
        "  standardisation: mean {:.4}, sd {:.4}",
        result.params.elo_mean, result.params.elo_sd
    );
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.txt");
    out.with_file_name(name)
}

fn load_params(path: &Path) -> Result<ModelParams> {
    let (params, _model) = io::read_params_file(path)?;
    Ok(params)
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8> {
    if args.schedule.is_none() && !args.random_draws {
        return Err(Error::InvalidArgument(
            "pass either --schedule <csv> or --random-draws".into(),
        ));
    }
    let teams = io::parse_teams_csv(&args.teams)?;
    let params = load_params(&args.params)?;
    let seed = resolve_seed(args.seed);
    let config = SimConfig {
        n_runs: args.runs,
        master_seed: seed,
        max_goals: args.max_goals,
        ..SimConfig::default()
    };

    let result = match &args.schedule {
        Some(schedule_path) => {
            let schedule = io::parse_schedule_csv(schedule_path, &teams)?;
            montecarlo::threshold_curve(ScheduleSource::Fixed(&schedule), &params, &config)?
        }
        None => {
            let pots = PotAssignment::from_teams(&teams)?;
            montecarlo::threshold_curve(ScheduleSource::Random(&pots), &params, &config)?
        }
    };

    fs::create_dir_all(&args.out_dir)?;
    let curves_path = args.out_dir.join("curves.csv");
    io::emit_curve_csv(&[&result.direct, &result.playoff], &curves_path)?;

    let mut manifest = io::RunManifest::new("simulate");
    manifest.inputs.push(("teams".into(), path_str(&args.teams)));
    if let Some(s) = &args.schedule {
        manifest.inputs.push(("schedule".into(), path_str(s)));
    }
    manifest.params_source = path_str(&args.params);
    manifest.n_runs = config.n_runs;
    manifest.seed = seed;
    manifest.max_goals = config.max_goals;
    manifest.top_k_direct = config.top_k_direct;
    manifest.top_k_playoff = config.top_k_playoff;
    manifest.output_dir = path_str(&args.out_dir);
    io::write_manifest(&manifest, &args.out_dir.join("manifest.txt"))?;

    println!(
        "{} runs (seed {seed}): {:.2} draws per season on average",
        result.n_runs, result.avg_draws
    );
    println!("wrote {}", curves_path.display());
    Ok(0)
}

fn cmd_draw(args: DrawArgs) -> Result<u8> {
    let teams = io::parse_teams_csv(&args.teams)?;
    let pots = PotAssignment::from_teams(&teams)?;
    let seed = resolve_seed(args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schedule = draw::generate_schedule(&pots, &mut rng)?;
    io::emit_schedule_csv(&schedule, &args.out)?;

    let mut manifest = io::RunManifest::new("draw");
    manifest.inputs.push(("teams".into(), path_str(&args.teams)));
    manifest.seed = seed;
    manifest.output_dir = path_str(args.out.parent().unwrap_or(Path::new(".")));
    io::write_manifest(&manifest, &manifest_path(&args.out))?;

    println!(
        "drew {} fixtures (seed {seed}), wrote {}",
        schedule.fixtures().len(),
        args.out.display()
    );
    Ok(0)
}

/// Parse a `start:stop:step` grid specification.
fn parse_rho_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(Error::InvalidArgument(format!(
            "rho grid must be start:stop:step, got `{spec}`"
        )));
    };
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("cannot parse `{s}` in rho grid")))
    };
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if !(step > 0.0 && stop >= start) {
        return Err(Error::InvalidArgument(format!(
            "need step > 0 and stop >= start, got `{spec}`"
        )));
    }
    let count = ((stop - start) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..count)
        // Round to 10 decimals so accumulated binary error does not leak
        // into grid labels (0.06, not 0.060000000000000005).
        .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
        .filter(|&v| v <= stop + 1e-12)
        .collect();
    Ok(grid)
}

fn cmd_sweep(args: SweepArgs) -> Result<u8> {
    let teams = io::parse_teams_csv(&args.teams)?;
    let pots = PotAssignment::from_teams(&teams)?;
    let params = load_params(&args.params)?;
    let grid = parse_rho_grid(&args.rho_grid)?;
    let seed = resolve_seed(args.seed);
    let config = SimConfig {
        n_runs: args.runs,
        master_seed: seed,
        max_goals: args.max_goals,
        ..SimConfig::default()
    };
    let sweep = montecarlo::rho_sweep(&pots, &params, &grid, &config)?;

    fs::create_dir_all(&args.out_dir)?;
    let draws_path = args.out_dir.join("sweep_draws.csv");
    let curves_path = args.out_dir.join("sweep_curves.csv");
    io::emit_sweep_draws_csv(&sweep, &draws_path)?;
    io::emit_sweep_curves_csv(&sweep, &curves_path)?;

    let mut manifest = io::RunManifest::new("sweep");
    manifest.inputs.push(("teams".into(), path_str(&args.teams)));
    manifest.params_source = path_str(&args.params);
    manifest.n_runs = config.n_runs;
    manifest.seed = seed;
    manifest.max_goals = config.max_goals;
    manifest.top_k_direct = config.top_k_direct;
    manifest.top_k_playoff = config.top_k_playoff;
    manifest.output_dir = path_str(&args.out_dir);
    io::write_manifest(&manifest, &args.out_dir.join("manifest.txt"))?;

    println!("rho      avg draws");
    for (rho, avg) in sweep.rho_grid.iter().zip(&sweep.avg_draws) {
        println!("{rho:<8} {avg:>9.2}");
    }
    println!("wrote {} and {}", draws_path.display(), curves_path.display());
    Ok(0)
}

fn cmd_stats(args: StatsArgs) -> Result<u8> {
    let matches = io::parse_matches_csv(&args.matches)?;
    let summary = montecarlo::summarize_matches(&matches)?;
    print!("{}", io::format_match_summary(&summary));
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<u8> {
    let teams = io::parse_teams_csv(&args.teams)?;
    let pots = PotAssignment::from_teams(&teams)?;
    let schedule = io::parse_schedule_csv(&args.schedule, &teams)?;
    let violations = draw::validate_schedule(&schedule, &pots);
    let clashes = draw::association_clashes(&schedule);
    for (home, away) in &clashes {
        println!("note: same-association pairing {home} vs {away}");
    }
    if violations.is_empty() {
        println!(
            "schedule valid: {} fixtures, no constraint violations",
            schedule.fixtures().len()
        );
        Ok(0)
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        println!("{} violations found", violations.len());
        Ok(1)
    }
}
