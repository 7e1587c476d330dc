use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(leaguesim::cli::run_cli(std::env::args_os()))
}
