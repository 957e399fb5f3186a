use std::process::ExitCode;

use ris_est_cli::{dispatch, parse_args, CliError};

fn main() -> ExitCode {
    let result = parse_args(std::env::args_os()).and_then(|(which, cfg)| dispatch(which, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
