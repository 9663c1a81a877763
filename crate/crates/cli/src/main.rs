use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(framefinder_cli::run(std::env::args_os()))
}
