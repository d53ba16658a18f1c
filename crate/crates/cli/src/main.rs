use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = spotwise_cli::run_command(std::env::args_os());
    ExitCode::from(outcome.exit_code.clamp(0, 255) as u8)
}
