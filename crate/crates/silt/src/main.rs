use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(silt::cli::run() as u8)
}
