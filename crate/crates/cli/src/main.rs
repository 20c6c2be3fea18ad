use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(neurocausal_cli::run(std::env::args_os()))
}
