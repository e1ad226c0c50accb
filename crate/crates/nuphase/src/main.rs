use std::process::ExitCode;

fn main() -> ExitCode {
    nuphase::cli::run()
}
