use std::process::ExitCode;

fn main() -> ExitCode {
    hsd::cli::run()
}
