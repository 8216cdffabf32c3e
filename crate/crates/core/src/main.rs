use std::process::ExitCode;

fn main() -> ExitCode {
    cqff::cli::main_entry(std::env::args_os())
}
