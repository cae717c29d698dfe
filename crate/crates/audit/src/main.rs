use std::process::ExitCode;

fn main() -> ExitCode {
    dialect_audit::cli::main_with_args(std::env::args_os())
}
