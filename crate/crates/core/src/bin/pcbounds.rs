use std::process::ExitCode;

fn main() -> ExitCode {
    pcbounds::cli::main_with_args(std::env::args_os())
}
