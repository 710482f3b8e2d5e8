use std::process::ExitCode;

fn main() -> ExitCode {
    netslice::cli::main_with_args(std::env::args_os()).into()
}
