use std::process::ExitCode;

fn main() -> ExitCode {
    cpforge_cli::main_with(std::env::args_os())
}
