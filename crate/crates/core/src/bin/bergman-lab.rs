use std::process::ExitCode;

fn main() -> ExitCode {
    bergman_lab::cli::main()
}
