use std::process::ExitCode;

fn main() -> ExitCode {
    dgrid_cli::main()
}
