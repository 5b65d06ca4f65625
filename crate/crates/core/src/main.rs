use std::process::ExitCode;

fn main() -> ExitCode {
    carryfree::cli::main()
}
