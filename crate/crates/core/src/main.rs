use std::process::ExitCode;

fn main() -> ExitCode {
    savings_chaos::cli::main_entry()
}
