use std::io::Write;
use std::process::ExitCode;

use finax_cli::{run_command, EXIT_NEGATIVE};

fn main() -> ExitCode {
    let (code, report) = run_command(std::env::args_os());
    let written = if code <= EXIT_NEGATIVE {
        std::io::stdout().write_all(report.as_bytes())
    } else {
        std::io::stderr().write_all(report.as_bytes())
    };
    if written.is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}
