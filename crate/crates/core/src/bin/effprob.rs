use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use effect_probs::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match cli::run(&args, &mut out) {
        Ok(outcome) => outcome.code(),
        // reader went away (e.g. piped into `head`): nothing left to report
        Err(cli::CliError::Io { ref source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{}", e.report_line());
            cli::USAGE_EXIT
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
