use std::io::{ErrorKind, Write};
use std::process::ExitCode;

use clap::Parser;
use lse::cli::{run, Cli};
use lse::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        // a closed reader is not a failure
        Err(Error::Io(e)) if e.kind() == ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            2
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
