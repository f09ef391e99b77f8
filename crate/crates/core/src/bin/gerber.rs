use std::io;
use std::process::ExitCode;

use clap::Parser;
use gerber_core::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code.code() as u8)
}
