use std::process::ExitCode;

use clap::Parser;
use structlti_cli::{run, Cli, Exit};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(Exit::Input as u8) } else { ExitCode::SUCCESS };
        }
    };
    let out = run(&cli);
    println!("{}", out.render(cli.format));
    ExitCode::from(out.exit as u8)
}
