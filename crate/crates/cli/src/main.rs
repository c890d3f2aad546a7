use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use geneweave_cli::{run, Cli};

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(output) => {
            eprint!("{}", output.stderr);
            std::io::stdout().write_all(&output.stdout).expect("stdout");
            ExitCode::from(output.status)
        }
        Err(e) if e.code == "USAGE" => {
            eprintln!("{}", e.message);
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
