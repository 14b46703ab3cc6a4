use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use weaklab_cli::config::Cli;
use weaklab_cli::{run, write_atomic};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|r| {
        match &r.destination {
            Some(path) => write_atomic(path, r.rendered.as_bytes())?,
            None => std::io::stdout()
                .write_all(r.rendered.as_bytes())
                .map_err(|e| weaklab_cli::CliError::Io(e.to_string()))?,
        }
        Ok(r)
    });
    match result {
        Ok(r) => {
            eprint!("{}", r.table.summary_text());
            ExitCode::from(r.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("weaklab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
