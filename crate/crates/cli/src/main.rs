//! Command-line front end: reads polynomial, triple, measure and graph JSON,
//! runs one analysis and writes JSON, CSV or SVG.

mod config;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use config::Cli;
use run::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&CliError::Usage(e.to_string().trim().to_string())),
    };
    let out = cli.jobs.map_or_else(
        || run::run(&cli),
        |n| match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| run::run(&cli)),
            Err(e) => Err(CliError::Usage(e.to_string())),
        },
    );
    match out.and_then(|text| run::emit(&cli, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    let body = serde_json::json!({"error": e.code(), "detail": e.detail()});
    let _ = writeln!(std::io::stderr(), "{body}");
    ExitCode::from(e.exit_status())
}
