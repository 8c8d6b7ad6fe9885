mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use commands::{CliError, Outcome};

const EXIT_PASS: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Help text of the subcommand named in argv, or of the whole program.
fn grammar(argv: &[OsString]) -> String {
    let mut root = Cli::command();
    root.build();
    let sub = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .find(|a| root.find_subcommand(a).is_some());
    match sub.and_then(|s| root.find_subcommand_mut(&s).cloned()) {
        Some(mut c) => c.render_long_help().to_string(),
        None => root.render_long_help().to_string(),
    }
}

fn usage_failure(msg: &str, argv: &[OsString]) -> ExitCode {
    eprintln!("error: {msg}\n");
    eprintln!("{}", grammar(argv));
    ExitCode::from(EXIT_USAGE)
}

fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Catalog(a) => commands::catalog(a),
        Command::Flow(a) => commands::flow(a),
        Command::Audit(a) => commands::audit(a),
        Command::Frames(a) => commands::frames(a),
    }
}

fn main() -> ExitCode {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::merge(raw.clone()) {
        Ok(a) => a,
        Err(e) => return usage_failure(&e.0, &raw),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::from(EXIT_PASS);
            }
            let _ = e.print();
            eprintln!("\n{}", grammar(&argv));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let common = cli.command.common();
    let outcome = match dispatch(&cli.command) {
        Ok(o) => o,
        Err(CliError::Usage(m)) => return usage_failure(&m, &argv),
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_VIOLATION);
        }
    };

    // single writer for everything the user sees
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut written = Vec::new();
    for a in &outcome.artifacts {
        match output::write_atomic(&common.out, &a.name, &a.bytes) {
            Ok(p) => written.push(p),
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", common.out.join(&a.name).display());
                return ExitCode::from(EXIT_VIOLATION);
            }
        }
    }
    let _ = writeln!(out, "{}", outcome.summary);
    for p in &written {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    if common.verbose > 0 {
        for d in &outcome.details {
            eprintln!("{d}");
        }
    }
    ExitCode::from(if outcome.pass { EXIT_PASS } else { EXIT_VIOLATION })
}
