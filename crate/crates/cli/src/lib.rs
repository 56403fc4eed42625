//! Batch front end for the curvnet kernel.

pub mod cli;
pub mod commands;
pub mod document;
pub mod obj;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use cli::Cli;
use commands::{execute, Payload};

/// Runs one invocation and returns its exit code: 0 pass, 1 verified failure, 2 input error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let report = outcome.report.render(cli.report);
    let payload = match &outcome.payload {
        Some(Payload::Net(doc)) => match doc.to_json() {
            Ok(s) => Some(s),
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        },
        Some(Payload::Text(t)) => Some(t.clone()),
        None => None,
    };
    let mut stdout = std::io::stdout().lock();
    let written = match (&cli.output, payload) {
        (Some(path), Some(text)) => std::fs::write(path, text).and_then(|_| stdout.write_all(report.as_bytes())),
        (Some(path), None) => std::fs::write(path, report),
        (None, Some(text)) => {
            eprint!("{report}");
            stdout.write_all(text.as_bytes())
        }
        (None, None) => stdout.write_all(report.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    if outcome.report.pass {
        0
    } else {
        1
    }
}
