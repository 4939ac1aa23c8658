//! `phi-convex`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 inequality violated,
//! 4 hypothesis not met.

mod config;
mod error;
mod json;
mod run;

use std::process::ExitCode;

use error::exit;

fn main() -> ExitCode {
    let config = match config::parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    if let Some(n) = config.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(exit::USAGE);
        }
    }
    match run::run(&config) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
