use std::error::Error;
use std::process::ExitCode;

use clap::Parser;
use rvosh::args::Cli;

/// Error chain on one line, skipping causes already quoted by their parent.
fn describe(e: &dyn Error) -> String {
    let mut msg = e.to_string();
    let mut cause = e.source();
    while let Some(c) = cause {
        let text = c.to_string();
        if !msg.contains(&text) {
            msg.push_str(": ");
            msg.push_str(&text);
        }
        cause = c.source();
    }
    msg
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match rvosh::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rvosh: {}", describe(&e));
            e.exit_code()
        }
    }
}
