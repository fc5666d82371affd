//! Protocol v1 stub worker for testing external backends.
//!
//! Usage: rvosh-stub-worker [--protocol N] [--fault KIND] [--fault-on TEXT]

use std::io::{self, BufWriter};
use std::process::ExitCode;

use rvosh_core::backends::stub::{serve_stub, StubExit, StubOptions};

fn parse_args() -> Result<StubOptions, String> {
    let mut opts = StubOptions::default();
    let mut args = std::env::args().skip(1);
    while let Some(flag) = args.next() {
        let mut value = || args.next().ok_or_else(|| format!("{flag} needs a value"));
        match flag.as_str() {
            "--protocol" => {
                let v = value()?;
                opts.protocol = Some(v.parse().map_err(|_| format!("bad protocol '{v}'"))?);
            }
            "--fault" => opts.fault = Some(value()?.parse()?),
            "--fault-on" => opts.fault_trigger = Some(value()?),
            other => return Err(format!("unknown argument '{other}'")),
        }
    }
    Ok(opts)
}

fn main() -> ExitCode {
    let opts = match parse_args() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("rvosh-stub-worker: {e}");
            return ExitCode::from(2);
        }
    };
    let stdin = io::stdin().lock();
    let stdout = BufWriter::new(io::stdout().lock());
    match serve_stub(stdin, stdout, &opts) {
        Ok(StubExit::InputClosed) => ExitCode::SUCCESS,
        Ok(StubExit::Crashed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("rvosh-stub-worker: {e}");
            ExitCode::from(3)
        }
    }
}
