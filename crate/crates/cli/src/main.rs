use std::process::ExitCode;

use c1pg_cli::{emit, run_sweep, Args, RunConfig};
use clap::Parser;

fn main() -> ExitCode {
    let cfg = match RunConfig::from_args(Args::parse()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = run_sweep(&cfg);
    ExitCode::from(emit(&cfg, &report) as u8)
}
