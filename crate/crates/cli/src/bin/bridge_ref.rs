//! Reference bridge server: speaks protocol v1 on stdin/stdout.
//!
//! Usage: `lmzc-bridge-ref [--param-count N] [--max-order K]`

use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use lmzc::bridge::reference::{serve, ReferenceConfig};

#[derive(Parser)]
#[command(name = "lmzc-bridge-ref", version, about = "Reference predictor for bridge protocol v1")]
struct Cli {
    /// Reported in the handshake.
    #[arg(long, default_value_t = 0)]
    param_count: u64,
    #[arg(long, default_value_t = 2)]
    max_order: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = ReferenceConfig {
        param_count: cli.param_count,
        max_order: cli.max_order,
    };
    let stdin = io::stdin().lock();
    let stdout = BufWriter::new(io::stdout().lock());
    match serve(stdin, stdout, config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lmzc-bridge-ref: {e}");
            ExitCode::FAILURE
        }
    }
}
