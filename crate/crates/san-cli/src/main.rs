//! `san` — snapshot preparation and experiments on social-attribute
//! networks.
//!
//! Exit codes: 0 on success; 2 for unparseable input, 3 for domain
//! violations, 4 for solver failures, 5 for I/O errors. Set `SAN_THREADS`
//! to cap the worker pool and `RUST_LOG` for diagnostics.

mod commands;
mod config;

use clap::Parser;

fn main() {
    env_logger::init();
    let cli = commands::Cli::parse();
    if let Err(err) = commands::run(cli) {
        eprintln!("san: {err}");
        std::process::exit(i32::from(err.kind().exit_code()));
    }
}
