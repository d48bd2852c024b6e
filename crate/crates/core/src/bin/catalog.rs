//! Run every case of a catalog directory and print the summary CSV.
//!
//! Usage: `catalog <catalog dir> [out dir] [--kappa-cap N] [--encoder-cap N] [--workers N]`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lapenc::driver::{catalog_csv, run_catalog, CatalogOptions};

#[derive(Parser, Debug)]
#[command(name = "catalog")]
struct Cli {
    dir: PathBuf,
    #[arg(default_value = "catalog_out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1024)]
    kappa_cap: usize,
    #[arg(long, default_value_t = 4096)]
    encoder_cap: usize,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = CatalogOptions {
        kappa_cap: cli.kappa_cap,
        encoder_cap: cli.encoder_cap,
        tol: cli.tol,
        workers: cli.workers,
    };
    match run_catalog(&cli.dir, &cli.out, opts) {
        Ok(rows) => {
            let csv = catalog_csv(&rows);
            print!("{csv}");
            if let Err(e) = std::fs::write(cli.out.join("summary.csv"), &csv) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
