use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lapenc::config::Axis;
use lapenc::driver::{run, RunOptions, USAGE};

#[derive(Parser, Debug)]
#[command(name = "lapenc", disable_help_flag = true)]
struct Cli {
    #[arg(short = 'i')]
    input: Option<PathBuf>,
    #[arg(short = 'c', default_value = "x")]
    cut: String,
    #[arg(short = 'd')]
    degenerate: bool,
    #[arg(short = 'e')]
    eigen: bool,
    #[arg(short = 'h')]
    help: bool,
    #[arg(short = 'j')]
    split: bool,
    #[arg(short = 'm')]
    matrix: bool,
    #[arg(short = 'r')]
    reorder: bool,
    #[arg(short = 's')]
    solution: bool,
    #[arg(long)]
    pauli: bool,
    #[arg(long)]
    fable: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long = "shear-retaining")]
    shear_retaining: bool,
    #[arg(long = "kron-compare")]
    kron_compare: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.kind());
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    if cli.help {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let Some(input) = cli.input else {
        eprintln!("error: missing -i <input file>");
        eprint!("{USAGE}");
        return ExitCode::from(2);
    };
    let slice: Axis = match cli.cut.parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.tol.is_nan() || cli.tol < 0.0 {
        eprintln!("error: --tol must be non-negative");
        return ExitCode::from(2);
    }
    let opts = RunOptions {
        slice,
        allow_degenerate: cli.degenerate,
        eigen: cli.eigen,
        split: cli.split,
        matrix_plot: cli.matrix,
        reorder: cli.reorder,
        solution_plot: cli.solution,
        pauli: cli.pauli,
        fable: cli.fable,
        tol: cli.tol,
        shear_retaining: cli.shear_retaining,
        kron_compare: cli.kron_compare,
        ..RunOptions::new(input, ".")
    };
    match run(&opts) {
        Ok(stats) => {
            let json = lapenc::report::emit_stats(&stats);
            println!("{}", serde_json::to_string_pretty(&json).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
