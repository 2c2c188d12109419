//! `qlho` binary: resolve the configuration, run the experiment, report
//! the outcome. Exit status 0 when every verdict passes, 1 when any fails
//! or the run aborts, 2 on configuration errors.

use clap::Parser;

use qlho_cli::config::{CliArgs, ExperimentConfig};
use qlho_cli::runner::{run_experiment, RunError};

fn main() {
    let args = CliArgs::parse();
    let cfg = match ExperimentConfig::from_cli(&args) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(2);
        }
    };
    match run_experiment(&cfg) {
        Ok(outcome) => {
            println!("wrote {}", outcome.csv_path.display());
            println!("wrote {}", outcome.report_path.display());
            println!("overall: {}", if outcome.pass { "pass" } else { "fail" });
            std::process::exit(i32::from(!outcome.pass));
        }
        Err(err @ RunError::Config { .. }) => {
            eprintln!("{err}");
            std::process::exit(2);
        }
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(1);
        }
    }
}
