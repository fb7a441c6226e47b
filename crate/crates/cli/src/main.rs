mod args;
mod bench;
mod error;
mod files;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rmfec::sim::write_csv;
use rmfec::{run_curve, TrialConfig};

use args::{Cli, Command};
use error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rmfec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode(a) => {
            let params = a.code.params()?;
            let written = files::encode_file(&a.input, &a.output, &params, a.z)?;
            eprintln!("encoded {written} blocks with {params}");
            Ok(())
        }
        Command::Decode(a) => {
            let report = files::decode_file(&a)?;
            eprintln!(
                "decoded {} blocks of {} ({} of {} packets received)",
                report.blocks, report.params, report.received, report.sent
            );
            Ok(())
        }
        Command::Simulate(a) => {
            let params = a.code.params()?;
            let config = TrialConfig {
                params,
                algorithm: a.algo,
                trials: a.trials,
                seed: a.seed,
                max_extra: a.max_extra.unwrap_or_else(|| default_max_extra(&params)),
            };
            config
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let stats = run_curve(&config)?;
            let mut out = Vec::new();
            write_csv(&mut out, &config, &stats)?;
            std::io::stdout()
                .write_all(&out)
                .map_err(|e| CliError::io("standard output", e))
        }
        Command::Bench(a) => bench::run(&a),
    }
}

/// About 20% of `k`, capped at `n - k`.
fn default_max_extra(params: &rmfec::CodeParams) -> usize {
    params.k().div_ceil(5).min(params.n() - params.k())
}
