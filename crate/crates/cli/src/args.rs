use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rmfec::{code_params, Algorithm, CodeParams};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rmfec", version, about = "Reed-Muller packet erasure codec")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a file into framed RM packet blocks.
    Encode(EncodeArgs),
    /// Rebuild a file from (possibly incomplete) framed packets.
    Decode(DecodeArgs),
    /// Monte Carlo failure curve, as CSV on standard output.
    Simulate(SimulateArgs),
    /// Time schedule building and replay and report op counts.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct CodeArgs {
    /// Code order r.
    #[arg(short = 'r', long)]
    pub r: u32,
    /// Code length exponent m (n = 2^m).
    #[arg(short = 'm', long)]
    pub m: u32,
}

impl CodeArgs {
    pub fn params(&self) -> Result<CodeParams, CliError> {
        code_params(self.r, self.m).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Packet payload size in bytes.
    #[arg(short = 'z', long, value_parser = clap::value_parser!(u32).range(1..))]
    pub z: u32,
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    #[arg(short = 'o', long)]
    pub output: PathBuf,
    #[arg(long, default_value = "full_ge_hybrid", value_parser = parse_algorithm)]
    pub algo: Algorithm,
    /// Drop each packet with this probability before decoding.
    #[arg(long, default_value_t = 0.0, value_parser = parse_probability)]
    pub loss: f64,
    /// Seed for the packet dropper.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, default_value = "full", value_parser = parse_algorithm)]
    pub algo: Algorithm,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest extra-symbol count in the curve [default: 20% of k].
    #[arg(long)]
    pub max_extra: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Packet payload size in bytes; 0 times the blank phase alone.
    #[arg(short = 'z', long, default_value_t = 1500)]
    pub z: usize,
    /// Received symbols above k, as a percentage of k.
    #[arg(long, default_value_t = 5.0)]
    pub extra_pct: f64,
    /// Comma-separated algorithms to compare.
    #[arg(long, value_delimiter = ',', default_value = "full,ml", value_parser = parse_algorithm)]
    pub algo: Vec<Algorithm>,
    /// Erasure patterns to decode per algorithm.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub patterns: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: rmfec::Error| e.to_string())
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is not in [0, 1]"))
    }
}
