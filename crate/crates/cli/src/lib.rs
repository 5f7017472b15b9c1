//! Configuration, orchestration and reporting for the `potwalk` tool.

pub mod config;
pub mod run;

use clap::ValueEnum;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{run, CliError, RunOptions, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    TwoPoint,
    Lyapunov,
    Rate,
    Dual,
    Phase,
    Hyperplane,
    Partition,
    Scan,
    Verify,
    Field,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::TwoPoint => "two-point",
            Subcommand::Lyapunov => "lyapunov",
            Subcommand::Rate => "rate",
            Subcommand::Dual => "dual",
            Subcommand::Phase => "phase",
            Subcommand::Hyperplane => "hyperplane",
            Subcommand::Partition => "partition",
            Subcommand::Scan => "scan",
            Subcommand::Verify => "verify",
            Subcommand::Field => "field",
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const BUDGET: i32 = 2;
    pub const INCONSISTENT: i32 = 3;
}
