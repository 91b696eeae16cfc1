//! `acotool`: certification, census and simulation campaigns for
//! asynchronously contracting operators.
//!
//! Exit status: 0 on success, 1 when a check fails or a verdict is negative,
//! 2 on malformed input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "acotool",
    version,
    about = "Certify and simulate asynchronously contracting operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Finite ultrametric spaces.
    #[command(subcommand)]
    Space(SpaceCommand),
    /// Box-sequence certification.
    #[command(subcommand)]
    Aco(AcoCommand),
    /// Multipath stable-paths instances.
    #[command(subcommand)]
    Routing(RoutingCommand),
    /// Stratified ground logic programs.
    #[command(subcommand)]
    Logic(LogicCommand),
    /// Run one iteration and write its trace.
    Run {
        #[arg(value_enum)]
        mode: Mode,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand, Debug)]
enum SpaceCommand {
    /// Check the ultrametric axioms, the isosceles property and spherical completeness.
    Check { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum AcoCommand {
    /// Certify or refute a routing instance (.json) or logic program (.pl).
    Certify {
        file: PathBuf,
        #[arg(long, default_value = "per-node")]
        granularity: String,
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Write the certificate here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide all 256 operators on {0,1}x{0,1} by box search and by ultrametric search.
    Census {
        /// Write one CSV row per operator.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum RoutingCommand {
    /// Validate preferences and check strict contraction.
    Check { file: PathBuf },
    /// Iterate to the stable assignment.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "sync")]
        mode: Mode,
        #[arg(long, default_value = "per-node")]
        granularity: String,
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Solve even when preferences are not strictly inflationary.
        #[arg(long)]
        force: bool,
        /// Start state, e.g. "{ε, (1 d)}"; defaults to the empty state.
        #[arg(long)]
        start: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum LogicCommand {
    /// Compute the perfect model.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "sync")]
        mode: Mode,
        #[command(flatten)]
        campaign: CampaignArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sync,
    Async,
}

/// Sampled-schedule parameters; run `i` uses seed `seed + i`.
#[derive(Args, Debug, Clone)]
pub struct CampaignArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    #[arg(long = "max-staleness", default_value_t = 5)]
    max_staleness: usize,
    #[arg(long = "fairness-window", default_value_t = 8)]
    fairness_window: usize,
    #[arg(long = "activation-prob", default_value_t = 0.5)]
    activation_prob: f64,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Routing instance (.json) or logic program (.pl).
    file: PathBuf,
    #[arg(long, default_value = "per-node")]
    granularity: String,
    /// Schedule file; otherwise one is sampled from the seed.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    #[arg(long = "max-staleness", default_value_t = 5)]
    max_staleness: usize,
    #[arg(long = "fairness-window", default_value_t = 8)]
    fairness_window: usize,
    #[arg(long = "activation-prob", default_value_t = 0.5)]
    activation_prob: f64,
    /// Start state; defaults to the empty state.
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Run even when the routing preferences are not strictly inflationary.
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Space(SpaceCommand::Check { file }) => commands::space_check(&file),
        Command::Aco(AcoCommand::Certify {
            file,
            granularity,
            campaign,
            out,
        }) => commands::aco_certify(&file, &granularity, &campaign, out.as_deref()),
        Command::Aco(AcoCommand::Census { out }) => commands::aco_census(out.as_deref()),
        Command::Routing(RoutingCommand::Check { file }) => commands::routing_check(&file),
        Command::Routing(RoutingCommand::Solve {
            file,
            mode,
            granularity,
            campaign,
            force,
            start,
        }) => commands::routing_solve(
            &file,
            mode,
            &granularity,
            &campaign,
            force,
            start.as_deref(),
        ),
        Command::Logic(LogicCommand::Solve {
            file,
            mode,
            campaign,
        }) => commands::logic_solve(&file, mode, &campaign),
        Command::Run { mode, run } => commands::run(mode, &run),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
