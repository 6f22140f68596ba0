mod commands;
mod params;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Single-shot converse bounds and exact protocol checks over finite distributions.
#[derive(Debug, Parser)]
#[command(name = "skconverse", version)]
pub struct Cli {
    /// JSON object of parameters; explicit flags take precedence.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Report format; scans default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal type-II error β_ε(P, Q) with its test certificate.
    Beta(BetaArgs),
    #[command(subcommand)]
    Smooth(SmoothCmd),
    #[command(subcommand)]
    Structure(StructureCmd),
    #[command(subcommand)]
    Bound(BoundCmd),
    #[command(subcommand)]
    Scan(ScanCmd),
    #[command(subcommand)]
    Protocol(ProtocolCmd),
}

#[derive(Debug, Args)]
pub struct PqArgs {
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    #[command(flatten)]
    pub pq: PqArgs,
}

/// Smooth min-entropy and smooth max-divergence.
#[derive(Debug, Subcommand)]
pub enum SmoothCmd {
    Hmin {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
    },
    Dmax(PqArgs),
}

/// Maximal common function and minimal sufficient statistic.
#[derive(Debug, Subcommand)]
pub enum StructureCmd {
    Mcf {
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        x1: Option<String>,
        #[arg(long)]
        x2: Option<String>,
    },
    Mss {
        #[arg(long)]
        dist: Option<String>,
        /// Variable the statistic is a function of.
        #[arg(long)]
        given: Option<String>,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct TwoPartyArgs {
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub x1: Option<String>,
    #[arg(long)]
    pub x2: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long)]
    pub delta2: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SlackArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Total budget split evenly into 2ξ = ζ = η when those are not given.
    #[arg(long)]
    pub mu: Option<f64>,
}

/// Converse bounds and necessary conditions.
#[derive(Debug, Subcommand)]
pub enum BoundCmd {
    /// Secret-key length bound minimized over partitions, or at one partition.
    Sk {
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        /// 1-based blocks, e.g. "1,2|3".
        #[arg(long, conflicts_with = "all_partitions")]
        partition: Option<String>,
        #[arg(long)]
        all_partitions: bool,
        /// Alternative factorizing distribution for a fixed partition.
        #[arg(long, requires = "partition")]
        q: Option<String>,
    },
    Ot(TwoPartyArgs),
    Bc(TwoPartyArgs),
    /// Necessary condition for secure computation of a function table.
    Compute {
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        partition: Option<String>,
        #[command(flatten)]
        slacks: SlackArgs,
    },
    /// Necessary condition for secure transmission with a κ-bit key.
    Transmit {
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        kappa: Option<f64>,
        #[command(flatten)]
        slacks: SlackArgs,
    },
}

/// IID convergence scans.
#[derive(Debug, Subcommand)]
pub enum ScanCmd {
    Stein {
        #[command(flatten)]
        pq: PqArgs,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
    Dmax {
        #[command(flatten)]
        pq: PqArgs,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
    /// Per-copy secret-key bound on Jⁿ next to the capacity formula.
    Capacity {
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
}

#[derive(Debug, Args)]
pub struct ProtoSource {
    /// Protocol JSON file.
    #[arg(long)]
    pub proto: Option<String>,
    /// Source distribution, when the protocol file does not embed one.
    #[arg(long)]
    pub dist: Option<String>,
}

/// Exact evaluation of small interactive protocols.
#[derive(Debug, Subcommand)]
pub enum ProtocolCmd {
    /// Security of a key-agreement, OT or BC protocol; with --eta also the converse.
    Eval {
        #[command(flatten)]
        src: ProtoSource,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Runs the OT-to-SK or BC-to-SK reduction and checks its claim.
    Reduce {
        #[command(flatten)]
        src: ProtoSource,
        /// Use the ideal OT protocol on L-bit strings instead of a file.
        #[arg(long, conflicts_with = "proto")]
        ideal_ot: Option<u32>,
        /// OT reduction variant: one, two or both.
        #[arg(long)]
        variant: Option<String>,
        /// Also write each reduced protocol as JSON (suffixed by variant).
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Seeded random protocols checked against the converse and its lemmas.
    Fuzz {
        #[arg(long)]
        count: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        independence_count: Option<u64>,
    },
}

fn main() -> ExitCode {
    // usage errors share exit status 1 with other input problems; 2 is reserved
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
