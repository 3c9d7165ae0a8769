//! `ggmlab`: GGM and non-Gaussianity experiments as CSV.

mod commands;
mod spec;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ggmlab", version, about = "Genuine multimode entanglement of continuous-variable states")]
struct Cli {
    /// Worker threads for independent rows (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// GGM of a state family, optionally swept over one parameter.
    Ggm(GgmArgs),
    /// δ_NG and fractional GGM enhancement of photon-added and -subtracted FMSV states.
    NongaussTable(TableArgs),
    /// GGM spread over all splits m1 + m3 = M of alternate-mode operations.
    FreezeCheck(FreezeArgs),
    /// Grids comparing operations on adjacent and alternate FMSV modes.
    CompareModes(CompareArgs),
    /// Writes a Fock state in the text format read by `ggm --state-file`.
    DumpState(DumpArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Tritter,
    Crystal,
    Fmsv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    None,
    Add,
    Subtract,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Gaussian,
    Fock,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Add,
    Subtract,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    Adjacent,
    Alternate,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareOp {
    Add,
    Subtract,
    DiffSubAdd,
    DiffAltAdj,
}

/// Parameters shared by every state family.
#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Squeezing strength (tritter, fmsv).
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub r: f64,
    /// Crystal coupling |γ1|.
    #[arg(long, default_value_t = 0.8)]
    pub gamma1: f64,
    /// Crystal coupling |γ2|.
    #[arg(long, default_value_t = 0.5)]
    pub gamma2: f64,
    /// Crystal interaction time.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi3: f64,
    /// Photon counts, e.g. `m1=2,m2=1`; one entry may be a range `m1=0..10`.
    #[arg(long)]
    pub counts: Option<String>,
    #[arg(long, value_enum, default_value_t = Op::None)]
    pub op: Op,
    #[command(flatten)]
    pub trunc: TruncArgs,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct TruncArgs {
    /// Bound on the discarded squared-amplitude mass.
    #[arg(long, default_value_t = 1e-10)]
    pub eps_tail: f64,
    /// Hard cap on the principal summation index.
    #[arg(long, default_value_t = 120)]
    pub max_principal: usize,
}

#[derive(Args, Debug)]
pub struct GgmArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// `VAR=a:b:step` or `VAR=v1,v2,...` over r, t or m1..m4.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Defaults to gaussian without photon operations, fock otherwise.
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    /// Read the state from a file written by `dump-state` (fock engine).
    #[arg(long, conflicts_with_all = ["family", "sweep", "counts"])]
    pub state_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub r: f64,
    /// Table row `M1,M2` (repeatable); defaults to the six reference rows.
    #[arg(long = "row")]
    pub rows: Vec<String>,
    #[command(flatten)]
    pub trunc: TruncArgs,
}

#[derive(Args, Debug)]
pub struct FreezeArgs {
    /// Total photon number M = m1 + m3.
    #[arg(long = "total", short = 'M', default_value_t = 6)]
    pub total: u32,
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub r: f64,
    /// Fixed count on mode 2.
    #[arg(long, default_value_t = 0)]
    pub m2: u32,
    #[arg(long, value_enum, default_value_t = Ladder::Subtract)]
    pub op: Ladder,
    #[command(flatten)]
    pub trunc: TruncArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, value_enum)]
    pub op: CompareOp,
    /// Mode paired with mode 1: 2 (adjacent) or 3 (alternate).
    #[arg(long, value_enum, default_value_t = Pairing::Adjacent)]
    pub pairing: Pairing,
    /// Operation compared by `diff-alt-adj`.
    #[arg(long, value_enum, default_value_t = Ladder::Add)]
    pub ladder: Ladder,
    /// Grid bound for m1 and n.
    #[arg(long, default_value_t = 4)]
    pub max: u32,
    /// Fix m1 + n = M (default 8).
    #[arg(long, num_args = 0..=1, default_missing_value = "8", conflicts_with = "three_mode")]
    pub constrained: Option<u32>,
    /// Fix m1 + m2 + m3 = M (default 8); rows are (m1, m2).
    #[arg(long, num_args = 0..=1, default_missing_value = "8")]
    pub three_mode: Option<u32>,
    #[command(flatten)]
    pub trunc: TruncArgs,
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if cli.seed.is_some() {
        log::debug!("--seed has no effect; all computations are deterministic");
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    };
    // rows are computed in parallel, so output is collected and written once
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| match &cli.command {
        Command::Ggm(a) => commands::ggm(a, &mut buf),
        Command::NongaussTable(a) => commands::nongauss_table(a, &mut buf),
        Command::FreezeCheck(a) => commands::freeze_check(a, &mut buf),
        Command::CompareModes(a) => commands::compare_modes(a, &mut buf),
        Command::DumpState(a) => commands::dump_state(a, &mut buf),
    });
    match result {
        Ok(code) => {
            let mut out = std::io::stdout().lock();
            match out.write_all(&buf).and_then(|()| out.flush()) {
                Ok(()) => ExitCode::from(code),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
