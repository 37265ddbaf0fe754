use std::path::PathBuf;

use aepp_core::analysis::{Grid, Target, CROSSOVER_RANGE, CROSSOVER_TOL};
use aepp_core::protocols::{Family, ProtocolSpec, MAX_EXPONENT};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const PROTOCOL_HELP: &str = "aepp-a, aepp-p, maneva-smolin (block size from --n or a -nK suffix, \
     e.g. aepp-a-n3), leung-shor, aepp-star-4, recurrence, modified-recurrence, hashing, envelope";

#[derive(Debug, Parser)]
#[command(
    name = "aepp",
    version,
    about = "Exact yields of two-way entanglement purification protocols on Werner pairs"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file. Relative paths are resolved against $AEPP_OUTPUT_DIR
    /// when it is set; without this flag output goes to
    /// $AEPP_OUTPUT_DIR/<command>.<format>, or to stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Run the cross-evaluator and Monte-Carlo self-checks; exit with
    /// status 3 if any fails.
    #[arg(long, global = true)]
    pub check: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Yield curves over a fidelity grid.
    Sweep(SweepArgs),
    /// Yield at a single fidelity, with per-branch detail in JSON.
    Yield(YieldArgs),
    /// Fidelity at which a yield curve meets the hashing yield.
    Crossover(CrossoverArgs),
    /// Monte-Carlo leaf frequencies against the exact tree.
    Mc(McArgs),
    /// Even-parity probability along F = 1 - 2^-n, or the advantage table.
    Asymptote(AsymptoteArgs),
    /// AEPP(a, 2^n) for n = 2..6, the earlier protocols and hashing on one grid.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Selection {
    /// Protocols, comma separated.
    #[arg(long, short, value_delimiter = ',', required = true, help = format!("Protocols, comma separated: {PROTOCOL_HELP}"))]
    pub protocol: Vec<String>,

    /// Block exponents n (N = 2^n) for protocols given without a suffix.
    #[arg(long, short, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..=i64::from(MAX_EXPONENT)))]
    pub n: Vec<u32>,

    /// Largest exponent of the AEPP(a) envelope.
    #[arg(long, default_value_t = MAX_EXPONENT, value_parser = clap::value_parser!(u32).range(1..=i64::from(MAX_EXPONENT)))]
    pub n_max: u32,
}

impl Selection {
    /// Expands the selection into concrete targets.
    pub fn targets(&self) -> Result<Vec<Target>, String> {
        let mut out = Vec::new();
        for name in &self.protocol {
            let name = name.trim();
            if name == "envelope" {
                out.push(Target::envelope(self.n_max).map_err(|e| e.to_string())?);
                continue;
            }
            if let Ok(family) = name.parse::<Family>() {
                if family.takes_exponent() {
                    if self.n.is_empty() {
                        return Err(format!("{name} needs --n or a -nK suffix"));
                    }
                    for &n in &self.n {
                        out.push(Target::Protocol(
                            ProtocolSpec::new(family, n).map_err(|e| e.to_string())?,
                        ));
                    }
                    continue;
                }
            }
            out.push(
                name.parse::<Target>()
                    .map_err(|_| format!("unknown protocol {name:?}; valid values: {PROTOCOL_HELP}"))?,
            );
        }
        Ok(out)
    }
}

/// Parses a fidelity in [0, 1].
pub fn parse_fidelity(s: &str) -> Result<f64, String> {
    let f: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&f) {
        Ok(f)
    } else {
        Err(format!("fidelity {f} is outside [0, 1]"))
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse().map_err(|e: aepp_core::Error| e.to_string())
}

fn default_grid() -> Grid {
    Grid::default()
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub selection: Selection,

    /// Fidelity grid min:max:count.
    #[arg(long, value_parser = parse_grid, default_value_t = default_grid())]
    pub grid: Grid,
}

#[derive(Debug, Args)]
pub struct YieldArgs {
    #[command(flatten)]
    pub selection: Selection,

    /// Werner fidelity.
    #[arg(long = "f", short = 'f', value_parser = parse_fidelity)]
    pub fidelity: f64,
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    #[command(flatten)]
    pub selection: Selection,

    /// Lower end of the search bracket.
    #[arg(long, value_parser = parse_fidelity, default_value_t = CROSSOVER_RANGE.0)]
    pub lo: f64,

    /// Upper end of the search bracket.
    #[arg(long, value_parser = parse_fidelity, default_value_t = CROSSOVER_RANGE.1)]
    pub hi: f64,

    /// Final bracket width.
    #[arg(long, default_value_t = CROSSOVER_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub selection: Selection,

    /// Werner fidelity.
    #[arg(long = "f", short = 'f', value_parser = parse_fidelity)]
    pub fidelity: f64,

    /// Number of sampled blocks (initial pairs for the recurrences).
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct AsymptoteArgs {
    /// Largest n (at most 60; at most 12 with --advantage).
    #[arg(long, default_value_t = 30)]
    pub n_max: u32,

    /// Emit the closed-form yield against hashing and the large-n bound.
    #[arg(long)]
    pub advantage: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Defaults to AEPP(a, 2^n) for n = 2..6, the earlier protocols, hashing
    /// and the envelope.
    #[arg(long, short, value_delimiter = ',', help = format!("Protocols, comma separated: {PROTOCOL_HELP}"))]
    pub protocol: Vec<String>,

    #[arg(long, short, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..=i64::from(MAX_EXPONENT)))]
    pub n: Vec<u32>,

    #[arg(long, default_value_t = MAX_EXPONENT, value_parser = clap::value_parser!(u32).range(1..=i64::from(MAX_EXPONENT)))]
    pub n_max: u32,

    #[arg(long, value_parser = parse_grid, default_value_t = default_grid())]
    pub grid: Grid,
}
