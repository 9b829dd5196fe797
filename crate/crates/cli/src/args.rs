use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "qslab",
    version,
    about = "Chain metrics, doubling constants and separating rings on weighted point clouds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write a generated space file.
    Generate(GenerateArgs),
    /// Chain-distance profiles over a δ schedule.
    Chain(ChainArgs),
    /// Doubling, regularity, connectivity and chain-metric constants.
    Constants(ConstantsArgs),
    /// Growth of mu(B_xy)^(1/s) / q^δ under δ-halving.
    ProbeDimension(ProbeDimensionArgs),
    /// Quasisymmetric distortion on a Rickman rug.
    ProbeRug(ProbeRugArgs),
    /// Cheapest-level separating ring around a point.
    Ring(RingArgs),
    /// Ring-based connector between two points.
    Connect(ConnectArgs),
    /// Three-point ratios of the chain metric against an η envelope.
    QsProfile(QsProfileArgs),
    /// Load a space file and check the metric axioms on sampled triples.
    Validate(ValidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Chain(_) => "chain",
            Command::Constants(_) => "constants",
            Command::ProbeDimension(_) => "probe-dimension",
            Command::ProbeRug(_) => "probe-rug",
            Command::Ring(_) => "ring",
            Command::Connect(_) => "connect",
            Command::QsProfile(_) => "qs-profile",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Sphere,
    Rug,
    Snowflake,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub variant: Variant,
    /// Point count (sphere, snowflake).
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Grid columns (rug).
    #[arg(long, default_value_t = 100)]
    pub nx: usize,
    /// Grid rows (rug).
    #[arg(long, default_value_t = 100)]
    pub ny: usize,
    /// Rug dimension s > 2.
    #[arg(long, default_value_t = 3.0)]
    pub dimension: f64,
    /// Snowflake exponent in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub exponent: f64,
    /// Side length of the square patch (rug, snowflake).
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Space file to write.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SpaceArg {
    /// Space file (JSON).
    #[arg(long)]
    pub space: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainArgs {
    #[command(flatten)]
    pub space: SpaceArg,
    #[arg(long, default_value_t = 2.0)]
    pub s: f64,
    /// Strictly decreasing δ values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub deltas: Vec<f64>,
    /// Number of random pairs, ignored when --x and --y are given.
    #[arg(long, default_value_t = 50)]
    pub pairs: usize,
    /// Minimum pair distance (default: the larger of 4 × mesh and the first δ).
    #[arg(long)]
    pub min_separation: Option<f64>,
    #[arg(long, requires = "y")]
    pub x: Option<usize>,
    #[arg(long, requires = "x")]
    pub y: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value = "chain.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub space: SpaceArg,
    #[arg(long, default_value_t = 2.0)]
    pub s: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 50)]
    pub pairs: usize,
    /// Smallest sampled scale (default: 2 × mesh).
    #[arg(long)]
    pub scale_lo: Option<f64>,
    /// Largest sampled scale (default: diameter / 4).
    #[arg(long)]
    pub scale_hi: Option<f64>,
    #[arg(long)]
    pub min_separation: Option<f64>,
    /// Candidate λ values for the connectivity check, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value = "constants.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeDimensionArgs {
    #[command(flatten)]
    pub space: SpaceArg,
    #[arg(long, default_value_t = 1.5)]
    pub s: f64,
    #[arg(long, default_value_t = 4)]
    pub halvings: u32,
    /// Starting δ (default: diameter / 5).
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long, requires = "y")]
    pub x: Option<usize>,
    #[arg(long, requires = "x")]
    pub y: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value = "probe-dimension.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeRugArgs {
    #[command(flatten)]
    pub space: SpaceArg,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.05,0.1,0.2")]
    pub scales: Vec<f64>,
    #[arg(short, long, default_value = "probe-rug.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RingShape {
    /// Calibration scale ε (default: sqrt(20 × median weight)).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub c_d: f64,
    /// Annulus and guard factors `inner,outer,guard`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub multipliers: Option<Vec<f64>>,
    /// Cover-ball inflation factor (default 2).
    #[arg(long)]
    pub inflation: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RingArgs {
    #[command(flatten)]
    pub space: SpaceArg,
    #[arg(long)]
    pub center: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[command(flatten)]
    pub shape: RingShape,
    /// Use the multipliers 2^(2k), 2^(5k), 2^(7k) and inflation 5.
    #[arg(long, conflicts_with = "multipliers")]
    pub strict: bool,
    #[arg(short, long, default_value = "ring.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ConnectArgs {
    #[command(flatten)]
    pub space: SpaceArg,
    #[arg(long)]
    pub x: usize,
    #[arg(long)]
    pub y: usize,
    #[arg(long)]
    pub delta: f64,
    /// Measure ratio between a level ball and its small balls (default 96).
    #[arg(long)]
    pub l: Option<f64>,
    #[command(flatten)]
    pub shape: RingShape,
    #[arg(short, long, default_value = "connect.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct QsProfileArgs {
    #[command(flatten)]
    pub space: SpaceArg,
    #[arg(long, default_value_t = 2.0)]
    pub s: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 500)]
    pub triples: usize,
    /// Envelope exponent (default: from the doubling growth fit).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Samples for the growth fit when --alpha is absent.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value = "qs-profile.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub space: SpaceArg,
    /// Random triples to check.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value = "validate.json")]
    pub out: PathBuf,
}
