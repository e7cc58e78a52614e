use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glsn_core::gravity::GravityVariant;
use glsn_core::WeightScheme;

#[derive(Debug, Parser)]
#[command(
    name = "glsn",
    version,
    about = "Liner shipping network indices and trade regressions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the port network and export edge lists plus stats.json
    Build(BuildArgs),
    /// Compute per-country connectivity and betweenness indices
    Indices(BuildArgs),
    /// Exhaustive subset regression of a country-level variable on the indices
    Regress(RegressArgs),
    /// Fit gravity models of bilateral trade and reconstruct country totals
    Gravity(GravityArgs),
    /// Run build, indices, regress and gravity into one directory
    Report(ReportArgs),
    /// Write a synthetic dataset with planted relationships
    GenFixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Directory holding ports.csv, routes.csv, routes_meta.csv, countries.csv, bilateral.csv
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Route calls: CSV `route_id,seq,port_id`, or JSON when the name ends in .json
    #[arg(long)]
    pub routes: Option<PathBuf>,
    /// Route capacities: CSV `route_id,capacity_teu`
    #[arg(long)]
    pub routes_meta: Option<PathBuf>,
    #[arg(long)]
    pub ports: Option<PathBuf>,
    /// Country economics table
    #[arg(long)]
    pub countries: Option<PathBuf>,
    #[arg(long)]
    pub bilateral: Option<PathBuf>,
    /// Treat any dropped route as an error
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args, Clone)]
pub struct NetworkArgs {
    /// Edge weighting; a comma list exports several, the first drives the indices
    #[arg(long, value_delimiter = ',', default_value = "none", value_parser = parse_scheme)]
    pub weighting: Vec<WeightScheme>,
    /// Path-length cut-offs for GLSN betweenness; the first one feeds regressions
    #[arg(long, value_delimiter = ',', default_value = "2", value_parser = parse_lmax)]
    pub lmax: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dependent {
    Trade,
    Export,
    Import,
    #[value(name = "net_export")]
    NetExport,
    Gdp,
    #[value(name = "trade_change")]
    TradeChange,
}

impl Dependent {
    pub fn name(self) -> &'static str {
        match self {
            Dependent::Trade => "trade",
            Dependent::Export => "export",
            Dependent::Import => "import",
            Dependent::NetExport => "net_export",
            Dependent::Gdp => "gdp",
            Dependent::TradeChange => "trade_change",
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct RegressOptions {
    #[arg(long, value_enum, default_value = "trade")]
    pub dependent: Dependent,
    /// Models whose largest VIF reaches this value are inadmissible
    #[arg(long, default_value_t = 5.0)]
    pub vif_threshold: f64,
    /// Take the natural log of the response before fitting
    #[arg(long)]
    pub log_response: bool,
    /// Fit raw values instead of Z-scores
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args, Clone)]
pub struct GravityOptions {
    #[arg(long, default_value = "base", value_parser = parse_variant)]
    pub variant: GravityVariant,
    /// Share of a country's trade its bilateral records must exceed
    #[arg(long, default_value_t = 0.9)]
    pub coverage: f64,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub regress: RegressOptions,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GravityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub gravity: GravityOptions,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub regress: RegressOptions,
    #[command(flatten)]
    pub gravity: GravityOptions,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub ports: usize,
    #[arg(long = "n-countries", default_value_t = 6)]
    pub countries: usize,
    #[arg(long = "n-routes", default_value_t = 12)]
    pub routes: usize,
    /// Noise multiplier; 0 plants exact relationships
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_scheme(s: &str) -> Result<WeightScheme, String> {
    s.parse().map_err(|e: glsn_core::Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<GravityVariant, String> {
    s.parse().map_err(|e: glsn_core::Error| e.to_string())
}

fn parse_lmax(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(l) if l >= 2 => Ok(l),
        Ok(l) => Err(format!("path-length cut-off must be at least 2, got {l}")),
        Err(e) => Err(e.to_string()),
    }
}
