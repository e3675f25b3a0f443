use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "bdfoa", version, about = "Directional first-order analysis of bilevel programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sufficient conditions for a single-valued localization of S_FO.
    CheckLocalization(Common),
    /// Admissible directions and inner-semicontinuity evidence at (x̄, ȳ).
    Directions(Common),
    /// Sampled S_FO = S check on a directional neighborhood.
    VerifyEquivalence(Common),
    /// Critical direction, constraint qualification and directional KKT certificate.
    Certify(CertifyArgs),
    /// Global minimizers of the lower level at x.
    SolveLower(Common),
    /// V(x) along a segment, as CSV.
    ValueFunction(SegmentArgs),
    /// Run a named example end to end and write its data files.
    Reproduce(ReproduceArgs),
    /// S_FO and S curves along a segment, as CSV.
    PlotData(SegmentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Built-in problem name.
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    pub builtin: Option<String>,
    /// Problem config (JSON).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// x, or x followed by y.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub direction: Option<Vec<f64>>,
    /// ε_x, optionally followed by ε_y.
    #[arg(long, num_args = 1..=2)]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Grid resolution per lower-level axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Write the JSON report (or CSV for segment commands) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report to stdout.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Certify even when no constraint qualification can be established.
    #[arg(long)]
    pub assume_cq: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter range s ∈ [a, b] for x = point + s·direction.
    #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [0.0, 2.0])]
    pub range: Vec<f64>,
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// mirrlees, modified-mirrlees, figure1, example-xy-1, example-xy3 or principal-agent-2.
    pub name: String,
    /// Output directory for data files and the report.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub json: bool,
}
