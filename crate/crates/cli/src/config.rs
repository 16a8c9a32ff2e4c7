use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Defaults shared by every subcommand, echoed into each output.
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_TERMS: usize = 10;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_RADIUS: f64 = 5.0;

#[derive(Debug, Parser, Serialize)]
#[command(name = "motherbody", version, about = "Motherbody measures for algebraic Cauchy transforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Defaults to svg for `plot` and json otherwise.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Cli {
    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Plot(_) => Format::Svg,
            _ => Format::Json,
        })
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Probability-branch tests and Newton support of a bivariate polynomial.
    Analyze(PolyArgs),
    /// Series of the probability branch at infinity.
    Expand(ExpandArgs),
    /// Eigenpolynomials of the operator built from a balanced polynomial.
    Eigen(EigenArgs),
    /// Singular points and the graph of double singular trajectories.
    Quad(QuadArgs),
    /// Critical graph and verdict of the Strebel test for Q = 0.
    Strebel(TripleArgs),
    /// Candidate motherbody measures, or the positivity criterion of a graph.
    Measures(MeasuresArgs),
    /// Quadrature check of a measure against an algebraic equation.
    Verify(VerifyArgs),
    /// SVG of a trajectory graph or a measure support.
    Plot(PlotArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PolyArgs {
    /// Bivariate polynomial JSON ({"monomials": [...]}).
    #[arg(long)]
    pub poly: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExpandArgs {
    #[arg(long)]
    pub poly: PathBuf,
    /// Truncation order N.
    #[arg(long, default_value_t = DEFAULT_TERMS)]
    pub terms: usize,
    /// Rational arithmetic; coefficients are {"num","den"} pairs.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EigenArgs {
    #[arg(long)]
    pub poly: PathBuf,
    #[arg(long)]
    pub degree_max: usize,
    /// Degrees to solve; defaults to degree-max alone.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Vec<usize>,
    /// Include roots (CSV rows "re,im" with --format csv).
    #[arg(long)]
    pub emit_roots: bool,
    /// Histogram of root real parts with this many bins.
    #[arg(long)]
    pub emit_histogram: Option<usize>,
    /// Symbol residual |Σ Q_i L_nⁱ − 1| at these points ("re,im;re,im").
    #[arg(long, value_delimiter = ';')]
    pub check_symbol: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct TripleArgs {
    /// Triple JSON ({"P": poly, "Q": poly, "R": poly}).
    #[arg(long)]
    pub triple: PathBuf,
    /// Arclength budget per trajectory; defaults to 50 diameters.
    #[arg(long)]
    pub budget: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct QuadArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub triple: TripleArgs,
    /// Include the embedded graph with polylines and faces.
    #[arg(long)]
    pub emit_graph: bool,
    /// Write the trajectory picture to this file as well.
    #[arg(long)]
    pub emit_svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MeasuresArgs {
    #[arg(long, conflicts_with = "graph_json", required_unless_present = "graph_json")]
    pub triple: Option<PathBuf>,
    /// Abstract embedded multigraph; runs only the graph criteria.
    #[arg(long)]
    pub graph_json: Option<PathBuf>,
    #[arg(long)]
    pub budget: Option<f64>,
    /// Density samples per arc in the output.
    #[arg(long, default_value_t = 16)]
    pub density_samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// A measure, or a candidate object carrying one under "measure".
    #[arg(long)]
    pub measure_json: PathBuf,
    /// Bivariate polynomial or triple JSON.
    #[arg(long)]
    pub equation_json: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Sampling disk radius.
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: f64,
    /// Largest accepted |branch − quadrature|.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long, conflicts_with = "measure_json", required_unless_present = "measure_json")]
    pub triple: Option<PathBuf>,
    #[arg(long)]
    pub measure_json: Option<PathBuf>,
    #[arg(long)]
    pub budget: Option<f64>,
}
