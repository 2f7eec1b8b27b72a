use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "dyadic", version, about = "Dyadic cubes on finite metric spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Construct nets, constants, parents and cubes, and write them under --out.
    Build(RunConfig),
    /// Re-check every property family on a build directory.
    Verify(DirArgs),
    /// Estimate the conformal dimension from a build directory.
    Estimate(DirArgs),
    /// Write a level graph or scale section as an edge list.
    ExportGraph(ExportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DirArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Worker threads (overrides DYADIC_WORKERS).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ExportArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Level graph of this level.
    #[arg(long, conflicts_with = "scale")]
    pub level: Option<i32>,
    /// Scale section at this scale.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Q)]
    pub family: FamilyArg,
    /// Destination file; defaults to a name inside --dir.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    K,
    Q,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Strict,
    Relaxed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// One point per line, whitespace-separated coordinates.
    Points,
    /// Square distance matrix, one row per line.
    Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub k_min: i32,
    pub k_max: i32,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or("expected k_min:k_max")?;
        let k_min = a.trim().parse().map_err(|_| format!("bad k_min {a:?}"))?;
        let k_max = b.trim().parse().map_err(|_| format!("bad k_max {b:?}"))?;
        if k_min > k_max {
            return Err("k_min exceeds k_max".into());
        }
        Ok(Window { k_min, k_max })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.k_min, self.k_max)
    }
}

/// Everything a run depends on. Stored verbatim in the manifest.
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Generator descriptor such as interval:1025, grid:33, cantor:6, gasket:5.
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    pub space: Option<String>,
    /// Input file (see --format).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Points)]
    pub format: InputFormat,
    #[arg(long, value_enum, default_value_t = ModeArg::Relaxed)]
    pub mode: ModeArg,
    /// Scale ratio; relaxed default 0.25, strict default the certified r0.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    pub c_star: f64,
    #[arg(long = "big-c-star", default_value_t = 1.0)]
    pub big_c_star: f64,
    /// Uniform perfectness constant; estimated when absent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Packing constant; estimated when absent.
    #[arg(long)]
    pub n_pack: Option<usize>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub alpha3: Option<f64>,
    #[arg(long)]
    pub alpha6: Option<f64>,
    /// Level window k_min:k_max; derived from the data when absent.
    #[arg(long)]
    pub window: Option<Window>,
    /// Base point shared by all levels.
    #[arg(long, default_value_t = 0)]
    pub base: u32,
    /// Hop bound of the quasi-metric and of the energy sink.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1.001)]
    pub p_min: f64,
    #[arg(long, default_value_t = 6.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_step: f64,
    /// Nodes sampled per level for the energy supremum.
    #[arg(long, default_value_t = 8)]
    pub w_budget: usize,
    /// Largest refinement depth in the decay fit.
    #[arg(long, default_value_t = 6)]
    pub max_k: usize,
    /// Chain-search pairs per level.
    #[arg(long, default_value_t = 10_000)]
    pub chain_budget: usize,
    /// Sampled pairs for the quasi-metric comparison.
    #[arg(long, default_value_t = 2_000)]
    pub pair_budget: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (overrides DYADIC_WORKERS).
    #[arg(long)]
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Defaults for a generated space.
    pub fn generated(space: &str, out: impl Into<PathBuf>) -> Self {
        let mut cfg = Cli::parse_from(["dyadic", "build", "--space", space, "--out", "_"]);
        let Command::Build(c) = &mut cfg.command else { unreachable!() };
        c.out = out.into();
        c.clone()
    }
}
