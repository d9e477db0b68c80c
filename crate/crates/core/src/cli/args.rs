use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use crate::lz::BranchSelector;
use crate::stationary::SearchMethod;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "tripwell",
    version,
    about = "Stationary states, Landau-Zener sweeps and STIRAP in a nonlinear three-mode chain",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GlobalArgs {
    /// Output file; a `<out>.manifest.json` is written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Solver tolerance: integration error per unit time, or the stationary
    /// residual bound for `eigen`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// key=value file (or a previous run manifest) supplying default flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Stationary states and nonlinear levels over an epsilon grid.
    #[command(args_override_self = true)]
    Eigen(EigenArgs),
    /// Equal-slope Landau-Zener sweeps.
    #[command(subcommand)]
    Lz(LzCommand),
    /// Nonlinear STIRAP with counterintuitive Gaussian pulses.
    #[command(subcommand)]
    Stirap(StirapCommand),
}

impl Command {
    /// Subcommand tokens as typed on the command line.
    pub fn path(&self) -> [&'static str; 2] {
        match self {
            Command::Eigen(_) => ["eigen", ""],
            Command::Lz(LzCommand::Run(_)) => ["lz", "run"],
            Command::Lz(LzCommand::Sweep(_)) => ["lz", "sweep"],
            Command::Stirap(StirapCommand::Run(_)) => ["stirap", "run"],
            Command::Stirap(StirapCommand::Sweep(_)) => ["stirap", "sweep"],
            Command::Stirap(StirapCommand::Levels(_)) => ["stirap", "levels"],
        }
    }

    pub fn config_json(&self) -> serde_json::Value {
        let v = match self {
            Command::Eigen(a) => serde_json::to_value(a),
            Command::Lz(LzCommand::Run(a)) => serde_json::to_value(a),
            Command::Lz(LzCommand::Sweep(a)) => serde_json::to_value(a),
            Command::Stirap(StirapCommand::Run(a)) => serde_json::to_value(a),
            Command::Stirap(StirapCommand::Sweep(a)) => serde_json::to_value(a),
            Command::Stirap(StirapCommand::Levels(a)) => serde_json::to_value(a),
        };
        v.expect("argument structs serialize")
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum LzCommand {
    /// One sweep; writes the trajectory.
    #[command(args_override_self = true)]
    Run(LzRunArgs),
    /// Transition probability against the sweep rate.
    #[command(args_override_self = true)]
    Sweep(LzSweepArgs),
}

#[derive(Subcommand, Debug, Clone)]
pub enum StirapCommand {
    /// One pulse sequence; writes the trajectory.
    #[command(args_override_self = true)]
    Run(StirapRunArgs),
    /// Transfer efficiency against the nonlinearity.
    #[command(args_override_self = true)]
    Sweep(StirapSweepArgs),
    /// Instantaneous stationary states during the pulses.
    #[command(args_override_self = true)]
    Levels(StirapLevelsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMode {
    /// Independent root search at every grid point.
    Scan,
    /// Continue every state found at the first grid point.
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    XScan,
    CriticalPoints,
    Both,
}

impl From<MethodArg> for SearchMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::XScan => SearchMethod::XScan,
            MethodArg::CriticalPoints => SearchMethod::CriticalPoints,
            MethodArg::Both => SearchMethod::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchArg {
    Lowest,
    Middle,
    Highest,
}

impl From<BranchArg> for BranchSelector {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Lowest => BranchSelector::Lowest,
            BranchArg::Middle => BranchSelector::Middle,
            BranchArg::Highest => BranchSelector::Highest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EigenArgs {
    #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub w: f64,
    #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
    pub g: f64,
    /// Grid over epsilon: `min:max:count`, a comma list or a single value.
    #[arg(long, default_value = "-0.8:0.8:801", allow_hyphen_values = true)]
    pub eps: Grid,
    #[arg(long, value_enum, default_value_t = EigenMode::Scan)]
    pub mode: EigenMode,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LzRunArgs {
    #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub w: f64,
    #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
    pub g: f64,
    /// Sweep rate of `epsilon = alpha t`; negative rates sweep downwards.
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Half-width of the swept epsilon range (default `40 max(v, w, |g|, |delta|)`).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[arg(long, value_enum, default_value_t = BranchArg::Lowest)]
    pub branch: BranchArg,
    /// Number of output time samples.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LzSweepArgs {
    #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub v: f64,
    /// One curve per value.
    #[arg(long, default_value = "0.2", allow_hyphen_values = true)]
    pub w: Grid,
    /// One curve per value.
    #[arg(long, default_value = "-0.4", allow_hyphen_values = true)]
    pub g: Grid,
    #[arg(long, default_value = "5e-4:0.1:20", allow_hyphen_values = true)]
    pub alpha: Grid,
    /// Spacing of `min:max:count` rate grids.
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[arg(long, value_enum, default_value_t = BranchArg::Lowest)]
    pub branch: BranchArg,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PulseArgs {
    /// Peak coupling of both pulses.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak: Option<f64>,
    /// Standard deviation of the Gaussians.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// `w` peaks at `-separation`, `v` at `+separation`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct StirapRunArgs {
    /// `Delta`; both outer wells sit at `-Delta`.
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub delta_detuning: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub g: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub pulses: PulseArgs,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct StirapSweepArgs {
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub delta_detuning: f64,
    #[arg(long, default_value = "-0.3:0.3:61", allow_hyphen_values = true)]
    pub g: Grid,
    #[command(flatten)]
    #[serde(flatten)]
    pub pulses: PulseArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct StirapLevelsArgs {
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub delta_detuning: f64,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub g: f64,
    /// Sample times (default: 201 points across the pulse window).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Grid>,
    #[command(flatten)]
    #[serde(flatten)]
    pub pulses: PulseArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
}

/// `min:max:count`, a comma-separated list, or a single number.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        self.values_with(Spacing::Linear)
    }

    pub fn values_with(&self, spacing: Spacing) -> Vec<f64> {
        match (self, spacing) {
            (Grid::List(v), _) => v.clone(),
            (&Grid::Range { min, max, count }, Spacing::Log) => crate::lz::log_spaced(min, max, count),
            (&Grid::Range { min, max, count }, Spacing::Linear) => match count {
                1 => vec![min],
                n => (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            max
                        } else {
                            min + (max - min) * i as f64 / (n - 1) as f64
                        }
                    })
                    .collect(),
            },
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{x}` is not a finite number"))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.len() {
            1 => {
                let list = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
                Ok(Grid::List(list))
            }
            3 => {
                let (min, max) = (num(parts[0])?, num(parts[1])?);
                let count: usize = parts[2]
                    .trim()
                    .parse()
                    .map_err(|_| format!("`{}` is not a point count", parts[2]))?;
                if count == 0 {
                    return Err("a range needs at least one point".into());
                }
                if count > 1 && min == max {
                    return Err("a range with several points needs min != max".into());
                }
                Ok(Grid::Range { min, max, count })
            }
            _ => Err(format!("`{s}`: expected min:max:count or a comma list")),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Range { min, max, count } => write!(f, "{min:?}:{max:?}:{count}"),
            Grid::List(v) => {
                let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "{}", items.join(","))
            }
        }
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
