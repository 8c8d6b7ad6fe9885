use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "isocurv",
    version,
    about = "Curvature-operator laboratory: soliton catalog checks, reaction-ODE runs, seeded audit campaigns",
    after_help = "Exit status: 0 on pass, 1 on a violation or a counterexample in a theorem-checking campaign, 2 on usage errors.\n\
                  Every subcommand accepts --config FILE with `key = value` lines named after the long flags; explicit flags win."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Soliton identities of a catalog metric at seeded probe points.
    Catalog(CatalogArgs),
    /// Reaction ODE from a named initial operator.
    Flow(FlowArgs),
    /// Seeded identity, implication or falsification campaign.
    Audit(AuditArgs),
    /// Numerical frame minimum of the isotropic curvature against the block formula.
    Frames(FramesArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Catalog(a) => &a.common,
            Command::Flow(a) => &a.common,
            Command::Audit(a) => &a.common,
            Command::Frames(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Format::Csv
    }

    pub fn csv(self) -> bool {
        self != Format::Json
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random choice (probe points, samples, frames).
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Pass/fail tolerance; the default depends on the subcommand.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output directory for the artifacts.
    #[arg(long, env = "ISOCURV_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// `key = value` file of defaults for the long flags of this subcommand.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Repeat for more detail on stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    ClosedForm,
    Fd,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Catalog name, e.g. cigar, bryant4, s4_round.
    #[arg(long)]
    pub metric: String,
    /// Chart parameter as `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long, default_value_t = 32)]
    pub probes: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::ClosedForm)]
    pub scheme: SchemeArg,
    /// Finite-difference step for `--scheme fd`.
    #[arg(long, default_value_t = isocurv::metric::DEFAULT_FD_STEP)]
    pub fd_step: f64,
    /// Rescale a steady chart to `R + |grad f|^2 = 1` first.
    #[arg(long)]
    pub normalize: bool,
    /// Probe along the diagonal at radii up to this value instead of at random points.
    #[arg(long, value_name = "R_MAX")]
    pub radial: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    /// `A = C = a0 I`, `B = 0`.
    Sphere,
    /// `S^3 x R` with sectional curvature `a0` on the sphere factor.
    Cylinder,
    Zero,
    /// Three-dimensional eigenvalue system from `--m`.
    Eigen3,
    /// A sampled Bianchi operator with weakly positive isotropic curvature.
    RandomWpic,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, value_enum)]
    pub init: InitKind,
    #[arg(long, default_value_t = 1.0)]
    pub a0: f64,
    /// Initial eigenvalues for `--init eigen3`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0, 1.0, 1.0])]
    pub m: Vec<f64>,
    /// Sample index for `--init random-wpic`.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e8)]
    pub rm_ceiling: f64,
    /// Times at which full states go into the JSON report.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub campaign: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Sampling constraints; defaults to what the campaign requires.
    #[arg(long, value_delimiter = ',')]
    pub constraints: Vec<String>,
    /// Standard deviation of the Gaussian entries.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Fail instead of shifting samples into the cone when rejection runs dry.
    #[arg(long)]
    pub no_shift: bool,
    /// Append the CSV summary row to this ledger file.
    #[arg(long, value_name = "FILE")]
    pub ledger: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FramesArgs {
    #[arg(long, default_value_t = 100)]
    pub operators: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub common: Common,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}
