use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modunwrap::harness::GraphChoice;

#[derive(Debug, Parser)]
#[command(name = "modunwrap", version, about = "Recover smooth functions from noisy modulo-1 samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a test function on a grid and observe it noisily modulo 1.
    Gen(GenArgs),
    /// kNN-denoise a mod-1 field.
    Denoise(DenoiseArgs),
    /// Unwrap a mod-1 field into real values.
    Unwrap(UnwrapArgs),
    /// Denoise then unwrap.
    Recover(RecoverArgs),
    /// Evaluate the multilinear interpolant of a real field.
    Interp(InterpArgs),
    /// Solve the torus-constrained QCQP denoiser.
    Qcqp(QcqpArgs),
    /// Solve the QCQP and certify global optimality through the SDP dual.
    Certify(CertifyArgs),
    /// Unconstrained quadratic baseline.
    Ucqp(BaselineArgs),
    /// Trust-region (spherical) baseline.
    Trs(BaselineArgs),
    /// Monte Carlo sweep over grid sizes and methods.
    Mc(McArgs),
    /// Fit the error decay rate of a Monte Carlo sweep.
    Rate(RateArgs),
    /// Terrain demo on an elevation matrix.
    DemoElevation(ElevationArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FuncName {
    Example1,
    Example2,
    Planted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KRuleName {
    Explicit,
    Expected,
    Supnorm,
    Practical,
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    #[arg(long, value_enum, default_value = "example1")]
    pub func: FuncName,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Lipschitz constant of a planted function.
    #[arg(long = "planted-lipschitz", default_value_t = 1.0)]
    pub planted_lipschitz: f64,
    #[arg(long = "planted-terms", default_value_t = 3)]
    pub planted_terms: usize,
    #[arg(long = "planted-max-freq", default_value_t = 2)]
    pub planted_max_freq: i64,
}

#[derive(Debug, Args)]
pub struct KArgs {
    /// Neighbour count rule; defaults to `explicit` when --k is given and
    /// `practical` otherwise.
    #[arg(long = "k-rule", value_enum)]
    pub k_rule: Option<KRuleName>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Constant of the practical rule.
    #[arg(long = "C", default_value_t = 0.09)]
    pub c: f64,
    /// Lipschitz constant for the expected and supnorm rules.
    #[arg(long)]
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Uses `λ = κ n^{10/12}` when --lambda is absent.
    #[arg(long)]
    pub kappa: Option<f64>,
}

fn parse_graph(s: &str) -> Result<GraphChoice, String> {
    match s {
        "auto" => Ok(GraphChoice::Auto),
        "path" => Ok(GraphChoice::Path),
        _ => match s.strip_prefix("knn-grid:") {
            Some(r) => r
                .parse::<usize>()
                .ok()
                .filter(|&r| r >= 1)
                .map(|radius| GraphChoice::GridLinf { radius })
                .ok_or_else(|| format!("bad radius in '{s}'")),
            None => Err(format!("unknown graph '{s}' (expected auto, path or knn-grid:<r>)")),
        },
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output mod-1 field; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the clean samples as a real field.
    #[arg(long = "truth-out")]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub k: KArgs,
    /// Noise level for the expected and supnorm rules.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct UnwrapArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Unwrapped real field; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the denoised mod-1 field.
    #[arg(long = "ghat-out")]
    pub ghat_out: Option<PathBuf>,
    #[command(flatten)]
    pub k: KArgs,
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Evaluation point, comma-separated coordinates; repeatable.
    #[arg(long = "at", required = true)]
    pub at: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QcqpArgs {
    /// Noisy mod-1 observations `z`.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Solution as a mod-1 field.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_graph, default_value = "auto")]
    pub graph: GraphChoice,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100_000)]
    pub max_iter: usize,
    /// Extra random starts; the best objective wins.
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub solve: QcqpArgs,
    /// JSON report with the certificate.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_graph, default_value = "auto")]
    pub graph: GraphChoice,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long, default_value_t = 0.12)]
    pub sigma: f64,
    #[arg(long = "n-sweep", value_delimiter = ',', default_value = "250,1000,4000")]
    pub n_sweep: Vec<usize>,
    /// Comma-separated subset of knn, ucqp, trs.
    #[arg(long, default_value = "knn")]
    pub methods: String,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub k: KArgs,
    #[arg(long, default_value_t = 0.04)]
    pub kappa: f64,
    #[arg(long, value_parser = parse_graph, default_value = "auto")]
    pub graph: GraphChoice,
    /// JSON report; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot-ready summary CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Report produced by `mc`; a fresh sweep is run when absent.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub mc: McArgs,
    #[arg(long, default_value = "max_wrap_denoised")]
    pub metric: String,
}

#[derive(Debug, Args)]
pub struct ElevationArgs {
    /// Whitespace-separated elevation matrix.
    #[arg(long = "in", conflicts_with = "cone")]
    pub input: Option<PathBuf>,
    /// Use a synthetic cone of this side length instead of a file.
    #[arg(long)]
    pub cone: Option<usize>,
    #[arg(long = "cone-height", default_value_t = 1000.0)]
    pub cone_height: f64,
    /// Keep the leading square block of a rectangular matrix.
    #[arg(long)]
    pub crop: bool,
    #[arg(long, default_value_t = 500.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 40)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving the fields and `report.json`.
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}
