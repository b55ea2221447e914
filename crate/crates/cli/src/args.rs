use clap::{Args, Parser, Subcommand, ValueEnum};

use cheshire_core::optics::Variant;

/// Weak values, contextuality and photon-count simulation for the
/// quantum Cheshire cat interferometer.
///
/// Reports go to stdout as JSON (schema_version "1"); diagnostics go to
/// stderr. Exit status: 0 on success, 2 on usage or input errors, 3 when an
/// internal numerical check fails.
#[derive(Parser, Debug)]
#[command(name = "cheshire", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weak values of catalog operators for a pre/postselection.
    WeakValues(WeakValuesArgs),
    /// Coherence-table decomposition of the transition operator.
    Decompose(DecomposeArgs),
    /// The three claims with their zero overlaps and witness probabilities.
    Claims(ClaimsArgs),
    /// Noncontextuality inequality under depolarising noise.
    Inequality(InequalityArgs),
    /// Hexagram orthogonality graph and noncontextual assignment search.
    Contexts(ContextsArgs),
    /// Seeded Monte Carlo detector counts for one protocol variant.
    Simulate(SimulateArgs),
    /// Product states left by a combination of claims.
    Infer(InferArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Selection {
    /// Preselected state: a catalog name or `vec:re,im,re,im,re,im,re,im`
    /// in H1, H2, V1, V2 order.
    #[arg(long, default_value = "E_CC")]
    pub pre: String,
    /// Postselected state, same syntax as --pre.
    #[arg(long, default_value = "D+")]
    pub post: String,
}

#[derive(Args, Debug)]
pub struct WeakValuesArgs {
    #[command(flatten)]
    pub selection: Selection,
    /// Operator to evaluate; repeatable. Accepts catalog names, `proj(X)`
    /// and `coh(X,Y)` for |X><Y|. Defaults to the standard set.
    #[arg(long = "op", value_name = "NAME")]
    pub ops: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisName {
    #[value(name = "HV12")]
    Hv12,
    #[value(name = "DA12")]
    Da12,
    #[value(name = "HVpm")]
    Hvpm,
    #[value(name = "Bell")]
    Bell,
}

impl BasisName {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisName::Hv12 => "HV12",
            BasisName::Da12 => "DA12",
            BasisName::Hvpm => "HVpm",
            BasisName::Bell => "Bell",
        }
    }
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long, value_enum)]
    pub basis: BasisName,
    #[command(flatten)]
    pub selection: Selection,
}

#[derive(Args, Debug)]
pub struct ClaimsArgs {
    /// Depolarising noise applied to the preselected state.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct InequalityArgs {
    /// Noise level to evaluate.
    #[arg(long, conflicts_with = "sweep")]
    pub p: Option<f64>,
    /// Evaluate N evenly spaced noise levels from 0 to 1 inclusive.
    #[arg(long, value_name = "N")]
    pub sweep: Option<usize>,
    /// Output format; csv requires --sweep.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also sample all four variants and report a statistical verdict.
    #[arg(long, conflicts_with = "sweep", requires = "seed")]
    pub simulate: bool,
    /// Shots per variant when simulating.
    #[arg(long, default_value_t = 1_000_000, requires = "simulate")]
    pub shots: u64,
    /// Base seed; variant k in (baseline, a, b, c) uses seed + k.
    #[arg(long, requires = "simulate")]
    pub seed: Option<u64>,
    /// Verdict threshold in combined standard errors.
    #[arg(long, default_value_t = cheshire_core::sampler::DEFAULT_SIGMA, requires = "simulate")]
    pub sigma: f64,
    /// Independent sampling streams per variant.
    #[arg(long, default_value_t = 1, requires = "simulate")]
    pub chunks: u32,
}

#[derive(Args, Debug)]
pub struct ContextsArgs {
    /// Enumerate all 512 noncontextual 0/1 assignments.
    #[arg(long)]
    pub search: bool,
    /// Force the hexagon states of these claims to 0 (all three if no list
    /// is given). Implies --search.
    #[arg(
        long,
        value_name = "LIST",
        num_args = 0..=1,
        require_equals = true,
        value_delimiter = ',',
        default_missing_value = "1,2,3"
    )]
    pub forbid_claims: Option<Vec<u8>>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_variant)]
    pub experiment: Variant,
    #[arg(long)]
    pub shots: u64,
    /// Depolarising noise applied to the preselected state.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Required: there is no default seed.
    #[arg(long)]
    pub seed: u64,
    /// Independent sampling streams, merged by summation.
    #[arg(long, default_value_t = 1)]
    pub chunks: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    /// Comma-separated claim numbers from {1, 2, 3}.
    #[arg(long, value_delimiter = ',', required = true)]
    pub claims: Vec<u8>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}
