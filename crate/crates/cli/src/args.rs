use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "cyclodesign",
    version,
    about = "Weight distributions and 2-designs of trace codes over GF(p^m)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weight distribution by enumeration and by closed form.
    Weights {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
    /// Supports of fixed-weight codewords and their 2-design parameters.
    Designs {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        /// Only this weight; by default every weight except 0 and p^m.
        #[arg(long)]
        weight: Option<u64>,
        #[arg(long, value_enum, default_value_t = VerifyArg::Auto)]
        verify: VerifyArg,
        /// Directory for one block file per weight.
        #[arg(long)]
        blocks_dir: Option<PathBuf>,
    },
    /// Weil sums S(a, b), brute force against closed form.
    Sums {
        #[command(flatten)]
        common: Common,
        /// Element rep of a; with --b compares a single pair.
        #[arg(long, requires = "b")]
        a: Option<u64>,
        #[arg(long, requires = "a")]
        b: Option<u64>,
    },
    /// Defining set, p-adic invariance check and sampled affine action.
    Invariance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Design parameters from the closed-form tables.
    Params {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub l: u32,
    #[arg(long)]
    pub m: u32,
    /// Maximum number of (a, b) pairs to enumerate. Defaults to
    /// $CYCLODESIGN_BUDGET, then 3^18.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Include wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Sampling {
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Brute,
    Analytic,
    Both,
    Transform,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyArg {
    Full,
    Sampled,
    Auto,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Weights { common, .. }
            | Command::Designs { common, .. }
            | Command::Sums { common, .. }
            | Command::Invariance { common, .. }
            | Command::Params { common } => common,
        }
    }
}
