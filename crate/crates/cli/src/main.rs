//! `logbern`: batch front end for the logarithmic Bernstein operators.

mod commands;
mod output;
mod signal;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Numeric(String),
    /// Exit 4.
    Data(String),
    /// A verification suite ran and reported failures; exit 1.
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Data(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<logbern_core::Error> for CliError {
    fn from(e: logbern_core::Error) -> Self {
        use logbern_core::Error as E;
        match e {
            E::Parameter(_) | E::Capability(_) | E::Precondition(_) => CliError::Config(e.to_string()),
            E::Domain(_) | E::Numeric(_) => CliError::Numeric(e.to_string()),
            E::Input(_) => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "logbern", version, about = "Logarithmic Bernstein operators: approximation, denoising, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Shift parameter mu > 0.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Operator degree n >= 1.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated, strictly increasing degrees.
    #[arg(long = "n-list", value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Number of equispaced evaluation points on [0, 1].
    #[arg(long = "grid", default_value_t = 1001)]
    pub grid: usize,
    /// Built-in function: ln_mu, square, sin, exp, abs_center, paper_f, saturation:A:B.
    #[arg(long = "fn")]
    pub function: Option<String>,
    /// Input signal file.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Output file (directory for paper-example); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply L_n to a built-in function or sampled values; CSV x,f,Lnf,error.
    Approximate(#[command(flatten)] Common),
    /// Remove multiplicative distortion; CSV x,truth,noisy,reconstruction.
    Denoise {
        #[command(flatten)]
        common: Common,
        /// Run the six reference cases instead; --out names a directory.
        #[arg(long = "paper-example")]
        paper_example: bool,
    },
    /// Run verification suites; JSON report, exit 0 iff every check passes.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Algebraic moments and the first absolute moment; CSV per (n, x).
    Moments(#[command(flatten)] Common),
    /// The six reference denoising cases, one CSV each plus summary.json.
    PaperExample(#[command(flatten)] Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Approximate(c) => commands::approximate(&c),
        Command::Denoise { common, paper_example } => {
            if paper_example {
                commands::paper_example(&common)
            } else {
                commands::denoise(&common)
            }
        }
        Command::Verify { common, suite } => commands::verify(&common, &suite),
        Command::Moments(c) => commands::moments(&c),
        Command::PaperExample(c) => commands::paper_example(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("logbern: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
