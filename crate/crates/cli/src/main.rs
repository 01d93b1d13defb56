//! `ctxlab`: compile function tables and machines into fixed Transformer
//! systems, run them, extract automata and run the verification suites.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctxlab::NumericFormat;

#[derive(Parser)]
#[command(name = "ctxlab", version, about = "Fixed Transformer systems and their machine models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a function table into binary or two-call weights.
    CompileFn {
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// float53 or fixedpoint:FRAC[:TOTAL]
        #[arg(long, default_value = "float53")]
        format: NumericFormat,
    },
    /// Run a fixed system on one input.
    Run(RunArgs),
    /// Compile a linear-bounded automaton into a window-2 lag rule.
    CompileTm {
        machine: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also compile the rule into binary-function weights.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value = "float53")]
        format: NumericFormat,
    },
    /// Extract the automaton of a summarization system in decide mode.
    ExtractDfa(DfaArgs),
    /// Run a verification suite.
    Verify {
        /// lemma1, appendixC, prop1, prop2, prop3 or causal
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cap: u64,
        #[arg(long, default_value_t = ctxlab::machines::DEFAULT_DFA_BOUND)]
        dfa_bound: usize,
        /// Inject a defect to check that the suite notices.
        #[arg(long)]
        fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    BrokenShift,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Decide,
    Transduce,
}

/// Exactly one next-token source.
#[derive(Args)]
#[group(required = false, multiple = false)]
struct SourceArgs {
    /// Weights file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Mock table file.
    #[arg(long)]
    mock: Option<PathBuf>,
    /// Lag rule file read as a next-token function.
    #[arg(long)]
    rule: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// LBA file; runs its compiled window-2 pipeline.
    #[arg(long, conflicts_with_all = ["model", "mock", "rule", "config"])]
    machine: Option<PathBuf>,
    /// Manager configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Whitespace-separated token names, or the machine input word.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    input: String,
    #[arg(long, value_enum, default_value = "decide")]
    mode: ModeArg,
    #[arg(long, default_value_t = ctxlab::system::DEFAULT_MAX_STEPS)]
    cap: u64,
    /// Seed for `random` mock fills.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace destination; standard output when absent.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Re-evaluate the model under this format.
    #[arg(long)]
    format: Option<NumericFormat>,
}

#[derive(Args)]
struct DfaArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Input alphabet; defaults to every non-control, non-verdict token.
    #[arg(long)]
    alphabet: Option<String>,
    #[arg(long, default_value_t = ctxlab::machines::DEFAULT_DFA_BOUND)]
    dfa_bound: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    format: Option<NumericFormat>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CompileFn { table, out, format } => commands::compile_fn(&table, &out, format),
        Command::Run(args) => commands::run(args),
        Command::CompileTm {
            machine,
            out,
            weights,
            format,
        } => commands::compile_tm(&machine, &out, weights.as_deref(), format),
        Command::ExtractDfa(args) => commands::extract_dfa(args),
        Command::Verify {
            suite,
            seed,
            cap,
            dfa_bound,
            fault,
        } => commands::verify(&suite, seed, cap, dfa_bound, fault),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
