use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// States of knowledge: canonical forms, order decisions and convex programs.
#[derive(Debug, Parser)]
#[command(name = "qk", version)]
pub struct Cli {
    /// Also write the machine-readable result to this file.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Float tolerance; overrides QK_EPS.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the canonical form of a state file.
    Canon {
        file: PathBuf,
        /// Write the canonical file here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide A ≤ B and write the witness.
    Leq {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "witness.json")]
        witness: PathBuf,
        /// Check this witness file instead of solving.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Decide A ≡ B; witnesses go to PREFIX_ab.json and PREFIX_ba.json.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "witness")]
        witness_prefix: String,
    },
    /// Expected entropy of a classical state, in nats.
    Entropy { file: PathBuf },
    /// Trace distance between two states.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        dict: DictArgs,
        /// Cross-check the quantum closed form with the PSD program.
        #[arg(long)]
        psd: bool,
    },
    /// Best payoff of a measurement on a state.
    Payoff {
        file: PathBuf,
        /// Utility file: {"outputs": [...], "V": [[...]]} with rows over the environment.
        #[arg(long, conflicts_with = "guess")]
        utility: Option<PathBuf>,
        /// Payoff one for naming the environment state.
        #[arg(long)]
        guess: bool,
        /// Worst case over environment states instead of the average.
        #[arg(long)]
        worst: bool,
        /// In the worst case, condition each state on its own mass.
        #[arg(long, requires = "worst")]
        per_input: bool,
    },
    /// Adversary bound for turning START into TARGET under a law.
    Adv {
        law: PathBuf,
        start: PathBuf,
        target: PathBuf,
        /// Initial state for the step bound and the block-diagonal variant; defaults to START.
        #[arg(long)]
        s0: Option<PathBuf>,
        #[arg(long)]
        blockdiag: bool,
        /// Also require S₀ ≤ tr_O S̃.
        #[arg(long)]
        strengthen: bool,
        #[command(flatten)]
        dict: DictArgs,
        /// Where to write the optimal S̃.
        #[arg(long, default_value = "s_tilde.json")]
        out: PathBuf,
    },
    /// Build an N'-step algorithm from a feasible S̃.
    BuildAlg {
        law: PathBuf,
        s_tilde: PathBuf,
        start: PathBuf,
        target: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Output label that leaves the state unchanged.
        #[arg(long, default_value = "idle")]
        idle: String,
        #[arg(long, default_value = "plan")]
        out_dir: PathBuf,
        /// Comma-separated N' values for an error-versus-steps table.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<usize>,
        /// Write the sweep table as CSV.
        #[arg(long, requires = "sweep")]
        csv: Option<PathBuf>,
    },
    /// Run a plan, or a constant output for some steps, through a law.
    Simulate {
        law: PathBuf,
        #[arg(long, conflicts_with_all = ["s0", "steps"])]
        plan: Option<PathBuf>,
        #[arg(long, requires = "steps")]
        s0: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        /// Output label used at every step of a constant plan.
        #[arg(long)]
        output: Option<String>,
        /// Write the final state here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated Poisson series of repeated steps with one output.
    Poisson {
        law: PathBuf,
        s0: PathBuf,
        #[arg(long)]
        rt: String,
        #[arg(long = "K", default_value_t = 20)]
        k: usize,
        /// Output label; defaults to the first.
        #[arg(long)]
        output: Option<String>,
        /// Fail when the tail bound exceeds this.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Built-in scenarios.
    Scenario {
        #[command(subcommand)]
        which: Scenario,
    },
}

#[derive(Debug, Subcommand)]
pub enum Scenario {
    /// Learning the bias of a coin from flips.
    Coin {
        #[arg(long, default_value = "0.6")]
        bias: String,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.5")]
        prior: Vec<String>,
        #[arg(long, default_value_t = 2)]
        flips: usize,
        /// Write law, prior, multiplier and state files here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Largest flip count in the payoff table.
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        /// Write the payoff table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DictArgs {
    /// Rounds of one-step posteriors added to the dictionary.
    #[arg(long, default_value_t = 2)]
    pub posterior_depth: usize,
    /// Rounds of pairwise sums added to the dictionary.
    #[arg(long, default_value_t = 0)]
    pub closure_depth: usize,
    #[arg(long, default_value_t = quasiknow::tasks::dictionary::DEFAULT_MAX_COLUMNS)]
    pub max_columns: usize,
}
