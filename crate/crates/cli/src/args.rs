//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nnq", version, about = "Exact symbolic analysis of ReLU networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Add an approximate decimal rendering with this many digits.
    #[arg(long, global = true, value_name = "K")]
    pub decimal: Option<usize>,
    /// Exit with status 1 when a boolean result is false.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct Model {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryText {
    /// File holding the query.
    #[arg(long, conflicts_with = "query_str", required_unless_present = "query_str")]
    pub query: Option<PathBuf>,
    /// Query given inline.
    #[arg(long)]
    pub query_str: Option<String>,
    /// Parameter binding `name=p/q`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Comma-separated free variables, outermost first.
    #[arg(long, value_delimiter = ',')]
    pub free: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward pass at a point.
    Eval {
        #[command(flatten)]
        model: Model,
        /// Comma-separated input values.
        #[arg(long, allow_hyphen_values = true)]
        input: String,
    },
    /// Evaluate an FO(SUM) formula or weight term on the network structure.
    Fosum {
        #[command(flatten)]
        model: Model,
        /// File holding the formula or term.
        #[arg(long, conflicts_with = "term_str", required_unless_present = "term_str")]
        term: Option<PathBuf>,
        /// Formula or term given inline.
        #[arg(long)]
        term_str: Option<String>,
        /// Input values exposed as weight constants `val1..valm`.
        #[arg(long, allow_hyphen_values = true)]
        input: Option<String>,
        /// Weight constant `name=p/q`; repeatable.
        #[arg(long = "weight", value_name = "NAME=VALUE")]
        weights: Vec<String>,
        /// Bind a free variable to a neuron label, e.g. `z=h1_2`; repeatable.
        #[arg(long = "bind", value_name = "VAR=LABEL")]
        binds: Vec<String>,
    },
    /// Compile the network to its piecewise-linear form.
    ExtractPwl {
        #[command(flatten)]
        model: Model,
        /// Output neuron (1-based).
        #[arg(long, default_value_t = 1)]
        output_index: usize,
    },
    /// Decide an ordered query over `F`.
    Query {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        query: QueryText,
    },
    /// Exact integral over a box.
    Integrate {
        #[command(flatten)]
        model: Model,
        /// Box as `a1,b1;a2,b2;...`.
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: String,
    },
    /// Exact Shapley values under the uniform distribution on a box.
    Shap {
        #[command(flatten)]
        model: Model,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: String,
        /// Feature (1-based); all features when omitted.
        #[arg(long)]
        feature: Option<usize>,
    },
    /// Local robustness around a point.
    Robust {
        #[command(flatten)]
        model: Model,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value = "linf")]
        metric: String,
    },
    /// Closest input whose output exceeds a threshold.
    Counterfactual {
        #[command(flatten)]
        model: Model,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        threshold: String,
        #[arg(long, default_value = "linf")]
        metric: String,
        /// Optional bounding box `a1,b1;...` for the search.
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: Option<String>,
    },
    /// Smallest change of one feature that moves the output by more than eps.
    Contribution {
        #[command(flatten)]
        model: Model,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Feature (1-based).
        #[arg(long)]
        feature: usize,
        #[arg(long)]
        eps: String,
    },
    /// Hidden units whose removal moves the first output by less than eps.
    UselessNeurons {
        #[command(flatten)]
        model: Model,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(long)]
        eps: String,
        /// Use forward ablation instead of the FO(SUM) formula.
        #[arg(long)]
        direct: bool,
    },
    /// Cell counts and hyperplane pools of a cylindrical decomposition.
    CdStats {
        #[command(flatten)]
        model: Model,
        /// Decompose the query arrangement instead of the breakplanes of `F`.
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long, conflicts_with = "query")]
        query_str: Option<String>,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        free: Vec<String>,
    },
    /// Write a sawtooth fixture network.
    GenSawtooth {
        /// Positions of positive teeth in (0, 1).
        #[arg(long, default_value = "")]
        s1: String,
        /// Positions of negative teeth in (0, 1).
        #[arg(long, default_value = "")]
        s2: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Fosum { .. } => "fosum",
            Command::ExtractPwl { .. } => "extract-pwl",
            Command::Query { .. } => "query",
            Command::Integrate { .. } => "integrate",
            Command::Shap { .. } => "shap",
            Command::Robust { .. } => "robust",
            Command::Counterfactual { .. } => "counterfactual",
            Command::Contribution { .. } => "contribution",
            Command::UselessNeurons { .. } => "useless-neurons",
            Command::CdStats { .. } => "cd-stats",
            Command::GenSawtooth { .. } => "gen-sawtooth",
        }
    }
}
