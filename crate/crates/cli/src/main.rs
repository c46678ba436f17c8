use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use newsdiv::{
    collection_diversity, explain_result, load_corpus, load_interaction_records, load_rules, load_schema,
    load_sequence, max_diversity_oracle, max_objective_oracle, parse_weights, rerank, uniform_type_weights,
    write_report, AspectSchema, Corpus, Error, InteractionLog, Mode, ReportFormat, RerankInputs, RerankRequest,
    RerankResult, WindowSpec,
};

#[derive(Parser)]
#[command(
    name = "newsdiv",
    version,
    about = "Multi-aspect diversity scoring and re-ranking for news"
)]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diversity report for the corpus or a subset of it.
    Score(ScoreArgs),
    /// Select or order documents for diversity.
    Rerank(Box<RerankArgs>),
    /// Exhaustive optimum for small pools.
    Oracle(OracleArgs),
    /// Human-readable account of a rerank result.
    Explain(ExplainArgs),
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Comma-separated document ids; defaults to the whole corpus.
    #[arg(long, value_delimiter = ',')]
    ids: Option<Vec<String>>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args)]
struct RerankArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_parser = parse_mode)]
    mode: Mode,
    #[arg(long)]
    k: usize,
    /// Relevance weight in [0, 1] for list mode.
    #[arg(long)]
    lambda: Option<f64>,
    /// all, N, last:N or since:EPOCH.
    #[arg(long, default_value = "all", value_parser = parse_window)]
    window: WindowSpec,
    #[arg(long, default_value_t = newsdiv::diversify::DEFAULT_GAMMA)]
    gamma: f64,
    /// Aspect weight overrides, e.g. topic=0.7,frame=0.3.
    #[arg(long)]
    weights: Option<String>,
    /// Maximum number of swaps; switches list mode to swap post-processing.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Active context tags for context-scoped rules.
    #[arg(long, value_delimiter = ',')]
    context: Vec<String>,
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long)]
    interactions: Option<PathBuf>,
    /// Interaction type weights, e.g. like=0.5,share=0.5; defaults to equal weights.
    #[arg(long)]
    type_weights: Option<String>,
    /// Candidate interactions as type:doc,...; defaults to every unlogged pair.
    #[arg(long, value_delimiter = ',')]
    options: Option<Vec<String>>,
    /// Restrict the interaction log to one user.
    #[arg(long)]
    user: Option<String>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    k: usize,
    /// Optimise the relevance/diversity objective instead of diversity.
    #[arg(long)]
    lambda: Option<f64>,
    /// Restrict the pool to these ids.
    #[arg(long, value_delimiter = ',')]
    ids: Option<Vec<String>>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    result: PathBuf,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_window(s: &str) -> Result<WindowSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Io(PathBuf, std::io::Error),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(..) | Failure::Core(Error::Io(_)) => 1,
            Failure::Core(Error::GuardExceeded { .. }) => 3,
            Failure::Core(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(path, e) => format!("cannot read {}: {e}", path.display()),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn in_file(path: &Path, e: Error) -> Failure {
    match e {
        Error::Validation(m) => Failure::Core(Error::Validation(format!("{}: {m}", path.display()))),
        Error::Lookup(m) => Failure::Core(Error::Lookup(format!("{}: {m}", path.display()))),
        Error::Parse { line, column, message } => Failure::Core(Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        }),
        other => Failure::Core(other),
    }
}

fn load_inputs(inputs: &Inputs) -> Result<(AspectSchema, Corpus), Failure> {
    let schema = load_schema(&read(&inputs.schema)?).map_err(|e| in_file(&inputs.schema, e))?;
    let corpus = load_corpus(&schema, &read(&inputs.corpus)?).map_err(|e| in_file(&inputs.corpus, e))?;
    log::info!("loaded {} documents", corpus.len());
    Ok((schema, corpus))
}

fn score(args: ScoreArgs) -> Outcome {
    let (schema, corpus) = load_inputs(&args.inputs)?;
    let docs = match &args.ids {
        Some(ids) => corpus.select(ids)?,
        None => corpus.to_vec(),
    };
    Ok(write_report(&collection_diversity(&schema, &docs)?, args.format))
}

fn parse_options(raw: &[String]) -> Result<Vec<(String, String)>, Failure> {
    raw.iter()
        .map(|o| {
            o.split_once(':')
                .map(|(t, d)| (d.trim().to_string(), t.trim().to_string()))
                .ok_or_else(|| Failure::Core(Error::Validation(format!("expected type:doc, got '{o}'"))))
        })
        .collect()
}

fn run_rerank(args: RerankArgs) -> Outcome {
    let (schema, corpus) = load_inputs(&args.inputs)?;

    let mut request = RerankRequest::new(args.mode, args.k);
    request.lambda = args.lambda;
    request.window = args.window;
    request.gamma = args.gamma;
    request.swap_budget = args.budget;
    request.weights = args.weights.as_deref().map(parse_weights).transpose()?;

    let tags: BTreeSet<String> = args.context.iter().cloned().collect();
    let rules = match &args.rules {
        Some(p) => Some(load_rules(&schema, &read(p)?, tags).map_err(|e| in_file(p, e))?),
        None => None,
    };
    let history = match &args.history {
        Some(p) => Some(load_sequence(&schema, &read(p)?).map_err(|e| in_file(p, e))?),
        None => None,
    };
    let log = match &args.interactions {
        Some(p) => {
            let records = load_interaction_records(&read(p)?).map_err(|e| in_file(p, e))?;
            let weights = match &args.type_weights {
                Some(w) => parse_weights(w)?,
                None => uniform_type_weights(&records),
            };
            let log = InteractionLog::new(records, weights)?;
            Some(match &args.user {
                Some(u) => log.for_user(u),
                None => log,
            })
        }
        None => None,
    };
    let options = args.options.as_deref().map(parse_options).transpose()?;

    let mut inputs = RerankInputs::new(&corpus);
    inputs.history = history.as_deref();
    inputs.interactions = log.as_ref();
    inputs.options = options.as_deref();
    inputs.rules = rules.as_ref();
    let result = rerank(&schema, &request, inputs)?;
    Ok(write_report(&result, args.format))
}

fn oracle(args: OracleArgs) -> Outcome {
    let (schema, corpus) = load_inputs(&args.inputs)?;
    let pool = match &args.ids {
        Some(ids) => corpus.select(ids)?,
        None => corpus.to_vec(),
    };
    let result = match args.lambda {
        Some(l) => max_objective_oracle(&schema, &pool, args.k, l)?,
        None => max_diversity_oracle(&schema, &pool, args.k)?,
    };
    Ok(write_report(&result, args.format))
}

fn explain(args: ExplainArgs) -> Outcome {
    let text = read(&args.result)?;
    let result: RerankResult = serde_json::from_str(&text).map_err(|e| {
        Failure::Core(Error::Validation(format!(
            "{}: not a rerank result: {e}",
            args.result.display()
        )))
    })?;
    Ok(explain_result(&result, &result.rules))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();

    let outcome = match cli.command {
        Command::Score(a) => score(a),
        Command::Rerank(a) => run_rerank(*a),
        Command::Oracle(a) => oracle(a),
        Command::Explain(a) => explain(a),
    };
    match outcome {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
