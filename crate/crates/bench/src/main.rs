use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lapr_bench::sweep::{cost_per_success, sweep_serial, write_summary_csv};
use lapr_bench::{
    crossover, default_corpus_dir, load_corpus, run_session, run_with_teacher, summarize, sweep, write_csv,
    Algorithm, CorpusEntry, Preset, SessionConfig, SessionRecord,
};
use lapr_core::oracle::llm::{HttpBackend, LanguageContext, LlmOracle, PromptStrategy, Templates};
use lapr_core::oracle::terminal::TerminalOracle;
use lapr_core::oracle::{LabelSource, PmatConfig, PmatOracle, Teacher};
use lapr_core::passive::SampleStrategy;

#[derive(Parser)]
#[command(name = "lapr", version, about = "Learn DFAs from noisy membership answers and exact counterexamples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session per corpus entry and write one CSV row each.
    Run(RunArgs),
    /// Run a preset experiment grid.
    Sweep(SweepArgs),
    /// Learn with answers from a person or a language model.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Args)]
struct Common {
    /// Corpus directory (defaults to the shipped corpus).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Expected noise level below which LAPR skips guided passive rounds.
    #[arg(long)]
    epsilon_expected: Option<f64>,
    /// Passive training set: ce_only, all or mixed:K.
    #[arg(long)]
    sample_strategy: Option<SampleStrategy>,
    #[arg(long)]
    mq_budget: Option<usize>,
    #[arg(long)]
    eq_budget: Option<usize>,
    /// Record wall-clock time per session (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    algorithm: Algorithm,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    ce_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Only these corpus ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    entries: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    preset: Preset,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    ce_lengths: Option<Vec<usize>>,
    /// Run seeds 0..N.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    entries: Vec<String>,
    /// One session at a time.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out: PathBuf,
    /// Per-group summary (defaults to OUT with a .summary.csv suffix).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// One session on one corpus entry; equivalence queries stay exact.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Terminal,
    Llm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fallback {
    None,
    Terminal,
    Simulated,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Corpus id of the target language.
    #[arg(long)]
    entry: String,
    #[arg(long, default_value = "lapr")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 0)]
    ce_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prompt strategy for the llm mode.
    #[arg(long, default_value = "cot")]
    strategy: PromptStrategy,
    /// HTTP endpoint; the credential is read from LAPR_LLM_API_KEY.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value = "gpt-4o-mini")]
    model: String,
    /// Directory with template overrides.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// JSONL log of every model request.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Who answers when the model says unknown.
    #[arg(long, value_enum, default_value = "none")]
    fallback: Fallback,
    /// Noise level of the simulated fallback.
    #[arg(long, default_value_t = 0.0)]
    fallback_epsilon: f64,
    #[arg(long)]
    out: PathBuf,
}

fn corpus(common: &Common) -> Result<Vec<CorpusEntry>> {
    let dir = common.corpus.clone().unwrap_or_else(default_corpus_dir);
    load_corpus(&dir).with_context(|| format!("loading corpus from {}", dir.display()))
}

fn filter(entries: Vec<CorpusEntry>, ids: &[String]) -> Result<Vec<CorpusEntry>> {
    if ids.is_empty() {
        return Ok(entries);
    }
    for id in ids {
        if !entries.iter().any(|e| &e.id == id) {
            bail!("no corpus entry {id:?}");
        }
    }
    Ok(entries.into_iter().filter(|e| ids.contains(&e.id)).collect())
}

fn apply(common: &Common, config: &mut SessionConfig) -> Result<()> {
    if let Some(e) = common.epsilon_expected {
        config.lapr.epsilon_expected = e;
    }
    if let Some(s) = common.sample_strategy {
        config.lapr.sample_strategy = s;
    }
    if let Some(n) = common.mq_budget {
        config.budgets.mq = n;
    }
    if let Some(n) = common.eq_budget {
        config.budgets.eq = n;
    }
    config.timing = common.timing;
    config.lapr.validate().map_err(anyhow::Error::msg)
}

fn write_records(path: &Path, records: &[SessionRecord]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(records, BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

fn report(records: &[SessionRecord]) {
    let ok = records.iter().filter(|r| r.success).count();
    eprintln!("{} sessions, {} reached the target", records.len(), ok);
}

fn run(args: RunArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.epsilon) {
        bail!("--epsilon must lie in [0, 1]");
    }
    let entries = filter(corpus(&args.common)?, &args.entries)?;
    let mut config = SessionConfig::new(args.algorithm, args.epsilon, args.ce_length, args.seed);
    apply(&args.common, &mut config)?;
    let records: Vec<SessionRecord> = entries.iter().map(|e| run_session(e, &config)).collect();
    write_records(&args.out, &records)?;
    report(&records);
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let corpus = corpus(&args.common)?;
    let entries = filter(args.preset.select(&corpus), &args.entries)?;
    let mut grid = args.preset.grid();
    if let Some(a) = args.algorithms {
        grid.algorithms = a;
    }
    if let Some(e) = args.epsilons {
        grid.epsilons = e;
    }
    if let Some(l) = args.ce_lengths {
        grid.ce_lengths = l;
    }
    if let Some(n) = args.seeds {
        grid.seeds = (0..n).collect();
    }
    apply(&args.common, &mut grid.template)?;
    let records = if args.serial { sweep_serial(&entries, &grid) } else { sweep(&entries, &grid) };
    let records = records.map_err(anyhow::Error::msg)?;
    write_records(&args.out, &records)?;

    let summary = summarize(&records);
    let summary_path = args.summary.unwrap_or_else(|| args.out.with_extension("summary.csv"));
    let file = File::create(&summary_path).with_context(|| format!("creating {}", summary_path.display()))?;
    write_summary_csv(&summary, BufWriter::new(file))?;
    for row in &summary {
        println!(
            "{:12} eps={:.2} len={:2} success={:.3} mq={:.1} eq={:.1} errors={:.1}",
            row.algorithm, row.epsilon, row.ce_min_len, row.success_rate, row.mean_mq_unique, row.mean_eq, row.mean_errors
        );
    }
    if grid.algorithms.contains(&Algorithm::RpniCe) && grid.algorithms.contains(&Algorithm::Ttt) {
        for &e in &grid.epsilons {
            let cost = |a| cost_per_success(&records, a, e).map_or("-".to_string(), |c| format!("{c:.1}"));
            println!("cost per success eps={e:.2}: ttt={} rpni-ce={}", cost(Algorithm::Ttt), cost(Algorithm::RpniCe));
        }
        match crossover(&records, Algorithm::RpniCe, Algorithm::Ttt) {
            Some(e) => println!("crossover epsilon: {e}"),
            None => println!("crossover epsilon: none"),
        }
    }
    report(&records);
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let corpus = corpus(&args.common)?;
    let Some(entry) = corpus.iter().find(|e| e.id == args.entry) else {
        bail!("no corpus entry {:?}", args.entry);
    };
    let alphabet = entry.dfa.alphabet().clone();
    let source: Box<dyn LabelSource + Send> = match args.mode {
        Mode::Terminal => {
            Box::new(TerminalOracle::new(io::BufReader::new(io::stdin()), io::stderr(), entry.description.clone(), alphabet.clone()))
        }
        Mode::Llm => {
            let Some(endpoint) = args.endpoint.clone() else {
                bail!("--endpoint is required in llm mode");
            };
            let show = |w: &lapr_core::Word| alphabet.format_word(w);
            let context = LanguageContext {
                definition: entry.description.clone(),
                positive_example: format!("{}: {}", show(&entry.positive.word), entry.positive.explanation),
                negative_example: format!("{}: {}", show(&entry.negative.word), entry.negative.explanation),
            };
            let templates = match &args.templates {
                Some(dir) => Templates::load_dir(dir).with_context(|| format!("reading templates from {}", dir.display()))?,
                None => Templates::default(),
            };
            let mut oracle = LlmOracle::new(HttpBackend::from_env(endpoint, args.model.clone()), args.strategy, context, alphabet.clone())
                .with_templates(templates);
            if let Some(path) = &args.transcript {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                oracle = oracle.with_transcript(Box::new(file));
            }
            Box::new(oracle)
        }
    };
    let mut config = SessionConfig::new(args.algorithm, 0.0, args.ce_length, args.seed);
    apply(&args.common, &mut config)?;
    if args.mode == Mode::Terminal && args.fallback == Fallback::Terminal {
        bail!("the terminal already answers every query; pick another fallback");
    }
    let mut teacher = Teacher::new(entry.dfa.clone(), args.ce_length, args.seed, source, config.budgets);
    teacher = match args.fallback {
        Fallback::None => teacher,
        Fallback::Terminal => teacher.with_fallback(Box::new(TerminalOracle::new(
            io::BufReader::new(io::stdin()),
            io::stderr(),
            entry.description.clone(),
            alphabet.clone(),
        ))),
        Fallback::Simulated => teacher.with_fallback(Box::new(PmatOracle::new(PmatConfig::new(
            entry.dfa.clone(),
            args.fallback_epsilon,
            args.seed,
            args.ce_length,
        )))),
    };
    let label = match args.mode {
        Mode::Terminal => "terminal".to_string(),
        Mode::Llm => format!("llm:{}", args.strategy),
    };
    let record = run_with_teacher(entry, &config, teacher, &label);
    write_records(&args.out, std::slice::from_ref(&record))?;
    report(std::slice::from_ref(&record));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Oracle { command: OracleCommand::Serve(a) } => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
