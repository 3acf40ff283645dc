//! Thin command-line front end: argument parsing and stream plumbing only — every behavior
//! lives in the library (`harness::runner` for the record loops).

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use promptpress::harness::runner::{
    self, parse_lines, synthetic_records,
};
use promptpress::harness::CompletionClient;
use promptpress::{Error, PipelineConfig, Result};

#[derive(Parser)]
#[command(
    name = "promptpress",
    version,
    about = "Question-aware prompt compression for long multi-document contexts"
)]
struct Cli {
    /// JSON pipeline configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Inline scorer override as JSON, e.g. '{"kind":"http","url":"http://127.0.0.1:8737","model":"m"}'.
    #[arg(long, global = true)]
    scorer: Option<String>,

    /// Seed for synthetic workloads.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress JSONL prompt records to a token budget.
    Compress {
        /// Input JSONL file, '-' for stdin.
        #[arg(default_value = "-")]
        input: String,
        /// Absolute token budget (overrides the config).
        #[arg(long)]
        target: Option<usize>,
        /// Compression factor (overrides the config).
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Rank each record's documents by question-aware importance.
    Rank {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Map model-response spans back to original prompt text via an origin map.
    Recover {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Compression benchmark over a JSONL or synthetic workload. Rows carry no timing, so
    /// repeated runs are byte-identical.
    Bench {
        #[arg(default_value = "-")]
        input: String,
        /// Generate N synthetic records instead of reading input.
        #[arg(long)]
        synthetic: Option<usize>,
        /// Synthetic only: distractors without the question terms.
        #[arg(long)]
        plain_distractors: bool,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long)]
        ratio: Option<f64>,
        /// Completions endpoint for answer checking (optional).
        #[arg(long)]
        llm_url: Option<String>,
        #[arg(long, default_value = "default")]
        llm_model: String,
    },
}

fn reader_for(input: &str) -> Result<Box<dyn BufRead>> {
    if input == "-" {
        Ok(Box::new(BufReader::new(std::io::stdin())))
    } else {
        let file = File::open(input).map_err(|e| Error::io(input, e))?;
        Ok(Box::new(BufReader::new(file)))
    }
}

fn apply_budget(
    config: &mut PipelineConfig,
    target: Option<usize>,
    ratio: Option<f64>,
) -> Result<()> {
    match (target, ratio) {
        (Some(_), Some(_)) => {
            Err(Error::Config("pass either --target or --ratio, not both".into()))
        }
        (Some(t), None) => {
            config.target_tokens = Some(t);
            config.ratio = None;
            Ok(())
        }
        (None, Some(r)) => {
            config.ratio = Some(r);
            config.target_tokens = None;
            Ok(())
        }
        (None, None) => Ok(()),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        // ignore failure: the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }

    let mut config = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(json) = &cli.scorer {
        config.scorer =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("--scorer: {e}")))?;
        config.validate()?;
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut log = std::io::stderr();

    match cli.command {
        Command::Compress { input, target, ratio } => {
            apply_budget(&mut config, target, ratio)?;
            runner::run_compress(reader_for(&input)?, &mut out, &mut log, &config)?;
        }
        Command::Rank { input } => {
            runner::run_rank(reader_for(&input)?, &mut out, &mut log, &config)?;
        }
        Command::Recover { input } => {
            runner::run_recover(reader_for(&input)?, &mut out, &mut log, &config)?;
        }
        Command::Bench {
            input,
            synthetic,
            plain_distractors,
            target,
            ratio,
            llm_url,
            llm_model,
        } => {
            apply_budget(&mut config, target, ratio)?;
            let records = match synthetic {
                Some(n) => synthetic_records(n, cli.seed, !plain_distractors),
                None => parse_lines(reader_for(&input)?)?,
            };
            let client = llm_url.map(|url| CompletionClient::new(url, llm_model));
            runner::run_bench(records, &mut out, &mut log, &config, client.as_ref())?;
        }
    }
    out.flush().map_err(|e| Error::io("output stream", e))?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
