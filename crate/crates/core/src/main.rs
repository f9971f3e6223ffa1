use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use caa_core::analysis::{classify, detect_races, TierVerdict};
use caa_core::automaton::Severity;
use caa_core::dsl::{emit_erlang, parse_protocol, ProtocolDoc};
use caa_core::report;
use caa_core::semantics::{run_one, Bounds, ExplorationResult, ExploreError, Explorer};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;
const EXIT_RACES: u8 = 4;

/// Communicating actor automata: simulate, explore and analyse protocols.
///
/// Exit codes: 0 success, 1 validation or step error, 2 unreadable or
/// unparsable input, 3 a bound was exceeded or the verdict is unknown,
/// 4 races found. Set CAA_COLOR=0 to disable colored output.
#[derive(Parser)]
#[command(name = "caa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a protocol file for syntax and well-formedness problems.
    Validate {
        file: PathBuf,
        /// Treat warnings as errors.
        #[arg(long)]
        strict: bool,
    },
    /// Enumerate all reachable configurations and maximal traces.
    Explore {
        file: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Worker threads (default: available parallelism).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
        /// Print every maximal trace.
        #[arg(long)]
        traces: bool,
    },
    /// Follow one random trace.
    Run {
        file: PathBuf,
        /// Seed of the random walk; a fresh seed is drawn and printed if omitted.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Report race conditions.
    Races {
        file: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
    },
    /// Print the compatibility tier of a protocol.
    Classify {
        file: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
    },
    /// Write an Erlang skeleton module per machine.
    Codegen {
        file: PathBuf,
        /// Output directory, created if absent.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// Longest trace explored.
    #[arg(long, default_value_t = Bounds::default().max_depth as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: u64,
    /// Longest mailbox allowed.
    #[arg(long, default_value_t = Bounds::default().max_mailbox_len as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_mailbox: u64,
    /// Most distinct configurations stored.
    #[arg(long, default_value_t = Bounds::default().max_states as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,
    /// Most maximal traces enumerated.
    #[arg(long, default_value_t = Bounds::default().max_traces as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_traces: u64,
}

impl BoundArgs {
    fn bounds(&self) -> Bounds {
        let size = |n: u64| usize::try_from(n).unwrap_or(usize::MAX);
        Bounds {
            max_depth: size(self.max_depth),
            max_mailbox_len: size(self.max_mailbox),
            max_states: size(self.max_states),
            max_traces: size(self.max_traces),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

struct Style {
    color: bool,
}

impl Style {
    fn detect() -> Style {
        let disabled = std::env::var("CAA_COLOR").is_ok_and(|v| v == "0");
        Style {
            color: !disabled && std::io::stdout().is_terminal(),
        }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn good(&self, text: &str) -> String {
        self.paint("32", text)
    }

    fn warn(&self, text: &str) -> String {
        self.paint("33", text)
    }

    fn bad(&self, text: &str) -> String {
        self.paint("31", text)
    }
}

/// A failed command: the exit code and what to print on stderr.
struct Failure {
    code: u8,
    message: String,
}

type CmdResult = Result<u8, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style::detect();
    let outcome = match cli.command {
        Command::Validate { file, strict } => cmd_validate(&file, strict, &style),
        Command::Explore {
            file,
            bounds,
            format,
            jobs,
            traces,
        } => cmd_explore(&file, &bounds.bounds(), format, jobs, traces, &style),
        Command::Run {
            file,
            seed,
            bounds,
            format,
        } => cmd_run(&file, seed, &bounds.bounds(), format),
        Command::Races {
            file,
            bounds,
            format,
            jobs,
        } => cmd_races(&file, &bounds.bounds(), format, jobs, &style),
        Command::Classify { file, bounds, jobs } => cmd_classify(&file, &bounds.bounds(), jobs, &style),
        Command::Codegen { file, out } => cmd_codegen(&file, &out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<ProtocolDoc, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse_protocol(&text).map_err(|errors| {
        let lines: Vec<String> = errors
            .iter()
            .map(|e| format!("{}:{}: parse error: {}", path.display(), e.span, e.message))
            .collect();
        fail(EXIT_PARSE, lines.join("\n"))
    })
}

/// Loads a file and refuses to go on if validation found errors.
fn load_valid(path: &Path) -> Result<ProtocolDoc, Failure> {
    let doc = load(path)?;
    if doc.has_errors() {
        let lines: Vec<String> = doc
            .errors()
            .map(|d| format!("{}:{}: error: {}", path.display(), d.span, d.issue))
            .collect();
        return Err(fail(EXIT_INVALID, lines.join("\n")));
    }
    Ok(doc)
}

fn run_explorer(doc: &ProtocolDoc, bounds: &Bounds, jobs: Option<u32>) -> Result<ExplorationResult, Failure> {
    Explorer::new(&doc.protocol)
        .bounds(*bounds)
        .jobs(jobs.map(|j| j as usize))
        .run()
        .map_err(explore_failure)
}

fn explore_failure(e: ExploreError) -> Failure {
    fail(EXIT_INVALID, format!("error: {e}"))
}

fn print_json(docs: impl IntoIterator<Item = serde_json::Value>) {
    let mut out = std::io::stdout().lock();
    for d in docs {
        writeln!(out, "{d}").expect("write to stdout");
    }
}

fn cmd_validate(path: &Path, strict: bool, style: &Style) -> CmdResult {
    let doc = load(path)?;
    let mut failed = false;
    for d in &doc.issues {
        let severity = match d.issue.severity() {
            Severity::Error => {
                failed = true;
                style.bad("error")
            }
            Severity::Warning => {
                failed |= strict;
                style.warn("warning")
            }
        };
        println!("{}:{}: {severity}: {}", path.display(), d.span, d.issue);
    }
    if failed {
        Ok(EXIT_INVALID)
    } else {
        println!("{}: {} machine(s)", style.good("ok"), doc.protocol.arity());
        Ok(EXIT_OK)
    }
}

fn cmd_explore(
    path: &Path,
    bounds: &Bounds,
    format: Format,
    jobs: Option<u32>,
    traces: bool,
    style: &Style,
) -> CmdResult {
    let doc = load_valid(path)?;
    let result = run_explorer(&doc, bounds, jobs)?;
    match format {
        Format::Json => print_json(report::exploration_json(&doc.protocol, &result, traces)),
        Format::Text => {
            let summary = report::summary_text(&result);
            let verdict = result.verdict().to_string();
            let painted = if result.is_complete() {
                style.good(&verdict)
            } else {
                style.warn(&verdict)
            };
            print!(
                "{}",
                summary.replace(&format!("verdict: {verdict}"), &format!("verdict: {painted}"))
            );
            if traces {
                for (i, t) in result.traces().enumerate() {
                    println!("\ntrace {i}:");
                    print!("{}", report::trace_text(&t));
                }
            }
        }
    }
    Ok(if result.is_complete() { EXIT_OK } else { EXIT_UNKNOWN })
}

fn cmd_run(path: &Path, seed: Option<u64>, bounds: &Bounds, format: Format) -> CmdResult {
    let doc = load_valid(path)?;
    let seed = seed.unwrap_or_else(rand::random);
    let trace = run_one(&doc.protocol, seed, bounds).map_err(explore_failure)?;
    match format {
        Format::Json => {
            let mut d = report::trace_json(&doc.protocol, &trace, 0);
            d["seed"] = seed.into();
            print_json([d]);
        }
        Format::Text => {
            println!("seed: {seed}");
            print!("{}", report::trace_text(&trace));
        }
    }
    Ok(if trace.truncated.is_none() {
        EXIT_OK
    } else {
        EXIT_UNKNOWN
    })
}

fn cmd_races(path: &Path, bounds: &Bounds, format: Format, jobs: Option<u32>, style: &Style) -> CmdResult {
    let doc = load_valid(path)?;
    let result = run_explorer(&doc, bounds, jobs)?;
    let reports = match detect_races(&doc.protocol, &result) {
        Ok(r) => r,
        Err(e) => {
            match format {
                Format::Json => print_json([serde_json::json!({"kind": "unknown", "reason": e.to_string()})]),
                Format::Text => println!("{}: {e}", style.warn("unknown")),
            }
            return Ok(EXIT_UNKNOWN);
        }
    };
    match format {
        Format::Json => print_json(reports.iter().map(report::race_json)),
        Format::Text => {
            for r in &reports {
                print!("{}", report::race_text(r, &result));
            }
            if reports.is_empty() {
                println!("{}", style.good("no races"));
            } else {
                println!("{}", style.bad(&format!("{} race(s)", reports.len())));
            }
        }
    }
    Ok(if reports.is_empty() { EXIT_OK } else { EXIT_RACES })
}

fn cmd_classify(path: &Path, bounds: &Bounds, jobs: Option<u32>, style: &Style) -> CmdResult {
    let doc = load_valid(path)?;
    let result = run_explorer(&doc, bounds, jobs)?;
    let verdict = classify(&doc.protocol, &result);
    match verdict {
        TierVerdict::Unknown(_) => {
            println!("{}", style.warn(&verdict.to_string()));
            Ok(EXIT_UNKNOWN)
        }
        _ => {
            println!("{}", style.good(&verdict.to_string()));
            Ok(EXIT_OK)
        }
    }
}

fn cmd_codegen(path: &Path, out: &Path) -> CmdResult {
    let doc = load_valid(path)?;
    let modules = emit_erlang(&doc.protocol).map_err(|e| fail(EXIT_INVALID, format!("error: {e}")))?;
    std::fs::create_dir_all(out).map_err(|e| fail(EXIT_INVALID, format!("{}: {e}", out.display())))?;
    for (name, source) in &modules {
        let file = out.join(format!("{name}.erl"));
        std::fs::write(&file, source).map_err(|e| fail(EXIT_INVALID, format!("{}: {e}", file.display())))?;
        println!("{}", file.display());
    }
    Ok(EXIT_OK)
}
