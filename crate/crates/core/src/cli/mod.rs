//! Command-line front end: `nullkit <command> --config <file> [--out <path>] [--seed N] [--threads N]`.
//!
//! Exit codes: 0 when every assertion passed, 2 when some assertion failed or a computation
//! was refused, 1 for usage and configuration errors.

pub mod commands;
pub mod config;
pub mod output;

use crate::error::Error;
use clap::{Parser, ValueEnum};
use config::{Format, JobConfig, Spacetime};
use output::{Assertion, Metadata, Table, TaskOutput};
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Cone,
    Umbilic,
    Reconstruct,
    Construct,
    Dual,
    ClassifyDs,
    Conjugate,
    Static,
    Obstruction,
    Fixtures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Cone => "cone",
            Command::Umbilic => "umbilic",
            Command::Reconstruct => "reconstruct",
            Command::Construct => "construct",
            Command::Dual => "dual",
            Command::ClassifyDs => "classify-ds",
            Command::Conjugate => "conjugate",
            Command::Static => "static",
            Command::Obstruction => "obstruction",
            Command::Fixtures => "fixtures",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nullkit", version, about = "Null hypersurfaces in GRW and static spacetimes")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Job file (TOML); optional for `fixtures` and `classify-ds`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path; `.json` selects JSON unless the job file sets a format.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (overrides NULLKIT_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// A usage or configuration error, reported with exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

fn env_number<T: std::str::FromStr>(name: &str) -> Result<Option<T>, UsageError> {
    match std::env::var(name) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| UsageError(format!("{name} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

pub struct RunResult {
    pub tasks: Vec<TaskOutput>,
    pub rendered: String,
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl RunResult {
    pub fn passed(&self) -> bool {
        self.tasks.iter().all(TaskOutput::passed)
    }
}

/// Everything short of writing files: parse the job, run its tasks, render the output.
pub fn execute(cli: &Cli) -> Result<RunResult, UsageError> {
    let (cfg, hash) = match &cli.config {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
            let text = String::from_utf8(bytes.clone()).map_err(|_| UsageError(format!("{} is not UTF-8", path.display())))?;
            let hash = format!("{:x}", Sha256::digest(&bytes));
            (JobConfig::parse(&text)?, hash)
        }
        None => (JobConfig { seed: None, spacetime: None, tasks: vec![], output: None }, "none".to_string()),
    };
    let name = cli.command.name();
    let mut tasks: Vec<_> = cfg.tasks.iter().filter(|t| t.command() == name).cloned().collect();
    if tasks.is_empty() {
        match commands::default_task(name) {
            Some(t) => tasks.push(t),
            None if cli.config.is_none() => return Err(UsageError(format!("`{name}` needs --config"))),
            None => return Err(UsageError(format!("the job file has no [[task]] block with command = \"{name}\""))),
        }
    }
    let base_seed = match cli.seed {
        Some(s) => s,
        None => cfg.seed.or(env_number("NULLKIT_SEED")?).unwrap_or(0),
    };
    let spacetime: Option<Spacetime> = cfg.spacetime.as_ref().map(|s| s.build()).transpose()?;
    let mut outputs = Vec::with_capacity(tasks.len());
    for (i, task) in tasks.iter().enumerate() {
        let seed = cli.seed.or(task.seed()).unwrap_or(base_seed);
        let mut out = match commands::run_task(task, spacetime.as_ref(), seed) {
            Ok(o) => o,
            Err(e @ (Error::Config(_) | Error::Parse(_))) => return Err(UsageError(format!("task {i} ({name}): {e}"))),
            Err(e) => {
                let mut o = TaskOutput::new(name, Table::new(&["error"]));
                o.table.push(vec![e.to_string().into()]);
                o.check(Assertion::holds("computation", false, e.to_string()));
                o
            }
        };
        out.index = i;
        out.seed = seed;
        outputs.push(out);
    }
    let path = cli.out.clone().or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone()).map(PathBuf::from));
    let format = cfg.output.as_ref().and_then(|o| o.format).unwrap_or_else(|| match &path {
        Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Csv,
    });
    let rendered = match format {
        Format::Csv => output::render_csv(&outputs),
        Format::Json => {
            let meta = Metadata {
                command: name.to_string(),
                config_hash: hash,
                seed: base_seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            };
            output::render_json(&meta, &outputs)
        }
    };
    Ok(RunResult { tasks: outputs, rendered, format, path })
}

/// Full CLI run with the given arguments (including the program name); returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let threads = match cli.threads.map(Ok).or_else(|| env_number("NULLKIT_THREADS").transpose()) {
        Some(Ok(n)) => Some(n),
        Some(Err(UsageError(msg))) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
        None => None,
    };
    if let Some(n) = threads {
        crate::par::init_threads(n);
    }
    let res = match execute(&cli) {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    match &res.path {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &res.rendered) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_USAGE;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(res.rendered.as_bytes());
        }
    }
    eprint!("{}", output::render_report(&res.tasks));
    if res.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
