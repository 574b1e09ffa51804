//! The `mtsem` command-line driver. Everything except process setup lives
//! here so tests can run commands in-process.

mod driver;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtsem_backend::{BackendError, CompletionBackend, HttpBackend, HttpConfig, MockBackend};
use mtsem_core::mtir::serialize_mtir;
use mtsem_core::promptgen::{
    args_from_json, assemble_prompt, bind_arguments, BindError, ParseError, TypeError,
};
use mtsem_core::{compile, Compilation, CompileError, MtIrStar, PromptOptions, SemanticsMode};
use thiserror::Error;

pub use driver::{corrective_suffix, invoke, Invocation};

#[derive(Debug, Parser)]
#[command(
    name = "mtsem",
    version,
    about = "Compile MTL programs and run their `by llm` functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and analyze a program; report diagnostics.
    Check(SourceArgs),
    /// Print the SemTable as JSON.
    DumpSymbols(SourceArgs),
    /// Print the enriched IR of one call-site as JSON.
    DumpMtir(FnArgs),
    /// Print the prompt a call would send.
    DumpPrompt(PromptArgs),
    /// Run a call-site against a backend and print the typed result.
    Invoke(InvokeArgs),
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// MTL source file.
    pub source: PathBuf,
}

#[derive(Debug, Args)]
pub struct FnArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Call-site name (`generate_plan` or `Supervisor.call_next_agent`).
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value = "sem", value_parser = parse_mode)]
    pub semantics: SemanticsMode,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    #[command(flatten)]
    pub target: FnArgs,
    /// JSON file mapping parameter names to values.
    #[arg(long)]
    pub args: Option<PathBuf>,
    /// Show attribute defaults in type explanations.
    #[arg(long)]
    pub show_defaults: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct InvokeArgs {
    #[command(flatten)]
    pub prompt: PromptArgs,
    /// `mock:<script.json>`, `echo:<reply>` or `http`.
    #[arg(long, default_value = "http")]
    pub backend: String,
    /// Re-asks after a malformed or mistyped reply.
    #[arg(long, default_value_t = 2)]
    pub retries: u32,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
    /// Model name; defaults to MTSEM_MODEL, then gpt-4o.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,
}

fn parse_mode(s: &str) -> Result<SemanticsMode, String> {
    s.parse()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", located(path, error))]
    Compile {
        path: String,
        error: Box<CompileError>,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("malformed response after {attempts} attempt(s): {error}")]
    Parse { error: ParseError, attempts: u32 },
    #[error("response has wrong type after {attempts} attempt(s) at {error}")]
    Type { error: TypeError, attempts: u32 },
    #[error("backend failure: {0}")]
    Backend(#[from] BackendError),
}

fn located(path: &str, error: &CompileError) -> String {
    if error.spans().is_empty() {
        format!("{path}: {error}")
    } else {
        format!("{path}:{error}")
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compile { error, .. }
                if matches!(**error, CompileError::UnknownCallsite { .. }) =>
            {
                2
            }
            CliError::Compile { .. } => 1,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Bind(_) => 2,
            CliError::Backend(BackendError::Config(_)) => 2,
            CliError::Parse { .. } => 3,
            CliError::Type { .. } => 4,
            CliError::Backend(_) => 5,
        }
    }
}

pub fn exit_code(result: &Result<String, CliError>) -> ExitCode {
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(e.exit_code()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load(src: &SourceArgs) -> Result<Compilation, CliError> {
    let text = read(&src.source)?;
    compile(&text).map_err(|error| CliError::Compile {
        path: src.source.display().to_string(),
        error: Box::new(error),
    })
}

fn load_ir(args: &FnArgs) -> Result<MtIrStar, CliError> {
    let c = load(&args.source)?;
    c.mtir_star(&args.function, args.semantics)
        .map_err(|error| CliError::Compile {
            path: args.source.source.display().to_string(),
            error: Box::new(error),
        })
}

/// Builds the prompt text exactly as `invoke` would send it on the first attempt.
pub fn build_prompt(args: &PromptArgs) -> Result<(MtIrStar, String), CliError> {
    let ir = load_ir(&args.target)?;
    let raw = match &args.args {
        Some(path) => {
            let text = read(path)?;
            let json: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Io {
                    path: path.display().to_string(),
                    message: format!("invalid JSON: {e}"),
                })?;
            args_from_json(&json)?
        }
        None => Vec::new(),
    };
    let bound = bind_arguments(&ir, raw)?;
    let options = PromptOptions {
        show_defaults: args.show_defaults,
    };
    let text = assemble_prompt(&ir, &bound, options).render();
    Ok((ir, text))
}

/// Resolves `--backend` into a backend instance.
pub fn make_backend(spec: &str) -> Result<(Box<dyn CompletionBackend>, String), CliError> {
    if let Some(path) = spec.strip_prefix("mock:") {
        if path.is_empty() {
            return Err(CliError::Usage(
                "mock backend needs a script path: mock:<file>".into(),
            ));
        }
        let mock = MockBackend::from_file(Path::new(path)).map_err(|e| CliError::Io {
            path: path.to_string(),
            message: e.to_string(),
        })?;
        return Ok((Box::new(mock), "mock".to_string()));
    }
    if let Some(reply) = spec.strip_prefix("echo:") {
        return Ok((Box::new(MockBackend::echo(reply)), "mock".to_string()));
    }
    if spec == "http" {
        let cfg = HttpConfig::from_env()?;
        let model = cfg.model.clone();
        return Ok((Box::new(HttpBackend::new(cfg)?), model));
    }
    Err(CliError::Usage(format!(
        "unknown backend `{spec}` (expected mock:<file>, echo:<reply> or http)"
    )))
}

/// Runs one command with a given backend for `invoke`; returns stdout.
pub fn run_with_backend(
    command: &Command,
    backend: Option<(&dyn CompletionBackend, String)>,
) -> Result<String, CliError> {
    match command {
        Command::Check(src) => {
            load(src)?;
            Ok(String::new())
        }
        Command::DumpSymbols(src) => Ok(load(src)?.semtable.to_json() + "\n"),
        Command::DumpMtir(args) => Ok(serialize_mtir(&load_ir(args)?) + "\n"),
        Command::DumpPrompt(args) => Ok(build_prompt(args)?.1),
        Command::Invoke(args) => {
            let (ir, prompt) = build_prompt(&args.prompt)?;
            let owned;
            let (backend, model) = match backend {
                Some(b) => b,
                None => {
                    owned = make_backend(&args.backend)?;
                    (owned.0.as_ref(), owned.1.clone())
                }
            };
            let inv = Invocation {
                ir: &ir,
                prompt: &prompt,
                model: args.model.clone().unwrap_or(model),
                retries: args.retries,
                timeout: std::time::Duration::from_secs(args.timeout_secs.max(1)),
            };
            let value = invoke(backend, &inv)?;
            Ok(match args.format {
                OutputFormat::Text => format!("{value}\n"),
                OutputFormat::Json => {
                    serde_json::to_string_pretty(&value.to_json()).expect("JSON encodes") + "\n"
                }
            })
        }
    }
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    run_with_backend(&cli.command, None)
}
