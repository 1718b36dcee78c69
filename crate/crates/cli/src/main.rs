//! `ordagg`: validate, evaluate and explore session files from the shell.
//!
//! Exit status is 0 on success, 1 when a file is malformed or fails
//! validation, and 2 when a file cannot be read or the server cannot start.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ordagg_core::session::parse_json;
use ordagg_core::{evaluate, what_if, Patch, Session, SessionError};
use ordagg_service::{serve, ServeConfig, ServeError};

#[derive(Parser, Debug)]
#[command(
    name = "ordagg",
    version,
    about = "Ordinal multi-criteria / multi-expert aggregation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Output {
    #[default]
    Table,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a session file and report every problem found.
    Validate {
        #[arg(long)]
        session: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        output: Output,
    },
    /// Print the ranking of a session.
    Evaluate {
        #[arg(long)]
        session: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        output: Output,
    },
    /// Show what a patch would change without touching the session file.
    Whatif {
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        patch: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        output: Output,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        session: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory with the panel bundle, served at `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Io(m) => m,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|err| Failure::Io(format!("{}: {err}", path.display())))
}

fn load_session(path: &Path) -> Result<Session, Failure> {
    let bytes = read(path)?;
    Session::load(&bytes).map_err(|err| {
        Failure::Invalid(match err {
            SessionError::Parse(e) => format!("{}: parse error at {e}", path.display()),
            SessionError::Invalid(e) => format!("{}: {e}", path.display()),
        })
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { session, output } => {
            let s = load_session(&session)?;
            let report = evaluate(&s).map_err(|e| Failure::Invalid(e.to_string()))?;
            match output {
                Output::Json => {
                    let doc = serde_json::json!({ "valid": true, "findings": report.findings });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&doc).expect("serializes")
                    );
                }
                Output::Table => {
                    println!(
                        "ok: {} proposals, {} experts, {} criteria",
                        s.proposals.len(),
                        s.experts.len(),
                        s.criteria.len()
                    );
                    for f in &report.findings {
                        println!("warning: {}: {}", f.path, f.message);
                    }
                }
            }
        }
        Command::Evaluate { session, output } => {
            let s = load_session(&session)?;
            let report = evaluate(&s).map_err(|e| Failure::Invalid(e.to_string()))?;
            match output {
                Output::Json => print!("{}", report.to_json()),
                Output::Table => print!("{}", report.to_table()),
            }
        }
        Command::Whatif {
            session,
            patch,
            output,
        } => {
            let s = load_session(&session)?;
            let bytes = read(&patch)?;
            let patch: Patch = parse_json(&bytes).map_err(|e| {
                Failure::Invalid(format!("{}: parse error at {e}", patch.display()))
            })?;
            let outcome = what_if(&s, &patch).map_err(|e| Failure::Invalid(e.to_string()))?;
            match output {
                Output::Json => print!("{}", outcome.to_json()),
                Output::Table => print!("{}", outcome.describe()),
            }
        }
        Command::Serve {
            session,
            listen,
            assets,
        } => {
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| Failure::Io(format!("cannot start runtime: {e}")))?;
            let config = ServeConfig {
                listen,
                session_path: session,
                assets,
            };
            runtime.block_on(serve(config)).map_err(|err| match err {
                ServeError::Io(e) => Failure::Io(e.to_string()),
                ServeError::Session(e) => Failure::Invalid(e.to_string()),
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
