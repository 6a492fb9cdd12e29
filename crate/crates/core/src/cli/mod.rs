//! Front end of the `knotqm` binary.
//!
//! Exit codes: 0 success, 2 usage or invalid value, 3 bad winding numbers,
//! 4 degenerate torus, 5 numerical failure, 6 I/O failure.

pub mod commands;
pub mod config;
pub mod table;

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use commands::run_command;
pub use config::{from_meta, parse_config, Command, MethodChoice, OutputFormat, RunConfig};
pub use table::{write_table, OutputTable};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", first_line(.0))]
    Clap(clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Winding(GeometryError),
    #[error("{0}")]
    Torus(GeometryError),
    #[error("{0}")]
    Module(String),
    #[error("i/o error: {0}")]
    Io(String),
}

fn first_line(e: &clap::Error) -> String {
    e.to_string()
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("invalid arguments")
        .trim()
        .to_string()
}

impl CliError {
    pub fn from_geometry(e: GeometryError) -> Self {
        match e {
            GeometryError::ZeroWinding { .. } | GeometryError::NotCoprime { .. } => CliError::Winding(e),
            GeometryError::DegenerateTorus { .. } | GeometryError::NonPositiveRadius { .. } => CliError::Torus(e),
            GeometryError::SingularPoint => CliError::Module(e.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Usage(_) => 2,
            CliError::Winding(_) => 3,
            CliError::Torus(_) => 4,
            CliError::Module(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

/// Where the table goes: `--out` (relative paths under `KNOTQM_OUT_DIR`
/// when set), else `KNOTQM_OUT_DIR/<command>.<ext>`, else stdout.
pub fn output_path(cfg: &RunConfig, env: &BTreeMap<String, String>) -> Option<PathBuf> {
    let dir = env.get("KNOTQM_OUT_DIR").map(PathBuf::from);
    match (&cfg.out, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join(format!("{}.{}", cfg.command.name(), cfg.format.extension()))),
        (None, None) => None,
    }
}

/// Full program run; returns the process exit code.
pub fn run(args: &[String], env: &BTreeMap<String, String>) -> i32 {
    let result = parse_config(args, env).and_then(|cfg| {
        let table = run_command(&cfg)?;
        write_table(&table, cfg.format, output_path(&cfg, env).as_deref())
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Clap(e)) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            0
        }
        Err(e) => {
            eprintln!("knotqm: {e}");
            e.exit_code()
        }
    }
}
