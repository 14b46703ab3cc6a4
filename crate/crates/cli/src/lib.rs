//! Experiment runner: configuration, dispatch and table output.

pub mod config;
pub mod schema;
pub mod table;

mod commands;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

use config::{Cli, Command, FileConfig, Format};
use table::Table;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "WEAKLAB_OUTPUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or exponent relation.
    Usage(String),
    /// Singularities, unresolved level sets and other numerical failures.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<weaklab_core::Error> for CliError {
    fn from(e: weaklab_core::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// A finished run: the table, its rendering and where it goes.
#[derive(Debug)]
pub struct Run {
    pub table: Table,
    pub rendered: String,
    pub format: Format,
    /// `None` means stdout.
    pub destination: Option<PathBuf>,
}

impl Run {
    /// Exit status once the output is written: 1 when an invariant failed.
    pub fn exit_code(&self) -> i32 {
        if self.table.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

fn destination(explicit: Option<PathBuf>, command: &str, format: Format) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    match (explicit, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p),
        (None, Some(d)) => {
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            Some(d.join(format!("{command}.{ext}")))
        }
        (None, None) => None,
    }
}

pub fn run(cli: Cli) -> Result<Run, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let format = cli.format.or(file.format).unwrap_or(Format::Csv);
    let name = cli.command.name();
    let table = match &cli.command {
        Command::Characteristic(a) => commands::characteristic(a, &file)?,
        Command::Weaktype(a) => commands::weaktype(a, &file, seed)?,
        Command::Lowerbound(a) => commands::lowerbound(a, &file)?,
        Command::SparseCheck(a) => commands::sparse_check(a, &file, seed)?,
        Command::MatrixCheck(a) => commands::matrix_check(a, &file, seed)?,
        Command::Constants(a) => commands::constants(a, &file)?,
    };
    let rendered = table.render(format);
    let destination = destination(cli.output.clone().or(file.output.clone()), name, format);
    Ok(Run { table, rendered, format, destination })
}

/// Parses `args` (program name first) and runs without writing anything.
pub fn run_args<I, T>(args: I) -> Result<Run, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
