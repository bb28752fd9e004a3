//! Command-line sweeps over the qpump model with CSV output.

pub mod commands;
pub mod config;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::table::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ALL_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BOUNDARY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qpump", version, about = "Pumped current of a driven dissipative pseudospin")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// File of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key (repeatable), applied after `--config`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// analytic, secular or full.
    #[arg(long, global = true)]
    pub engine: Option<String>,
    /// log:a:b:n, lin:a:b:n or list:x,y,...
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0, global = true)]
    pub threads: usize,
    /// Reserved; nothing in the model is stochastic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady state against drive frequency, one block per temperature.
    SweepFrequency,
    /// Steady state against temperature at fixed drive frequency.
    SweepTemperature,
    /// Relaxation of the current from |z,-> by master-equation propagation.
    Transient,
    /// Drive frequency of maximal DC current.
    Optimum,
    /// Laboratory scales for a given hopping energy.
    Units,
    /// Cross-checks between the closed form, the master equation and the ring model.
    Validate,
}

/// Merges file, `--set` and flag settings, in that order.
pub fn build_config(common: &Common) -> Result<Config, CliError> {
    let mut cfg = Config::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        cfg.apply_file(&text)?;
    }
    for pair in &common.set {
        cfg.set_pair(pair)?;
    }
    if let Some(e) = &common.engine {
        cfg.set("engine", e)?;
    }
    if let Some(g) = &common.grid {
        cfg.set("grid", g)?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(command: &Command, cfg: &Config) -> Result<Table, CliError> {
    match command {
        Command::SweepFrequency => commands::sweep_frequency(cfg),
        Command::SweepTemperature => commands::sweep_temperature(cfg),
        Command::Transient => commands::transient(cfg),
        Command::Optimum => commands::optimum(cfg),
        Command::Units => commands::units(cfg),
        Command::Validate => commands::validate(cfg),
    }
}

pub fn exit_code(command: &Command, table: &Table) -> i32 {
    let failed = match command {
        Command::Validate => table.any_failed(),
        _ => table.all_failed(),
    };
    if failed {
        EXIT_ALL_FAILED
    } else if table.any_boundary() {
        EXIT_BOUNDARY
    } else {
        EXIT_OK
    }
}

/// Parses arguments, runs the subcommand and writes the table. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match build_config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qpump: {e}");
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("qpump: cannot start worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let table = match pool.install(|| execute(&cli.command, &cfg)) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("qpump: {e}");
            return EXIT_CONFIG;
        }
    };
    let text = table.render();
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    };
    if let Err(e) = written {
        eprintln!("qpump: {e}");
        return EXIT_ALL_FAILED;
    }
    let code = exit_code(&cli.command, &table);
    if code == EXIT_BOUNDARY {
        eprintln!("qpump: warning: optimum at the edge of the search window (current is monotone there)");
    }
    code
}
