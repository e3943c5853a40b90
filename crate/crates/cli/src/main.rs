//! `hqrc`: run seeded hybrid reservoir experiments and figure sweeps.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 numerical failure.

mod config;
mod output;

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hqrc::experiment::{presets, realization_inputs, run_cells, summarize, ExperimentConfig, ResultRecord};
use output::{ResultRow, SummaryRow};

#[derive(Parser)]
#[command(name = "hqrc", version, about = "Hybrid Gaussian quantum reservoir and echo state network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration for all its realizations.
    Run {
        /// Flat TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a figure preset or a custom grid.
    Sweep {
        /// Figure preset: fig2-top, fig2-bottom, fig3, fig4, fig5 or fig6.
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
        preset: Option<String>,
        /// Axes as `key=v1,v2;key=v3,...` over the base configuration.
        #[arg(long)]
        grid: Option<String>,
        /// Base configuration (phase lengths, realizations, seed, ...).
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the default configuration for a task as TOML.
    Defaults {
        #[arg(long, default_value = "memory")]
        task: String,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; tables go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel realizations (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the input sequence of every realization.
    #[arg(long)]
    emit_inputs: bool,
    /// Also write JSON mirrors of the tables.
    #[arg(long)]
    json: bool,
}

enum Failure {
    Io(io::Error),
    Config(String),
    Numerical(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<hqrc::Error> for Failure {
    fn from(e: hqrc::Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    config::parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn execute(cells: Vec<ExperimentConfig>, common: &CommonArgs) -> Result<(), Failure> {
    let cells: Vec<ExperimentConfig> = cells
        .into_iter()
        .map(|mut c| {
            if let Some(s) = common.seed {
                c.master_seed = s;
            }
            c
        })
        .collect();
    if cells.is_empty() {
        return Err(Failure::Config("the sweep has no cells".into()));
    }
    for c in &cells {
        c.validate()?;
    }
    let records = run_cells(&cells, common.threads)?;
    let summaries = summarize(&records);
    let rows: Vec<ResultRow> = records.iter().map(ResultRow::from).collect();
    let summary_rows: Vec<SummaryRow> = summaries.iter().map(SummaryRow::from).collect();

    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            output::write_csv(BufWriter::new(File::create(dir.join("results.csv"))?), &rows)?;
            output::write_csv(BufWriter::new(File::create(dir.join("summary.csv"))?), &summary_rows)?;
            if common.json {
                output::write_json(BufWriter::new(File::create(dir.join("results.json"))?), &rows)?;
                output::write_json(BufWriter::new(File::create(dir.join("summary.json"))?), &summary_rows)?;
            }
            if common.emit_inputs {
                emit_inputs(&cells, &records, &dir.join("inputs"))?;
            }
            eprintln!("wrote {} records and {} summary rows to {}", rows.len(), summary_rows.len(), dir.display());
        }
        None => {
            if common.emit_inputs {
                return Err(Failure::Config("--emit-inputs needs --out".into()));
            }
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            output::write_csv(&mut lock, &rows)?;
            writeln!(lock)?;
            output::write_csv(&mut lock, &summary_rows)?;
            if common.json {
                output::write_json(&mut lock, &summary_rows)?;
            }
        }
    }
    Ok(())
}

/// One file per distinct input series: `<kind>_seed<master>_r<i>.csv`.
fn emit_inputs(cells: &[ExperimentConfig], records: &[ResultRecord], dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let mut seen = BTreeSet::new();
    for r in records {
        let cfg = &cells[r.cell];
        let kind = match cfg.task.input_kind() {
            hqrc::tasks::InputKind::SingleMode => "single",
            hqrc::tasks::InputKind::TwoMode => "two",
        };
        let key = (kind, cfg.master_seed, cfg.plan.total(), r.realization);
        if !seen.insert(key) {
            continue;
        }
        let seq = realization_inputs(cfg, r.realization)?;
        let name = format!("{kind}_seed{}_len{}_r{}.csv", key.1, key.2, key.3);
        output::write_inputs(BufWriter::new(File::create(dir.join(name))?), &seq)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, common } => execute(vec![load_config(&config)?], &common),
        Command::Sweep {
            preset,
            grid,
            config,
            common,
        } => {
            let base = match config {
                Some(path) => load_config(&path)?,
                None => ExperimentConfig::default(),
            };
            let cells = match (preset, grid) {
                (Some(id), _) => presets::preset(&id, &base)?,
                (None, Some(spec)) => presets::grid(&spec, &base)?,
                (None, None) => unreachable!("clap requires one of --preset and --grid"),
            };
            execute(cells, &common)
        }
        Command::Defaults { task } => {
            let task = task.parse().map_err(|e: hqrc::Error| Failure::Config(e.to_string()))?;
            print!("{}", config::render_config(&ExperimentConfig::for_task(task)));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
