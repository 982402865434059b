use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use crdiv_cli::{emit_plot_data, parse_config, run_sweep, write_sweep_csv, CliError, SweepArgs};

#[derive(Debug, Parser)]
#[command(name = "crdiv", version, about = "Secondary-network capacity sweeps for interweaved cognitive radio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep N, writing Monte Carlo estimates and closed-form bounds as CSV.
    Sweep(Box<SweepArgs>),
    /// Convert a sweep CSV into long-format plot series.
    PlotData {
        /// Sweep CSV to read ("-" for standard input).
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// Destination ("-" or omitted for standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) if !is_stdio(p) => {
            let file = File::create(p).map_err(|e| CliError::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let config = parse_config(args)?;
    let rows = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building the worker pool")?
            .install(|| run_sweep(&config))?,
        None => run_sweep(&config)?,
    };
    let out = open_output(config.output_path.as_deref())?;
    write_sweep_csv(&config, &rows, out)?;
    Ok(())
}

fn plot_data(input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let reader: Box<dyn Read> = if is_stdio(input) {
        Box::new(io::stdin().lock())
    } else {
        let file = File::open(input).map_err(|e| CliError::Io {
            path: input.to_path_buf(),
            source: e,
        })?;
        Box::new(BufReader::new(file))
    };
    let rows = emit_plot_data(reader, open_output(out)?)?;
    log::info!("wrote {rows} plot rows");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CliError::EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Sweep(args) => sweep(args),
        Command::PlotData { input, out } => plot_data(input, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
