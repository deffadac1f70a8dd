use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chdbc::assembly::{write_matrix_market, write_matrix_market_diagonal};
use chdbc::runner::{run_simulation, run_sweep};
use chdbc::{output, Discretization, Error, RunConfig, SweepConfig};

#[derive(Parser)]
#[command(name = "chdbc", about = "Cahn-Hilliard with dynamic boundary conditions on the unit square")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a config file.
    Run { config: PathBuf },
    /// Run a K-sweep and write the error table.
    Sweep { config: PathBuf },
    /// Write the assembled operators as MatrixMarket files.
    AssembleDump {
        #[arg(long, default_value_t = 4)]
        n_cells: usize,
        #[arg(long, default_value = "operators")]
        out: PathBuf,
    },
    /// Print the version.
    Version,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 4,
        Error::Config { .. } | Error::InvalidParameter(_) | Error::InverseOutOfRange { .. } => 2,
        _ => 3,
    }
}

fn dump(n_cells: usize, out: &Path) -> chdbc::Result<()> {
    let disc = Discretization::unit_square(n_cells)?;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let ops = &disc.ops;
    let write = |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| {
        let path = out.join(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| io_err(&path, e))?);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))
    };
    write("A.mtx", &|w| write_matrix_market(w, &ops.a))?;
    write("M.mtx", &|w| write_matrix_market_diagonal(w, &ops.m))?;
    write("A_gamma.mtx", &|w| write_matrix_market(w, &ops.a_gamma))?;
    write("M_gamma.mtx", &|w| write_matrix_market_diagonal(w, &ops.m_gamma))?;
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn execute(command: Command) -> chdbc::Result<()> {
    match command {
        Command::Run { config } => {
            let config = RunConfig::from_file(&config)?;
            let record = run_simulation(&config)?;
            if let Some(last) = record.steps.last() {
                println!(
                    "{} steps, E_total = {}, output in {}",
                    last.step,
                    output::format_sci(last.energy.total, 6),
                    config.output_dir.display()
                );
            }
        }
        Command::Sweep { config } => {
            let config = SweepConfig::from_file(&config)?;
            let report = run_sweep(&config)?;
            print!("{}", output::display_table(&report.rows));
        }
        Command::AssembleDump { n_cells, out } => {
            dump(n_cells, &out)?;
            println!("operators for n_cells = {n_cells} written to {}", out.display());
        }
        Command::Version => println!("chdbc {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
