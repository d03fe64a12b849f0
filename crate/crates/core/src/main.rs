use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

use fracwave::cli::{cmd_preset, cmd_run, cmd_sweep, cmd_validate_fractional, CliError, PresetOutput};

#[derive(Parser)]
#[command(
    name = "fracwave",
    version,
    about = "1-D transmission wave equation with fractional damping in diffusive form",
    after_help = "Set FRACWAVE_OUT_DIR to redirect all run output to a different directory."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a config file and write CSV artifacts.
    Run {
        /// Path to a key = value config file.
        config: PathBuf,
    },
    /// Re-run one config across a list of eta values and tabulate the fits.
    Sweep {
        /// Path to the base config file; its eta value is overridden per run.
        config: PathBuf,
        /// Comma-separated eta values.
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 1..,
            default_values_t = [0.0, 0.0003, 0.0005, 0.0007, 0.001, 0.01]
        )]
        eta: Vec<f64>,
        /// Run the sweep entries on separate threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Check the diffusive fractional derivative against reference oracles.
    ValidateFractional,
    /// Print a named preset config, or save it with --out.
    Preset {
        /// One of: example1, example1_desk, example2, example2_desk.
        name: String,
        /// Write <name>.txt into this directory instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config } => {
            let report = cmd_run(&config)?;
            println!(
                "wrote {}: {} energy records, {} snapshots in {:.3}s",
                report.out_dir.display(),
                report.records,
                report.snapshots,
                report.duration.as_secs_f64()
            );
            println!(
                "E_raw: {:.6e} -> {:.6e}",
                report.initial_energy, report.final_energy
            );
            match report.fit {
                Some(fit) => println!("{}", fit.report()),
                None => println!("decay fit unavailable"),
            }
            Ok(())
        }
        Command::Sweep {
            config,
            eta,
            parallel,
        } => {
            let report = cmd_sweep(&config, &eta, parallel)?;
            for row in &report.rows {
                match &row.error {
                    Some(e) => println!("eta={}: {e}", row.eta),
                    None => println!(
                        "eta={}: slope={:.6}, C={:.6e}, rms={:.6e}",
                        row.eta, row.slope, row.c, row.rms
                    ),
                }
            }
            println!("wrote {}", report.table_path.display());
            Ok(())
        }
        Command::ValidateFractional => {
            print!("{}", cmd_validate_fractional());
            Ok(())
        }
        Command::Preset { name, out } => {
            match cmd_preset(&name, out.as_deref())? {
                PresetOutput::Stdout(text) => print!("{text}"),
                PresetOutput::File(path) => println!("wrote {}", path.display()),
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e}");
        process::exit(e.exit_code());
    }
}
