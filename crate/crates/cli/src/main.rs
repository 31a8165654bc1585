use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use empathy_cli::config::Grid;
use empathy_cli::{CliError, Overrides, Session};

#[derive(Parser)]
#[command(name = "empathy", version, about = "Run empathy-game scenarios and write CSV/JSON reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario and write its outputs and a manifest.
    Run(Common),
    /// Re-run the scenario once per grid value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter inside the scenario block, e.g. `lambda` or `price.slope`.
        #[arg(long)]
        param: String,
        /// Values as `a,b,c` or `start:stop:points`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
    /// Check the config and exit.
    Validate(Common),
    /// Print the scenario's text summary.
    Report(Common),
}

fn open(c: &Common) -> Result<Session, CliError> {
    Session::open(&c.config, &Overrides { out: c.out.clone(), seed: c.seed })
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run(c) => {
            let session = open(&c)?;
            let outcome = empathy_cli::run(&session)?;
            print!("{}", outcome.summary);
            println!("wrote {} files to {}", outcome.files.len() + 2, session.out.display());
        }
        Command::Sweep { common, param, grid } => {
            let session = open(&common)?;
            let grid = Grid::parse(&grid)?;
            let rows = empathy_cli::sweep(&session, &param, &grid)?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            if failed > 0 {
                eprintln!("{failed} sweep point(s) failed; see the status column");
            }
            println!("wrote {} rows to {}", rows.len(), session.out.join("sweep.csv").display());
        }
        Command::Validate(c) => {
            let kind = empathy_cli::validate(&open(&c)?)?;
            println!("ok: {kind} scenario");
        }
        Command::Report(c) => print!("{}", empathy_cli::report(&open(&c)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
