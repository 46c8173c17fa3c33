use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ficsr::cliio::{run_experiment, validate_config, Overrides};

#[derive(Parser)]
#[command(name = "ficsr", version = ficsr::VERSION, about = "Fisher-penalized sequential training over fragmented data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        /// Base seed; trial t uses seed + t.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config file and its dataset without training.
    Validate { config: PathBuf },
    /// Print the tool version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out_dir, trials, seed } => {
            run_experiment(&config, &Overrides { out_dir, trials, seed }).map(|s| {
                println!("wrote {}", s.json_path.display());
                println!("wrote {}", s.csv_path.display());
            })
        }
        Command::Validate { config } => validate_config(&config).map(|c| {
            println!("ok: protocol {}, {} trial(s)", c.protocol.name(), c.trials);
        }),
        Command::Version => {
            println!("ficsr {}", ficsr::VERSION);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
