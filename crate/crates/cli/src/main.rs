use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use optosqueeze_cli::{parse_config_for, run, RunError, Task};

#[derive(Parser)]
#[command(name = "optosqueeze", version, about = "Squeezing spectra and detuning stability of an optomechanical cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Squeezing spectrum over a frequency grid.
    Spectrum(RunArgs),
    /// Stability diagram over a detuning grid.
    Stability(RunArgs),
    /// Small-detuning instability threshold.
    Threshold(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (task, args) = match cli.command {
        Command::Spectrum(a) => (Task::Spectrum, a),
        Command::Stability(a) => (Task::Stability, a),
        Command::Threshold(a) => (Task::Threshold, a),
    };
    match execute(task, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(task: Task, args: &RunArgs) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| RunError::Io { path: args.config.clone(), source })?;
    let mut config = parse_config_for(&text, task)?;
    if let Some(dir) = &args.out {
        config.output.dir = dir.clone();
    }
    config.output.svg |= args.svg;
    let summary = run(&config)?;
    print!("{}", summary.stdout);
    for path in &summary.files {
        println!("wrote {}", path.display());
    }
    Ok(())
}
