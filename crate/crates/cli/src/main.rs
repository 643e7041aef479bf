use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dtpt_cli::commands;
use dtpt_cli::config::RunConfig;
use dtpt_cli::manifest::Recorder;
use dtpt_cli::presets::{self, Command};
use dtpt_cli::CliError;

/// Dynamical topological phase transitions of a qubit in a linear boson bath.
#[derive(Parser)]
#[command(name = "dtpt", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Start from a named figure preset; `--config` is then ignored.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory (overrides `output.dir`; default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write SVG renderings.
    #[arg(long, global = true)]
    svg: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "DTPT_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mode bank and binned spectral density.
    Spectrum,
    /// Total geometric phase on the grid.
    Phase,
    /// nu_D and its first two time derivatives.
    Dtop,
    /// Free-induction decay, one curve per temperature.
    Fid,
    /// Loschmidt amplitude in complex time, zero regions and tongue tips.
    Fisher,
    /// Critical points and their scaling fits across sizes.
    Scaling,
    /// Run a figure preset: fig1, fig2, fig3a, fig3c, fig4 or fig4d.
    Reproduce { name: String },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = cli.threads.unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }

    let (command, preset) = match &cli.command {
        Cmd::Reproduce { name } => {
            let p = presets::find(name)?;
            (p.command, Some(p))
        }
        Cmd::Spectrum => (Command::Spectrum, None),
        Cmd::Phase => (Command::Phase, None),
        Cmd::Dtop => (Command::Dtop, None),
        Cmd::Fid => (Command::Fid, None),
        Cmd::Fisher => (Command::Fisher, None),
        Cmd::Scaling => (Command::Scaling, None),
    };
    let preset = match (preset, &cli.preset) {
        (Some(p), _) => Some(p),
        (None, Some(name)) => Some(presets::find(name)?),
        (None, None) => None,
    };
    let mut config = match (preset, &cli.config) {
        (Some(p), _) => p.config()?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        (None, None) => return Err(CliError::Config("give --config PATH or --preset NAME".into())),
    };
    config.output.svg |= cli.svg;
    let dir = cli.out.or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));

    let mut rec = Recorder::new(&dir, command.as_str(), preset.map(|p| p.name), &config, rayon::current_num_threads())?;
    if let Some(p) = preset {
        rec.manifest.assumptions = p.assumptions();
    }
    match command {
        Command::Spectrum => commands::spectrum(&config, &mut rec)?,
        Command::Phase => commands::phase(&config, &mut rec)?,
        Command::Dtop => commands::dtop_cmd(&config, &mut rec)?,
        Command::Fid => commands::fid_cmd(&config, &mut rec)?,
        Command::Fisher => commands::fisher(&config, &mut rec)?,
        Command::Scaling => commands::scaling(&config, &mut rec)?,
    }
    let manifest = rec.finish()?;
    println!(
        "{} files written to {} in {:.2} s",
        manifest.files.len(),
        dir.display(),
        manifest.wall_clock
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dtpt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
