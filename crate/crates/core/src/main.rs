use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use plasmon_stirap::cli::{load_config_text, run_subcommand, ConfigSource, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Ldos,
    Modes,
    Couplings,
    Stirap,
    Scan,
    Truncation,
    Distances,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Ldos => Subcommand::Ldos,
            Command::Modes => Subcommand::Modes,
            Command::Couplings => Subcommand::Couplings,
            Command::Stirap => Subcommand::Stirap,
            Command::Scan => Subcommand::Scan,
            Command::Truncation => Subcommand::Truncation,
            Command::Distances => Subcommand::Distances,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Fig2,
    Fig5,
    Fig6,
    Fig7,
    Fig9,
}

/// Plasmon-mediated STIRAP between two quantum emitters near a metal nanosphere.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// What to compute.
    #[arg(value_enum)]
    command: Command,
    /// Configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Use an embedded figure preset instead of a file.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long, env = "PLASMON_STIRAP_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: cannot configure {k} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let source = match (args.config, args.preset) {
        (Some(path), _) => ConfigSource::File(path),
        (None, Some(p)) => ConfigSource::Preset(format!("{p:?}").to_lowercase()),
        (None, None) => unreachable!("clap requires one of --config/--preset"),
    };
    let result = load_config_text(&source)
        .and_then(|text| run_subcommand(args.command.into(), &text, args.out.as_deref()));
    match result {
        Ok(manifest) => {
            for f in &manifest.files {
                println!("{}  {}", f.sha256, f.path);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
