use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info, warn};
use sidelink_ia_cli::{commands, CampaignConfig, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "sidelink-ia",
    version,
    about = "Beam initial-access campaigns for vehicular sidelinks"
)]
struct Args {
    /// TOML campaign configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured search strategies over every link.
    Simulate,
    /// Train the per-quadrant angle histograms.
    TrainPcb,
    /// Derive a street-orientation PDF from a map raster.
    MapPcb,
    /// Codebook quantization loss against the SVD bound.
    Quantize,
    /// Write the synthetic scenario to disk.
    Synth,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn run(args: Args) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(p) => CampaignConfig::load(p)?,
        None => CampaignConfig::default(),
    };
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;

    match args.command {
        Command::Simulate => {
            let s = commands::simulate(&cfg)?;
            if s.n_links == 0 {
                warn!("no links; wrote an empty results file");
            }
            info!("{} links, {} rows -> {}", s.n_links, s.n_rows, s.results.display());
        }
        Command::TrainPcb => {
            let path = commands::train(&cfg)?;
            info!("wrote {}", path.display());
        }
        Command::MapPcb => {
            let path = commands::map_pcb(&cfg)?;
            info!("wrote {}", path.display());
        }
        Command::Quantize => {
            let (path, _) = commands::quantize(&cfg)?;
            info!("wrote {}", path.display());
        }
        Command::Synth => {
            let (t, m) = commands::synth(&cfg)?;
            info!("wrote {} and {}", t.display(), m.display());
        }
        Command::ShowConfig => print!("{}", cfg.to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
