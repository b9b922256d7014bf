//! Command-line driver: parse a config, sweep one or both fading
//! channels, and emit CSV curves plus a reproducible run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use loracov::config::{self, ParsedConfig};
use loracov::output;
use loracov::{FadingModel, SimConfig, Simulation};

#[derive(Parser)]
#[command(
    name = "loracov",
    version,
    about = "Monte Carlo uplink success probability for multi-cell LoRa networks"
)]
struct Args {
    /// Configuration file (flat `key = value` document).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Trials per distance bin; overrides the config.
    #[arg(long)]
    trials: Option<u64>,

    /// Fading channel to sweep; `both` runs Rayleigh and Rician with the
    /// same seed for a paired comparison. Defaults to the config's model.
    #[arg(long, value_parser = ["rayleigh", "rician", "both"])]
    channel: Option<String>,

    /// Output directory for `<channel>_curves.csv` and
    /// `<channel>_manifest.txt`.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Suppress the per-run summary lines.
    #[arg(long)]
    quiet: bool,
}

/// Removes everything it still tracks when dropped; disarm on success.
struct OutputGuard {
    files: Vec<PathBuf>,
}

impl OutputGuard {
    fn track(&mut self, path: PathBuf) {
        self.files.push(path);
    }

    fn disarm(&mut self) {
        self.files.clear();
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        for path in &self.files {
            let _ = fs::remove_file(path);
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: &Args) -> Result<(), String> {
    let parsed = load_config(args.config.as_deref())?;
    let mut base = parsed.config.clone();
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials < 1 {
            return Err("--trials must be at least 1".to_string());
        }
        base.trials = trials;
    }

    let channels: Vec<FadingModel> = match args.channel.as_deref() {
        None => vec![base.fading],
        Some("rayleigh") => vec![FadingModel::Rayleigh],
        Some("rician") => vec![FadingModel::Rician { k_factor: parsed.rician_k }],
        Some("both") => vec![
            FadingModel::Rayleigh,
            FadingModel::Rician { k_factor: parsed.rician_k },
        ],
        Some(other) => return Err(format!("unknown channel `{other}`")),
    };

    fs::create_dir_all(&args.out)
        .map_err(|e| format!("cannot create output directory `{}`: {e}", args.out.display()))?;

    let mut guard = OutputGuard { files: Vec::new() };
    for fading in channels {
        let config = SimConfig { fading, ..base.clone() };
        run_channel(&config, args, &mut guard)?;
    }
    guard.disarm();
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<ParsedConfig, String> {
    match path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config `{}`: {e}", path.display()))?;
            config::parse_config_full(&text).map_err(|e| e.to_string())
        }
        None => Ok(ParsedConfig {
            config: SimConfig::default(),
            rician_k: config::DEFAULT_RICIAN_K,
        }),
    }
}

fn run_channel(config: &SimConfig, args: &Args, guard: &mut OutputGuard) -> Result<(), String> {
    let name = config.fading.name();
    let sim = Simulation::new(config.clone()).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let curves = sim.run_sweep().map_err(|e| e.to_string())?;
    let duration_ms = started.elapsed().as_millis();

    let bin_trials: Vec<(f64, u64)> = curves
        .bins
        .iter()
        .map(|b| (b.distance_km, b.trials))
        .collect();
    let zero_gw: u64 = curves.bins.iter().map(|b| b.zero_gw_trials).sum();
    let manifest = config::render_manifest(
        config,
        env!("CARGO_PKG_VERSION"),
        duration_ms,
        &bin_trials,
        zero_gw,
    );

    let csv_path = args.out.join(format!("{name}_curves.csv"));
    let manifest_path = args.out.join(format!("{name}_manifest.txt"));
    write_output(&csv_path, &output::curves_to_string(&curves), guard)?;
    write_output(&manifest_path, &manifest, guard)?;

    if !args.quiet {
        println!(
            "{name}: {} bins x {} trials in {duration_ms} ms -> {}",
            curves.bins.len(),
            config.trials,
            csv_path.display()
        );
    }
    Ok(())
}

fn write_output(path: &Path, contents: &str, guard: &mut OutputGuard) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write `{}`: {e}", path.display()))?;
    guard.track(path.to_path_buf());
    Ok(())
}
