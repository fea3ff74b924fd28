//! `qdm`: reproducible experiment runner for the QDM forecaster.

mod config;
mod output;
mod runner;

use anyhow::{anyhow, bail};
use clap::{Parser, Subcommand};

use config::{preset, ExperimentConfig, Task, PRESET_NAMES};

#[derive(Parser)]
#[command(name = "qdm", version, about = "Quantum discrete map experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or preset name.
    Run {
        /// Path to a config JSON, or a preset name.
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<String>,
        /// Worker threads for seed sweeps.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Run the LECL grid calibration workflow.
    Calibrate {
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the dynamics/universality numerical checks.
    TheoryCheck {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the QRC baseline sweep and comparison.
    QrcSweep {
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// List available presets.
    Presets,
    /// Print a preset config as JSON (customize and pass back to `run`).
    Preset { name: String },
    /// Aggregate metrics across finished runs of the same task.
    Report {
        /// Run directories containing metrics.json.
        dirs: Vec<String>,
        /// Write the summary JSON here (prints the table regardless).
        #[arg(long)]
        out: Option<String>,
    },
}

fn load_config(arg: &str, seed: Option<u64>, out: Option<String>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = if std::path::Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg)?;
        ExperimentConfig::from_json(&text)?
    } else if let Some(p) = preset(arg) {
        p
    } else {
        bail!("'{arg}' is neither a config file nor a preset; presets: {}", PRESET_NAMES.join(", "));
    };
    if let Some(s) = seed {
        cfg.seed = s;
        if let Some(m) = cfg.model.as_mut() {
            m.seed = s;
        }
        if let Some(t) = cfg.train.as_mut() {
            t.seed = s;
        }
        if let Some(q) = cfg.qrc.as_mut() {
            q.base.seed = s;
        }
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config, seed, out, threads } => {
            let cfg = load_config(&config, seed, out)?;
            runner::run_experiment(&cfg, threads)
        }
        Command::Calibrate { config, seed, out } => {
            let cfg = load_config(&config, seed, out)?;
            if cfg.task != Task::LeclCalibrate {
                bail!("calibrate expects a lecl-calibrate config, got task '{}'", cfg.task.name());
            }
            runner::run_experiment(&cfg, 1)
        }
        Command::TheoryCheck { seed, out } => {
            let mut cfg =
                preset("theory-check").ok_or_else(|| anyhow!("missing theory preset"))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            runner::run_experiment(&cfg, 1)
        }
        Command::QrcSweep { config, seed, out, threads } => {
            let cfg = load_config(&config, seed, out)?;
            if cfg.task != Task::QrcCompare {
                bail!("qrc-sweep expects a qrc-compare config, got task '{}'", cfg.task.name());
            }
            runner::run_experiment(&cfg, threads)
        }
        Command::Presets => {
            for p in PRESET_NAMES {
                println!("{p}");
            }
            Ok(())
        }
        Command::Preset { name } => {
            let cfg = preset(&name)
                .ok_or_else(|| anyhow!("unknown preset '{name}'; presets: {}", PRESET_NAMES.join(", ")))?;
            println!("{}", cfg.to_json());
            Ok(())
        }
        Command::Report { dirs, out } => {
            let (summary, table) = runner::export_report(&dirs)?;
            print!("{table}");
            if let Some(path) = out {
                std::fs::write(&path, summary)?;
                println!("summary written to {path}");
            } else {
                println!("{summary}");
            }
            Ok(())
        }
    }
}
