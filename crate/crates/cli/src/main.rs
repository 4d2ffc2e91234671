use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bibc_core::experiments::{execute, parse_scene, Job, RunManifest, SnrGrid, MANIFEST_JSON};
use bibc_core::metrics::GridSpec;
use bibc_core::{AlphaDb, SceneConfig};

/// Bistatic backscatter beamforming experiments.
#[derive(Parser)]
#[command(name = "bibc", version, about)]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transmit radiation pattern per design.
    Pattern {
        #[command(flatten)]
        common: Common,
        /// Angular resolution in degrees.
        #[arg(long, default_value_t = 0.5)]
        theta_step: f64,
    },
    /// Path gain over the x-y plane per design.
    Pgmap {
        #[command(flatten)]
        common: Common,
        /// Grid resolution in meters.
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y_min: f64,
        #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
        y_max: f64,
    },
    /// Error probability versus SNR, closed form and Monte Carlo.
    Pe {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
        snr_min: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        snr_max: f64,
        #[arg(long, default_value_t = 1.0)]
        snr_step: f64,
        /// Monte Carlo trials per SNR point; 0 writes the closed form only.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// eta, path gain at the BDE and objective per design.
    Summary {
        #[command(flatten)]
        common: Common,
    },
    /// Re-run the job recorded in a manifest.
    Replay {
        /// A manifest.json, or the directory holding one.
        manifest: PathBuf,
        /// Write here instead of the recorded output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML scene file; omitted keys (or no file) give the reference deployment.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Output directory for the CSV and manifest.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// SIR constraint in dB, repeatable; "-inf" selects full cancellation.
    /// Defaults to the scene's alphas_db.
    #[arg(long = "alpha", allow_hyphen_values = true)]
    alphas: Vec<AlphaDb>,
}

impl Common {
    fn manifest(self, job: Job) -> Result<RunManifest> {
        let scene = match &self.scene {
            Some(p) => parse_scene(p).with_context(|| format!("reading scene {}", p.display()))?,
            None => SceneConfig::reference(),
        };
        let alphas = if self.alphas.is_empty() {
            scene.alphas_db.clone()
        } else {
            self.alphas
        };
        let scene_path = self.scene.map(|p| p.display().to_string());
        Ok(RunManifest::new(scene, scene_path, alphas, job, self.out)?)
    }
}

fn load_manifest(path: &Path) -> Result<RunManifest> {
    let file = if path.is_dir() {
        path.join(MANIFEST_JSON)
    } else {
        path.to_path_buf()
    };
    RunManifest::load(&file).with_context(|| format!("reading manifest {}", file.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if let Some(n) = cli.workers {
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }

    let manifest = match cli.command {
        Command::Pattern { common, theta_step } => common.manifest(Job::Pattern {
            theta_step_deg: theta_step,
        })?,
        Command::Pgmap {
            common,
            step,
            x_min,
            x_max,
            y_min,
            y_max,
        } => {
            let grid = GridSpec {
                x_min,
                x_max,
                y_min,
                y_max,
                step,
                ..GridSpec::default()
            };
            common.manifest(Job::Pgmap { grid })?
        }
        Command::Pe {
            common,
            snr_min,
            snr_max,
            snr_step,
            trials,
            seed,
        } => {
            let snr = SnrGrid {
                min_db: snr_min,
                max_db: snr_max,
                step_db: snr_step,
            };
            common.manifest(Job::Pe { snr, trials, seed })?
        }
        Command::Summary { common } => common.manifest(Job::Summary)?,
        Command::Replay { manifest, out } => {
            let mut m = load_manifest(&manifest)?;
            if let Some(out) = out {
                m.out_dir = out;
            }
            m
        }
    };

    let written = execute(&manifest).with_context(|| format!("running {}", manifest.job.name()))?;
    println!("{}", written.display());
    Ok(())
}
