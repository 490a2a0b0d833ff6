mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "texturemap",
    version,
    about = "GLCM texture classification of image windows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Tile an image and write one feature row per window.
    Extract {
        image: PathBuf,
        /// Ground-truth label raster; windows get their modal class.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Fit a classifier on labelled feature tables and save the model.
    Train {
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        /// Class map file with `id,name` lines.
        #[arg(long)]
        classes: Option<PathBuf>,
    },
    /// Classify every window of an image with a saved model.
    Predict {
        model: PathBuf,
        image: PathBuf,
        /// Ground-truth label raster for scoring and the overlay.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// PNG marking wrong (red) and right (green) windows; needs --labels.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Stratified k-fold cross-validation on labelled feature tables.
    Evaluate {
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        #[arg(long)]
        classes: Option<PathBuf>,
    },
    /// Time tiling plus extraction per window size (default 50,70).
    Bench { image: PathBuf },
    /// Write a synthetic four-texture mosaic with its labels and class map.
    Synth {
        /// Mosaic image (PNG, or PGM by extension).
        #[arg(long)]
        image: PathBuf,
        /// Label raster (PNG, or PGM by extension).
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        classes: Option<PathBuf>,
        /// Tiles per texture.
        #[arg(long, default_value_t = 200)]
        per_class: u32,
        /// Tile side in pixels.
        #[arg(long, default_value_t = 50)]
        tile: u32,
    },
}

/// Settings shared by every subcommand. Values override the config file.
#[derive(Args)]
struct Common {
    /// Flat `key = value` settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: standard output, required for train).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Window size, or a comma-separated list.
    #[arg(long, global = true, value_name = "SIZE[,SIZE..]")]
    window: Option<String>,
    /// Gray levels G.
    #[arg(long, global = true)]
    levels: Option<String>,
    #[arg(long, global = true)]
    distance: Option<String>,
    /// 0, 45, 90 or 135.
    #[arg(long, global = true)]
    direction: Option<String>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    symmetric: Option<String>,
    /// Sum the four directions into one matrix.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    avg_directions: Option<String>,
    /// Minimum modal-class share for a window to be labelled.
    #[arg(long, global = true)]
    purity: Option<String>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    keep_unlabeled: Option<String>,
    /// nb or svm.
    #[arg(long, global = true)]
    classifier: Option<String>,
    /// SVM box constraint.
    #[arg(long = "C", global = true)]
    c: Option<String>,
    /// RBF kernel width.
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// linear or rbf.
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// SVM KKT tolerance.
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    max_passes: Option<String>,
    #[arg(long, global = true)]
    folds: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads (0: all cores).
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Timed runs per window size for bench.
    #[arg(long, global = true)]
    repeats: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("window", &self.window),
            ("levels", &self.levels),
            ("distance", &self.distance),
            ("direction", &self.direction),
            ("symmetric", &self.symmetric),
            ("avg_directions", &self.avg_directions),
            ("purity", &self.purity),
            ("keep_unlabeled", &self.keep_unlabeled),
            ("classifier", &self.classifier),
            ("c", &self.c),
            ("gamma", &self.gamma),
            ("kernel", &self.kernel),
            ("tol", &self.tol),
            ("max_passes", &self.max_passes),
            ("folds", &self.folds),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("repeats", &self.repeats),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                let flag = if key == "c" {
                    "C".to_string()
                } else {
                    key.replace('_', "-")
                };
                cfg.set(key, v)
                    .map_err(|e| format!("--{flag}{}", e.strip_prefix(key).unwrap_or(&e)))?;
            }
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.common.resolve() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("texturemap: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli.common.out.clone();
    let result = texturemap::par::with_threads(cfg.threads, || {
        commands::run(cli.command, &cfg, out.as_deref())
    })
    .map_err(commands::Failure::from)
    .and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("texturemap: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
