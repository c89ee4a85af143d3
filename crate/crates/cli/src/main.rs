use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spatialign::transforms::PretextMode;
use spatialign::Split;

mod commands;
mod config;

#[derive(Parser)]
#[command(name = "spatialign", version, about = "Spatial audio alignment experiments on synthetic scenes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// Run configuration JSON; defaults apply to anything it omits.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Flip,
    Rotation,
}

impl From<ModeArg> for PretextMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Flip => PretextMode::Flip,
            ModeArg::Rotation => PretextMode::Rotation,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render a labelled dataset: WAVs, trajectories and a manifest.
    Gen {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Additive noise level; omit for clean scenes.
        #[arg(long)]
        snr_db: Option<f64>,
    },
    /// Train the alignment classifier on a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Classification accuracy of a checkpoint on every non-empty split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// PCA of per-frame audio embeddings against the true azimuth.
    Analyze {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        /// Also write the per-clip azimuth-bin track of the first component.
        #[arg(long)]
        track_csv: bool,
    },
    /// Per-frame direction of arrival of a stereo or FOA recording.
    Doa {
        #[arg(long)]
        input: PathBuf,
    },
    /// Recover a global rotation between FOA audio and its trajectory.
    Align {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        grid_deg: Option<f64>,
        /// Known misrotation, to report the error.
        #[arg(long)]
        truth_deg: Option<f64>,
    },
    /// Mono-to-stereo upmixing on a stereo manifest.
    Upmix {
        #[arg(long)]
        manifest: PathBuf,
        /// Write the predicted stereo WAV of each test scene.
        #[arg(long)]
        wav: bool,
    },
    /// Two-source spatial separation on pairs of stereo test scenes.
    Separate {
        #[arg(long)]
        manifest: PathBuf,
        /// Write the separated WAVs of each pair.
        #[arg(long)]
        wav: bool,
    },
    /// Collect every metric JSON under a run directory.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", serde_json::json!({ "error": msg.trim(), "kind": "usage" }));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli.common, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", commands::error_json(&e));
            ExitCode::from(2)
        }
    }
}
