//! `vmkit`: training-clip generation, motion/consistency maps, probability
//! smoothing, trimaps and matte evaluation.

mod config;
mod gen;
mod report;
mod video;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{block_params, parse_size, pick, require, RunConfig};
use vmkit_core::probsmooth::DEFAULT_ITERATIONS_FRACTION;

const DEFAULT_FRAMES: usize = 6;
const DEFAULT_SIZE: &str = "520x520";

#[derive(Parser)]
#[command(name = "vmkit", version, about = "Video matting data and evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate training clips.
    Gen {
        /// Directory of `<id>.<ext>` portraits with `<id>_alpha.png` mattes.
        #[arg(long)]
        foregrounds: Option<PathBuf>,
        /// Directory with one subdirectory of frames per background clip.
        #[arg(long)]
        backgrounds: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        clips: Option<usize>,
        #[arg(long)]
        frames: Option<usize>,
        /// Frame size as WxH.
        #[arg(long)]
        size: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Forward/backward block motion and consistency maps for a frame directory.
    Flow {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long)]
        search_radius: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Temporally smooth per-frame probability maps.
    Smooth {
        #[arg(long)]
        probs: Option<PathBuf>,
        /// Output directory of `flow`.
        #[arg(long)]
        flows: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Three-level trimaps from probability maps.
    Trimap {
        #[arg(long)]
        probs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Morphology iterations as a fraction of the image width.
        #[arg(long)]
        iterations_fraction: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Training losses of predictions against a generated clip.
    Losses {
        #[arg(long)]
        clip: Option<PathBuf>,
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Report file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// SSDA, dtSSD and MESSDdt of predicted alphas against a generated clip.
    Metrics {
        #[arg(long)]
        clip: Option<PathBuf>,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Gen { common, .. }
            | Command::Flow { common, .. }
            | Command::Smooth { common, .. }
            | Command::Trimap { common, .. }
            | Command::Losses { common, .. }
            | Command::Metrics { common, .. } => common,
        }
    }
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => Ok(vmkit_core::io::write_json(p, report)?),
        None => {
            println!("{}", serde_json::to_string_pretty(report)?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let common = cli.command.common();
    let cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(jobs) = pick(common.jobs, cfg.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot configure worker pool")?;
    }
    match cli.command {
        Command::Gen { foregrounds, backgrounds, out, seed, clips, frames, size, .. } => {
            let size = pick(size, cfg.size).unwrap_or_else(|| DEFAULT_SIZE.to_string());
            let (height, width) = parse_size(&size)?;
            gen::run(&gen::GenJob {
                foregrounds: require(pick(foregrounds, cfg.foregrounds), "foregrounds")?,
                backgrounds: require(pick(backgrounds, cfg.backgrounds), "backgrounds")?,
                out: require(pick(out, cfg.out), "out")?,
                seed: pick(seed, cfg.seed).unwrap_or(0),
                clips: pick(clips, cfg.clips).unwrap_or(1),
                frames: pick(frames, cfg.frames).unwrap_or(DEFAULT_FRAMES),
                height,
                width,
            })
        }
        Command::Flow { input, out, block_size, search_radius, .. } => {
            let params = block_params(pick(block_size, cfg.block_size), pick(search_radius, cfg.search_radius))?;
            video::flow(
                &require(pick(input, cfg.input), "input")?,
                &require(pick(out, cfg.out), "out")?,
                &params,
            )
        }
        Command::Smooth { probs, flows, out, .. } => video::smooth(
            &require(pick(probs, cfg.probs), "probs")?,
            &require(pick(flows, cfg.flows), "flows")?,
            &require(pick(out, cfg.out), "out")?,
        ),
        Command::Trimap { probs, out, iterations_fraction, .. } => video::trimap(
            &require(pick(probs, cfg.probs), "probs")?,
            &require(pick(out, cfg.out), "out")?,
            pick(iterations_fraction, cfg.iterations_fraction).unwrap_or(DEFAULT_ITERATIONS_FRACTION),
        ),
        Command::Losses { clip, pred, out, .. } => {
            let report = report::losses(&require(pick(clip, cfg.clip), "clip")?, &require(pick(pred, cfg.pred), "pred")?)?;
            emit(&report, pick(out, cfg.out).as_deref())
        }
        Command::Metrics { clip, pred, out, .. } => {
            let report = report::metrics(&require(pick(clip, cfg.clip), "clip")?, &require(pick(pred, cfg.pred), "pred")?)?;
            emit(&report, pick(out, cfg.out).as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vmkit: {e:#}");
            ExitCode::FAILURE
        }
    }
}
