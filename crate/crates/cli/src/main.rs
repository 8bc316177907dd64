use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graspgen_cli::commands;
use graspgen_cli::config::PipelineConfig;
use graspgen_cli::exit_code;
use graspgen_core::codec::DEFAULT_CLASSES;
use graspgen_core::{Error, Result};

/// Grasp candidate generation, annotation, labelling and refinement.
///
/// Log verbosity is read from GRASPGEN_LOG (error, warn, info, debug).
#[derive(Parser)]
#[command(name = "graspgen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Pipeline config (JSON)
    config: PathBuf,
    /// Override a config value, e.g. `--set sampler.num_fps_points=30`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig> {
        let cfg = PipelineConfig::load(&self.config, &self.overrides)?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.worker_count)
            .build_global()
            .map_err(|e| Error::Config(format!("worker_count: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate collision-gated candidates for every object in a scene
    Sample {
        scene: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        out: PathBuf,
        /// Also write the labelled surface cloud (PLY)
        #[arg(long)]
        cloud: Option<PathBuf>,
    },
    /// Score candidates with the configured evaluator
    Annotate {
        candidates: PathBuf,
        scene: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        out: PathBuf,
    },
    /// Build the label record from evaluated candidates
    Aggregate {
        evaluated: PathBuf,
        cloud: PathBuf,
        out: PathBuf,
        /// Defaults to the file stem of the evaluated candidates
        #[arg(long)]
        scene_id: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CLASSES)]
        classes: usize,
    },
    /// Instance assignment, collision filter, NMS and top-percent selection
    Refine {
        grasps: PathBuf,
        cloud: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        out: PathBuf,
        /// Write grasp positions as a labelled PLY
        #[arg(long)]
        markers: Option<PathBuf>,
    },
    /// Success ratio of grasp outcomes
    EvalAp {
        outcomes: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the direction lattice as a PLY
    Lattice {
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLASSES)]
        classes: usize,
    },
    /// Evaluate loss terms of predictions against label records
    Losses {
        labels: PathBuf,
        predictions: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        out: PathBuf,
    },
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample {
            scene,
            config,
            out,
            cloud,
        } => {
            let cfg = config.load()?;
            let summary = commands::sample(&scene, &cfg, &out, cloud.as_deref())?;
            for (id, n) in &summary.counts {
                println!("instance {id}: {n} candidates");
            }
            println!("total: {}", summary.total());
        }
        Command::Annotate {
            candidates,
            scene,
            config,
            out,
        } => {
            let cfg = config.load()?;
            let good = commands::annotate(&candidates, &scene, &cfg, &out)?;
            println!("successful: {good}");
        }
        Command::Aggregate {
            evaluated,
            cloud,
            out,
            scene_id,
            classes,
        } => {
            let id = scene_id.unwrap_or_else(|| stem(&evaluated));
            let r = commands::aggregate(&evaluated, &cloud, &out, &id, classes)?;
            println!(
                "groups: {}, direction cells: {}, candidates: {}",
                r.groups.len(),
                r.ads.len(),
                r.candidates.len()
            );
        }
        Command::Refine {
            grasps,
            cloud,
            config,
            out,
            markers,
        } => {
            let cfg = config.load()?;
            let kept = commands::refine(&grasps, &cloud, &cfg, &out, markers.as_deref())?;
            println!("kept: {}", kept.len());
        }
        Command::EvalAp { outcomes, out } => {
            let r = commands::eval_ap(&outcomes, out.as_deref())?;
            println!("AP {:.6} ({}/{})", r.ap, r.successes, r.total);
        }
        Command::Lattice { out, classes } => commands::lattice(classes, &out)?,
        Command::Losses {
            labels,
            predictions,
            config,
            out,
        } => {
            let cfg = config.load()?;
            for r in commands::losses(&labels, &predictions, &cfg, &out)? {
                println!(
                    "{}: aff {:.6} dir {:.6} score {:.6} total {:.6}",
                    r.scene_id, r.l_aff, r.l_dir, r.l_score, r.total
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRASPGEN_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
