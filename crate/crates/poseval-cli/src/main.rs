use clap::{Parser, Subcommand};
use poseval_cli::{config, exit_code_for, exit_codes, inspect, outputs, pipeline};
use std::path::PathBuf;
use std::process::ExitCode;

/// Evaluates 6-DoF object-pose estimates: symmetry-aware metrics,
/// deviation transfer onto reference grasps, open-loop grasp trials, and
/// per-object statistics. Set POSEVAL_LOG=debug (or info/trace) for
/// verbose logging.
#[derive(Parser)]
#[command(name = "poseval", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write the artifact tree.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run a zero-deviation trial for every catalog entry.
    ValidateCatalog {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the full derivation for one estimate-ground-truth pair.
    Inspect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        estimator: String,
        #[arg(long)]
        scene: u64,
        #[arg(long)]
        image: u64,
        #[arg(long)]
        object: u32,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POSEVAL_LOG", "warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            exit_codes::CONFIG
        }
        Err(RunError::Pipeline(e)) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}

enum RunError {
    Config(config::ConfigError),
    Pipeline(pipeline::PipelineError),
}

impl From<config::ConfigError> for RunError {
    fn from(e: config::ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<pipeline::PipelineError> for RunError {
    fn from(e: pipeline::PipelineError) -> Self {
        RunError::Pipeline(e)
    }
}

fn run(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Evaluate { config, output_dir } => {
            let mut cfg = config::load_config(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let run = pipeline::load_inputs(&cfg)?;
            let model = pipeline::build_outcome_model(&cfg)?;
            let hash = outputs::run_content_hash(&cfg)?;
            std::fs::create_dir_all(&cfg.output_dir).map_err(pipeline::PipelineError::Io)?;
            let output = outputs::cached_evaluation(&cfg.output_dir, &hash, || {
                pipeline::evaluate(&run, model.as_ref())
            })?;
            let artifacts = outputs::write_artifacts(&cfg, &output, &hash)?;
            println!(
                "evaluated {} pairs, {} trials; wrote {} summary rows and {} AUC rows to {}",
                output.pair_metrics.len(),
                output.trials.len(),
                artifacts.summaries.len(),
                artifacts.aucs.len(),
                cfg.output_dir.display()
            );
            Ok(exit_codes::OK)
        }
        Command::ValidateCatalog { config } => {
            let cfg = config::load_config(&config)?;
            let run = pipeline::load_inputs(&cfg)?;
            let model = pipeline::build_outcome_model(&cfg)?;
            let report = pipeline::validate_catalog(&run, model.as_ref())?;
            for (object_id, gripper) in &report.not_applicable {
                println!("not-applicable: object {object_id} with {} gripper", gripper.name());
            }
            for failure in &report.failures {
                println!("FAIL: {failure}");
            }
            println!(
                "validated {} catalog entries: {} failed, {} not-applicable combinations",
                report.validated,
                report.failures.len(),
                report.not_applicable.len()
            );
            if report.failures.is_empty() {
                Ok(exit_codes::OK)
            } else {
                Ok(exit_codes::CATALOG)
            }
        }
        Command::Inspect {
            config,
            estimator,
            scene,
            image,
            object,
        } => {
            let cfg = config::load_config(&config)?;
            let run = pipeline::load_inputs(&cfg)?;
            let text = inspect::inspect_pair(&run, &estimator, scene, image, object)?;
            print!("{text}");
            Ok(exit_codes::OK)
        }
    }
}
