//! Generates the self-contained synthetic demo dataset.

use clap::Parser;

/// Writes a complete demo evaluation setup (BOP-layout dataset, three
/// synthetic estimators, grasp catalog, gripper/physical parameters and a
/// ready-to-run config.toml) to the output directory.
#[derive(Parser)]
#[command(name = "poseval-demo", version)]
struct Cli {
    /// Output directory (created if missing).
    #[arg(long, default_value = "demo")]
    out: std::path::PathBuf,
    /// RNG seed for poses and estimator noise.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    poseval_cli::demo::generate(&cli.out, cli.seed)?;
    println!(
        "demo dataset written to {}; run: poseval evaluate --config {}",
        cli.out.display(),
        cli.out.join("config.toml").display()
    );
    Ok(())
}
