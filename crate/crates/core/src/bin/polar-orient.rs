use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use polar_orient::scenario::{run, RunSettings, ScenarioConfig, ScenarioKind};

/// Optimize a field that photoassociates and orients a polar molecule.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Flat TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// orientation, photoassociation, photoassociation_band or combined (overrides the config).
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
    /// Number of optimization iterations (0 runs the trial field only).
    #[arg(long, value_name = "N")]
    iterations: Option<usize>,
    /// Continue from an optimization checkpoint.
    #[arg(long, value_name = "CHECKPOINT")]
    resume: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Use the reduced basis, box and pulse length.
    #[arg(long)]
    desk_scale: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let result = (|| -> polar_orient::error::Result<()> {
        let file = match &args.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        let overrides = ScenarioConfig {
            scenario: args.scenario.as_deref().map(ScenarioKind::parse).transpose()?,
            iterations: args.iterations,
            ..Default::default()
        };
        let settings = RunSettings::resolve(&file, &overrides, args.desk_scale)?;
        let summary = run(settings, &args.out, args.resume.as_deref())?;
        println!(
            "{}: J = {:.6} (ceiling {:.6}), <cos theta> = {:.4}, bound = {:.4}, outputs in {}",
            summary.scenario.name(),
            summary.final_j,
            summary.target_ceiling,
            summary.final_cos_theta,
            summary.final_bound_total,
            args.out.display()
        );
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
