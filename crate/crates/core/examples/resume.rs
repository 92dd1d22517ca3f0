//! Checkpoint and resume: a short orientation optimization is interrupted after a few
//! iterations, resumed from its checkpoint file, and compared with an uninterrupted run.
//!
//! cargo run --release --example resume [out_dir]

use std::path::PathBuf;

use polar_orient::scenario::{run, RunSettings, ScenarioConfig, ScenarioKind, CHECKPOINT_FILE};

fn settings(iterations: usize) -> polar_orient::error::Result<RunSettings> {
    let c = ScenarioConfig {
        scenario: Some(ScenarioKind::Orientation),
        l_max: Some(2),
        iterations: Some(iterations),
        ..Default::default()
    };
    RunSettings::resolve(&c, &ScenarioConfig::default(), true)
}

fn main() -> polar_orient::error::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "resume_out".into()));
    let straight = run(settings(6)?, &out.join("straight"), None)?;
    run(settings(3)?, &out.join("first_half"), None)?;
    let resumed = run(settings(6)?, &out.join("resumed"), Some(&out.join("first_half").join(CHECKPOINT_FILE)))?;
    println!("uninterrupted: {:?}", straight.j_history);
    println!("resumed:       {:?}", resumed.j_history);
    println!("identical: {}", straight.j_history == resumed.j_history);
    Ok(())
}
