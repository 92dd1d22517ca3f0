//! Simultaneous photoassociation and orientation: the target is cos θ restricted to |ν=0, l⟩,
//! so the optimized field must both bind the pair deeply and orient it.
//!
//! cargo run --release --example combined [out_dir]

use std::path::PathBuf;

use polar_orient::scenario::{run, RunSettings, ScenarioConfig, ScenarioKind};

fn main() -> polar_orient::error::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "combined_out".into()));
    let c = ScenarioConfig { scenario: Some(ScenarioKind::Combined), ..Default::default() };
    let s = run(RunSettings::resolve(&c, &ScenarioConfig::default(), true)?, &out, None)?;
    println!("final J {:.4} of a possible {:.4}", s.final_j, s.target_ceiling);
    println!("population in nu = 0: {:.4}, <cos theta> {:+.4}", s.final_band_population, s.final_cos_theta);
    println!(
        "per-l distribution: {}",
        s.final_per_l.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(" ")
    );
    Ok(())
}
