//! Photoassociation: an optimized field drives the colliding pair into |ν=0⟩ of all l.
//! Runs the reduced-scale preset through the full output pipeline.
//!
//! cargo run --release --example photoassociation [out_dir] [band]

use std::path::PathBuf;

use polar_orient::scenario::{run, RunSettings, ScenarioConfig, ScenarioKind};

fn main() -> polar_orient::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "photoassociation_out".into()));
    let kind = if args.next().as_deref() == Some("band") {
        ScenarioKind::PhotoassociationBand
    } else {
        ScenarioKind::Photoassociation
    };
    let c = ScenarioConfig { scenario: Some(kind), ..Default::default() };
    let s = run(RunSettings::resolve(&c, &ScenarioConfig::default(), true)?, &out, None)?;
    for (i, j) in s.j_history.iter().enumerate().step_by(5) {
        println!("iteration {i:>3}: J = {j:.4}");
    }
    println!(
        "final J {:.4}, <cos theta> {:+.4}, bound {:.4}, target band {:.4}; outputs in {}",
        s.final_j,
        s.final_cos_theta,
        s.final_bound_total,
        s.final_band_population,
        out.display()
    );
    Ok(())
}
