//! Field-free orientation from |ν=0, l=0⟩: TBQCP optimization of ⟨cos θ⟩ at t_f = 1.7 ps for a
//! range of rotational truncations, compared with the largest eigenvalue of the truncated
//! cos θ matrix.
//!
//! cargo run --release --example orientation_control [iterations]

use polar_orient::control::{tbqcp_run, Monitor, Progress};
use polar_orient::scenario::{RunSettings, ScenarioConfig, ScenarioKind, Setup};

struct Print;

impl Monitor for Print {
    fn iteration(&mut self, p: &Progress<'_>) {
        if p.stats.iteration % 10 == 0 {
            println!("    iteration {:>3}: J = {:.4} (eta {:.2e})", p.stats.iteration, p.stats.j, p.eta);
        }
    }
}

fn main() -> polar_orient::error::Result<()> {
    let iterations = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    for l_max in 1..=4 {
        let c = ScenarioConfig {
            scenario: Some(ScenarioKind::Orientation),
            l_max: Some(l_max),
            iterations: Some(iterations),
            ..Default::default()
        };
        let setup = Setup::new(RunSettings::resolve(&c, &ScenarioConfig::default(), true)?)?;
        println!("l_max = {l_max}: dimension {}, ceiling {:.4}", setup.basis.dimension(), setup.cos_theta.max_eigenvalue());
        let (_, record) = tbqcp_run(&setup.problem(), &setup.settings.control, &setup.trial, None, &mut Print)?;
        println!("  J: trial {:.4} -> final {:.4}", record.initial_j, record.final_j());
    }
    Ok(())
}
