//! Free-bound dynamics under the sin² trial field: the collision wavepacket is expanded in a
//! reduced basis, propagated with the split-operator scheme, and written as a population
//! trajectory plus binary state snapshots.
//!
//! cargo run --release --example trial_field_dynamics [out_dir]

use std::path::PathBuf;

use polar_orient::analysis::write_population_csv;
use polar_orient::basis::{build_basis, MorseParams, RadialGrid};
use polar_orient::control::trial_field;
use polar_orient::dynamics::{initial_wavepacket, propagate, Observers, SplitOperator, StateVector, WavepacketParams};
use polar_orient::operators::{assemble_dipole, build_cos_theta, DipoleParams};
use polar_orient::units::{amu, angstrom, cm1, ev, fs, mv_per_cm, ps, wavenumber_to_angular_frequency};

fn main() -> polar_orient::error::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "trial_out".into()));
    std::fs::create_dir_all(&out)?;
    let m = amu(0.94);
    let p = MorseParams::new(ev(5.42), 1.0 / angstrom(0.445), angstrom(0.9697), angstrom(16.0))?;
    let grid = RadialGrid::with_max_spacing(p.box_length, 0.06)?;
    let basis = build_basis(&p, &grid, 4, m, 56)?;
    let dipole = assemble_dipole(&basis, &DipoleParams::new(1.634, angstrom(0.6))?)?;
    let cos = build_cos_theta(&basis)?;

    let wp = WavepacketParams::incoming(angstrom(10.0), angstrom(1.5), cm1(300.0), m);
    let projection = initial_wavepacket(&wp, &basis)?;
    println!(
        "wavepacket: truncation defect {:.2e}, bound content {:.2e}",
        projection.truncation_defect, projection.bound_content
    );

    let dt = fs(0.05);
    let field = trial_field(mv_per_cm(1063.0), wavenumber_to_angular_frequency(360.0)?, ps(2.0), dt)?;
    let prop = SplitOperator::new(basis.energies(), &dipole, dt)?;
    let observers =
        Observers { targets: vec![("cos_theta".into(), &cos)], stride: 200, snapshot_stride: Some(10_000) };
    let traj = propagate(&prop, &projection.state, &field, &observers)?;
    write_population_csv(&basis, &traj, 5, &out.join("trajectory.csv"))?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        s.save(&out.join(format!("snapshot_{i:03}.bin")))?;
    }
    let last = out.join("final_state.bin");
    traj.final_state.save(&last)?;
    let reread = StateVector::load(&last)?;
    let cos_t = traj.observable("cos_theta").unwrap();
    println!(
        "{} samples, {} snapshots; final norm {:.12}, <cos theta> = {:.4}; snapshot reload exact: {}",
        traj.times.len(),
        traj.snapshots.len(),
        traj.final_state.norm_sqr(),
        cos_t[cos_t.len() - 1],
        reread == traj.final_state
    );
    Ok(())
}
