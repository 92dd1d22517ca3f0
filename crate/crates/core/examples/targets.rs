//! Target observables: the orientation operator, projectors onto vibrational bands and the
//! restricted orientation operator P cos θ P, with their ranks and attainable maxima.
//!
//! cargo run --release --example targets

use polar_orient::basis::{build_basis, MorseParams, RadialGrid};
use polar_orient::operators::{build_cos_theta, build_projector, build_restricted_orientation, LevelSet, TargetObservable};
use polar_orient::units::{amu, angstrom, ev};

fn show(name: &str, t: &TargetObservable) {
    let lo = t.sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("{name:<34} rank {:>3}  eigenvalues in [{lo:+.4}, {:+.4}]", t.rank(), t.max_eigenvalue());
}

fn main() -> polar_orient::error::Result<()> {
    let p = MorseParams::new(ev(5.42), 1.0 / angstrom(0.445), angstrom(0.9697), angstrom(16.0))?;
    let grid = RadialGrid::with_max_spacing(p.box_length, 0.06)?;
    let basis = build_basis(&p, &grid, 4, amu(0.94), 56)?;
    println!("basis dimension {}", basis.dimension());
    show("cos theta", &build_cos_theta(&basis)?);
    show("projector nu = 0, l = 0..4", &build_projector(&basis, &LevelSet::grid(0..1, 0..=4))?);
    show("projector nu = 0..9, l = 0..4", &build_projector(&basis, &LevelSet::grid(0..10, 0..=4))?);
    for l_max in 1..=4 {
        let b = build_restricted_orientation(&basis, &LevelSet::grid(0..1, 0..=l_max))?;
        show(&format!("P cos theta P, nu = 0, l = 0..{l_max}"), &b);
    }
    Ok(())
}
