//! Radial eigenbasis of the boxed Morse oscillator: bound-state count, comparison with the
//! closed-form vibrational levels, and the on-disk basis cache.
//!
//! cargo run --release --example morse_basis [cache_dir]

use polar_orient::basis::{build_basis_cached, solve_radial, MorseParams, RadialGrid};
use polar_orient::units::{amu, angstrom, ev, to_cm1};

fn main() -> polar_orient::error::Result<()> {
    let m = amu(0.94);
    let p = MorseParams::new(ev(5.42), 1.0 / angstrom(0.445), angstrom(0.9697), angstrom(48.0))?;
    let grid = RadialGrid::with_max_spacing(p.box_length, 0.06)?;
    println!("{} grid points, spacing {:.4} bohr", grid.n_points, grid.spacing);

    let ch = solve_radial(&p, &grid, 0, m, 30)?;
    println!("l = 0: {} bound levels (closed form predicts {})", ch.bound_count, p.analytic_bound_count(m));
    println!("{:>3} {:>14} {:>14} {:>10}", "nu", "E_num/cm-1", "E_Morse/cm-1", "rel.dev");
    for v in 0..ch.bound_count {
        let exact = p.analytic_level(m, v);
        println!("{v:>3} {:>14.4} {:>14.4} {:>10.2e}", to_cm1(ch.energies[v]), to_cm1(exact), (ch.energies[v] - exact).abs() / exact.abs());
    }

    let dir = std::env::args().nth(1).unwrap_or_else(|| "basis_cache".into());
    let basis = build_basis_cached(std::path::Path::new(&dir), &p, &grid, 4, m, 172)?;
    let counts: Vec<usize> = (0..=basis.l_max()).map(|l| basis.bound_count(l)).collect();
    println!("basis l_max = 4, N = 172: dimension {}, bound levels per l {counts:?}, cached in {dir}", basis.dimension());
    Ok(())
}
