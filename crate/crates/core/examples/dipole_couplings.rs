//! Permanent-dipole matrix in the rovibrational basis: bound-free coupling strengths from
//! selected vibrational levels of l = 0 to the l = 1 scattering states, plus CSV and binary
//! dumps of the full operator.
//!
//! cargo run --release --example dipole_couplings [out_dir]

use std::io::Write;
use std::path::PathBuf;

use polar_orient::basis::{build_basis, MorseParams, RadialGrid};
use polar_orient::operators::{
    assemble_dipole, dipole_function, radial_matrix_elements, read_matrix_binary, write_matrix_binary,
    write_matrix_csv, DipoleParams,
};
use polar_orient::units::{amu, angstrom, ev, to_cm1};

fn main() -> polar_orient::error::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "dipole_out".into()));
    std::fs::create_dir_all(&out)?;
    let p = MorseParams::new(ev(5.42), 1.0 / angstrom(0.445), angstrom(0.9697), angstrom(48.0))?;
    let grid = RadialGrid::with_max_spacing(p.box_length, 0.06)?;
    let basis = build_basis(&p, &grid, 2, amu(0.94), 172)?;
    let dp = DipoleParams::new(1.634, angstrom(0.6))?;

    // |<nu, l=0| D(r) |n, l=1>| against the scattering energy of |n, l=1>.
    let radial = radial_matrix_elements(&basis, |r| dipole_function(&dp, r), 0, 1)?;
    let ch1 = &basis.channels[1];
    let rows = [0usize, 9, 14, 19];
    let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("bound_free_couplings.csv"))?);
    writeln!(w, "energy_cm1,nu0,nu9,nu14,nu19")?;
    for k in ch1.bound_count..basis.n_levels {
        let e = to_cm1(ch1.energies[k]);
        if e > 7000.0 {
            break;
        }
        let vals: Vec<String> = rows.iter().map(|&nu| format!("{:.6e}", radial[(nu, k)].abs())).collect();
        writeln!(w, "{e:.4},{}", vals.join(","))?;
    }
    w.flush()?;
    for &nu in &rows {
        let peak = (ch1.bound_count..basis.n_levels)
            .filter(|&k| to_cm1(ch1.energies[k]) <= 7000.0)
            .map(|k| radial[(nu, k)].abs())
            .fold(0.0, f64::max);
        println!("nu = {nu:>2}: peak bound-free coupling {peak:.4e} a.u.");
    }

    let dipole = assemble_dipole(&basis, &dp)?;
    write_matrix_csv(&dipole.matrix, &out.join("dipole.csv"))?;
    write_matrix_binary(&dipole.matrix, &out.join("dipole.bin"))?;
    let back = read_matrix_binary(&out.join("dipole.bin"))?;
    println!(
        "dipole {}x{} written to {}; binary round trip exact: {}",
        back.nrows(),
        back.ncols(),
        out.display(),
        back == dipole.matrix
    );
    Ok(())
}
