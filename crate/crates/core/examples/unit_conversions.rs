//! Laboratory units of the model parameters expressed in Hartree atomic units.
//!
//! cargo run --example unit_conversions

use polar_orient::units::{amu, angstrom, convert, ev, fs, mv_per_cm, ps, wavenumber_to_angular_frequency, Unit};

fn main() -> polar_orient::error::Result<()> {
    println!("D_e = 5.42 eV       = {:.6} Eh = {:.2} cm-1", ev(5.42), convert(5.42, Unit::ElectronVolt, Unit::Wavenumber)?);
    println!("alpha^-1 = 0.445 A  = {:.6} bohr", angstrom(0.445));
    println!("m_r = 0.94 amu      = {:.3} m_e", amu(0.94));
    println!("V = 1063 MV/cm      = {:.6} Eh/(e a0)", mv_per_cm(1063.0));
    println!("omega = 360 cm-1    = {:.6e} Eh/hbar", wavenumber_to_angular_frequency(360.0)?);
    println!("t_f = 1.7 ps        = {:.1} hbar/Eh", ps(1.7));
    println!("dt = 0.05 fs        = {:.4} hbar/Eh", fs(0.05));
    Ok(())
}
