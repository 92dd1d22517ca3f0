//! Power spectra of control fields: the 360 cm⁻¹ trial pulse, a two-colour pulse, and their
//! per-bin difference, written as `frequency_cm1,power` tables.
//!
//! cargo run --release --example power_spectrum [out_dir]

use std::path::PathBuf;

use polar_orient::analysis::{field_spectrum, spectrum_difference};
use polar_orient::control::{trial_field, trial_field_value, ControlField};
use polar_orient::units::{fs, mv_per_cm, ps, wavenumber_to_angular_frequency};

fn main() -> polar_orient::error::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "spectrum_out".into()));
    std::fs::create_dir_all(&out)?;
    let (dt, t_f, v) = (fs(0.05), ps(1.7), mv_per_cm(1063.0));
    let w1 = wavenumber_to_angular_frequency(360.0)?;
    let w2 = wavenumber_to_angular_frequency(900.0)?;
    let trial = trial_field(v, w1, t_f, dt)?;
    let steps = trial.steps();
    let two_colour = ControlField::from_fn(steps, dt, |t| {
        trial_field_value(t, v, w1, t_f) + 0.5 * trial_field_value(t, v, w2, t_f)
    });

    let a = field_spectrum(&trial)?;
    let b = field_spectrum(&two_colour)?;
    let d = spectrum_difference(&a, &b)?;
    a.write_csv(&out.join("spectrum_trial.csv"))?;
    b.write_csv(&out.join("spectrum_two_colour.csv"))?;
    d.write_csv(&out.join("spectrum_difference.csv"))?;

    let bin = a.frequencies_cm1[1];
    println!("bin width {bin:.2} cm-1, {} bins", a.power.len());
    println!("trial peak at {:.1} cm-1, total power {:.4e}", a.dominant_frequency(), a.total_power());
    println!("largest difference at {:.1} cm-1", d.dominant_frequency());
    let band: f64 = d.window(800.0, 1000.0).iter().map(|x| x.1).sum();
    println!("fraction of |dP| within 800-1000 cm-1: {:.3}", band / d.total_power());
    Ok(())
}
