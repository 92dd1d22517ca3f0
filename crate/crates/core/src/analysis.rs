//! Field power spectra and population bookkeeping.

use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::basis::{Level, RovibBasis};
use crate::control::ControlField;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::units;

/// One-sided power spectrum |FFT(u)|², normalized so that Σ power = Σ u².
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub frequencies_cm1: Vec<f64>,
    /// Angular frequency in atomic units.
    pub frequencies_au: Vec<f64>,
    pub power: Vec<f64>,
}

pub fn power_spectrum(samples: &[f64], dt: f64) -> Result<PowerSpectrum> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::Domain(format!("power spectrum needs at least 2 samples, got {m}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("sample spacing must be positive, got {dt}")));
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let half = m / 2;
    let mut power = Vec::with_capacity(half + 1);
    for (k, z) in buf.iter().take(half + 1).enumerate() {
        // Negative-frequency partners fold onto k; DC and Nyquist have none.
        let fold = if k == 0 || (m % 2 == 0 && k == half) { 1.0 } else { 2.0 };
        power.push(fold * z.norm_sqr() / m as f64);
    }
    let df = 1.0 / (m as f64 * dt);
    let frequencies_au: Vec<f64> = (0..power.len()).map(|k| 2.0 * std::f64::consts::PI * k as f64 * df).collect();
    let frequencies_cm1 = (0..power.len()).map(|k| units::ordinary_frequency_to_wavenumber(k as f64 * df)).collect();
    Ok(PowerSpectrum { frequencies_cm1, frequencies_au, power })
}

pub fn field_spectrum(field: &ControlField) -> Result<PowerSpectrum> {
    power_spectrum(&field.values, field.dt)
}

impl PowerSpectrum {
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Frequency (cm⁻¹) of the largest non-DC bin.
    pub fn dominant_frequency(&self) -> f64 {
        let mut best = (0.0, f64::NEG_INFINITY);
        for (f, &p) in self.frequencies_cm1.iter().zip(&self.power).skip(1) {
            if p > best.1 {
                best = (*f, p);
            }
        }
        best.0
    }

    /// Bins restricted to `lo..=hi` cm⁻¹.
    pub fn window(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        self.frequencies_cm1
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| (lo..=hi).contains(*f))
            .map(|(&f, &p)| (f, p))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "frequency_cm1,power")?;
        for (f, p) in self.frequencies_cm1.iter().zip(&self.power) {
            writeln!(w, "{f:.10e},{p:.10e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// |P_a − P_b| per bin; both spectra must share one frequency grid.
pub fn spectrum_difference(a: &PowerSpectrum, b: &PowerSpectrum) -> Result<PowerSpectrum> {
    let same_grid = a.frequencies_au.len() == b.frequencies_au.len()
        && a.frequencies_au.iter().zip(&b.frequencies_au).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1e-300));
    if !same_grid {
        return Err(Error::Domain("spectra are sampled on different frequency grids".into()));
    }
    Ok(PowerSpectrum {
        frequencies_cm1: a.frequencies_cm1.clone(),
        frequencies_au: a.frequencies_au.clone(),
        power: a.power.iter().zip(&b.power).map(|(x, y)| (x - y).abs()).collect(),
    })
}

/// Populations summed over vibrational content.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSummary {
    /// P_l, bound plus unbound.
    pub per_l: Vec<f64>,
    /// Bound population of (ν, l), indexed `[l][ν]`.
    pub bound: Vec<Vec<f64>>,
    pub bound_total: f64,
}

impl PopulationSummary {
    pub fn bound_level(&self, nu: usize, l: usize) -> f64 {
        self.bound.get(l).and_then(|b| b.get(nu)).copied().unwrap_or(0.0)
    }

    /// Bound population of ν summed over l.
    pub fn bound_vibrational(&self, nu: usize) -> f64 {
        self.bound.iter().filter_map(|b| b.get(nu)).sum()
    }
}

pub fn aggregate_populations(basis: &RovibBasis, populations: &[f64]) -> Result<PopulationSummary> {
    if populations.len() != basis.dimension() {
        return Err(Error::Dimension { expected: basis.dimension(), got: populations.len() });
    }
    let mut per_l = vec![0.0; basis.l_max() + 1];
    let mut bound: Vec<Vec<f64>> = (0..=basis.l_max()).map(|l| vec![0.0; basis.bound_count(l)]).collect();
    let mut bound_total = 0.0;
    for (i, &p) in populations.iter().enumerate() {
        let (l, level) = basis.level_of(i)?;
        per_l[l] += p;
        if let Level::Bound(nu) = level {
            bound[l][nu] += p;
            bound_total += p;
        }
    }
    Ok(PopulationSummary { per_l, bound, bound_total })
}

/// Population table `time_ps,l0..lK,bound_total,<observables>` from a trajectory, with
/// `K = l_columns − 1` whatever the basis: channels above `l_max` read 0, channels above `K` are
/// left out of the per-l columns (but not of `bound_total`).
pub fn write_population_csv(
    basis: &RovibBasis,
    trajectory: &Trajectory,
    l_columns: usize,
    path: &Path,
) -> Result<()> {
    let cols = l_columns;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = vec!["time_ps".to_string()];
    header.extend((0..cols).map(|l| format!("l{l}")));
    header.push("bound_total".into());
    header.extend(trajectory.observable_names.iter().cloned());
    writeln!(w, "{}", header.join(","))?;
    for (row, &t) in trajectory.times.iter().enumerate() {
        let s = aggregate_populations(basis, &trajectory.populations[row])?;
        let mut line = vec![format!("{:.10e}", units::to_ps(t))];
        line.extend((0..cols).map(|l| format!("{:.10e}", s.per_l.get(l).copied().unwrap_or(0.0))));
        line.push(format!("{:.10e}", s.bound_total));
        line.extend(trajectory.observables.iter().map(|o| format!("{:.10e}", o[row])));
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Field table `time_ps,field_au,envelope`.
pub fn write_field_csv(field: &ControlField, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "time_ps,field_au,envelope")?;
    for ((t, u), s) in field.times().iter().zip(&field.values).zip(&field.envelope) {
        writeln!(w, "{:.10e},{u:.17e},{s:.10e}", units::to_ps(*t))?;
    }
    w.flush()?;
    Ok(())
}

/// Convergence table `iteration,J`.
pub fn write_history_csv(history: &[f64], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "iteration,J")?;
    for (i, j) in history.iter().enumerate() {
        writeln!(w, "{i},{j:.17e}")?;
    }
    w.flush()?;
    Ok(())
}
