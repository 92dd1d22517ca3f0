//! Conversion between laboratory units and atomic units.
//!
//! Everything downstream of this module works in Hartree atomic units
//! (ħ = mₑ = e = a₀ = 1). Constants are CODATA 2018.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bohr radius in ångström.
pub const BOHR_ANGSTROM: f64 = 0.529_177_210_903;
/// Hartree energy in electronvolt.
pub const HARTREE_EV: f64 = 27.211_386_245_988;
/// Hartree energy expressed as a wavenumber (cm⁻¹).
pub const HARTREE_CM1: f64 = 219_474.631_363_20;
/// Atomic unit of time in seconds.
pub const AU_TIME_S: f64 = 2.418_884_326_585_7e-17;
/// Unified atomic mass unit in electron masses.
pub const AMU_ME: f64 = 1_822.888_486_209;
/// Atomic unit of electric field in V/m.
pub const AU_FIELD_V_PER_M: f64 = 5.142_206_747_63e11;
/// Speed of light in vacuum, cm/s.
pub const SPEED_OF_LIGHT_CM_S: f64 = 2.997_924_58e10;

/// Physical dimension of a [`Quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Energy,
    Length,
    Mass,
    Time,
    Field,
    Charge,
    Frequency,
}

/// Laboratory unit attached to a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Hartree,
    ElectronVolt,
    Wavenumber,
    Bohr,
    Angstrom,
    ElectronMass,
    Amu,
    AtomicTime,
    Picosecond,
    Femtosecond,
    AtomicField,
    MegavoltPerCm,
    ElementaryCharge,
    /// Ordinary frequency in ps⁻¹.
    PerPicosecond,
    /// Angular frequency in atomic units (rad per atomic time unit).
    AtomicAngularFrequency,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Hartree | ElectronVolt | Wavenumber => Dimension::Energy,
            Bohr | Angstrom => Dimension::Length,
            ElectronMass | Amu => Dimension::Mass,
            AtomicTime | Picosecond | Femtosecond => Dimension::Time,
            AtomicField | MegavoltPerCm => Dimension::Field,
            ElementaryCharge => Dimension::Charge,
            PerPicosecond | AtomicAngularFrequency => Dimension::Frequency,
        }
    }

    /// Multiplicative factor taking a value in this unit to atomic units.
    fn factor(self) -> f64 {
        use Unit::*;
        match self {
            Hartree | Bohr | ElectronMass | AtomicTime | AtomicField | ElementaryCharge
            | AtomicAngularFrequency => 1.0,
            ElectronVolt => 1.0 / HARTREE_EV,
            Wavenumber => 1.0 / HARTREE_CM1,
            Angstrom => 1.0 / BOHR_ANGSTROM,
            Amu => AMU_ME,
            Picosecond => 1e-12 / AU_TIME_S,
            Femtosecond => 1e-15 / AU_TIME_S,
            // 1 MV/cm = 1e8 V/m
            MegavoltPerCm => 1e8 / AU_FIELD_V_PER_M,
            // ordinary frequency f [1/ps] -> angular frequency 2πf [1/au]
            PerPicosecond => 2.0 * PI * AU_TIME_S / 1e-12,
        }
    }
}

/// A value tagged with its laboratory unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension()
    }
}

/// Value of `q` in atomic units.
pub fn to_internal(q: Quantity) -> Result<f64> {
    if !q.value.is_finite() {
        return Err(Error::Config(format!(
            "non-finite {:?} value {}",
            q.dimension(),
            q.value
        )));
    }
    Ok(q.value * q.unit.factor())
}

/// Express an atomic-unit value in `unit`.
pub fn from_internal(value: f64, unit: Unit) -> f64 {
    value / unit.factor()
}

/// Convert between two units of the same dimension.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::Config(format!(
            "cannot convert {:?} ({:?}) to {:?} ({:?})",
            from,
            from.dimension(),
            to,
            to.dimension()
        )));
    }
    Ok(from_internal(to_internal(Quantity::new(value, from))?, to))
}

/// Angular frequency ω = 2πc·w (atomic units) of a wavenumber `w` in cm⁻¹.
pub fn wavenumber_to_angular_frequency(w: f64) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(Error::Domain(format!("wavenumber must be non-negative, got {w}")));
    }
    Ok(2.0 * PI * SPEED_OF_LIGHT_CM_S * w * AU_TIME_S)
}

/// Wavenumber (cm⁻¹) of an ordinary frequency given in atomic units (cycles per au of time).
pub fn ordinary_frequency_to_wavenumber(f: f64) -> f64 {
    f / (AU_TIME_S * SPEED_OF_LIGHT_CM_S)
}

// Shorthands used throughout the crate.

pub fn angstrom(x: f64) -> f64 {
    x / BOHR_ANGSTROM
}

pub fn ev(x: f64) -> f64 {
    x / HARTREE_EV
}

pub fn cm1(x: f64) -> f64 {
    x / HARTREE_CM1
}

pub fn amu(x: f64) -> f64 {
    x * AMU_ME
}

pub fn ps(x: f64) -> f64 {
    x * 1e-12 / AU_TIME_S
}

pub fn fs(x: f64) -> f64 {
    x * 1e-15 / AU_TIME_S
}

pub fn mv_per_cm(x: f64) -> f64 {
    x * 1e8 / AU_FIELD_V_PER_M
}

pub fn to_ps(t: f64) -> f64 {
    t * AU_TIME_S / 1e-12
}

pub fn to_cm1(e: f64) -> f64 {
    e * HARTREE_CM1
}
