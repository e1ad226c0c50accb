//! Physical constants and the natural-unit (MeV) boundary.
//!
//! Everything physical inside this crate runs in powers of MeV; SI values
//! appear only in configuration and reports. The conversion triple
//! (`MEV_INV_TO_M`, `S_TO_MEV_INV`, `MEV_INV2_TO_CM2`) is derived from
//! hbar*c and hbar alone, so length*rate consistency with c is a checked
//! invariant rather than an independent input.

use std::str::FromStr;
use thiserror::Error;

/// Fermi coupling constant [MeV^-2].
pub const G_F: f64 = 1.1664e-11;
/// Atomic mass unit [MeV].
pub const U_MEV: f64 = 931.5;
/// Weak mixing angle sin^2(theta_W), low-energy value.
pub const SIN2_THETA_W: f64 = 0.23857;
/// hbar*c [MeV fm], CODATA 2018.
pub const HBAR_C_MEV_FM: f64 = 197.3269804;
/// hbar [MeV s], CODATA 2018.
pub const HBAR_MEV_S: f64 = 6.582119569e-22;
/// Boltzmann constant [J/K], exact.
pub const K_B: f64 = 1.380649e-23;
/// Bohr magneton [J/T], CODATA 2018.
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Speed of light [m/s], exact.
pub const C_M_S: f64 = 299_792_458.0;
/// Planck constant [J s], exact.
pub const H_J_S: f64 = 6.62607015e-34;
/// hbar [J s].
pub const HBAR_J_S: f64 = 1.054571817e-34;
/// Vacuum permeability [T m/A], CODATA 2018.
pub const MU_0: f64 = 1.25663706212e-6;
/// One joule in MeV, exact.
pub const J_TO_MEV: f64 = 1.0 / 1.602176634e-13;
/// One MeV/c^2 in kilograms.
pub const MEV_TO_KG: f64 = 1.78266192e-30;
/// Electron mass in atomic mass units (enters the nuclear-mass fit).
pub const M_E_U: f64 = 0.00054858;

/// Length: multiply MeV^-1 by this to get meters.
pub const MEV_INV_TO_M: f64 = HBAR_C_MEV_FM * 1e-15;
/// Cross section: multiply MeV^-2 by this to get cm^2.
pub const MEV_INV2_TO_CM2: f64 = (HBAR_C_MEV_FM * 1e-13) * (HBAR_C_MEV_FM * 1e-13);
/// Time: multiply seconds by this to get MeV^-1.
pub const S_TO_MEV_INV: f64 = 1.0 / HBAR_MEV_S;

#[derive(Debug, Error, PartialEq)]
pub enum UnitsError {
    #[error("unknown unit tag `{0}` (expected length, area, time, energy, mass, or inverse-time)")]
    UnknownUnit(String),
    #[error("cross section must be non-negative, got {0}")]
    NegativeCrossSection(f64),
}

/// Dimension tags accepted at the SI/natural boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    /// meters <-> MeV^-1
    Length,
    /// square meters <-> MeV^-2
    Area,
    /// seconds <-> MeV^-1
    Time,
    /// joules <-> MeV
    Energy,
    /// kilograms <-> MeV
    Mass,
    /// s^-1 <-> MeV
    InverseTime,
}

impl FromStr for Unit {
    type Err = UnitsError;

    fn from_str(s: &str) -> Result<Self, UnitsError> {
        match s {
            "length" => Ok(Unit::Length),
            "area" => Ok(Unit::Area),
            "time" => Ok(Unit::Time),
            "energy" => Ok(Unit::Energy),
            "mass" => Ok(Unit::Mass),
            "inverse-time" => Ok(Unit::InverseTime),
            other => Err(UnitsError::UnknownUnit(other.to_string())),
        }
    }
}

/// Converts an SI quantity to natural units (powers of MeV).
pub fn to_natural(value: f64, unit: Unit) -> f64 {
    match unit {
        Unit::Length => value / MEV_INV_TO_M,
        Unit::Area => value / (MEV_INV_TO_M * MEV_INV_TO_M),
        Unit::Time => value * S_TO_MEV_INV,
        Unit::Energy => value * J_TO_MEV,
        Unit::Mass => value / MEV_TO_KG,
        Unit::InverseTime => value * HBAR_MEV_S,
    }
}

/// Inverse of [`to_natural`].
pub fn to_si(value: f64, unit: Unit) -> f64 {
    match unit {
        Unit::Length => value * MEV_INV_TO_M,
        Unit::Area => value * MEV_INV_TO_M * MEV_INV_TO_M,
        Unit::Time => value / S_TO_MEV_INV,
        Unit::Energy => value / J_TO_MEV,
        Unit::Mass => value * MEV_TO_KG,
        Unit::InverseTime => value / HBAR_MEV_S,
    }
}

/// Converts a cross section in MeV^-2 to cm^2. Rejects negative input.
pub fn cross_section_to_cm2(sigma_mev2: f64) -> Result<f64, UnitsError> {
    if sigma_mev2 < 0.0 {
        return Err(UnitsError::NegativeCrossSection(sigma_mev2));
    }
    Ok(sigma_mev2 * MEV_INV2_TO_CM2)
}
