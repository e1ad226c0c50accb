//! Target nuclide, crystal geometry, and the reactor source spectrum.

use thiserror::Error;

use crate::quadrature::{AdaptiveGl, QuadratureError};
use crate::units::{MEV_TO_KG, M_E_U, SIN2_THETA_W, U_MEV};

#[derive(Debug, Error, PartialEq)]
pub enum TargetError {
    #[error("proton number must be at least 1 (got {z})")]
    ProtonNumber { z: u32 },
    #[error("atom count must be positive and finite (got {0:e})")]
    AtomCount(f64),
    #[error("mass density must be positive and finite (got {0} g/cm^3)")]
    MassDensity(f64),
    #[error("{name} must be positive and finite (got {value:e})")]
    SourceParameter { name: &'static str, value: f64 },
    #[error("spectrum support is empty: [{lo}, {hi}] MeV")]
    EmptySupport { lo: f64, hi: f64 },
    #[error("spectrum normalization failed: {0}")]
    Normalization(#[from] QuadratureError),
}

/// Coherent weak charge (1 - 4 sin^2 theta_W) Z + N.
pub fn weak_charge(z: u32, n: u32) -> f64 {
    (1.0 - 4.0 * SIN2_THETA_W) * z as f64 + n as f64
}

/// Neutral-atom-corrected nuclear mass in MeV.
///
/// Atomic mass approximated as A atomic mass units; electrons are removed
/// and the total electronic binding energy (eV fit, converted to MeV) added
/// back so the result is the bare nucleus.
pub fn nucleus_mass_mev(z: u32, n: u32) -> f64 {
    let zf = z as f64;
    let a = (z + n) as f64;
    let binding_ev = 14.4381 * zf.powf(2.39) + 1.55468e-6 * zf.powf(5.35);
    a * U_MEV - zf * M_E_U * U_MEV + binding_ev * 1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nuclide {
    pub z: u32,
    pub n: u32,
}

impl Nuclide {
    pub fn new(z: u32, n: u32) -> Result<Self, TargetError> {
        if z < 1 {
            return Err(TargetError::ProtonNumber { z });
        }
        Ok(Nuclide { z, n })
    }

    pub fn weak_charge(&self) -> f64 {
        weak_charge(self.z, self.n)
    }

    pub fn mass_mev(&self) -> f64 {
        nucleus_mass_mev(self.z, self.n)
    }
}

/// A single-species crystal: what scatters, how much of it, how dense.
#[derive(Debug, Clone, Copy)]
pub struct TargetCrystal {
    pub nuclide: Nuclide,
    pub n_atoms: f64,
    pub mass_density_g_cm3: f64,
}

impl TargetCrystal {
    pub fn new(nuclide: Nuclide, n_atoms: f64, mass_density_g_cm3: f64) -> Result<Self, TargetError> {
        if !(n_atoms.is_finite() && n_atoms > 0.0) {
            return Err(TargetError::AtomCount(n_atoms));
        }
        if !(mass_density_g_cm3.is_finite() && mass_density_g_cm3 > 0.0) {
            return Err(TargetError::MassDensity(mass_density_g_cm3));
        }
        Ok(TargetCrystal {
            nuclide,
            n_atoms,
            mass_density_g_cm3,
        })
    }

    /// Bismuth-209 reference crystal of 5e21 atoms (about 1.7 g).
    pub fn bismuth_5e21() -> Self {
        TargetCrystal::new(Nuclide::new(83, 126).unwrap(), 5e21, 9.78).unwrap()
    }

    pub fn mass_g(&self) -> f64 {
        self.n_atoms * self.nuclide.mass_mev() * MEV_TO_KG * 1e3
    }

    pub fn volume_m3(&self) -> f64 {
        // g / (g/cm^3) = cm^3, then to m^3.
        self.mass_g() / self.mass_density_g_cm3 * 1e-6
    }

    /// Radius of the equivalent sphere.
    pub fn radius_m(&self) -> f64 {
        (3.0 * self.volume_m3() / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0)
    }
}

/// Reactor viewed as an isotropic point emitter of antineutrinos.
#[derive(Debug, Clone, Copy)]
pub struct ReactorSource {
    pub rate_per_gw: f64,
    pub power_gw: f64,
    pub distance_m: f64,
    pub e0_mev: f64,
    pub sigma_e_mev: f64,
}

impl ReactorSource {
    pub fn new(
        rate_per_gw: f64,
        power_gw: f64,
        distance_m: f64,
        e0_mev: f64,
        sigma_e_mev: f64,
    ) -> Result<Self, TargetError> {
        for (name, value) in [
            ("emission rate per GW", rate_per_gw),
            ("thermal power", power_gw),
            ("standoff distance", distance_m),
            ("spectrum mean energy", e0_mev),
            ("spectrum width", sigma_e_mev),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(TargetError::SourceParameter { name, value });
            }
        }
        Ok(ReactorSource {
            rate_per_gw,
            power_gw,
            distance_m,
            e0_mev,
            sigma_e_mev,
        })
    }

    /// 4.5 GW reactor at 20 m, 2e20 antineutrinos per GW-second,
    /// Gaussian spectrum centered on 2.6 MeV with 0.75 MeV width.
    pub fn gigawatt_reference() -> Self {
        ReactorSource::new(2e20, 4.5, 20.0, 2.6, 0.75).unwrap()
    }

    /// Isotropic flux at the crystal in cm^-2 s^-1.
    pub fn flux_at_detector_cm2_s(&self) -> f64 {
        let d_cm = self.distance_m * 100.0;
        self.rate_per_gw * self.power_gw / (4.0 * std::f64::consts::PI * d_cm * d_cm)
    }

    pub fn spectrum(&self) -> Result<Spectrum, TargetError> {
        Spectrum::truncated_gaussian(self.e0_mev, self.sigma_e_mev)
    }
}

/// Truncated Gaussian energy density, unit mass on its support.
///
/// Support is [max(0.05, E0 - 4 sigma), E0 + 4 sigma]; the 0.05 MeV floor
/// keeps the spectrum away from zero energy where recoil kinematics degrade.
#[derive(Debug, Clone, Copy)]
pub struct Spectrum {
    e0: f64,
    sigma: f64,
    e_lo: f64,
    e_hi: f64,
    norm: f64,
}

impl Spectrum {
    pub fn truncated_gaussian(e0_mev: f64, sigma_mev: f64) -> Result<Self, TargetError> {
        let e_lo = (e0_mev - 4.0 * sigma_mev).max(0.05);
        let e_hi = e0_mev + 4.0 * sigma_mev;
        if e_hi <= e_lo {
            return Err(TargetError::EmptySupport { lo: e_lo, hi: e_hi });
        }
        let quad = AdaptiveGl::new(32, 1e-12);
        let norm: f64 = quad.integrate(e_lo, e_hi, |e| gaussian(e, e0_mev, sigma_mev))?;
        Ok(Spectrum {
            e0: e0_mev,
            sigma: sigma_mev,
            e_lo,
            e_hi,
            norm,
        })
    }

    /// Probability density at `e_mev`; zero outside the support.
    pub fn density(&self, e_mev: f64) -> f64 {
        if e_mev < self.e_lo || e_mev > self.e_hi {
            return 0.0;
        }
        gaussian(e_mev, self.e0, self.sigma) / self.norm
    }

    pub fn support(&self) -> (f64, f64) {
        (self.e_lo, self.e_hi)
    }

    pub fn mean_mev(&self) -> f64 {
        self.e0
    }
}

fn gaussian(e: f64, e0: f64, sigma: f64) -> f64 {
    let z = (e - e0) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}
