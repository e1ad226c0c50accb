//! Coherent elastic neutrino-nucleus scattering on a heavy spin-0 nucleus.
//!
//! The nucleus is treated as pointlike (form factor 1); momentum transfers
//! at reactor energies are a few MeV against ~100 MeV^-1 nuclear sizes, so
//! the correction is far below the other tolerances used here. The model is
//! capped at 50 MeV neutrino energy, beyond which that approximation and
//! full coherence stop being defensible.

use std::cell::Cell;

use thiserror::Error;

use crate::quadrature::{AdaptiveGl, QuadratureError};
use crate::target::{Spectrum, TargetCrystal};
use crate::units::{G_F, MEV_INV2_TO_CM2};

/// Upper edge of the model's validity in neutrino energy.
pub const E_NU_MAX_MEV: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum CennsError {
    #[error("neutrino energy {e_mev} MeV outside (0, {max}] MeV", max = E_NU_MAX_MEV)]
    EnergyRange { e_mev: f64 },
    #[error("scattering angle {theta} rad outside [0, pi]")]
    AngleRange { theta: f64 },
    #[error("recoil energy {t:e} MeV outside [0, {t_max:e}] MeV")]
    RecoilRange { t: f64, t_max: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Two-body elastic kinematics for a neutrino on a nucleus at rest.
#[derive(Debug, Clone, Copy)]
pub struct RecoilKinematics {
    pub e_nu_mev: f64,
    pub m_nucl_mev: f64,
}

impl RecoilKinematics {
    pub fn new(e_nu_mev: f64, m_nucl_mev: f64) -> Result<Self, CennsError> {
        if !(e_nu_mev.is_finite() && e_nu_mev > 0.0 && e_nu_mev <= E_NU_MAX_MEV) {
            return Err(CennsError::EnergyRange { e_mev: e_nu_mev });
        }
        assert!(m_nucl_mev > 0.0, "nuclear mass must be positive");
        Ok(RecoilKinematics { e_nu_mev, m_nucl_mev })
    }

    /// Recoil energy at nuclear recoil angle `theta_r` in [0, pi/2].
    pub fn recoil_energy(&self, theta_r: f64) -> Result<f64, CennsError> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta_r) {
            return Err(CennsError::AngleRange { theta: theta_r });
        }
        let (e, m) = (self.e_nu_mev, self.m_nucl_mev);
        let c = theta_r.cos();
        Ok(2.0 * m * e * e * c * c / ((m + e) * (m + e) - e * e * c * c))
    }

    /// Endpoint recoil energy 2E^2/(m + 2E).
    pub fn t_max(&self) -> f64 {
        let (e, m) = (self.e_nu_mev, self.m_nucl_mev);
        2.0 * e * e / (m + 2.0 * e)
    }
}

/// Coherent cross section and squared amplitude for one nuclide.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringAmplitudeModel {
    pub q_w: f64,
    pub m_nucl_mev: f64,
}

impl ScatteringAmplitudeModel {
    pub fn for_crystal(crystal: &TargetCrystal) -> Self {
        ScatteringAmplitudeModel {
            q_w: crystal.nuclide.weak_charge(),
            m_nucl_mev: crystal.nuclide.mass_mev(),
        }
    }

    fn check_energy(&self, e_mev: f64) -> Result<(), CennsError> {
        if !(e_mev.is_finite() && e_mev > 0.0 && e_mev <= E_NU_MAX_MEV) {
            return Err(CennsError::EnergyRange { e_mev });
        }
        Ok(())
    }

    /// G_F^2 Q_W^2 m / 4pi, the factor multiplying the recoil bracket.
    fn dsigma_prefactor(&self) -> f64 {
        G_F * G_F * self.q_w * self.q_w * self.m_nucl_mev / (4.0 * std::f64::consts::PI)
    }

    /// Recoil shape 1 - T/E - mT/(2E^2); linear in T, zero exactly at T_max.
    fn bracket(&self, e: f64, t: f64) -> f64 {
        1.0 - t / e - self.m_nucl_mev * t / (2.0 * e * e)
    }

    /// Differential cross section dsigma/dT in MeV^-3.
    ///
    /// `t_mev` may overshoot T_max by one part in 1e9 to absorb roundoff in
    /// callers that compute T_max themselves; the bracket is clamped at zero.
    pub fn dsigma_dt(&self, e_mev: f64, t_mev: f64) -> Result<f64, CennsError> {
        self.check_energy(e_mev)?;
        let t_max = RecoilKinematics::new(e_mev, self.m_nucl_mev)?.t_max();
        if !(t_mev.is_finite() && t_mev >= 0.0 && t_mev <= t_max * (1.0 + 1e-9)) {
            return Err(CennsError::RecoilRange { t: t_mev, t_max });
        }
        Ok(self.dsigma_prefactor() * self.bracket(e_mev, t_mev).max(0.0))
    }

    /// Total cross section in MeV^-2 by recoil-energy quadrature.
    pub fn sigma_total_mev2(&self, e_mev: f64) -> Result<f64, CennsError> {
        Ok(self.sigma_total_with_clamp_count(e_mev)?.0)
    }

    /// Total cross section plus the number of integrand evaluations whose
    /// recoil bracket went negative from roundoff (diagnostic only).
    pub fn sigma_total_with_clamp_count(&self, e_mev: f64) -> Result<(f64, u64), CennsError> {
        self.check_energy(e_mev)?;
        let t_max = RecoilKinematics::new(e_mev, self.m_nucl_mev)?.t_max();
        let clamps = Cell::new(0u64);
        let quad = AdaptiveGl::new(16, 1e-12);
        let pref = self.dsigma_prefactor();
        let sigma: f64 = quad.integrate(0.0, t_max, |t| {
            let b = self.bracket(e_mev, t);
            if b < 0.0 {
                clamps.set(clamps.get() + 1);
            }
            pref * b.max(0.0)
        })?;
        Ok((sigma, clamps.get()))
    }

    pub fn sigma_total_cm2(&self, e_mev: f64) -> Result<f64, CennsError> {
        Ok(self.sigma_total_mev2(e_mev)? * MEV_INV2_TO_CM2)
    }

    /// Squared matrix element at scattering angle `theta` in [0, pi].
    ///
    /// Normalized so that integrating over solid angle with the standard
    /// 1/(64 pi^2 m^2) phase-space factor reproduces the total cross section
    /// up to the recoil factor m/(m + 2E).
    pub fn amplitude_sq(&self, e_mev: f64, theta: f64) -> Result<f64, CennsError> {
        self.check_energy(e_mev)?;
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(CennsError::AngleRange { theta });
        }
        Ok(self.amplitude_sq_costheta(e_mev, theta.cos()))
    }

    /// Unchecked hot-path form of `amplitude_sq` in the scattering cosine.
    pub(crate) fn amplitude_sq_costheta(&self, e_mev: f64, cos_theta: f64) -> f64 {
        let gqme = G_F * self.q_w * self.m_nucl_mev * e_mev;
        4.0 * gqme * gqme * (1.0 + cos_theta)
    }

    /// Flux-weighted total cross section over a source spectrum, in cm^2.
    pub fn spectrum_averaged_sigma_cm2(&self, spectrum: &Spectrum) -> Result<f64, CennsError> {
        let (lo, hi) = spectrum.support();
        if hi > E_NU_MAX_MEV {
            return Err(CennsError::EnergyRange { e_mev: hi });
        }
        let quad = AdaptiveGl::new(32, 1e-10);
        let avg = quad.try_integrate(lo, hi, |e| {
            let sigma = self
                .sigma_total_mev2(e)
                .expect("support already validated");
            Ok(spectrum.density(e) * sigma)
        })?;
        Ok(avg * MEV_INV2_TO_CM2)
    }
}
