//! Coherence dynamics of a two-branch superposition under a scattering flux.
//!
//! Each scatterer that deflects off the crystal entangles slightly with the
//! branch coordinate. Summing over the incident spectrum and all scattering
//! directions gives one complex number per unit time: its real part damps
//! the off-diagonal density-matrix element, its imaginary part advances the
//! relative phase. Both follow from the same solid-angle integral over
//! |M|^2 (1 - e^{-i q_x dx}), where q_x is the momentum-transfer component
//! along the separation axis.
//!
//! Geometry: the branch separation defines the x axis; the incident beam
//! arrives at angle `beam_angle_rad` from it, so
//! q_x = E [cos(beta) (1 - cos(theta)) + sin(beta) sin(theta) cos(phi)].
//!
//! The cos(theta) integral is seeded with enough panels to resolve the known
//! phase span 2 E dx (cos beta + sin beta) before the usual panel doubling,
//! and the azimuth is handled by an equally-spaced periodic rule whose node
//! count grows with the oscillation scale z = E dx sin(beta) sin(theta).
//! Off-axis beams at separations near saturation are therefore expensive;
//! the axis-aligned default collapses the azimuth to a single node.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::cenns::{CennsError, ScatteringAmplitudeModel, E_NU_MAX_MEV};
use crate::quadrature::{AdaptiveGl, QuadratureError};
use crate::target::{ReactorSource, TargetCrystal, TargetError};
use crate::units::{MEV_INV2_TO_CM2, MEV_INV_TO_M};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("branch separation must be positive and finite (got {0:e} m)")]
    BranchSeparation(f64),
    #[error("wavepacket width must satisfy 0 < sigma_c <= delta_x (got sigma_c {sigma_c:e} m against delta_x {delta_x:e} m)")]
    WavepacketWidth { sigma_c: f64, delta_x: f64 },
    #[error("beam angle must lie in [0, pi/2] (got {0} rad)")]
    BeamAngle(f64),
    #[error("quadrature rules need at least 2 nodes per panel (got theta {n_theta}, energy {n_energy})")]
    QuadratureNodes { n_theta: usize, n_energy: usize },
    #[error("relative tolerance must lie in (0, 1) (got {0:e})")]
    Tolerance(f64),
    #[error("unknown prefactor convention {got:?}, expected \"paper\" or \"unit\"")]
    UnknownConvention { got: String },
    #[error("spectrum support reaches {e_hi} MeV, beyond the {max} MeV validity cap", max = E_NU_MAX_MEV)]
    SpectrumBeyondValidity { e_hi: f64 },
    #[error("time grid must be non-empty, strictly increasing, and start at 0")]
    TimeGrid,
    #[error("time {t:e} s outside the trajectory span [0, {t_end:e}] s")]
    TimeOutsideTrajectory { t: f64, t_end: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Source(#[from] TargetError),
    #[error(transparent)]
    Scattering(#[from] CennsError),
}

/// Overall factor applied to the complex rate.
///
/// `Doubled` (the "paper" setting) counts both exchange orderings of the
/// environment coupling and is the default; `Unit` omits the factor of two
/// so alternative normalizations can be compared side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefactorConvention {
    Doubled,
    Unit,
}

impl PrefactorConvention {
    pub fn kappa(self) -> f64 {
        match self {
            PrefactorConvention::Doubled => 2.0,
            PrefactorConvention::Unit => 1.0,
        }
    }
}

impl FromStr for PrefactorConvention {
    type Err = EvolutionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(PrefactorConvention::Doubled),
            "unit" => Ok(PrefactorConvention::Unit),
            other => Err(EvolutionError::UnknownConvention { got: other.to_string() }),
        }
    }
}

impl fmt::Display for PrefactorConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrefactorConvention::Doubled => "paper",
            PrefactorConvention::Unit => "unit",
        })
    }
}

/// Two-branch superposition: separation, wavepacket width, beam angle.
#[derive(Debug, Clone, Copy)]
pub struct SuperpositionConfig {
    pub delta_x_m: f64,
    pub sigma_c_m: f64,
    pub beam_angle_rad: f64,
}

impl SuperpositionConfig {
    pub fn new(delta_x_m: f64, sigma_c_m: f64, beam_angle_rad: f64) -> Result<Self, EvolutionError> {
        let cfg = SuperpositionConfig {
            delta_x_m,
            sigma_c_m,
            beam_angle_rad,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        if !(self.delta_x_m.is_finite() && self.delta_x_m > 0.0) {
            return Err(EvolutionError::BranchSeparation(self.delta_x_m));
        }
        if !(self.sigma_c_m.is_finite() && self.sigma_c_m > 0.0 && self.sigma_c_m <= self.delta_x_m) {
            return Err(EvolutionError::WavepacketWidth {
                sigma_c: self.sigma_c_m,
                delta_x: self.delta_x_m,
            });
        }
        if !(self.beam_angle_rad.is_finite()
            && (0.0..=std::f64::consts::FRAC_PI_2).contains(&self.beam_angle_rad))
        {
            return Err(EvolutionError::BeamAngle(self.beam_angle_rad));
        }
        Ok(())
    }
}

/// Node counts and tolerance for the rate integrals.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    pub n_theta: usize,
    pub n_energy: usize,
    pub rel_tol: f64,
    /// Rotates the azimuthal node set; the integral must not depend on it.
    pub azimuthal_offset_rad: f64,
}

impl QuadratureSettings {
    pub fn new(n_theta: usize, n_energy: usize, rel_tol: f64) -> Result<Self, EvolutionError> {
        let settings = QuadratureSettings {
            n_theta,
            n_energy,
            rel_tol,
            azimuthal_offset_rad: 0.0,
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn with_azimuthal_offset(mut self, offset_rad: f64) -> Self {
        self.azimuthal_offset_rad = offset_rad;
        self
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        if self.n_theta < 2 || self.n_energy < 2 {
            return Err(EvolutionError::QuadratureNodes {
                n_theta: self.n_theta,
                n_energy: self.n_energy,
            });
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(EvolutionError::Tolerance(self.rel_tol));
        }
        Ok(())
    }
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            n_theta: 64,
            n_energy: 32,
            rel_tol: 1e-8,
            azimuthal_offset_rad: 0.0,
        }
    }
}

/// Damping and phase accumulation per second of exposure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRate {
    pub decay_per_s: f64,
    pub phase_rate_rad_per_s: f64,
}

/// Relative phase q dx picked up between branches separated by `delta_x_m`
/// for momentum transfer component `q_x_mev` along the separation axis.
pub fn branch_phase_difference(q_x_mev: f64, delta_x_m: f64) -> f64 {
    q_x_mev * delta_x_m / MEV_INV_TO_M
}

/// Phase and envelope factor of a momentum kick on a Gaussian wavepacket
/// centered at `x_bar_m` with width `sigma_c_m`: the kick displaces the
/// phase by -q x_bar and is suppressed by exp(-(q sigma_c)^2 / 2).
pub fn gaussian_kick(q_x_mev: f64, x_bar_m: f64, sigma_c_m: f64) -> (f64, f64) {
    let q_xbar = q_x_mev * x_bar_m / MEV_INV_TO_M;
    let q_sigma = q_x_mev * sigma_c_m / MEV_INV_TO_M;
    (-q_xbar, (-0.5 * q_sigma * q_sigma).exp())
}

#[derive(Clone, Copy)]
struct BeamGeometry {
    cos_beta: f64,
    sin_beta: f64,
}

impl BeamGeometry {
    fn new(beam_angle_rad: f64) -> Self {
        BeamGeometry {
            cos_beta: beam_angle_rad.cos(),
            sin_beta: beam_angle_rad.sin(),
        }
    }
}

/// Equally spaced periodic mean of (1 - cos x, sin x) with x = base + z cos(phi).
fn azimuthal_mean(base: f64, z: f64, offset: f64) -> Complex64 {
    if z == 0.0 {
        return Complex64::new(1.0 - base.cos(), base.sin());
    }
    // Node count past the oscillation scale; the periodic rule converges
    // superexponentially once n exceeds z.
    let n_phi = (z + 10.0 * z.cbrt() + 16.0).ceil() as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n_phi {
        let phi = offset + std::f64::consts::TAU * (j as f64 + 0.5) / n_phi as f64;
        let x = base + z * phi.cos();
        acc += Complex64::new(1.0 - x.cos(), x.sin());
    }
    acc / n_phi as f64
}

/// Solid-angle integral of |M|^2 (1 - e^{-i q_x dx}) at one energy.
fn angular_factor(
    model: &ScatteringAmplitudeModel,
    e_mev: f64,
    dx_nat: f64,
    beam: BeamGeometry,
    theta_quad: &AdaptiveGl,
    offset: f64,
) -> Result<Complex64, QuadratureError> {
    let e_dx = e_mev * dx_nat;
    let span = 2.0 * e_dx * (beam.cos_beta + beam.sin_beta);
    let panels = ((span / 70.0).ceil() as usize).max(1);
    let quad = theta_quad.clone().with_initial_panels(panels);
    let integral: Complex64 = quad.integrate(-1.0, 1.0, |c| {
        let amp = model.amplitude_sq_costheta(e_mev, c);
        let base = e_dx * beam.cos_beta * (1.0 - c);
        let z = e_dx * beam.sin_beta * (1.0 - c * c).max(0.0).sqrt();
        azimuthal_mean(base, z, offset) * amp
    })?;
    Ok(integral * std::f64::consts::TAU)
}

fn assemble_rate(
    model: &ScatteringAmplitudeModel,
    flux_cm2_s: f64,
    n_atoms: f64,
    convention: PrefactorConvention,
    integral: Complex64,
) -> ComplexRate {
    let m = model.m_nucl_mev;
    let prefactor = convention.kappa() * flux_cm2_s * n_atoms * MEV_INV2_TO_CM2
        / (64.0 * std::f64::consts::PI * std::f64::consts::PI * m * m);
    ComplexRate {
        decay_per_s: prefactor * integral.re,
        phase_rate_rad_per_s: prefactor * integral.im,
    }
}

/// Spectrum-weighted complex rate for a source, crystal, and superposition.
pub fn complex_rate(
    model: &ScatteringAmplitudeModel,
    source: &ReactorSource,
    target: &TargetCrystal,
    cfg: &SuperpositionConfig,
    quad: &QuadratureSettings,
    convention: PrefactorConvention,
) -> Result<ComplexRate, EvolutionError> {
    cfg.validate()?;
    quad.validate()?;
    let spectrum = source.spectrum()?;
    let (lo, hi) = spectrum.support();
    if hi > E_NU_MAX_MEV {
        return Err(EvolutionError::SpectrumBeyondValidity { e_hi: hi });
    }
    let flux = source.flux_at_detector_cm2_s();
    let dx_nat = cfg.delta_x_m / MEV_INV_TO_M;
    let beam = BeamGeometry::new(cfg.beam_angle_rad);
    // Inner tolerance is tightened so angular noise cannot stall the
    // energy-level convergence comparison.
    let theta_quad = AdaptiveGl::new(quad.n_theta, quad.rel_tol * 0.1);
    let energy_quad = AdaptiveGl::new(quad.n_energy, quad.rel_tol);
    let integral: Complex64 = energy_quad.try_integrate(lo, hi, |e| {
        let i_e = angular_factor(model, e, dx_nat, beam, &theta_quad, quad.azimuthal_offset_rad)?;
        Ok(i_e * spectrum.density(e))
    })?;
    Ok(assemble_rate(model, flux, target.n_atoms, convention, integral))
}

/// Complex rate for a single neutrino energy instead of a spectrum.
pub fn complex_rate_monochromatic(
    model: &ScatteringAmplitudeModel,
    flux_cm2_s: f64,
    n_atoms: f64,
    cfg: &SuperpositionConfig,
    e_mev: f64,
    quad: &QuadratureSettings,
    convention: PrefactorConvention,
) -> Result<ComplexRate, EvolutionError> {
    cfg.validate()?;
    quad.validate()?;
    if !(e_mev.is_finite() && e_mev > 0.0 && e_mev <= E_NU_MAX_MEV) {
        return Err(CennsError::EnergyRange { e_mev }.into());
    }
    let dx_nat = cfg.delta_x_m / MEV_INV_TO_M;
    let beam = BeamGeometry::new(cfg.beam_angle_rad);
    let theta_quad = AdaptiveGl::new(quad.n_theta, quad.rel_tol * 0.1);
    let integral = angular_factor(model, e_mev, dx_nat, beam, &theta_quad, quad.azimuthal_offset_rad)?;
    Ok(assemble_rate(model, flux_cm2_s, n_atoms, convention, integral))
}

/// Closed-form coherence history on an explicit time grid.
///
/// The off-diagonal element starts at 1/2 (equal-weight branches) and
/// evolves as A(t) = (1/2) e^{-decay t}, phi(t) = phase_rate t.
#[derive(Debug, Clone)]
pub struct CoherenceTrajectory {
    times_s: Vec<f64>,
    amplitude: Vec<f64>,
    phase_rad: Vec<f64>,
    a0: f64,
    decay_per_s: f64,
    phase_rate_rad_per_s: f64,
}

pub fn evolve_coherence(rate: &ComplexRate, t_grid: &[f64]) -> Result<CoherenceTrajectory, EvolutionError> {
    if t_grid.is_empty() || t_grid[0] != 0.0 {
        return Err(EvolutionError::TimeGrid);
    }
    // Strictly increasing and free of NaN: a pairwise Greater ordering is
    // required, so any incomparable entry also fails.
    if t_grid
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(EvolutionError::TimeGrid);
    }
    let a0 = 0.5;
    let amplitude = t_grid.iter().map(|&t| a0 * (-rate.decay_per_s * t).exp()).collect();
    let phase_rad = t_grid.iter().map(|&t| rate.phase_rate_rad_per_s * t).collect();
    Ok(CoherenceTrajectory {
        times_s: t_grid.to_vec(),
        amplitude,
        phase_rad,
        a0,
        decay_per_s: rate.decay_per_s,
        phase_rate_rad_per_s: rate.phase_rate_rad_per_s,
    })
}

impl CoherenceTrajectory {
    pub fn times_s(&self) -> &[f64] {
        &self.times_s
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phases_rad(&self) -> &[f64] {
        &self.phase_rad
    }

    pub fn t_end(&self) -> f64 {
        *self.times_s.last().expect("trajectory grids are non-empty")
    }

    pub fn decay_per_s(&self) -> f64 {
        self.decay_per_s
    }

    pub fn phase_rate_rad_per_s(&self) -> f64 {
        self.phase_rate_rad_per_s
    }

    fn check_span(&self, t_s: f64) -> Result<(), EvolutionError> {
        if !(t_s.is_finite() && (0.0..=self.t_end()).contains(&t_s)) {
            return Err(EvolutionError::TimeOutsideTrajectory {
                t: t_s,
                t_end: self.t_end(),
            });
        }
        Ok(())
    }

    /// Coherence amplitude at any time inside the grid span.
    pub fn amplitude_at(&self, t_s: f64) -> Result<f64, EvolutionError> {
        self.check_span(t_s)?;
        Ok(self.a0 * (-self.decay_per_s * t_s).exp())
    }

    /// Accumulated relative phase at any time inside the grid span.
    pub fn phase_at(&self, t_s: f64) -> Result<f64, EvolutionError> {
        self.check_span(t_s)?;
        Ok(self.phase_rate_rad_per_s * t_s)
    }
}
