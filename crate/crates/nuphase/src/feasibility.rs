//! Environmental decoherence budgets and apparatus sizing.
//!
//! Everything here is SI. The gas and blackbody channels bound how cold and
//! empty the vacuum chamber must be for the superposition to survive long
//! enough; the Stern-Gerlach and cavity planners size the hardware that
//! prepares and closes the superposition; the wavepacket window checks that
//! the chosen packet width is physically meaningful.

use thiserror::Error;

use crate::evolution::SuperpositionConfig;
use crate::target::TargetCrystal;
use crate::units::{C_M_S, HBAR_J_S, H_J_S, K_B, MEV_INV_TO_M, MU_0, MU_B};

/// Scattering-channel prefactor 16 pi^5 / 189 for a thermal photon bath.
pub const BLACKBODY_PREFACTOR: f64 = 25.906428341611125;

/// Nominal order-of-magnitude design figures, reported alongside the
/// computed results (which are authoritative here): wavepacket lower bound,
/// trap ground-state spread, cavity kick velocity.
pub const WAVEPACKET_LOWER_NOMINAL_M: f64 = 1e-17;
pub const GROUND_STATE_SPREAD_NOMINAL_M: f64 = 1e-16;
pub const CAVITY_KICK_NOMINAL_M_S: f64 = 1e-19;

/// Order-unity coefficients of the environmental channels, kept behind one
/// interface so literature-exact values can replace the defaults without
/// changing any call site.
#[derive(Debug, Clone, Copy)]
pub struct DecoherenceCoefficients {
    /// Multiplies the saturated gas-collision rate (1 = every collision
    /// beyond the thermal-wavelength crossover fully distinguishes).
    pub gas: f64,
    /// Blackbody channel prefactor.
    pub blackbody: f64,
}

impl Default for DecoherenceCoefficients {
    fn default() -> Self {
        DecoherenceCoefficients {
            gas: 1.0,
            blackbody: BLACKBODY_PREFACTOR,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FeasibilityError {
    #[error("unknown gas species {got:?}, expected one of He, H2, N2, Ar")]
    UnknownGas { got: String },
    #[error("{name} must be positive and finite (got {value:e})")]
    Parameter { name: &'static str, value: f64 },
    #[error("{name} must be non-negative and finite (got {value:e})")]
    NonNegative { name: &'static str, value: f64 },
    #[error("pressure and temperature grids must be non-empty")]
    EmptyGrid,
    #[error("{0} grid must be sorted ascending")]
    UnsortedGrid(&'static str),
    #[error("epsilon = -1 makes the coupling singular")]
    EpsilonSingular,
    #[error("photon number must be 0 or 1 (got {got})")]
    PhotonNumber { got: u32 },
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, FeasibilityError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(FeasibilityError::Parameter { name, value })
    }
}

fn require_non_negative(name: &'static str, value: f64) -> Result<f64, FeasibilityError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(FeasibilityError::NonNegative { name, value })
    }
}

/// Residual gases worth simulating in a cryogenic chamber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GasSpecies {
    He,
    H2,
    N2,
    Ar,
}

impl GasSpecies {
    /// Molecular mass in kg.
    pub fn mass_kg(self) -> f64 {
        match self {
            GasSpecies::He => 6.646476989051294e-27,
            GasSpecies::H2 => 3.347447493577608e-27,
            GasSpecies::N2 => 4.651734508829244e-26,
            GasSpecies::Ar => 6.63352146325368e-26,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GasSpecies::He => "He",
            GasSpecies::H2 => "H2",
            GasSpecies::N2 => "N2",
            GasSpecies::Ar => "Ar",
        }
    }
}

impl std::str::FromStr for GasSpecies {
    type Err = FeasibilityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "He" => Ok(GasSpecies::He),
            "H2" => Ok(GasSpecies::H2),
            "N2" => Ok(GasSpecies::N2),
            "Ar" => Ok(GasSpecies::Ar),
            other => Err(FeasibilityError::UnknownGas { got: other.to_string() }),
        }
    }
}

/// Chamber conditions around the crystal.
#[derive(Debug, Clone, Copy)]
pub struct Environment {
    pub pressure_pa: f64,
    pub temperature_k: f64,
    pub gas_mass_kg: f64,
    /// Im[(eps - 1)/(eps + 2)] of the crystal at thermal photon frequencies.
    pub im_eps_response: f64,
}

impl Environment {
    pub fn new(
        pressure_pa: f64,
        temperature_k: f64,
        gas_mass_kg: f64,
        im_eps_response: f64,
    ) -> Result<Self, FeasibilityError> {
        require_non_negative("pressure", pressure_pa)?;
        require_positive("temperature", temperature_k)?;
        require_positive("gas molecular mass", gas_mass_kg)?;
        require_non_negative("dielectric response", im_eps_response)?;
        Ok(Environment {
            pressure_pa,
            temperature_k,
            gas_mass_kg,
            im_eps_response,
        })
    }

    pub fn with_species(
        pressure_pa: f64,
        temperature_k: f64,
        gas: GasSpecies,
        im_eps_response: f64,
    ) -> Result<Self, FeasibilityError> {
        Environment::new(pressure_pa, temperature_k, gas.mass_kg(), im_eps_response)
    }
}

/// Collisional decoherence rate in 1/s with default coefficients.
///
/// Below the thermal de Broglie wavelength each collision only partially
/// distinguishes the branches, suppressing the raw collision rate by
/// (dx / lambda_th)^2; past the crossover every collision counts.
pub fn gas_decoherence_rate(env: &Environment, target: &TargetCrystal, delta_x_m: f64) -> f64 {
    gas_decoherence_rate_with(env, target, delta_x_m, &DecoherenceCoefficients::default())
}

pub fn gas_decoherence_rate_with(
    env: &Environment,
    target: &TargetCrystal,
    delta_x_m: f64,
    coeffs: &DecoherenceCoefficients,
) -> f64 {
    if env.pressure_pa == 0.0 {
        return 0.0;
    }
    let n = env.pressure_pa / (K_B * env.temperature_k);
    let v_mean = (8.0 * K_B * env.temperature_k / (std::f64::consts::PI * env.gas_mass_kg)).sqrt();
    let lambda_th = H_J_S / (2.0 * std::f64::consts::PI * env.gas_mass_kg * K_B * env.temperature_k).sqrt();
    let r = target.radius_m();
    let collision_rate = n * v_mean * std::f64::consts::PI * r * r;
    let ratio = delta_x_m / lambda_th;
    coeffs.gas * collision_rate * (ratio * ratio).min(1.0)
}

/// Thermal-photon scattering decoherence rate in 1/s with default coefficients.
pub fn blackbody_decoherence_rate(env: &Environment, target: &TargetCrystal, delta_x_m: f64) -> f64 {
    blackbody_decoherence_rate_with(env, target, delta_x_m, &DecoherenceCoefficients::default())
}

pub fn blackbody_decoherence_rate_with(
    env: &Environment,
    target: &TargetCrystal,
    delta_x_m: f64,
    coeffs: &DecoherenceCoefficients,
) -> f64 {
    let kt_over_hbar_c = K_B * env.temperature_k / (HBAR_J_S * C_M_S);
    coeffs.blackbody
        * C_M_S
        * target.volume_m3()
        * kt_over_hbar_c.powi(6)
        * env.im_eps_response
        * delta_x_m
        * delta_x_m
}

/// One pressure-temperature cell of the survey.
#[derive(Debug, Clone, Copy)]
pub struct PtCell {
    pub pressure_pa: f64,
    pub temperature_k: f64,
    pub gas_rate: f64,
    pub bb_rate: f64,
    pub coherence_time_s: f64,
    pub allowed: bool,
}

#[derive(Debug, Clone)]
pub struct PtScan {
    /// Row-major: pressure varies slowest, temperature fastest.
    pub cells: Vec<PtCell>,
    pub n_p: usize,
    pub n_t: usize,
}

/// Survey the environmental rates over a pressure-temperature grid and mark
/// which cells keep the total coherence time above `tau_target_s`.
pub fn pt_region_scan(
    target: &TargetCrystal,
    delta_x_m: f64,
    tau_target_s: f64,
    p_grid: &[f64],
    t_grid: &[f64],
    gas_mass_kg: f64,
    im_eps_response: f64,
) -> Result<PtScan, FeasibilityError> {
    require_positive("branch separation", delta_x_m)?;
    require_positive("coherence time target", tau_target_s)?;
    if p_grid.is_empty() || t_grid.is_empty() {
        return Err(FeasibilityError::EmptyGrid);
    }
    for &p in p_grid {
        require_non_negative("pressure", p)?;
    }
    for &t in t_grid {
        require_positive("temperature", t)?;
    }
    if p_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(FeasibilityError::UnsortedGrid("pressure"));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(FeasibilityError::UnsortedGrid("temperature"));
    }
    let mut cells = Vec::with_capacity(p_grid.len() * t_grid.len());
    for &p in p_grid {
        for &t in t_grid {
            let env = Environment::new(p, t, gas_mass_kg, im_eps_response)?;
            let gas_rate = gas_decoherence_rate(&env, target, delta_x_m);
            let bb_rate = blackbody_decoherence_rate(&env, target, delta_x_m);
            let total = gas_rate + bb_rate;
            let coherence_time_s = if total > 0.0 { 1.0 / total } else { f64::INFINITY };
            cells.push(PtCell {
                pressure_pa: p,
                temperature_k: t,
                gas_rate,
                bb_rate,
                coherence_time_s,
                allowed: coherence_time_s >= tau_target_s,
            });
        }
    }
    Ok(PtScan {
        cells,
        n_p: p_grid.len(),
        n_t: t_grid.len(),
    })
}

/// Physical bounds on the wavepacket width for a given crystal and split.
#[derive(Debug, Clone, Copy)]
pub struct WavepacketWindow {
    pub lower_m: f64,
    /// Nominal order-of-magnitude lower bound, reported alongside the
    /// computed one; they disagree by about a decade for heavy nuclides.
    pub lower_nominal_m: f64,
    pub upper_m: f64,
    pub ok: bool,
}

/// The packet must be wider than the crystal's reduced Compton wavelength
/// and narrower than the branch separation. `ok` uses the computed bound.
pub fn wavepacket_window(target: &TargetCrystal, cfg: &SuperpositionConfig) -> WavepacketWindow {
    let lower_m = MEV_INV_TO_M / target.nuclide.mass_mev();
    let upper_m = cfg.delta_x_m;
    WavepacketWindow {
        lower_m,
        lower_nominal_m: WAVEPACKET_LOWER_NOMINAL_M,
        upper_m,
        ok: cfg.sigma_c_m >= lower_m && cfg.sigma_c_m <= upper_m,
    }
}

/// Longitudinal coherence length of a neutrino with fractional energy
/// spread `energy_spread_fraction` at energy `e_mev`, in meters.
pub fn neutrino_coherence_width(energy_spread_fraction: f64, e_mev: f64) -> Result<f64, FeasibilityError> {
    require_positive("energy spread fraction", energy_spread_fraction)?;
    require_positive("neutrino energy", e_mev)?;
    Ok(MEV_INV_TO_M / (2.0 * energy_spread_fraction * e_mev))
}

/// Whether a probe of the given coherence width can tell the branches apart
/// on its own (a which-path hazard, not a contributor to the signal).
pub fn resolves_separation(coherence_width_m: f64, delta_x_m: f64) -> bool {
    coherence_width_m < delta_x_m
}

/// Magnetic splitting stage: gradient pulse, ballistic flight, recombination.
#[derive(Debug, Clone, Copy)]
pub struct SternGerlachPlan {
    pub gradient_t_per_m: f64,
    pub accel_time_s: f64,
    pub mass_kg: f64,
    pub free_time_s: f64,
    /// Mass magnetic susceptibility in m^3/kg.
    pub chi_mass_m3_kg: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SternGerlachDesign {
    pub velocity_m_s: f64,
    pub delta_x_m: f64,
    pub trap_frequency_rad_s: f64,
    pub ground_state_spread_m: f64,
}

/// Separation and trap scales of a gradient-pulse splitter.
///
/// Zero acceleration or flight time is a degenerate but valid plan (no
/// split); gradient, mass, and susceptibility must be strictly positive.
pub fn stern_gerlach_design(plan: &SternGerlachPlan) -> Result<SternGerlachDesign, FeasibilityError> {
    require_positive("field gradient", plan.gradient_t_per_m)?;
    require_non_negative("acceleration time", plan.accel_time_s)?;
    require_positive("crystal mass", plan.mass_kg)?;
    require_non_negative("free flight time", plan.free_time_s)?;
    require_positive("magnetic susceptibility", plan.chi_mass_m3_kg)?;
    let velocity_m_s = MU_B * plan.gradient_t_per_m * plan.accel_time_s / plan.mass_kg;
    let delta_x_m = 2.0 * velocity_m_s * plan.free_time_s;
    let trap_frequency_rad_s = (plan.chi_mass_m3_kg / MU_0).sqrt() * plan.gradient_t_per_m;
    Ok(SternGerlachDesign {
        velocity_m_s,
        delta_x_m,
        trap_frequency_rad_s,
        ground_state_spread_m: ground_state_spread_m(plan.mass_kg, trap_frequency_rad_s),
    })
}

/// Zero-point position spread of a mass in a harmonic trap.
pub fn ground_state_spread_m(mass_kg: f64, omega_rad_s: f64) -> f64 {
    (HBAR_J_S / (2.0 * mass_kg * omega_rad_s)).sqrt()
}

/// Optomechanical closing kick: a single photon in a driven cavity.
#[derive(Debug, Clone, Copy)]
pub struct CavityPlan {
    pub crystal_volume_m3: f64,
    pub cavity_volume_m3: f64,
    pub epsilon: f64,
    pub omega_l_rad_s: f64,
    pub t_kick_s: f64,
    pub n_photon: u32,
    pub mass_kg: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CavityKickDesign {
    pub g_rad_s: f64,
    pub v_kick_m_s: f64,
}

/// Coupling and momentum kick of the cavity stage.
pub fn cavity_kick_design(plan: &CavityPlan) -> Result<CavityKickDesign, FeasibilityError> {
    require_positive("crystal volume", plan.crystal_volume_m3)?;
    require_positive("cavity mode volume", plan.cavity_volume_m3)?;
    require_positive("drive frequency", plan.omega_l_rad_s)?;
    require_positive("kick duration", plan.t_kick_s)?;
    require_positive("crystal mass", plan.mass_kg)?;
    if !plan.epsilon.is_finite() || plan.epsilon == -1.0 {
        return Err(FeasibilityError::EpsilonSingular);
    }
    if plan.n_photon > 1 {
        return Err(FeasibilityError::PhotonNumber { got: plan.n_photon });
    }
    let g_rad_s = 0.75 * (plan.crystal_volume_m3 / plan.cavity_volume_m3)
        * ((plan.epsilon - 1.0) / (plan.epsilon + 1.0))
        * plan.omega_l_rad_s;
    let v_kick_m_s = HBAR_J_S * g_rad_s * (plan.omega_l_rad_s / C_M_S) * plan.n_photon as f64
        * plan.t_kick_s
        / plan.mass_kg;
    Ok(CavityKickDesign { g_rad_s, v_kick_m_s })
}
