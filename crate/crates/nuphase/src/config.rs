//! Run configuration: flat `section.key = value` text over built-in defaults.
//!
//! Later assignments override earlier ones, so command-line overrides can be
//! appended to file content before parsing. Unknown keys are collected and
//! reported all at once with their line numbers.

use thiserror::Error;

use crate::evolution::{EvolutionError, PrefactorConvention, QuadratureSettings, SuperpositionConfig};
use crate::feasibility::{Environment, FeasibilityError, GasSpecies};
use crate::target::{Nuclide, ReactorSource, TargetCrystal, TargetError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `section.key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: bad value {value:?} for {key}: {why}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        why: String,
    },
    #[error("unknown configuration keys: {0}")]
    UnknownKeys(String),
    #[error("evolve.n_points must be at least 2 (got {0})")]
    GridPoints(usize),
    #[error("evolve.t_max_s must be positive and finite (got {0:e})")]
    GridSpan(f64),
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
}

/// Every knob of a run, initialized to the reference scenario: a 5e21-atom
/// Bi-209 crystal split by 1e-14 m, 20 m from a 4.5 GW reactor, in a 1 K
/// chamber at 1e-16 Pa of helium.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target_z: u32,
    pub target_n: u32,
    pub target_n_atoms: f64,
    pub target_density_g_cm3: f64,
    pub source_power_gw: f64,
    pub source_distance_m: f64,
    pub source_rate_per_gw: f64,
    pub source_e0_mev: f64,
    pub source_sigma_e_mev: f64,
    pub superposition_dx_m: f64,
    pub superposition_sigma_c_m: f64,
    pub superposition_beam_angle_rad: f64,
    pub evolve_t_max_s: f64,
    pub evolve_n_points: usize,
    pub evolve_convention: PrefactorConvention,
    pub env_p_pa: f64,
    pub env_t_k: f64,
    pub env_gas: GasSpecies,
    pub env_im_eps_bb: f64,
    pub quad_n_theta: usize,
    pub quad_n_energy: usize,
    pub quad_rel_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            target_z: 83,
            target_n: 126,
            target_n_atoms: 5e21,
            target_density_g_cm3: 9.78,
            source_power_gw: 4.5,
            source_distance_m: 20.0,
            source_rate_per_gw: 2e20,
            source_e0_mev: 2.6,
            source_sigma_e_mev: 0.75,
            superposition_dx_m: 1e-14,
            superposition_sigma_c_m: 1e-16,
            superposition_beam_angle_rad: 0.0,
            evolve_t_max_s: 3e5,
            evolve_n_points: 301,
            evolve_convention: PrefactorConvention::Doubled,
            env_p_pa: 1e-16,
            env_t_k: 1.0,
            env_gas: GasSpecies::He,
            env_im_eps_bb: 0.1,
            quad_n_theta: 64,
            quad_n_energy: 32,
            quad_rel_tol: 1e-8,
        }
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let bad = |why: String| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        why,
    };
    let x: f64 = value.parse().map_err(|e| bad(format!("{e}")))?;
    if !x.is_finite() {
        return Err(bad("value must be finite".to_string()));
    }
    Ok(x)
}

fn parse_int<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        why: format!("{e}"),
    })
}

/// Parse configuration text on top of the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_over(RunConfig::default(), text)
}

/// Parse configuration text on top of an existing configuration.
pub fn parse_config_over(mut cfg: RunConfig, text: &str) -> Result<RunConfig, ConfigError> {
    let mut unknown: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line,
            text: content.to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::Malformed {
                line,
                text: content.to_string(),
            });
        }
        let enum_err = |e: String| ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
            why: e,
        };
        match key {
            "target.Z" => cfg.target_z = parse_int(line, key, value)?,
            "target.N" => cfg.target_n = parse_int(line, key, value)?,
            "target.n_atoms" => cfg.target_n_atoms = parse_f64(line, key, value)?,
            "target.density_g_cm3" => cfg.target_density_g_cm3 = parse_f64(line, key, value)?,
            "source.power_GW" => cfg.source_power_gw = parse_f64(line, key, value)?,
            "source.distance_m" => cfg.source_distance_m = parse_f64(line, key, value)?,
            "source.rate_per_GW" => cfg.source_rate_per_gw = parse_f64(line, key, value)?,
            "source.E0_MeV" => cfg.source_e0_mev = parse_f64(line, key, value)?,
            "source.sigmaE_MeV" => cfg.source_sigma_e_mev = parse_f64(line, key, value)?,
            "superposition.dx_m" => cfg.superposition_dx_m = parse_f64(line, key, value)?,
            "superposition.sigma_c_m" => cfg.superposition_sigma_c_m = parse_f64(line, key, value)?,
            "superposition.beam_angle_rad" => {
                cfg.superposition_beam_angle_rad = parse_f64(line, key, value)?
            }
            "evolve.t_max_s" => cfg.evolve_t_max_s = parse_f64(line, key, value)?,
            "evolve.n_points" => cfg.evolve_n_points = parse_int(line, key, value)?,
            "evolve.prefactor_convention" => {
                cfg.evolve_convention = value.parse().map_err(|e| enum_err(format!("{e}")))?
            }
            "env.P_Pa" => cfg.env_p_pa = parse_f64(line, key, value)?,
            "env.T_K" => cfg.env_t_k = parse_f64(line, key, value)?,
            "env.gas" => cfg.env_gas = value.parse().map_err(|e| enum_err(format!("{e}")))?,
            "env.im_eps_bb" => cfg.env_im_eps_bb = parse_f64(line, key, value)?,
            "quadrature.n_theta" => cfg.quad_n_theta = parse_int(line, key, value)?,
            "quadrature.n_energy" => cfg.quad_n_energy = parse_int(line, key, value)?,
            "quadrature.rel_tol" => cfg.quad_rel_tol = parse_f64(line, key, value)?,
            other => unknown.push(format!("line {line}: {other}")),
        }
    }
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown.join(", ")));
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn target(&self) -> Result<TargetCrystal, ConfigError> {
        let nuclide = Nuclide::new(self.target_z, self.target_n)?;
        Ok(TargetCrystal::new(nuclide, self.target_n_atoms, self.target_density_g_cm3)?)
    }

    pub fn source(&self) -> Result<ReactorSource, ConfigError> {
        Ok(ReactorSource::new(
            self.source_rate_per_gw,
            self.source_power_gw,
            self.source_distance_m,
            self.source_e0_mev,
            self.source_sigma_e_mev,
        )?)
    }

    pub fn superposition(&self) -> Result<SuperpositionConfig, ConfigError> {
        Ok(SuperpositionConfig::new(
            self.superposition_dx_m,
            self.superposition_sigma_c_m,
            self.superposition_beam_angle_rad,
        )?)
    }

    pub fn quadrature_settings(&self) -> Result<QuadratureSettings, ConfigError> {
        Ok(QuadratureSettings::new(
            self.quad_n_theta,
            self.quad_n_energy,
            self.quad_rel_tol,
        )?)
    }

    pub fn environment(&self) -> Result<Environment, ConfigError> {
        Ok(Environment::with_species(
            self.env_p_pa,
            self.env_t_k,
            self.env_gas,
            self.env_im_eps_bb,
        )?)
    }

    /// Evolution time grid: `n_points` samples from 0 to `t_max_s` inclusive.
    ///
    /// Each sample is computed as (t_max * i) / (n - 1), which keeps round
    /// subdivisions exact (the default grid hits 1e5 s on the nose).
    pub fn evolve_grid(&self) -> Result<Vec<f64>, ConfigError> {
        if self.evolve_n_points < 2 {
            return Err(ConfigError::GridPoints(self.evolve_n_points));
        }
        if !(self.evolve_t_max_s.is_finite() && self.evolve_t_max_s > 0.0) {
            return Err(ConfigError::GridSpan(self.evolve_t_max_s));
        }
        let n = self.evolve_n_points;
        Ok((0..n)
            .map(|i| (self.evolve_t_max_s * i as f64) / ((n - 1) as f64))
            .collect())
    }

    /// Canonical `key = value` listing of the effective configuration.
    pub fn effective_echo(&self) -> Vec<(&'static str, String)> {
        vec![
            ("target.Z", format!("{}", self.target_z)),
            ("target.N", format!("{}", self.target_n)),
            ("target.n_atoms", format!("{:e}", self.target_n_atoms)),
            ("target.density_g_cm3", format!("{:e}", self.target_density_g_cm3)),
            ("source.power_GW", format!("{:e}", self.source_power_gw)),
            ("source.distance_m", format!("{:e}", self.source_distance_m)),
            ("source.rate_per_GW", format!("{:e}", self.source_rate_per_gw)),
            ("source.E0_MeV", format!("{:e}", self.source_e0_mev)),
            ("source.sigmaE_MeV", format!("{:e}", self.source_sigma_e_mev)),
            ("superposition.dx_m", format!("{:e}", self.superposition_dx_m)),
            ("superposition.sigma_c_m", format!("{:e}", self.superposition_sigma_c_m)),
            (
                "superposition.beam_angle_rad",
                format!("{:e}", self.superposition_beam_angle_rad),
            ),
            ("evolve.t_max_s", format!("{:e}", self.evolve_t_max_s)),
            ("evolve.n_points", format!("{}", self.evolve_n_points)),
            ("evolve.prefactor_convention", self.evolve_convention.to_string()),
            ("env.P_Pa", format!("{:e}", self.env_p_pa)),
            ("env.T_K", format!("{:e}", self.env_t_k)),
            ("env.gas", self.env_gas.name().to_string()),
            ("env.im_eps_bb", format!("{:e}", self.env_im_eps_bb)),
            ("quadrature.n_theta", format!("{}", self.quad_n_theta)),
            ("quadrature.n_energy", format!("{}", self.quad_n_energy)),
            ("quadrature.rel_tol", format!("{:e}", self.quad_rel_tol)),
        ]
    }
}
