//! Command-line surface.
//!
//! Exit codes: 0 success, 1 configuration error, 2 usage error (also used
//! by argument parsing), 3 numerical failure. All table output is built in
//! memory first, so a failing run never leaves a partial file behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::cenns::{CennsError, ScatteringAmplitudeModel, E_NU_MAX_MEV};
use crate::config::{parse_config, RunConfig};
use crate::evolution::{complex_rate, evolve_coherence, EvolutionError};
use crate::feasibility::{
    blackbody_decoherence_rate, cavity_kick_design, gas_decoherence_rate, neutrino_coherence_width,
    pt_region_scan, resolves_separation, stern_gerlach_design, wavepacket_window, CavityPlan,
    FeasibilityError, SternGerlachPlan, CAVITY_KICK_NOMINAL_M_S, GROUND_STATE_SPREAD_NOMINAL_M,
};
use crate::readout::{array_scaling, expected_scatterings, ReadoutError};
use crate::report::{
    to_json_document, write_cross_section_csv, write_evolve_csv, write_pt_scan_csv, CavityKickReport,
    FeasibilityReport, ReportError, RunManifest, SternGerlachReport,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nuphase",
    version,
    about = "Phase accumulation and decoherence of a crystal superposition in a reactor antineutrino flux"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration key (KEY=VALUE). Repeatable.
    #[arg(long, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate recoil endpoint and total cross section over energies (CSV).
    CrossSection {
        #[command(flatten)]
        common: CommonOpts,
        /// Lowest energy in MeV.
        #[arg(long, default_value_t = 0.5)]
        e_min: f64,
        /// Highest energy in MeV.
        #[arg(long, default_value_t = 10.0)]
        e_max: f64,
        /// Number of log-spaced energies.
        #[arg(long, default_value_t = 20)]
        e_count: usize,
    },
    /// Coherence trajectory with gate readout columns (CSV + JSON manifest).
    Evolve {
        #[command(flatten)]
        common: CommonOpts,
        /// Manifest path; defaults to <out>.manifest.json when --out is a file.
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
    },
    /// Survey decoherence rates over a pressure-temperature grid (CSV).
    ScanPt {
        #[command(flatten)]
        common: CommonOpts,
        /// Lowest pressure in Pa.
        #[arg(long, default_value_t = 1e-18)]
        p_min: f64,
        /// Highest pressure in Pa.
        #[arg(long, default_value_t = 1e-8)]
        p_max: f64,
        /// Number of log-spaced pressures.
        #[arg(long, default_value_t = 50)]
        p_count: usize,
        /// Lowest temperature in K.
        #[arg(long, default_value_t = 0.1)]
        t_min: f64,
        /// Highest temperature in K.
        #[arg(long, default_value_t = 300.0)]
        t_max: f64,
        /// Number of log-spaced temperatures.
        #[arg(long, default_value_t = 50)]
        t_count: usize,
        /// Required coherence time in seconds.
        #[arg(long, default_value_t = 1e5)]
        tau_target: f64,
    },
    /// Size the magnetic splitter (JSON).
    DesignSg {
        #[command(flatten)]
        common: CommonOpts,
        /// Field gradient in T/m.
        #[arg(long, default_value_t = 1e6)]
        gradient: f64,
        /// Gradient pulse duration in s.
        #[arg(long, default_value_t = 1e-5)]
        t_acc: f64,
        /// Ballistic flight time in s.
        #[arg(long, default_value_t = 1e5)]
        free_time: f64,
        /// Crystal mass in kg.
        #[arg(long, default_value_t = 1e-3)]
        mass: f64,
        /// Mass magnetic susceptibility in m^3/kg.
        #[arg(long, default_value_t = 1.66e-4)]
        chi: f64,
    },
    /// Size the cavity closing kick (JSON).
    DesignCavity {
        #[command(flatten)]
        common: CommonOpts,
        /// Crystal volume in m^3.
        #[arg(long, default_value_t = 1e-6)]
        volume: f64,
        /// Cavity waist volume in m^3.
        #[arg(long, default_value_t = 1e-6)]
        cavity_volume: f64,
        /// Relative permittivity of the crystal.
        #[arg(long, default_value_t = 1e9)]
        epsilon: f64,
        /// Drive frequency in rad/s.
        #[arg(long, default_value_t = 1e10)]
        omega_l: f64,
        /// Kick duration in s.
        #[arg(long, default_value_t = 1e-6)]
        t_kick: f64,
        /// Photon number (0 or 1).
        #[arg(long, default_value_t = 1)]
        n_photon: u32,
        /// Crystal mass in kg.
        #[arg(long, default_value_t = 1e-3)]
        mass: f64,
    },
    /// Resource scaling when splitting one crystal into an n^4 array (JSON).
    ArrayScale {
        #[command(flatten)]
        common: CommonOpts,
        /// Shrink factor per crystal.
        #[arg(long, default_value_t = 10)]
        n: u32,
    },
    /// Combined environmental and wavepacket feasibility summary (JSON).
    Feasibility {
        #[command(flatten)]
        common: CommonOpts,
        /// Fractional energy spread of the incident neutrinos.
        #[arg(long, default_value_t = 0.01)]
        energy_spread: f64,
    },
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::CrossSection { common, e_min, e_max, e_count } => {
            cross_section(&common, e_min, e_max, e_count)
        }
        Command::Evolve { common, manifest } => evolve(&common, manifest),
        Command::ScanPt {
            common,
            p_min,
            p_max,
            p_count,
            t_min,
            t_max,
            t_count,
            tau_target,
        } => scan_pt(&common, (p_min, p_max, p_count), (t_min, t_max, t_count), tau_target),
        Command::DesignSg { common, gradient, t_acc, free_time, mass, chi } => {
            design_sg(&common, gradient, t_acc, free_time, mass, chi)
        }
        Command::DesignCavity {
            common,
            volume,
            cavity_volume,
            epsilon,
            omega_l,
            t_kick,
            n_photon,
            mass,
        } => design_cavity(&common, volume, cavity_volume, epsilon, omega_l, t_kick, n_photon, mass),
        Command::ArrayScale { common, n } => array_scale(&common, n),
        Command::Feasibility { common, energy_spread } => feasibility(&common, energy_spread),
    }
}

fn config_err(err: impl std::fmt::Display) -> CliError {
    CliError::Config(err.to_string())
}

fn usage_err(err: impl std::fmt::Display) -> CliError {
    CliError::Usage(err.to_string())
}

fn classify_evolution(err: EvolutionError) -> CliError {
    match err {
        EvolutionError::Quadrature(q) => CliError::Numerical(q.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn classify_report(err: ReportError) -> CliError {
    match err {
        ReportError::Scattering(CennsError::Quadrature(q)) => CliError::Numerical(q.to_string()),
        ReportError::Readout(ReadoutError::Evolution(EvolutionError::Quadrature(q))) => {
            CliError::Numerical(q.to_string())
        }
        ReportError::Readout(ReadoutError::Scattering(CennsError::Quadrature(q))) => {
            CliError::Numerical(q.to_string())
        }
        other => CliError::Config(other.to_string()),
    }
}

fn classify_feasibility(err: FeasibilityError) -> CliError {
    usage_err(err)
}

fn load_config(common: &CommonOpts) -> Result<RunConfig, CliError> {
    let mut text = String::new();
    if let Some(path) = &common.config {
        text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        if !text.ends_with('\n') {
            text.push('\n');
        }
    }
    for kv in &common.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        text.push_str(&format!("{} = {}\n", key.trim(), value.trim()));
    }
    parse_config(&text).map_err(config_err)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Log-spaced grid with exact endpoints.
fn log_grid(name: &str, min: f64, max: f64, count: usize) -> Result<Vec<f64>, CliError> {
    if count == 0 {
        return Err(CliError::Usage(format!("{name} grid needs at least 1 point")));
    }
    if !(min.is_finite() && max.is_finite() && min > 0.0 && min <= max) {
        return Err(CliError::Usage(format!(
            "{name} grid needs 0 < min <= max (got min {min:e}, max {max:e})"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (ln_min, ln_max) = (min.ln(), max.ln());
    let last = count - 1;
    let mut grid: Vec<f64> = (0..count)
        .map(|i| (ln_min + (ln_max - ln_min) * i as f64 / last as f64).exp())
        .collect();
    grid[0] = min;
    grid[last] = max;
    Ok(grid)
}

fn cross_section(common: &CommonOpts, e_min: f64, e_max: f64, e_count: usize) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let target = cfg.target().map_err(config_err)?;
    let grid = log_grid("energy", e_min, e_max, e_count)?;
    if let Some(&bad) = grid.iter().find(|&&e| !(e > 0.0 && e <= E_NU_MAX_MEV)) {
        return Err(CliError::Usage(format!(
            "energy {bad} MeV outside the (0, {E_NU_MAX_MEV}] MeV validity range"
        )));
    }
    let model = ScatteringAmplitudeModel::for_crystal(&target);
    let mut buf = Vec::new();
    write_cross_section_csv(&mut buf, &model, &grid).map_err(classify_report)?;
    write_output(&common.out, std::str::from_utf8(&buf).expect("CSV is UTF-8"))
}

fn evolve(common: &CommonOpts, manifest: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let target = cfg.target().map_err(config_err)?;
    let source = cfg.source().map_err(config_err)?;
    let superposition = cfg.superposition().map_err(config_err)?;
    let quad = cfg.quadrature_settings().map_err(config_err)?;
    let model = ScatteringAmplitudeModel::for_crystal(&target);
    let rate = complex_rate(&model, &source, &target, &superposition, &quad, cfg.evolve_convention)
        .map_err(classify_evolution)?;
    let grid = cfg.evolve_grid().map_err(config_err)?;
    let traj = evolve_coherence(&rate, &grid).map_err(classify_evolution)?;
    let mut buf = Vec::new();
    write_evolve_csv(&mut buf, &traj).map_err(classify_report)?;
    write_output(&common.out, std::str::from_utf8(&buf).expect("CSV is UTF-8"))?;
    let manifest_path = manifest.or_else(|| {
        common
            .out
            .as_ref()
            .map(|out| sibling_manifest_path(out))
    });
    if let Some(path) = manifest_path {
        let manifest = RunManifest::build(&cfg, &rate).map_err(classify_report)?;
        let text = to_json_document(&manifest).map_err(classify_report)?;
        fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn sibling_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn scan_pt(
    common: &CommonOpts,
    (p_min, p_max, p_count): (f64, f64, usize),
    (t_min, t_max, t_count): (f64, f64, usize),
    tau_target: f64,
) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let target = cfg.target().map_err(config_err)?;
    let superposition = cfg.superposition().map_err(config_err)?;
    let p_grid = log_grid("pressure", p_min, p_max, p_count)?;
    let t_grid = log_grid("temperature", t_min, t_max, t_count)?;
    let scan = pt_region_scan(
        &target,
        superposition.delta_x_m,
        tau_target,
        &p_grid,
        &t_grid,
        cfg.env_gas.mass_kg(),
        cfg.env_im_eps_bb,
    )
    .map_err(classify_feasibility)?;
    let mut buf = Vec::new();
    write_pt_scan_csv(&mut buf, &scan).map_err(classify_report)?;
    write_output(&common.out, std::str::from_utf8(&buf).expect("CSV is UTF-8"))
}

fn design_sg(
    common: &CommonOpts,
    gradient: f64,
    t_acc: f64,
    free_time: f64,
    mass: f64,
    chi: f64,
) -> Result<(), CliError> {
    load_config(common)?;
    let plan = SternGerlachPlan {
        gradient_t_per_m: gradient,
        accel_time_s: t_acc,
        mass_kg: mass,
        free_time_s: free_time,
        chi_mass_m3_kg: chi,
    };
    let design = stern_gerlach_design(&plan).map_err(classify_feasibility)?;
    let report = SternGerlachReport {
        velocity_m_s: design.velocity_m_s,
        delta_x_m: design.delta_x_m,
        trap_frequency_rad_s: design.trap_frequency_rad_s,
        ground_state_spread_m: design.ground_state_spread_m,
        ground_state_spread_nominal_m: GROUND_STATE_SPREAD_NOMINAL_M,
    };
    write_output(&common.out, &to_json_document(&report).map_err(classify_report)?)
}

#[allow(clippy::too_many_arguments)]
fn design_cavity(
    common: &CommonOpts,
    volume: f64,
    cavity_volume: f64,
    epsilon: f64,
    omega_l: f64,
    t_kick: f64,
    n_photon: u32,
    mass: f64,
) -> Result<(), CliError> {
    load_config(common)?;
    let plan = CavityPlan {
        crystal_volume_m3: volume,
        cavity_volume_m3: cavity_volume,
        epsilon,
        omega_l_rad_s: omega_l,
        t_kick_s: t_kick,
        n_photon,
        mass_kg: mass,
    };
    let design = cavity_kick_design(&plan).map_err(classify_feasibility)?;
    let report = CavityKickReport {
        g_rad_s: design.g_rad_s,
        v_kick_m_s: design.v_kick_m_s,
        v_kick_nominal_m_s: CAVITY_KICK_NOMINAL_M_S,
    };
    write_output(&common.out, &to_json_document(&report).map_err(classify_report)?)
}

fn array_scale(common: &CommonOpts, n: u32) -> Result<(), CliError> {
    load_config(common)?;
    let scaling = array_scaling(n).map_err(usage_err)?;
    write_output(&common.out, &to_json_document(&scaling).map_err(classify_report)?)
}

fn feasibility(common: &CommonOpts, energy_spread: f64) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let target = cfg.target().map_err(config_err)?;
    let source = cfg.source().map_err(config_err)?;
    let superposition = cfg.superposition().map_err(config_err)?;
    let env = cfg.environment().map_err(config_err)?;
    let gas = gas_decoherence_rate(&env, &target, superposition.delta_x_m);
    let bb = blackbody_decoherence_rate(&env, &target, superposition.delta_x_m);
    let total = gas + bb;
    let coherence_time = if total > 0.0 { 1.0 / total } else { f64::INFINITY };
    let window = wavepacket_window(&target, &superposition);
    let width = neutrino_coherence_width(energy_spread, source.e0_mev).map_err(usage_err)?;
    let budget = expected_scatterings(&source, &target, cfg.evolve_t_max_s, cfg.evolve_convention)
        .map_err(|e| classify_report(ReportError::Readout(e)))?;
    let report = FeasibilityReport {
        gas_rate_per_s: gas,
        bb_rate_per_s: bb,
        total_rate_per_s: total,
        env_coherence_time_s: coherence_time,
        env_coherence_time_ok: coherence_time >= cfg.evolve_t_max_s,
        window_lower_m: window.lower_m,
        window_lower_nominal_m: window.lower_nominal_m,
        window_upper_m: window.upper_m,
        window_ok: window.ok,
        neutrino_energy_spread_fraction: energy_spread,
        neutrino_coherence_width_m: width,
        separation_resolved_by_probe: resolves_separation(width, superposition.delta_x_m),
        expected_scatterings: budget,
    };
    write_output(&common.out, &to_json_document(&report).map_err(classify_report)?)
}
