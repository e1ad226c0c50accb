//! Result emission: full-precision CSV tables and a JSON run manifest.
//!
//! Floats are printed with 17 significant digits so every value round-trips
//! to the identical f64 downstream; identical inputs therefore produce
//! byte-identical files. The manifest timestamp lives in its own field so
//! determinism comparisons can drop it without parsing heuristics.

use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::cenns::{CennsError, RecoilKinematics, ScatteringAmplitudeModel};
use crate::config::{ConfigError, RunConfig};
use crate::evolution::{ComplexRate, CoherenceTrajectory, PrefactorConvention};
use crate::feasibility::PtScan;
use crate::readout::{
    click_probability, expected_scatterings, readout_signal, ReadoutError, ReadoutMode,
    ScatteringBudget,
};
use crate::target::TargetError;
use crate::units::MEV_INV2_TO_CM2;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scattering(#[from] CennsError),
    #[error(transparent)]
    Readout(#[from] ReadoutError),
    #[error(transparent)]
    Source(#[from] TargetError),
}

/// 17-significant-digit scientific notation; round-trips any f64.
pub fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Trajectory table matching the closed-form evolution and gate readout.
pub fn write_evolve_csv<W: Write>(w: &mut W, traj: &CoherenceTrajectory) -> Result<(), ReportError> {
    writeln!(w, "t_s,phase_rad,amplitude,signal_cos,signal_sin,click_prob")?;
    for (i, &t) in traj.times_s().iter().enumerate() {
        let phase = traj.phases_rad()[i];
        let amplitude = traj.amplitudes()[i];
        let signal_cos = readout_signal(traj, t, ReadoutMode::Cos)?;
        let signal_sin = readout_signal(traj, t, ReadoutMode::Sin)?;
        let click = click_probability(traj, t)?;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_sig17(t),
            fmt_sig17(phase),
            fmt_sig17(amplitude),
            fmt_sig17(signal_cos),
            fmt_sig17(signal_sin),
            fmt_sig17(click)
        )?;
    }
    Ok(())
}

/// Pressure-temperature survey table, row order matching the scan cells.
pub fn write_pt_scan_csv<W: Write>(w: &mut W, scan: &PtScan) -> Result<(), ReportError> {
    writeln!(w, "P_Pa,T_K,gas_rate,bb_rate,coherence_time_s,allowed")?;
    for cell in &scan.cells {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_sig17(cell.pressure_pa),
            fmt_sig17(cell.temperature_k),
            fmt_sig17(cell.gas_rate),
            fmt_sig17(cell.bb_rate),
            fmt_sig17(cell.coherence_time_s),
            cell.allowed
        )?;
    }
    Ok(())
}

/// Cross-section table. All rows are computed before anything is written,
/// so an out-of-range energy produces an error and no partial output.
pub fn write_cross_section_csv<W: Write>(
    w: &mut W,
    model: &ScatteringAmplitudeModel,
    energies_mev: &[f64],
) -> Result<(), ReportError> {
    let mut rows = Vec::with_capacity(energies_mev.len());
    for &e in energies_mev {
        let t_max_ev = RecoilKinematics::new(e, model.m_nucl_mev)?.t_max() * 1e6;
        let sigma_cm2 = model.sigma_total_cm2(e)?;
        rows.push((e, t_max_ev, sigma_cm2));
    }
    writeln!(w, "E_MeV,T_max_eV,sigma_cm2")?;
    for (e, t_max_ev, sigma_cm2) in rows {
        writeln!(w, "{},{},{}", fmt_sig17(e), fmt_sig17(t_max_ev), fmt_sig17(sigma_cm2))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
}

/// Everything the run computed that is not the trajectory itself.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedQuantities {
    pub q_w: f64,
    pub m_nucl_mev: f64,
    pub crystal_mass_g: f64,
    pub crystal_radius_m: f64,
    pub flux_cm2_s: f64,
    pub sigma_tot_cm2_at_e0: f64,
    pub sigma_tot_cm2_spectrum_avg: f64,
    /// Integrand evaluations whose recoil bracket was clamped at zero while
    /// computing sigma_tot at E0 (roundoff diagnostic, normally 0).
    pub recoil_clamped_evaluations: u64,
    pub decay_per_s: f64,
    pub phase_rate_rad_per_s: f64,
    /// Exposure needed for a pi relative phase at the computed rate.
    pub t_pi_s: f64,
    pub expected_scatterings_paper: f64,
    pub p_geq_2_paper: f64,
    pub expected_scatterings_unit: f64,
    pub p_geq_2_unit: f64,
}

/// Run record: tool version, effective configuration echo, and the derived
/// quantities, all recomputable from the echoed configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Wall-clock stamp, deliberately isolated from the deterministic rest.
    pub generated_at_unix_s: u64,
    pub config: Vec<ConfigEntry>,
    pub derived: DerivedQuantities,
}

impl RunManifest {
    pub fn build(cfg: &RunConfig, rate: &ComplexRate) -> Result<Self, ReportError> {
        let target = cfg.target()?;
        let source = cfg.source()?;
        let model = ScatteringAmplitudeModel::for_crystal(&target);
        let (sigma_e0_mev2, clamps) = model.sigma_total_with_clamp_count(source.e0_mev)?;
        let sigma_avg_cm2 = model.spectrum_averaged_sigma_cm2(&source.spectrum()?)?;
        let exposure_s = cfg.evolve_t_max_s;
        let budget_doubled =
            expected_scatterings(&source, &target, exposure_s, PrefactorConvention::Doubled)?;
        let budget_unit =
            expected_scatterings(&source, &target, exposure_s, PrefactorConvention::Unit)?;
        let generated_at_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at_unix_s,
            config: cfg
                .effective_echo()
                .into_iter()
                .map(|(key, value)| ConfigEntry { key: key.to_string(), value })
                .collect(),
            derived: DerivedQuantities {
                q_w: target.nuclide.weak_charge(),
                m_nucl_mev: target.nuclide.mass_mev(),
                crystal_mass_g: target.mass_g(),
                crystal_radius_m: target.radius_m(),
                flux_cm2_s: source.flux_at_detector_cm2_s(),
                sigma_tot_cm2_at_e0: sigma_e0_mev2 * MEV_INV2_TO_CM2,
                sigma_tot_cm2_spectrum_avg: sigma_avg_cm2,
                recoil_clamped_evaluations: clamps,
                decay_per_s: rate.decay_per_s,
                phase_rate_rad_per_s: rate.phase_rate_rad_per_s,
                t_pi_s: std::f64::consts::PI / rate.phase_rate_rad_per_s,
                expected_scatterings_paper: budget_doubled.mean,
                p_geq_2_paper: budget_doubled.p_geq_2,
                expected_scatterings_unit: budget_unit.mean,
                p_geq_2_unit: budget_unit.p_geq_2,
            },
        })
    }
}

/// Environmental budget and apparatus summary for one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub gas_rate_per_s: f64,
    pub bb_rate_per_s: f64,
    pub total_rate_per_s: f64,
    pub env_coherence_time_s: f64,
    /// Whether the environmental coherence time covers the evolve span.
    pub env_coherence_time_ok: bool,
    pub window_lower_m: f64,
    pub window_lower_nominal_m: f64,
    pub window_upper_m: f64,
    pub window_ok: bool,
    pub neutrino_energy_spread_fraction: f64,
    pub neutrino_coherence_width_m: f64,
    /// True would mean the probe itself resolves the branches (a hazard).
    pub separation_resolved_by_probe: bool,
    pub expected_scatterings: ScatteringBudget,
}

/// Splitter design echo with the nominal spread figure for comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SternGerlachReport {
    pub velocity_m_s: f64,
    pub delta_x_m: f64,
    pub trap_frequency_rad_s: f64,
    pub ground_state_spread_m: f64,
    pub ground_state_spread_nominal_m: f64,
}

/// Cavity design echo with the nominal kick figure for comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CavityKickReport {
    pub g_rad_s: f64,
    pub v_kick_m_s: f64,
    pub v_kick_nominal_m_s: f64,
}

/// Pretty JSON with a trailing newline.
pub fn to_json_document<T: Serialize>(value: &T) -> Result<String, ReportError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::evolve_coherence;
    use approx::assert_relative_eq;

    fn reference_rate() -> ComplexRate {
        ComplexRate {
            decay_per_s: 7.530788176113521e-7,
            phase_rate_rad_per_s: 9.38587261250091e-6,
        }
    }

    #[test]
    fn sig17_round_trips_exactly() {
        for &x in &[
            0.0,
            1.0,
            0.1,
            -2.5e-7,
            9.38587261250091e-6,
            5e21,
            f64::MIN_POSITIVE,
            1.7349014915209455,
        ] {
            let parsed: f64 = fmt_sig17(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "{x} mangled by formatting");
        }
        assert_eq!(fmt_sig17(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn evolve_csv_header_and_initial_row() {
        let traj = evolve_coherence(&reference_rate(), &[0.0, 1e5]).unwrap();
        let mut buf = Vec::new();
        write_evolve_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t_s,phase_rad,amplitude,signal_cos,signal_sin,click_prob"
        );
        // Untouched state: zero phase, half amplitude, unit cos signal; the
        // gate route must land on these bit-exactly.
        assert_eq!(
            lines.next().unwrap(),
            "0.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1,\
             1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"
        );
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn cross_section_csv_rejects_bad_energy_without_partial_output() {
        let model = ScatteringAmplitudeModel::for_crystal(&crate::target::TargetCrystal::bismuth_5e21());
        let mut buf = Vec::new();
        let err = write_cross_section_csv(&mut buf, &model, &[2.6, 60.0]).unwrap_err();
        assert!(matches!(err, ReportError::Scattering(_)));
        assert!(buf.is_empty(), "partial output written");
        write_cross_section_csv(&mut buf, &model, &[2.6]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_relative_eq!(row[1].parse::<f64>().unwrap(), 69.45911742293922, max_relative = 1e-10);
        assert_relative_eq!(row[2].parse::<f64>().unwrap(), 4.800732541796849e-40, max_relative = 1e-10);
    }

    #[test]
    fn pt_csv_shape() {
        let crystal = crate::target::TargetCrystal::bismuth_5e21();
        let scan = crate::feasibility::pt_region_scan(
            &crystal,
            1e-14,
            1e5,
            &[1e-16],
            &[1.0],
            crate::feasibility::GasSpecies::He.mass_kg(),
            0.1,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_pt_scan_csv(&mut buf, &scan).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "P_Pa,T_K,gas_rate,bb_rate,coherence_time_s,allowed");
        let row = lines.next().unwrap();
        assert!(row.ends_with(",true"), "{row}");
    }

    #[test]
    fn manifest_is_deterministic_apart_from_timestamp() {
        let cfg = RunConfig::default();
        let rate = reference_rate();
        let mut a = RunManifest::build(&cfg, &rate).unwrap();
        let mut b = RunManifest::build(&cfg, &rate).unwrap();
        a.generated_at_unix_s = 0;
        b.generated_at_unix_s = 0;
        assert_eq!(to_json_document(&a).unwrap(), to_json_document(&b).unwrap());
        assert_eq!(a.tool_version, env!("CARGO_PKG_VERSION"));
        assert_eq!(a.config.len(), 22);
        assert_relative_eq!(a.derived.q_w, 129.79476, max_relative = 1e-10);
        assert_relative_eq!(a.derived.sigma_tot_cm2_at_e0, 4.800732541796849e-40, max_relative = 1e-10);
        assert_relative_eq!(a.derived.flux_cm2_s, 1.7904931097838227e13, max_relative = 1e-12);
        assert_relative_eq!(a.derived.expected_scatterings_unit / 3.0, 4.656477774348721, max_relative = 1e-8);
        assert_relative_eq!(a.derived.t_pi_s, std::f64::consts::PI / rate.phase_rate_rad_per_s, max_relative = 1e-15);
        let dx_entry = a.config.iter().find(|e| e.key == "superposition.dx_m").unwrap();
        assert_eq!(dx_entry.value, "1e-14");
    }
}
