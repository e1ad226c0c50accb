//! Interferometric readout of the branch coherence, phrased as qubit gates.
//!
//! The two branch positions act as computational basis states. A trajectory
//! point (A, phi) fixes the 2x2 density matrix; Hadamard and phase gates
//! rotate the coherence into measurable populations. The gate route and the
//! closed forms 2A cos(phi), 2A sin(phi) must agree, so the gates are
//! applied literally rather than shortcut.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cenns::{CennsError, ScatteringAmplitudeModel};
use crate::evolution::{CoherenceTrajectory, EvolutionError, PrefactorConvention};
use crate::target::{ReactorSource, TargetCrystal, TargetError};

#[derive(Debug, Error)]
pub enum ReadoutError {
    #[error("density matrix trace must be 1 (got {0})")]
    Trace(f64),
    #[error("density matrix must be Hermitian")]
    NotHermitian,
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("coherence amplitude must lie in [0, 1/2] (got {0})")]
    CoherenceAmplitude(f64),
    #[error("unknown readout mode {got:?}, expected \"cos\" or \"sin\"")]
    UnknownMode { got: String },
    #[error("exposure time must be non-negative and finite (got {0:e} s)")]
    ExposureTime(f64),
    #[error("array size must be at least 1")]
    ArraySize,
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Scattering(#[from] CennsError),
    #[error(transparent)]
    Source(#[from] TargetError),
}

const TOL: f64 = 1e-12;

/// Validated 2x2 density matrix over the branch basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: [[Complex64; 2]; 2],
}

impl QubitState {
    pub fn new(rho: [[Complex64; 2]; 2]) -> Result<Self, ReadoutError> {
        let trace = rho[0][0].re + rho[1][1].re;
        if (trace - 1.0).abs() > TOL || rho[0][0].im.abs() > TOL || rho[1][1].im.abs() > TOL {
            return Err(ReadoutError::Trace(trace));
        }
        if (rho[0][1] - rho[1][0].conj()).norm() > TOL {
            return Err(ReadoutError::NotHermitian);
        }
        // Closed-form eigenvalues of a 2x2 Hermitian matrix.
        let mid = 0.5 * (rho[0][0].re + rho[1][1].re);
        let half_gap = 0.5 * (rho[0][0].re - rho[1][1].re);
        let radius = (half_gap * half_gap + rho[0][1].norm_sqr()).sqrt();
        let min_eig = mid - radius;
        if min_eig < -TOL {
            return Err(ReadoutError::NotPositive(min_eig));
        }
        Ok(QubitState { rho })
    }

    /// Equal-weight branch superposition with full coherence.
    pub fn equal_superposition() -> Self {
        QubitState::from_coherence(0.5, 0.0).expect("maximal coherence is a valid state")
    }

    /// Equal populations with off-diagonal element A e^{i phi}.
    pub fn from_coherence(amplitude: f64, phase_rad: f64) -> Result<Self, ReadoutError> {
        if !(amplitude.is_finite() && (0.0..=0.5).contains(&amplitude)) {
            return Err(ReadoutError::CoherenceAmplitude(amplitude));
        }
        let c = Complex64::from_polar(amplitude, phase_rad);
        let half = Complex64::new(0.5, 0.0);
        QubitState::new([[half, c], [c.conj(), half]])
    }

    pub fn population(&self, i: usize) -> f64 {
        self.rho[i][i].re
    }

    pub fn coherence(&self) -> Complex64 {
        self.rho[0][1]
    }

    /// Raw density matrix, row-major; lets callers audit trace, Hermiticity
    /// and positivity after gate applications.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.rho
    }

    /// Conjugation rho -> scale * (m rho m^dagger), for a unitary written as
    /// sqrt(scale) * m. Pulling the normalization out as one scalar keeps the
    /// arithmetic exact for gates like the Hadamard whose entries are
    /// irrational only through that common factor.
    #[allow(clippy::needless_range_loop)] // index symmetry mirrors the matrix algebra
    fn conjugate_by(&self, m: [[Complex64; 2]; 2], scale: f64) -> Self {
        let mut mr = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                mr[i][j] = m[i][0] * self.rho[0][j] + m[i][1] * self.rho[1][j];
            }
        }
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (mr[i][0] * m[j][0].conj() + mr[i][1] * m[j][1].conj()) * scale;
            }
        }
        QubitState { rho: out }
    }

    /// Hadamard conjugation; maps coherence into population difference.
    pub fn apply_hadamard(&self) -> Self {
        let one = Complex64::new(1.0, 0.0);
        self.conjugate_by([[one, one], [one, -one]], 0.5)
    }

    /// Phase gate diag(1, i); retards the coherence phase by pi/2.
    pub fn apply_phase_gate(&self) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        self.conjugate_by([[one, zero], [zero, i]], 1.0)
    }
}

/// Which quadrature of the coherence the gate sequence extracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutMode {
    Cos,
    Sin,
}

impl std::str::FromStr for ReadoutMode {
    type Err = ReadoutError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cos" => Ok(ReadoutMode::Cos),
            "sin" => Ok(ReadoutMode::Sin),
            other => Err(ReadoutError::UnknownMode { got: other.to_string() }),
        }
    }
}

/// Population difference p0 - p1 after the gate sequence at time `t_s`.
///
/// Cos mode applies H alone and returns 2 A cos(phi); sin mode applies the
/// phase gate first and returns 2 A sin(phi).
pub fn readout_signal(traj: &CoherenceTrajectory, t_s: f64, mode: ReadoutMode) -> Result<f64, ReadoutError> {
    let state = state_at(traj, t_s)?;
    let rotated = match mode {
        ReadoutMode::Cos => state.apply_hadamard(),
        ReadoutMode::Sin => state.apply_phase_gate().apply_hadamard(),
    };
    Ok(rotated.population(0) - rotated.population(1))
}

/// Probability of finding the minus output port, 1/2 - A cos(phi).
pub fn click_probability(traj: &CoherenceTrajectory, t_s: f64) -> Result<f64, ReadoutError> {
    Ok(state_at(traj, t_s)?.apply_hadamard().population(1))
}

fn state_at(traj: &CoherenceTrajectory, t_s: f64) -> Result<QubitState, ReadoutError> {
    let amplitude = traj.amplitude_at(t_s)?;
    let phase = traj.phase_at(t_s)?;
    QubitState::from_coherence(amplitude, phase)
}

/// Poisson budget of scattering events over an exposure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScatteringBudget {
    pub mean: f64,
    pub p_zero: f64,
    pub p_one: f64,
    pub p_geq_2: f64,
}

impl ScatteringBudget {
    pub fn from_mean(mean: f64) -> Result<Self, ReadoutError> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(ReadoutError::ExposureTime(mean));
        }
        let p_zero = (-mean).exp();
        let p_one = mean * p_zero;
        Ok(ScatteringBudget {
            mean,
            p_zero,
            p_one,
            p_geq_2: 1.0 - p_zero - p_one,
        })
    }
}

/// Expected number of scattering events in `t_s` seconds of exposure,
/// using the spectrum-averaged cross section and the chosen prefactor.
pub fn expected_scatterings(
    source: &ReactorSource,
    target: &TargetCrystal,
    t_s: f64,
    convention: PrefactorConvention,
) -> Result<ScatteringBudget, ReadoutError> {
    if !(t_s.is_finite() && t_s >= 0.0) {
        return Err(ReadoutError::ExposureTime(t_s));
    }
    let model = ScatteringAmplitudeModel::for_crystal(target);
    let sigma_avg = model.spectrum_averaged_sigma_cm2(&source.spectrum()?)?;
    let mean =
        convention.kappa() * source.flux_at_detector_cm2_s() * target.n_atoms * sigma_avg * t_s;
    ScatteringBudget::from_mean(mean)
}

/// Resource trade-off when one crystal is split into an n^4 array.
///
/// Shrinking each crystal by 1/n and the run time by 1/n cuts the
/// per-crystal phase by 1/n^2; averaging n^4 independent crystals restores
/// the shot-noise phase precision, so per_crystal_phase_factor times
/// sqrt(crystal_count) is exactly 1.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ArrayScaling {
    pub n: u32,
    pub mass_factor: f64,
    pub duration_factor: f64,
    pub per_crystal_phase_factor: f64,
    pub crystal_count: u64,
    pub phase_precision: f64,
}

pub fn array_scaling(n: u32) -> Result<ArrayScaling, ReadoutError> {
    if n < 1 {
        return Err(ReadoutError::ArraySize);
    }
    let nf = n as f64;
    Ok(ArrayScaling {
        n,
        mass_factor: 1.0 / nf,
        duration_factor: 1.0 / nf,
        per_crystal_phase_factor: 1.0 / (nf * nf),
        crystal_count: (n as u64).pow(4),
        phase_precision: 1.0 / (nf * nf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve_coherence, ComplexRate};
    use approx::assert_relative_eq;

    fn reference_trajectory() -> CoherenceTrajectory {
        let rate = ComplexRate {
            decay_per_s: 7.530788176113521e-7,
            phase_rate_rad_per_s: 9.38587261250091e-6,
        };
        evolve_coherence(&rate, &[0.0, 5e4, 1e5]).unwrap()
    }

    #[test]
    fn equal_superposition_reads_out_fully() {
        let state = QubitState::equal_superposition();
        assert_eq!(state.population(0), 0.5);
        let rotated = state.apply_hadamard();
        assert_relative_eq!(rotated.population(0), 1.0, max_relative = 1e-14);
        assert!(rotated.population(1).abs() < 1e-14);
    }

    #[test]
    fn hadamard_is_an_involution() {
        let state = QubitState::from_coherence(0.3, 0.7).unwrap();
        let twice = state.apply_hadamard().apply_hadamard();
        for i in 0..2 {
            for j in 0..2 {
                assert!((twice.rho[i][j] - state.rho[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn phase_gate_retards_by_quarter_turn() {
        let state = QubitState::from_coherence(0.3, 0.7).unwrap().apply_phase_gate();
        let expected = QubitState::from_coherence(0.3, 0.7 - std::f64::consts::FRAC_PI_2).unwrap();
        assert!((state.coherence() - expected.coherence()).norm() < 1e-14);
        assert_eq!(state.population(0), 0.5);
    }

    #[test]
    fn state_validation() {
        let z = Complex64::new(0.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        assert!(matches!(
            QubitState::new([[half, z], [z, Complex64::new(0.6, 0.0)]]),
            Err(ReadoutError::Trace(_))
        ));
        assert!(matches!(
            QubitState::new([[half, Complex64::new(0.1, 0.0)], [Complex64::new(0.2, 0.0), half]]),
            Err(ReadoutError::NotHermitian)
        ));
        // Coherence beyond sqrt(p0 p1) is unphysical.
        assert!(matches!(
            QubitState::from_coherence(0.6, 0.0),
            Err(ReadoutError::CoherenceAmplitude(_))
        ));
        let c = Complex64::new(0.51, 0.0);
        assert!(matches!(
            QubitState::new([[half, c], [c, half]]),
            Err(ReadoutError::NotPositive(_))
        ));
    }

    #[test]
    fn gate_route_matches_closed_forms() {
        let traj = reference_trajectory();
        let (a, phi) = (traj.amplitude_at(1e5).unwrap(), traj.phase_at(1e5).unwrap());
        let cos_sig = readout_signal(&traj, 1e5, ReadoutMode::Cos).unwrap();
        let sin_sig = readout_signal(&traj, 1e5, ReadoutMode::Sin).unwrap();
        assert_relative_eq!(cos_sig, 2.0 * a * phi.cos(), max_relative = 1e-13);
        assert_relative_eq!(sin_sig, 2.0 * a * phi.sin(), max_relative = 1e-13);
        assert_relative_eq!(cos_sig, 0.5480611215842889, max_relative = 1e-11);
        assert_relative_eq!(sin_sig, 0.7482026156056791, max_relative = 1e-11);
        assert_relative_eq!(
            click_probability(&traj, 1e5).unwrap(),
            0.22596943920785556,
            max_relative = 1e-11
        );
    }

    #[test]
    fn readout_rejects_times_outside_span() {
        let traj = reference_trajectory();
        assert!(matches!(
            readout_signal(&traj, 2e5, ReadoutMode::Cos),
            Err(ReadoutError::Evolution(_))
        ));
        assert!(matches!(click_probability(&traj, -1.0), Err(ReadoutError::Evolution(_))));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("cos".parse::<ReadoutMode>().unwrap(), ReadoutMode::Cos);
        assert_eq!("sin".parse::<ReadoutMode>().unwrap(), ReadoutMode::Sin);
        assert!("tan".parse::<ReadoutMode>().is_err());
    }

    #[test]
    fn scattering_budget_reference_values() {
        let source = ReactorSource::gigawatt_reference();
        let target = TargetCrystal::bismuth_5e21();
        let unit = expected_scatterings(&source, &target, 1e5, PrefactorConvention::Unit).unwrap();
        assert_relative_eq!(unit.mean, 4.656477774348721, max_relative = 1e-8);
        let doubled = expected_scatterings(&source, &target, 1.0, PrefactorConvention::Doubled).unwrap();
        assert_relative_eq!(doubled.mean, 9.312955548697442e-5, max_relative = 1e-8);
        let small = ScatteringBudget::from_mean(0.1).unwrap();
        assert_relative_eq!(small.p_geq_2, 0.004678840160444397, max_relative = 1e-12);
        assert_relative_eq!(small.p_zero + small.p_one + small.p_geq_2, 1.0, max_relative = 1e-14);
        assert!(expected_scatterings(&source, &target, -1.0, PrefactorConvention::Unit).is_err());
    }

    #[test]
    fn array_scaling_exact_values() {
        let s = array_scaling(10).unwrap();
        assert_eq!(s.mass_factor, 0.1);
        assert_eq!(s.duration_factor, 0.1);
        assert_eq!(s.per_crystal_phase_factor, 0.01);
        assert_eq!(s.crystal_count, 10_000);
        assert_eq!(s.phase_precision, 0.01);
        let one = array_scaling(1).unwrap();
        assert_eq!(one.crystal_count, 1);
        assert_eq!(one.phase_precision, 1.0);
        assert!(array_scaling(0).is_err());
    }

    #[test]
    fn array_precision_invariant() {
        for n in [1u32, 2, 3, 7, 10, 50] {
            let s = array_scaling(n).unwrap();
            assert_relative_eq!(
                s.per_crystal_phase_factor * (s.crystal_count as f64).sqrt(),
                1.0,
                max_relative = 1e-14
            );
        }
    }
}
