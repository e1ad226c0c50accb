//! Coherent-scattering phase accumulation on a levitated crystal superposition.
//!
//! The library models a macroscopic crystal held in a two-branch spatial
//! superposition and exposed to the antineutrino flux of a power reactor.
//! Coherent elastic neutrino-nucleus scattering imprints a relative phase on
//! the branches while momentum kicks that resolve the branch separation
//! decohere them; both effects fall out of one complex-valued rate integral.
//! Supporting modules size the environmental vacuum and temperature envelope,
//! the magnetic splitter and cavity closer for the superposition, and the
//! resource scaling of crystal arrays, and serialize everything through a
//! small CSV/JSON reporting layer used by the `nuphase` binary.
//!
//! Internally all scattering kinematics run in natural units (MeV); the
//! conversion constants and helpers live in [`units`].

pub mod cenns;
pub mod cli;
pub mod config;
pub mod evolution;
pub mod feasibility;
pub mod quadrature;
pub mod readout;
pub mod report;
pub mod target;
pub mod units;

pub use cenns::{RecoilKinematics, ScatteringAmplitudeModel, E_NU_MAX_MEV};
pub use config::{parse_config, RunConfig};
pub use evolution::{
    complex_rate, complex_rate_monochromatic, evolve_coherence, CoherenceTrajectory, ComplexRate,
    PrefactorConvention, QuadratureSettings, SuperpositionConfig,
};
pub use feasibility::{
    blackbody_decoherence_rate, gas_decoherence_rate, neutrino_coherence_width, pt_region_scan,
    wavepacket_window, Environment, GasSpecies,
};
pub use readout::{array_scaling, expected_scatterings, ArrayScaling, QubitState, ReadoutMode};
pub use target::{Nuclide, ReactorSource, Spectrum, TargetCrystal};
