//! Exact open-system simulation of single-excitation walks on networks of
//! lossy atom–cavity nodes, with multipartite-entanglement witnesses and a
//! classical random walk for comparison.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`] — torus, Möbius-strip, and custom network topologies.
//! * [`dynamics`] — the non-Hermitian evolution matrix and two exact
//!   propagator backends (eigenbasis closed form, dense matrix exponential).
//! * [`expm`] — the general dense complex matrix exponential.
//! * [`walk`] — the classical random-walk reference.
//! * [`witness`] — W-state witness expectations, separability bounds, and a
//!   numerical product-state maximizer that cross-checks them.
//! * [`config`], [`csv`], [`sim`] — JSON configuration, deterministic CSV
//!   emission, and orchestration used by the `cavitywalk` binary.

pub mod config;
pub mod csv;
pub mod dynamics;
pub mod expm;
pub mod graph;
pub mod sim;
pub mod walk;
pub mod witness;

pub use config::{
    bundled, load_bundled, ComplexSpec, ConfigError, Geometry, OutputSpec, SimulationConfig,
};
pub use dynamics::{
    assemble_eta, density_state, initial_excitation, propagator_closed_form, propagator_generic,
    step, AmplitudeState, ClosedFormFactors, DensityState, DynamicsError, EvolutionMatrix,
    ExcitationKind, StepPropagator, SystemParams, NORM_TOLERANCE,
};
pub use graph::{GraphError, NetworkGraph, NodeCoord};
pub use sim::{RunArtifacts, SimError};
pub use walk::{
    rw_step, rw_transition_matrix, tv_distance, ProbabilityDistribution, RwMode, WalkError,
};
pub use witness::{
    bipartite_report, report, report_density, verify_bound_numerically, verify_bound_serial,
    w_expectation_atoms, w_expectation_cavities, w_expectation_full, w_separable_bound,
    EntanglementReport, WitnessError, WitnessKind,
};
