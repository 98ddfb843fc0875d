//! Markov population dynamics on finite graphs.
//!
//! The crate has three layers:
//!
//! * **Graph machinery** — [`graph`] holds an immutable CSR graph with
//!   generators (Erdős–Rényi, random regular, named families) and summary
//!   statistics; [`discrepancy`] computes edge-density discrepancies exactly
//!   (closed forms where they exist, `2^N` sweeps at desk scale otherwise);
//!   [`spectral`] provides the normalized-adjacency spectrum, the expander
//!   mixing bound and the core-extraction procedure.
//! * **Dynamics** — [`dynamics`] defines affine-rate vertex models (SIS, SIR,
//!   SI, the degree process, custom tensors), an exact event-driven simulator
//!   and a forward-equation solver for tiny graphs; [`meanfield`] integrates
//!   the matching mean-field ODE and prices the a-priori error budget.
//! * **Experiments** — [`experiments`] wires the layers into reproducible,
//!   config-driven comparison runs, convergence studies and the
//!   quasi-randomness audit, all emitting CSV/JSON artifacts.
//!
//! Everything stochastic takes an explicit seed and is deterministic given it,
//! including replication fan-out across threads.

pub mod discrepancy;
pub mod dynamics;
pub mod experiments;
pub mod graph;
pub mod meanfield;
pub mod ode;
pub mod rng;
pub mod spectral;

pub use discrepancy::{DiscrepancyReport, MethodTag};
pub use dynamics::{MasterSolution, ModelSpec, StateAssignment, Trajectory};
pub use graph::{Graph, GraphStats, NamedKind, VertexSet};
pub use meanfield::{ErrorBudget, OdeSolution};
pub use spectral::{CoreResult, SpectralReport};
