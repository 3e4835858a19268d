//! Simulation and structural analysis of qubit networks whose dissipative
//! coupling is made of swapping operators.
//!
//! The dynamics of interest is the master equation
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_{{j,k} ∈ E_σ(t)} α_jk (U_jk ρ U_jk† - ρ)
//! ```
//!
//! where `U_jk` exchanges qubits `j` and `k`. Under column-major
//! vectorization the dissipative part becomes `-L vec(ρ)` with the quantum
//! Laplacian `L = Σ α_jk (I⊗I - U_jk⊗U_jk)`, whose nonzero pattern is the
//! *induced graph* on the `4^n` operator-basis elements `|q⟩⟨p|`.
//!
//! Modules, bottom-up:
//!
//! - [`basis`]: bit-level indexing of kets and operator-basis nodes.
//! - [`graph`]: weighted interaction graphs and switching schedules.
//! - [`operators`]: permutations, swap actions, Hamiltonian builders.
//! - [`induced`]: implicit induced graph, components, counting and degree results.
//! - [`laplacian`]: sparse quantum Laplacian, kernel dimension and `λ₂`.
//! - [`dynamics`]: density states, the quantum average, integration, rate fits.
//! - [`sync`]: partial traces, trace distance, Bloch vectors, synchronization orbits.
//! - [`optimizer`]: `λ₂` maximization over edge weights under a budget.
//! - [`verify`]: the structural invariant suite behind `swapnet verify`.
//! - [`scenario`], [`report`]: file formats consumed and produced by the CLI.
//!
//! Data-parallel loops (component eigensolves, whole-graph degree scans,
//! random-state batches) run on rayon when the `parallel` feature is on, and
//! sequentially otherwise.
//!
//! Qubits are 0-based in the Rust API. File formats and text reports use
//! 1-based qubit labels.

pub mod basis;
pub mod dynamics;
mod error;
pub mod graph;
pub mod induced;
pub mod laplacian;
pub mod operators;
pub mod optimizer;
pub mod par;
pub mod random;
pub mod report;
pub mod scenario;
pub mod sync;
pub mod verify;

pub use error::{Error, Result};

/// Complex scalar used for all density matrices and Hamiltonians.
pub type C64 = num_complex::Complex64;

/// Default cap on `n` for paths that materialize the Laplacian or dense states.
pub const DEFAULT_DENSE_CAP: usize = 8;

/// Hard cap on `n` for combinatorial paths over the implicit induced graph.
pub const STRUCTURAL_CAP: usize = 12;
