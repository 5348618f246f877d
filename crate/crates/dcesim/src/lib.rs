//! Simulation of a dissipative qubit–resonator system (quantum Rabi model)
//! whose qubit transition frequency is sinusoidally modulated with a slowly
//! chirped modulation frequency, together with the metrological analysis of
//! the cavity field generated from vacuum.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! model (H(t))  ──►  evolve (GKSL master equation, adaptive RK)  ──►  samples
//!                                                                      │
//!                observables (P_e, ⟨n⟩, Δn, S_L, negativity)  ◄────────┤
//!                metrology  (F_ph, r, F_disp, M_av, M_opt)    ◄────────┘
//! ```
//!
//! with `hilbert` providing the truncated qubit ⊗ field space, operator
//! algebra, partial trace/transpose and the Hermitian eigendecomposition
//! used throughout, and `driver` providing file-based run orchestration
//! (configs, presets, trajectory CSVs, snapshots, checkpoints, sweeps).
//!
//! Start with the runnable examples (`cargo run --release --example ...`):
//! each one exercises a major capability end to end. The thin `dcesim`
//! binary exposes the same machinery as `run`, `sweep`, `resume` and
//! `validate` subcommands.
//!
//! # Conventions
//!
//! - Units: the resonator frequency ν sets the scale (ν = 1 by default);
//!   times are in 1/ν, rates in ν.
//! - Qubit basis order (|e⟩, |g⟩); composite index is qubit-major,
//!   |q, m⟩ ↦ q·N + m for field truncation N.
//! - Quantum Fisher information uses the normalization in which a pure
//!   state has phase QFI equal to Var(n) and every classical state has
//!   displacement figures M_av, M_opt ≤ 1. This is 1/4 of the SLD
//!   convention F = 2 Σ (p_i−p_j)²/(p_i+p_j) |⟨i|G|j⟩|².

pub mod driver;
pub mod evolve;
pub mod hilbert;
pub mod metrology;
pub mod model;
pub mod observables;
pub mod states;

pub use hilbert::{CMat, DensityMatrix, HilbertConfig, Operator, Space, SpectralDecomposition, C64};
pub use model::SystemParams;

pub use evolve::{Frame, IntegratorConfig, Trajectory, TrajectoryRecord};
