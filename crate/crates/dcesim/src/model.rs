//! Time-dependent quantum Rabi Hamiltonian
//!
//!   H(t) = Ω(t)/2 σ_z + ν n + g (a + a†)(σ₊ + σ₋),
//!
//! with the qubit frequency modulated as Ω(t) = Ω₀ + ε sin[η(t)·t] and a
//! slow linear chirp of the modulation frequency, η(t) = η₀ + α t. The
//! full counter-rotating coupling is kept; there is no rotating-wave
//! approximation anywhere in the production path.
//!
//! Units: ν sets the scale (ν = 1 in all presets), so times are in 1/ν,
//! frequencies and rates in ν, and the chirp rate α in ν².

use crate::hilbert::{
    fock_ladder, lift_field, lift_qubit, qubit_ops, HilbertConfig, Operator, Space,
};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("resonator frequency must be positive, got nu = {0}")]
    NonPositiveNu(f64),
    #[error("{name} must be non-negative, got {value}")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("modulation amplitude must satisfy eps < omega0, got eps = {eps}, omega0 = {omega0}")]
    ModulationTooStrong { eps: f64, omega0: f64 },
}

/// All physical constants of the model, in units of ν and ν².
///
/// The three rates enter the master equation as written: γ damps the qubit
/// through σ₋, γ_φ dephases it through σ_z, κ damps the cavity through a.
/// Zero-temperature reservoirs are assumed throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Resonator angular frequency (the unit scale; 1.0 in all presets).
    pub nu: f64,
    /// Qubit–field coupling g.
    pub g: f64,
    /// Bare qubit frequency Ω₀.
    pub omega0: f64,
    /// Modulation amplitude ε (absolute, not relative to Ω₀).
    pub eps: f64,
    /// Initial modulation frequency η₀.
    pub eta0: f64,
    /// Chirp rate α; may be negative.
    pub alpha: f64,
    /// Qubit damping rate γ.
    pub gamma: f64,
    /// Pure dephasing rate γ_φ.
    pub gamma_phi: f64,
    /// Cavity damping rate κ.
    pub kappa: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.nu > 0.0) {
            return Err(ModelError::NonPositiveNu(self.nu));
        }
        for (name, value) in [
            ("g", self.g),
            ("eps", self.eps),
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
            ("kappa", self.kappa),
        ] {
            if !(value >= 0.0) {
                return Err(ModelError::NegativeParameter { name, value });
            }
        }
        if !(self.eps < self.omega0) {
            return Err(ModelError::ModulationTooStrong {
                eps: self.eps,
                omega0: self.omega0,
            });
        }
        Ok(())
    }

    /// Advisory warnings that do not invalidate the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.eps > 0.2 * self.omega0 {
            out.push(format!(
                "modulation amplitude eps = {} exceeds 0.2*omega0 = {}; \
                 the weak-modulation regime assumes eps << omega0",
                self.eps,
                0.2 * self.omega0
            ));
        }
        out
    }

    /// Same parameters with all three dissipation rates set to zero.
    pub fn without_dissipation(&self) -> Self {
        Self {
            gamma: 0.0,
            gamma_phi: 0.0,
            kappa: 0.0,
            ..*self
        }
    }
}

/// Instantaneous modulation frequency η(t) = η₀ + α t.
pub fn modulation_frequency(t: f64, p: &SystemParams) -> f64 {
    p.eta0 + p.alpha * t
}

/// Instantaneous qubit frequency Ω(t) = Ω₀ + ε sin[η(t)·t].
///
/// The phase argument is η(t)·t, not ∫η dt; for a chirped modulation the
/// two differ and the former is the modulation actually applied.
pub fn qubit_frequency(t: f64, p: &SystemParams) -> f64 {
    p.omega0 + p.eps * (modulation_frequency(t, p) * t).sin()
}

/// Rabi Hamiltonian at time t on the truncated composite space.
///
/// Hermitian by construction (every term is assembled from exactly
/// symmetric real matrices), and a function of t only through Ω(t): two
/// times with equal Ω yield bitwise identical matrices.
pub fn hamiltonian(t: f64, p: &SystemParams, config: &HilbertConfig) -> Operator {
    hamiltonian_for_omega(qubit_frequency(t, p), p, config)
}

pub(crate) fn hamiltonian_for_omega(
    omega: f64,
    p: &SystemParams,
    config: &HilbertConfig,
) -> Operator {
    let (sz, sp, sm) = qubit_ops();
    let (a, adag, num) = fock_ladder(config);

    let sx = Operator::new(sp.matrix() + sm.matrix(), Space::Qubit, config)
        .expect("2x2 qubit operator");
    let x = Operator::new(a.matrix() + adag.matrix(), Space::Field, config)
        .expect("field quadrature");

    let zq = lift_qubit(&sz, config).expect("lift sigma_z");
    let nf = lift_field(&num, config).expect("lift number operator");
    let coupling = crate::hilbert::tensor(&sx, &x).expect("coupling term");

    let half_omega = C64::new(0.5 * omega, 0.0);
    let nu = C64::new(p.nu, 0.0);
    let g = C64::new(p.g, 0.0);

    let mut h: Array2<C64> = zq.into_matrix();
    h.mapv_inplace(|z| z * half_omega);
    h.scaled_add(nu, nf.matrix());
    h.scaled_add(g, coupling.matrix());
    Operator::new(h, Space::Composite, config).expect("composite Hamiltonian")
}
