//! Reference field and composite states: Fock, coherent, thermal and
//! squeezed vacuum, plus the |g,0⟩ starting point of every simulation run.
//!
//! The squeezed vacuum is built by the exact Fock-space recursion of its
//! even amplitudes rather than by exponentiating the squeeze operator; the
//! truncation tail is measured against the closed-form normalization and
//! rejected if it exceeds 1e-12.

use crate::hilbert::{CMat, DensityMatrix, HilbertConfig, Space, GROUND};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatesError {
    #[error("Fock index {m} does not fit a truncation of {n_fock} levels")]
    FockOutOfRange { m: usize, n_fock: usize },
    #[error("truncation tail {tail:.3e} exceeds 1e-12; increase n_fock")]
    TruncationTail { tail: f64 },
    #[error("mixture weights must be positive and sum to one, got {sum}")]
    BadMixture { sum: f64 },
}

/// Pure field state from (unnormalized) Fock amplitudes.
pub fn pure_state(amplitudes: &[C64]) -> DensityMatrix {
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 0.0, "zero state vector");
    let n = amplitudes.len();
    let rho = Array2::from_shape_fn((n, n), |(i, j)| {
        amplitudes[i] * amplitudes[j].conj() / (norm * norm)
    });
    DensityMatrix::trusted(rho, Space::Field)
}

/// Field vacuum |0⟩⟨0|.
pub fn vacuum(n_fock: usize) -> DensityMatrix {
    fock(0, n_fock).expect("vacuum always fits")
}

/// Fock state |m⟩⟨m|.
pub fn fock(m: usize, n_fock: usize) -> Result<DensityMatrix, StatesError> {
    if m >= n_fock {
        return Err(StatesError::FockOutOfRange { m, n_fock });
    }
    let mut amps = vec![C64::new(0.0, 0.0); n_fock];
    amps[m] = C64::new(1.0, 0.0);
    Ok(pure_state(&amps))
}

/// Coherent state |α⟩ truncated to n_fock levels and renormalized.
///
/// Amplitudes follow c_{m+1} = c_m · α/√(m+1); the truncated tail is
/// negligible whenever n_fock comfortably exceeds |α|².
pub fn coherent(alpha: C64, n_fock: usize) -> DensityMatrix {
    let mut amps = vec![C64::new(0.0, 0.0); n_fock];
    amps[0] = C64::new(1.0, 0.0);
    for m in 0..n_fock - 1 {
        amps[m + 1] = amps[m] * alpha / C64::new(((m + 1) as f64).sqrt(), 0.0);
    }
    pure_state(&amps)
}

/// Thermal state with mean occupation n̄, truncated and renormalized.
pub fn thermal(n_bar: f64, n_fock: usize) -> DensityMatrix {
    assert!(n_bar >= 0.0);
    let mut probs = vec![0.0; n_fock];
    let ratio = n_bar / (1.0 + n_bar);
    let mut p = 1.0 / (1.0 + n_bar);
    for entry in probs.iter_mut() {
        *entry = p;
        p *= ratio;
    }
    let total: f64 = probs.iter().sum();
    let rho = Array2::from_diag(&ndarray::Array1::from_iter(
        probs.iter().map(|&p| C64::new(p / total, 0.0)),
    ));
    DensityMatrix::trusted(rho, Space::Field)
}

/// Squeezed vacuum with squeezing parameter r (phase zero), mean photon
/// number sinh²r, built by the exact even-amplitude recursion
/// c_{2m} = −tanh r · √((2m−1)/(2m)) · c_{2m−2}, c_0 = 1/√cosh r.
pub fn squeezed_vacuum(r: f64, n_fock: usize) -> Result<DensityMatrix, StatesError> {
    let mut amps = vec![C64::new(0.0, 0.0); n_fock];
    let th = r.tanh();
    let mut c = 1.0 / r.cosh().sqrt();
    amps[0] = C64::new(c, 0.0);
    let mut m = 2usize;
    while m < n_fock {
        c *= -th * (((m - 1) as f64) / (m as f64)).sqrt();
        amps[m] = C64::new(c, 0.0);
        m += 2;
    }
    // c_0 normalizes the untruncated state exactly, so the missing tail is
    // one minus the retained weight.
    let retained: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let tail = 1.0 - retained;
    if tail > 1e-12 {
        return Err(StatesError::TruncationTail { tail });
    }
    Ok(pure_state(&amps))
}

/// Squeezing parameter giving mean photon number n: r = asinh(√n).
pub fn squeezing_for_mean_photons(n_mean: f64) -> f64 {
    n_mean.sqrt().asinh()
}

/// Composite ground-vacuum |g,0⟩⟨g,0|, the initial state of every run.
pub fn ground_vacuum(config: &HilbertConfig) -> DensityMatrix {
    let d = config.total_dim();
    let idx = GROUND * config.n_fock();
    let mut rho: CMat = Array2::zeros((d, d));
    rho[[idx, idx]] = C64::new(1.0, 0.0);
    DensityMatrix::trusted(rho, Space::Composite)
}

/// Convex mixture of same-space density matrices.
pub fn mix(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix, StatesError> {
    assert!(!parts.is_empty());
    let sum: f64 = parts.iter().map(|(w, _)| *w).sum();
    if (sum - 1.0).abs() > 1e-12 || parts.iter().any(|(w, _)| *w < 0.0) {
        return Err(StatesError::BadMixture { sum });
    }
    let space = parts[0].1.space();
    let d = parts[0].1.dim();
    let mut rho: CMat = Array2::zeros((d, d));
    for (w, dm) in parts {
        assert_eq!(dm.space(), space);
        rho.scaled_add(C64::new(*w, 0.0), dm.matrix());
    }
    Ok(DensityMatrix::trusted(rho, space))
}
