//! Non-metrological quantities reported along a trajectory: qubit
//! excitation, photon statistics, linear entropy of the cavity field,
//! qubit–field negativity, and photon-number distributions.

use crate::hilbert::{
    hermitian_eig, partial_transpose, DensityMatrix, HilbertError, Space, EXCITED,
};

/// Photon-number distribution at one sample time.
///
/// Entries are the Fock-basis diagonal of the reduced cavity state, floored
/// at −1e-10 so that integration noise cannot produce visibly negative
/// probabilities.
#[derive(Debug, Clone)]
pub struct PhotonDistribution {
    pub probabilities: Vec<f64>,
    pub t: f64,
}

impl PhotonDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(m, p)| m as f64 * p)
            .sum()
    }
}

/// Qubit excitation probability P_e = Tr[ρ |e⟩⟨e|].
pub fn atomic_excitation(rho: &DensityMatrix) -> f64 {
    assert_eq!(rho.space(), Space::Composite, "P_e needs the composite state");
    let n = rho.dim() / 2;
    let m = rho.matrix();
    (0..n).map(|k| m[[EXCITED * n + k, EXCITED * n + k]].re).sum()
}

/// Mean photon number and its standard deviation Δn = √(⟨n²⟩ − ⟨n⟩²).
pub fn photon_moments(rho_cav: &DensityMatrix) -> (f64, f64) {
    assert_eq!(rho_cav.space(), Space::Field, "photon moments need the cavity state");
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for (m, p) in rho_cav.matrix().diag().iter().enumerate() {
        let mf = m as f64;
        n1 += mf * p.re;
        n2 += mf * mf * p.re;
    }
    (n1, (n2 - n1 * n1).max(0.0).sqrt())
}

/// Linear entropy S_L = 1 − Tr(ρ²) of the cavity state.
///
/// For Hermitian ρ, Tr(ρ²) = Σ_ij |ρ_ij|², so no matrix product is needed.
pub fn linear_entropy(rho_cav: &DensityMatrix) -> f64 {
    assert_eq!(rho_cav.space(), Space::Field, "linear entropy needs the cavity state");
    let purity: f64 = rho_cav.matrix().iter().map(|z| z.norm_sqr()).sum();
    1.0 - purity
}

/// Negativity N(ρ) = |Σ_{λ_i<0} λ_i| over the eigenvalues of the partial
/// transpose taken on the qubit index.
///
/// Either subsystem gives the same value for a bipartite state; the qubit
/// side is fixed for determinism.
pub fn negativity(rho: &DensityMatrix) -> Result<f64, HilbertError> {
    let pt = partial_transpose(rho)?;
    let eig = hermitian_eig(&pt)?;
    Ok(eig
        .eigenvalues()
        .iter()
        .filter(|&&lam| lam < 0.0)
        .map(|lam| -lam)
        .sum())
}

/// Fock-basis diagonal of the cavity state, floored at −1e-10.
pub fn photon_distribution(rho_cav: &DensityMatrix, t: f64) -> PhotonDistribution {
    assert_eq!(rho_cav.space(), Space::Field, "distribution needs the cavity state");
    let probabilities = rho_cav
        .matrix()
        .diag()
        .iter()
        .map(|p| p.re.max(-1e-10))
        .collect();
    PhotonDistribution { probabilities, t }
}
