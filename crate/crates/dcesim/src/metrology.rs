//! Quantum Fisher information of the cavity field: phase estimation,
//! quadrature-displacement estimation, and the squeezed-vacuum ratio.
//!
//! All quantities use the normalization
//!
//!   F_ph   = ½ Σ_{i,j} (p_i−p_j)²/(p_i+p_j) |⟨i|n̂|j⟩|²
//!   F_disp = Σ_{i,j} (p_i−p_j)²/(p_i+p_j) ⟨i|x⁽ᵏ⁾|j⟩⟨j|x⁽ˡ⁾|i⟩
//!   r      = ½ F_ph / (⟨n⟩² + ⟨n⟩)
//!   M_av   = ¼ Tr F_disp,   M_opt = ½ λ_max(F_disp)
//!
//! with x⁽¹⁾ = a + a†, x⁽²⁾ = (a − a†)/i. In this convention a pure state
//! has F_ph = Var(n), a squeezed vacuum has F_ph = 2(⟨n⟩² + ⟨n⟩) (so r = 1),
//! and every classical state obeys F_ph ≤ ⟨n⟩ and M_av, M_opt ≤ 1. It is
//! 1/4 of the SLD-based convention F = 2 Σ (p_i−p_j)²/(p_i+p_j)|⟨i|G|j⟩|²;
//! multiply by 4 to compare against that literature.
//!
//! Terms with p_i + p_j below [`P_CUT`] are skipped, not regularized. The
//! kernel (p_i−p_j)²/(p_i+p_j) is bounded by p_i + p_j, so each skipped
//! term contributes at most P_CUT·‖G‖²; the total omission is below
//! d²·P_CUT·‖G‖² per call.
//!
//! An independent check is provided by [`qfi_fidelity_oracle`], which never
//! touches the spectral formulas: it estimates the same quantity from the
//! curvature of the Uhlmann fidelity between ρ and its slightly evolved
//! copy, 2·(1 − Tr√(√ρ σ √ρ))/δ². Generator pairing for the displacement
//! entries: F_kk = 2 × oracle with generator x⁽ᵏ⁾ (the generator x⁽²⁾
//! displaces the x⁽¹⁾ quadrature by +2δ and vice versa with opposite
//! sign; the diagonal QFI entries do not depend on that sign).

use crate::hilbert::{
    adjoint, hermitian_eig, CMat, DensityMatrix, HilbertError, Operator, Space,
    SpectralDecomposition,
};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Denominator cutoff: spectral pairs with p_i + p_j below this are skipped.
pub const P_CUT: f64 = 1e-12;

/// Rank floor mixed into the state by the fidelity oracle.
pub const P_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MetrologyError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("finite-difference delta must lie in [1e-4, 1e-2], got {0}")]
    DeltaOutOfRange(f64),
    #[error("generator dimension {generator} does not match state dimension {state}")]
    GeneratorMismatch { generator: usize, state: usize },
}

/// Real symmetric 2×2 QFI matrix for quadrature displacements, indexed by
/// the pair (x⁽¹⁾, x⁽²⁾).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiDisplacementMatrix {
    xx: f64,
    xy: f64,
    yy: f64,
}

impl QfiDisplacementMatrix {
    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[self.xx, self.xy], [self.xy, self.yy]]
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Eigenvalues in ascending order (closed form for 2×2 symmetric).
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let disc = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (mean - disc, mean + disc)
    }
}

/// Phase-estimation QFI of the reduced cavity state.
pub fn qfi_phase(rho_cav: &DensityMatrix) -> Result<f64, MetrologyError> {
    expect_field(rho_cav)?;
    let spec = hermitian_eig(rho_cav.matrix())?;
    Ok(qfi_phase_spectral(&spec))
}

/// Phase-estimation QFI from a precomputed eigendecomposition of ρ_cav.
pub fn qfi_phase_spectral(spec: &SpectralDecomposition) -> f64 {
    let probs = clamped_probs(spec);
    // matrix elements of n̂ in the eigenbasis: N = V† (n̂ V)
    let v = spec.eigenvectors();
    let d = spec.dim();
    let mut nv = v.clone();
    for m in 0..d {
        let mf = C64::new(m as f64, 0.0);
        nv.row_mut(m).mapv_inplace(|z| z * mf);
    }
    let nmat = adjoint(v).dot(&nv);

    let mut total = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let denom = probs[i] + probs[j];
            if denom < P_CUT {
                continue;
            }
            let diff = probs[i] - probs[j];
            let w = diff * diff / denom;
            total += w * nmat[[i, j]].norm_sqr();
        }
    }
    // the double sum counts each unordered pair twice; the ½ prefactor
    // cancels against that
    total
}

/// Ratio r = ½ F_ph / (⟨n⟩² + ⟨n⟩) against the squeezed vacuum of equal
/// mean photon number; r = 1 marks parity, r > 1 exceeds it.
///
/// Returns `None` below ⟨n⟩ = 1e-9 rather than dividing by a vacuum.
pub fn ratio_r(f_ph: f64, n_mean: f64) -> Option<f64> {
    if n_mean < 1e-9 {
        return None;
    }
    Some(0.5 * f_ph / (n_mean * n_mean + n_mean))
}

/// Displacement-estimation QFI matrix of the reduced cavity state.
pub fn qfi_displacement(rho_cav: &DensityMatrix) -> Result<QfiDisplacementMatrix, MetrologyError> {
    expect_field(rho_cav)?;
    let spec = hermitian_eig(rho_cav.matrix())?;
    Ok(qfi_displacement_spectral(&spec))
}

/// Displacement QFI matrix from a precomputed eigendecomposition of ρ_cav.
pub fn qfi_displacement_spectral(spec: &SpectralDecomposition) -> QfiDisplacementMatrix {
    let probs = clamped_probs(spec);
    let v = spec.eigenvectors();
    let d = spec.dim();

    // x⁽¹⁾V and x⁽²⁾V by ladder shifts: (x⁽¹⁾V)[m] = √m V[m−1] + √(m+1) V[m+1],
    // (x⁽²⁾V)[m] = i√m V[m−1] − i√(m+1) V[m+1]
    let mut x1v: CMat = Array2::zeros((d, d));
    let mut x2v: CMat = Array2::zeros((d, d));
    for m in 0..d {
        let sm = (m as f64).sqrt();
        let sp = ((m + 1) as f64).sqrt();
        for k in 0..d {
            let mut acc1 = C64::new(0.0, 0.0);
            let mut acc2 = C64::new(0.0, 0.0);
            if m > 0 {
                let lo = v[[m - 1, k]];
                acc1 += lo * sm;
                acc2 += C64::new(0.0, sm) * lo;
            }
            if m + 1 < d {
                let hi = v[[m + 1, k]];
                acc1 += hi * sp;
                acc2 += C64::new(0.0, -sp) * hi;
            }
            x1v[[m, k]] = acc1;
            x2v[[m, k]] = acc2;
        }
    }
    let vdag = adjoint(v);
    let x1 = vdag.dot(&x1v);
    let x2 = vdag.dot(&x2v);

    let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
    for i in 0..d {
        for j in (i + 1)..d {
            let denom = probs[i] + probs[j];
            if denom < P_CUT {
                continue;
            }
            let diff = probs[i] - probs[j];
            let w = diff * diff / denom;
            // both (i,j) and (j,i) orderings of the pair
            xx += 2.0 * w * x1[[i, j]].norm_sqr();
            yy += 2.0 * w * x2[[i, j]].norm_sqr();
            xy += 2.0 * w * (x1[[i, j]] * x2[[i, j]].conj()).re;
        }
    }
    QfiDisplacementMatrix { xx, xy, yy }
}

/// Direction-averaged displacement sensitivity, M_av = ¼ Tr F_disp.
pub fn m_av(f: &QfiDisplacementMatrix) -> f64 {
    0.25 * f.trace()
}

/// Best-direction displacement sensitivity, M_opt = ½ λ_max(F_disp).
pub fn m_opt(f: &QfiDisplacementMatrix) -> f64 {
    0.5 * f.eigenvalues().1
}

/// Finite-difference QFI estimate from the Uhlmann fidelity, independent of
/// the spectral formulas: 2·(1 − Tr√(√ρ σ √ρ))/δ² with σ = e^{−iδG} ρ e^{iδG}.
///
/// The state is floored to full rank with [`P_FLOOR`]·I and renormalized
/// before use. Agrees with the spectral value to O(δ²); same normalization
/// (1/4 of the SLD convention) as everything else in this module.
pub fn qfi_fidelity_oracle(
    rho_cav: &DensityMatrix,
    generator: &Operator,
    delta: f64,
) -> Result<f64, MetrologyError> {
    if !(1e-4..=1e-2).contains(&delta) {
        return Err(MetrologyError::DeltaOutOfRange(delta));
    }
    let d = rho_cav.dim();
    if generator.dim() != d {
        return Err(MetrologyError::GeneratorMismatch {
            generator: generator.dim(),
            state: d,
        });
    }

    // rank regularization
    let scale = 1.0 / (1.0 + d as f64 * P_FLOOR);
    let mut reg = rho_cav.matrix().clone();
    for i in 0..d {
        reg[[i, i]] += C64::new(P_FLOOR, 0.0);
    }
    reg.mapv_inplace(|z| z * scale);

    // e^{−iδG} via the generator's eigenbasis
    let gspec = hermitian_eig(generator.matrix())?;
    let u = phase_function(&gspec, |lam| {
        let ph = -delta * lam;
        C64::new(ph.cos(), ph.sin())
    });

    // √ρ from the regularized spectrum; √σ = U √ρ U† since σ = U ρ U†
    let rspec = hermitian_eig(&reg)?;
    let sqrt_rho = phase_function(&rspec, |lam| C64::new(lam.max(0.0).sqrt(), 0.0));
    let sqrt_sigma = u.dot(&sqrt_rho).dot(&adjoint(&u));

    // Tr√(√ρ σ √ρ) = Σ singular values of √σ·√ρ. Going through singular
    // values instead of eigenvalues of √ρσ√ρ keeps the tiny rank-floor
    // contributions above the floating-point noise that squaring them
    // into eigenvalues would bury.
    let b = sqrt_sigma.dot(&sqrt_rho);
    let nb = nalgebra::DMatrix::from_fn(d, d, |i, j| b[[i, j]]);
    let svd = nb
        .try_svd(false, false, f64::EPSILON, 200 * d.max(8))
        .ok_or(HilbertError::EigNonConvergence { dim: d })?;
    let sqrt_fidelity: f64 = svd.singular_values.iter().sum();

    Ok(2.0 * (1.0 - sqrt_fidelity) / (delta * delta))
}

/// V f(λ) V† for a Hermitian matrix given its eigendecomposition.
fn phase_function(spec: &SpectralDecomposition, f: impl Fn(f64) -> C64) -> CMat {
    let v = spec.eigenvectors();
    let mut scaled = v.clone();
    for (k, lam) in spec.eigenvalues().iter().enumerate() {
        let fv = f(*lam);
        scaled
            .slice_mut(ndarray::s![.., k])
            .mapv_inplace(|z| z * fv);
    }
    scaled.dot(&adjoint(v))
}

fn clamped_probs(spec: &SpectralDecomposition) -> Vec<f64> {
    spec.eigenvalues()
        .iter()
        .map(|lam| lam.clamp(0.0, 1.0))
        .collect()
}

fn expect_field(rho: &DensityMatrix) -> Result<(), MetrologyError> {
    if rho.space() != Space::Field {
        return Err(MetrologyError::Hilbert(HilbertError::SpaceMismatch {
            context: "metrology operates on the reduced cavity state",
            expected: Space::Field,
            got: rho.space(),
        }));
    }
    Ok(())
}
