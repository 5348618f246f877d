//! Truncated qubit ⊗ field Hilbert space: ladder and Pauli operators, tensor
//! products, partial trace, partial transpose, and the Hermitian
//! eigendecomposition backing every spectral quantity in the crate.
//!
//! Conventions, fixed once here and relied on everywhere else:
//!
//! - qubit basis order (|e⟩, |g⟩), so σ_z = diag(+1, −1);
//! - composite index is qubit-major: |q, m⟩ ↦ q·N + m for truncation N;
//! - all storage is dense row-major `Array2<Complex64>`.

use ndarray::{linalg::kron, s, Array2};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMat = Array2<C64>;

/// Index of |e⟩ in the qubit basis.
pub const EXCITED: usize = 0;
/// Index of |g⟩ in the qubit basis.
pub const GROUND: usize = 1;
/// Qubit dimension is fixed; only the field truncation varies.
pub const QUBIT_DIM: usize = 2;

/// Number of top Fock levels watched by the truncation tail monitor.
pub const TAIL_LEVELS: usize = 5;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("field truncation must satisfy n_fock >= 2, got {0}")]
    TruncationTooSmall(usize),
    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{context}: expected a {expected:?}-space matrix, got {got:?}")]
    SpaceMismatch {
        context: &'static str,
        expected: Space,
        got: Space,
    },
    #[error("matrix is not Hermitian: max|M - M†| = {drift:.3e} exceeds {tol:.1e}")]
    NotHermitian { drift: f64, tol: f64 },
    #[error("trace deviates from one by {error:.3e} (tolerance {tol:.1e})")]
    TraceNotOne { error: f64, tol: f64 },
    #[error("matrix has eigenvalue {min_eigenvalue:.3e} below -{tol:.1e}")]
    NotPositive { min_eigenvalue: f64, tol: f64 },
    #[error("Hermitian eigensolver did not converge on a {dim}x{dim} matrix")]
    EigNonConvergence { dim: usize },
}

/// Which factor of the qubit ⊗ field space a matrix lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Qubit,
    Field,
    Composite,
}

/// Dimensions of the truncated composite space.
///
/// The field keeps Fock states |0⟩..|N−1⟩; the composite dimension is 2N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertConfig {
    n_fock: usize,
}

impl HilbertConfig {
    pub fn new(n_fock: usize) -> Result<Self, HilbertError> {
        if n_fock < 2 {
            return Err(HilbertError::TruncationTooSmall(n_fock));
        }
        Ok(Self { n_fock })
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn total_dim(&self) -> usize {
        QUBIT_DIM * self.n_fock
    }

    pub fn dim_of(&self, space: Space) -> usize {
        match space {
            Space::Qubit => QUBIT_DIM,
            Space::Field => self.n_fock,
            Space::Composite => self.total_dim(),
        }
    }
}

/// A dense operator tagged with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMat,
    space: Space,
}

impl Operator {
    /// Wrap a matrix, checking squareness and the space/dimension pairing
    /// under `config`.
    pub fn new(matrix: CMat, space: Space, config: &HilbertConfig) -> Result<Self, HilbertError> {
        let (r, c) = matrix.dim();
        if r != c {
            return Err(HilbertError::DimensionMismatch {
                context: "operator must be square",
                expected: r,
                got: c,
            });
        }
        let expected = config.dim_of(space);
        if r != expected {
            return Err(HilbertError::DimensionMismatch {
                context: "operator dimension does not match its space tag",
                expected,
                got: r,
            });
        }
        Ok(Self { matrix, space })
    }

    pub(crate) fn raw(matrix: CMat, space: Space) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix, space }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Operator {
        Operator {
            matrix: adjoint(&self.matrix),
            space: self.space,
        }
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite within
/// tolerances.
///
/// Construction through [`DensityMatrix::new`] verifies all three
/// invariants (the positivity check costs one eigendecomposition); states
/// produced internally by trace-preserving maps reuse the already-verified
/// invariants of their inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
    space: Space,
}

impl DensityMatrix {
    /// Hermiticity tolerance (max-norm of M − M†).
    pub const TOL_HERM: f64 = 1e-10;
    /// Trace tolerance (|Tr M − 1|).
    pub const TOL_TRACE: f64 = 1e-8;
    /// Positivity tolerance (eigenvalues above −TOL_POS).
    pub const TOL_POS: f64 = 1e-9;

    pub fn new(matrix: CMat, space: Space) -> Result<Self, HilbertError> {
        Self::with_tolerances(matrix, space, Self::TOL_HERM, Self::TOL_TRACE, Self::TOL_POS)
    }

    pub fn with_tolerances(
        matrix: CMat,
        space: Space,
        tol_herm: f64,
        tol_trace: f64,
        tol_pos: f64,
    ) -> Result<Self, HilbertError> {
        let (r, c) = matrix.dim();
        if r != c {
            return Err(HilbertError::DimensionMismatch {
                context: "density matrix must be square",
                expected: r,
                got: c,
            });
        }
        let dim_ok = match space {
            Space::Qubit => r == QUBIT_DIM,
            Space::Field => r >= 2,
            Space::Composite => r >= 2 * QUBIT_DIM && r % QUBIT_DIM == 0,
        };
        if !dim_ok {
            return Err(HilbertError::DimensionMismatch {
                context: "density matrix dimension is inconsistent with its space tag",
                expected: QUBIT_DIM,
                got: r,
            });
        }
        let drift = hermiticity_drift(&matrix);
        if drift > tol_herm {
            return Err(HilbertError::NotHermitian { drift, tol: tol_herm });
        }
        let tr = trace(&matrix);
        let tr_err = (tr - C64::new(1.0, 0.0)).norm();
        if tr_err > tol_trace {
            return Err(HilbertError::TraceNotOne {
                error: tr_err,
                tol: tol_trace,
            });
        }
        let eig = hermitian_eig(&matrix)?;
        let min = eig.min_eigenvalue();
        if min < -tol_pos {
            return Err(HilbertError::NotPositive {
                min_eigenvalue: min,
                tol: tol_pos,
            });
        }
        Ok(Self { matrix, space })
    }

    /// Internal constructor for matrices whose invariants are guaranteed by
    /// the producing map (partial traces of valid states, checked
    /// integration snapshots).
    pub(crate) fn trusted(matrix: CMat, space: Space) -> Self {
        Self { matrix, space }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Eigenvalues (ascending) and column-orthonormal eigenvectors of a
/// Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Ascending real eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as matrix columns, ordered like the eigenvalues.
    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// V · diag(λ) · V†, for verifying the decomposition.
    pub fn reconstruct(&self) -> CMat {
        let d = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            scaled
                .slice_mut(s![.., k])
                .mapv_inplace(|z| z * C64::new(*lam, 0.0));
        }
        let vdag = adjoint(&self.eigenvectors);
        let mut out = Array2::zeros((d, d));
        ndarray::linalg::general_mat_mul(C64::new(1.0, 0.0), &scaled, &vdag, C64::new(0.0, 0.0), &mut out);
        out
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized as (M + M†)/2 before factorization; inputs
/// whose anti-Hermitian part exceeds [`DensityMatrix::TOL_HERM`] relative
/// to their scale are rejected rather than silently repaired.
pub fn hermitian_eig(m: &CMat) -> Result<SpectralDecomposition, HilbertError> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(HilbertError::DimensionMismatch {
            context: "hermitian_eig needs a square matrix",
            expected: d,
            got: m.ncols(),
        });
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let drift = hermiticity_drift(m);
    if drift > DensityMatrix::TOL_HERM * scale {
        return Err(HilbertError::NotHermitian {
            drift,
            tol: DensityMatrix::TOL_HERM * scale,
        });
    }
    let sym = symmetrize(m);
    let na = nalgebra::DMatrix::from_fn(d, d, |i, j| sym[[i, j]]);
    let eig = na
        .try_symmetric_eigen(f64::EPSILON, 200 * d.max(8))
        .ok_or(HilbertError::EigNonConvergence { dim: d })?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = Array2::zeros((d, d));
    for (col, &k) in order.iter().enumerate() {
        for i in 0..d {
            eigenvectors[[i, col]] = eig.eigenvectors[(i, k)];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Field annihilation, creation and number operators on the truncated
/// space: ⟨m−1|a|m⟩ = √m, a† its conjugate transpose, n = diag(0..N−1).
pub fn fock_ladder(config: &HilbertConfig) -> (Operator, Operator, Operator) {
    let n = config.n_fock();
    let mut a = Array2::zeros((n, n));
    for m in 1..n {
        a[[m - 1, m]] = C64::new((m as f64).sqrt(), 0.0);
    }
    let a_dagger = adjoint(&a);
    let mut num = Array2::zeros((n, n));
    for m in 0..n {
        num[[m, m]] = C64::new(m as f64, 0.0);
    }
    (
        Operator::raw(a, Space::Field),
        Operator::raw(a_dagger, Space::Field),
        Operator::raw(num, Space::Field),
    )
}

/// Quadrature pair x⁽¹⁾ = a + a†, x⁽²⁾ = (a − a†)/i on the truncated field.
pub fn quadratures(config: &HilbertConfig) -> (Operator, Operator) {
    let n = config.n_fock();
    let mut x1 = Array2::zeros((n, n));
    let mut x2 = Array2::zeros((n, n));
    for m in 1..n {
        let s = (m as f64).sqrt();
        x1[[m - 1, m]] = C64::new(s, 0.0);
        x1[[m, m - 1]] = C64::new(s, 0.0);
        x2[[m - 1, m]] = C64::new(0.0, -s);
        x2[[m, m - 1]] = C64::new(0.0, s);
    }
    (
        Operator::raw(x1, Space::Field),
        Operator::raw(x2, Space::Field),
    )
}

/// Qubit operators in basis order (|e⟩, |g⟩): σ_z = |e⟩⟨e| − |g⟩⟨g|,
/// σ₊ = |e⟩⟨g|, σ₋ = σ₊†.
pub fn qubit_ops() -> (Operator, Operator, Operator) {
    let one = C64::new(1.0, 0.0);
    let mut sz = Array2::zeros((2, 2));
    sz[[EXCITED, EXCITED]] = one;
    sz[[GROUND, GROUND]] = -one;
    let mut sp = Array2::zeros((2, 2));
    sp[[EXCITED, GROUND]] = one;
    let mut sm = Array2::zeros((2, 2));
    sm[[GROUND, EXCITED]] = one;
    (
        Operator::raw(sz, Space::Qubit),
        Operator::raw(sp, Space::Qubit),
        Operator::raw(sm, Space::Qubit),
    )
}

/// Identity operator on the requested space.
pub fn identity(space: Space, config: &HilbertConfig) -> Operator {
    Operator::raw(CMat::eye(config.dim_of(space)), space)
}

/// Kronecker product in the fixed qubit ⊗ field order.
pub fn tensor(q: &Operator, f: &Operator) -> Result<Operator, HilbertError> {
    if q.space() != Space::Qubit {
        return Err(HilbertError::SpaceMismatch {
            context: "tensor: first factor",
            expected: Space::Qubit,
            got: q.space(),
        });
    }
    if f.space() != Space::Field {
        return Err(HilbertError::SpaceMismatch {
            context: "tensor: second factor",
            expected: Space::Field,
            got: f.space(),
        });
    }
    Ok(Operator::raw(kron(q.matrix(), f.matrix()), Space::Composite))
}

/// Lift a qubit operator to the composite space as q ⊗ I_N.
pub fn lift_qubit(q: &Operator, config: &HilbertConfig) -> Result<Operator, HilbertError> {
    tensor(q, &identity(Space::Field, config))
}

/// Lift a field operator to the composite space as I₂ ⊗ f.
pub fn lift_field(f: &Operator, config: &HilbertConfig) -> Result<Operator, HilbertError> {
    tensor(&identity(Space::Qubit, config), f)
}

/// Reduced cavity state Tr_qubit[ρ].
pub fn partial_trace_qubit(rho: &DensityMatrix) -> Result<DensityMatrix, HilbertError> {
    if rho.space() != Space::Composite {
        return Err(HilbertError::SpaceMismatch {
            context: "partial_trace_qubit",
            expected: Space::Composite,
            got: rho.space(),
        });
    }
    let n = rho.dim() / QUBIT_DIM;
    let m = rho.matrix();
    let mut out: CMat = Array2::zeros((n, n));
    for q in 0..QUBIT_DIM {
        let block = m.slice(s![q * n..(q + 1) * n, q * n..(q + 1) * n]);
        out += &block;
    }
    // Linear, trace-preserving and positivity-preserving: invariants carry
    // over from the composite state.
    Ok(DensityMatrix::trusted(out, Space::Field))
}

/// Partial transpose on the qubit index.
///
/// Returns a plain matrix: the result is Hermitian and trace one but in
/// general not positive, which is exactly what the negativity probes.
pub fn partial_transpose(rho: &DensityMatrix) -> Result<CMat, HilbertError> {
    if rho.space() != Space::Composite {
        return Err(HilbertError::SpaceMismatch {
            context: "partial_transpose",
            expected: Space::Composite,
            got: rho.space(),
        });
    }
    let d = rho.dim();
    let n = d / QUBIT_DIM;
    let m = rho.matrix();
    let mut out: CMat = Array2::zeros((d, d));
    for q in 0..QUBIT_DIM {
        for qp in 0..QUBIT_DIM {
            // (q,m),(q',n) <- (q',m),(q,n): transpose the qubit index only.
            let src = m.slice(s![qp * n..(qp + 1) * n, q * n..(q + 1) * n]);
            out.slice_mut(s![q * n..(q + 1) * n, qp * n..(qp + 1) * n])
                .assign(&src);
        }
    }
    Ok(out)
}

/// Tr M.
pub fn trace(m: &CMat) -> C64 {
    m.diag().sum()
}

/// max |M − M†| over entries.
pub fn hermiticity_drift(m: &CMat) -> f64 {
    let d = m.nrows();
    let mut drift: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            drift = drift.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    drift
}

/// (M + M†)/2.
pub fn symmetrize(m: &CMat) -> CMat {
    let d = m.nrows();
    let half = C64::new(0.5, 0.0);
    Array2::from_shape_fn((d, d), |(i, j)| (m[[i, j]] + m[[j, i]].conj()) * half)
}

pub(crate) fn adjoint(m: &CMat) -> CMat {
    let (r, c) = m.dim();
    Array2::from_shape_fn((c, r), |(i, j)| m[[j, i]].conj())
}
