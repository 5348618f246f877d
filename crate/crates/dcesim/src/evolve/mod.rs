//! Integration of the GKSL master equation with the time-dependent Rabi
//! Hamiltonian: adaptive Verner 6(5) stepping, optional rotating frame,
//! dense-output sampling on a fixed stride, and per-sample numerical
//! hygiene (trace drift, Hermiticity drift, positivity, truncation tail).
//!
//! The integrator never renormalizes or projects the state; all four
//! diagnostics are recorded and *enforced* at sample times, so a run that
//! degrades numerically fails loudly instead of producing repaired data.
//! The state is symmetrized once per sample, for analysis only — the
//! stepper always continues from its own raw state.

mod checkpoint;
mod rhs;
mod verner65;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CheckpointError};
pub use rhs::{dissipator, master_rhs};

use crate::hilbert::{
    CMat, DensityMatrix, HilbertConfig, HilbertError, Space, GROUND, QUBIT_DIM, TAIL_LEVELS,
};
use crate::metrology;
use crate::model::SystemParams;
use crate::observables::{self, PhotonDistribution};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rhs::LindbladRhs;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use verner65::{StepControl, VernerStepper};

/// Trace error above which a run is aborted.
pub const TRACE_ERROR_LIMIT: f64 = 1e-5;
/// Hermiticity drift above which a run is aborted.
pub const HERMITICITY_LIMIT: f64 = 1e-9;
/// Most negative state eigenvalue tolerated at a sample time.
pub const MIN_EIGENVALUE_LIMIT: f64 = -1e-7;
/// Combined population of the top [`TAIL_LEVELS`] Fock levels above which
/// the truncation is declared broken.
pub const TAIL_LIMIT: f64 = 1e-6;
/// Smallest step size before the integration is declared stalled.
pub const STEP_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("step size underflow at t = {t}: dt = {step:.3e}")]
    StepUnderflow { t: f64, step: f64 },
    #[error("truncation tail breach at t = {t}: top-level population {population:.3e} > {TAIL_LIMIT:.0e}")]
    TailBreach { t: f64, population: f64 },
    #[error("positivity loss at t = {t}: min eigenvalue {min_eigenvalue:.3e}")]
    PositivityLoss { t: f64, min_eigenvalue: f64 },
    #[error("trace drift at t = {t}: |Tr rho - 1| = {trace_error:.3e}")]
    TraceDrift { t: f64, trace_error: f64 },
    #[error("hermiticity drift at t = {t}: max|rho - rho†| = {drift:.3e}")]
    HermiticityDrift { t: f64, drift: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Metrology(#[from] metrology::MetrologyError),
    #[error("aborted by observer")]
    Aborted,
}

/// Frame the integrator works in.
///
/// Observables are invariant between the two: the rotating frame is a pure
/// change of variables by the local unitary U(t) = exp[−it(νn̂ + Ω₀σ_z/2)],
/// which commutes with n̂, σ_z, the partial trace and the spectra entering
/// the QFI and negativity. The lab frame is the default; the rotating frame
/// removes the νn̂ diagonal and typically cuts the step count by an order
/// of magnitude at large truncations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    Rotating,
}

impl std::fmt::Display for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frame::Lab => write!(f, "lab"),
            Frame::Rotating => write!(f, "rotating"),
        }
    }
}

/// Adaptive-integration controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Relative tolerance of the embedded error estimate.
    pub rtol: f64,
    /// Absolute tolerance of the embedded error estimate.
    pub atol: f64,
    /// Upper bound on the step size, in 1/ν.
    pub max_step: f64,
    /// First attempted step; the controller adapts from there.
    pub initial_step: f64,
    /// End of the integration window, in 1/ν.
    pub t_final: f64,
    /// Observer spacing Δt; samples fall on every multiple.
    pub sample_stride: f64,
    pub frame: Frame,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: 5.0,
            initial_step: 1e-3,
            t_final: 3.0e4,
            sample_stride: 20.0,
            frame: Frame::Lab,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |msg: String| Err(EvolveError::InvalidConfig(msg));
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return bad(format!("tolerances must be positive: rtol={}, atol={}", self.rtol, self.atol));
        }
        if !(self.t_final >= 0.0) {
            return bad(format!("t_final must be non-negative, got {}", self.t_final));
        }
        if !(self.sample_stride > 0.0) {
            return bad(format!("sample_stride must be positive, got {}", self.sample_stride));
        }
        if !(self.max_step > 0.0) || !(self.initial_step > 0.0) {
            return bad(format!(
                "steps must be positive: max_step={}, initial_step={}",
                self.max_step, self.initial_step
            ));
        }
        Ok(())
    }
}

/// Numerical-hygiene readings taken at a sample time, before any
/// symmetrization or clamping.
#[derive(Debug, Clone, Copy)]
pub struct SampleDiagnostics {
    /// |Tr ρ − 1| of the raw integrated state.
    pub trace_error: f64,
    /// max|ρ − ρ†| of the raw integrated state.
    pub hermiticity_drift: f64,
    /// Population of the top [`TAIL_LEVELS`] Fock levels.
    pub tail_population: f64,
    /// Smallest eigenvalue of the symmetrized state.
    pub min_eigenvalue: f64,
}

/// One sampled state handed to the observer.
pub struct Sample<'a> {
    pub t: f64,
    /// Symmetrized snapshot in the integration frame. Every scalar reported
    /// by this crate is frame-invariant, so no back-transformation is
    /// needed (or performed) for analysis.
    pub rho: &'a DensityMatrix,
    pub diagnostics: SampleDiagnostics,
    /// Current integrator step size; stored in checkpoints so a resumed
    /// run restarts its controller sensibly.
    pub step_size: f64,
}

/// Terminal state of an integration.
pub struct FinalState {
    pub t: f64,
    pub frame: Frame,
    /// Raw (unsymmetrized) state in the integration frame.
    pub state: CMat,
    /// Last accepted step size.
    pub step: f64,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub rhs_evals: u64,
}

impl FinalState {
    /// Symmetrized density matrix of the final state.
    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::trusted(crate::hilbert::symmetrize(&self.state), Space::Composite)
    }
}

/// Everything reported at one sample time.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub p_e: f64,
    pub n_mean: f64,
    pub n_std: f64,
    pub s_l: f64,
    pub negativity: f64,
    pub f_ph: f64,
    /// Squeezed-vacuum ratio; absent while the cavity is effectively empty.
    pub r: Option<f64>,
    pub m_av: f64,
    pub m_opt: f64,
    pub trace_error: f64,
    pub tail_population: f64,
    /// Present only at explicitly requested snapshot times.
    pub photon_distribution: Option<PhotonDistribution>,
}

impl TrajectoryRecord {
    /// Measure all observables and metrology scalars on a sample.
    ///
    /// One eigendecomposition of the reduced cavity state feeds both QFI
    /// quantities; the negativity runs its own on the partial transpose.
    pub fn measure(sample: &Sample<'_>, with_distribution: bool) -> Result<Self, EvolveError> {
        let rho = sample.rho;
        let p_e = observables::atomic_excitation(rho);
        let rho_cav = crate::hilbert::partial_trace_qubit(rho)?;
        let (n_mean, n_std) = observables::photon_moments(&rho_cav);
        let s_l = observables::linear_entropy(&rho_cav);
        let negativity = observables::negativity(rho)?;
        let spec = crate::hilbert::hermitian_eig(rho_cav.matrix())?;
        let f_ph = metrology::qfi_phase_spectral(&spec);
        let f_disp = metrology::qfi_displacement_spectral(&spec);
        let m_av = metrology::m_av(&f_disp);
        let m_opt = metrology::m_opt(&f_disp);
        let r = metrology::ratio_r(f_ph, n_mean);
        let photon_distribution =
            with_distribution.then(|| observables::photon_distribution(&rho_cav, sample.t));
        Ok(Self {
            t: sample.t,
            p_e,
            n_mean,
            n_std,
            s_l,
            negativity,
            f_ph,
            r,
            m_av,
            m_opt,
            trace_error: sample.diagnostics.trace_error,
            tail_population: sample.diagnostics.tail_population,
            photon_distribution,
        })
    }
}

/// A fully recorded integration.
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub final_state: FinalState,
}

/// State needed to continue an interrupted integration.
pub struct ResumePoint {
    pub t: f64,
    pub step: f64,
    pub state: CMat,
    pub frame: Frame,
}

/// ρ → U†(t) ρ U(t) with U(t) = exp[−it(ν n̂ + Ω₀ σ_z/2)].
pub fn to_rotating_frame(rho: &DensityMatrix, t: f64, p: &SystemParams) -> DensityMatrix {
    frame_conjugate(rho, t, p, 1.0)
}

/// Inverse of [`to_rotating_frame`].
pub fn from_rotating_frame(rho: &DensityMatrix, t: f64, p: &SystemParams) -> DensityMatrix {
    frame_conjugate(rho, t, p, -1.0)
}

fn frame_conjugate(rho: &DensityMatrix, t: f64, p: &SystemParams, sign: f64) -> DensityMatrix {
    assert_eq!(rho.space(), Space::Composite);
    let d = rho.dim();
    let n = d / QUBIT_DIM;
    let phases: Vec<C64> = (0..d)
        .map(|i| {
            let (q, m) = (i / n, i % n);
            let sz = if q == GROUND { -1.0 } else { 1.0 };
            let k = p.nu * m as f64 + 0.5 * sz * p.omega0;
            C64::from_polar(1.0, sign * k * t)
        })
        .collect();
    let out = Array2::from_shape_fn((d, d), |(i, j)| phases[i] * rho.matrix()[[i, j]] * phases[j].conj());
    DensityMatrix::trusted(out, Space::Composite)
}

/// Integrate from |g,0⟩-like initial data at t = 0, calling `observer` at
/// every multiple of the sample stride (including t = 0 and, when it falls
/// on the grid, t_final). The returned final state is raw and unsampled.
///
/// For `frame = Rotating` the initial state is taken as given (the frame
/// transformation at t = 0 is the identity) and all evolution, samples and
/// checkpoints stay in that frame.
pub fn integrate_with<F>(
    rho0: &DensityMatrix,
    p: &SystemParams,
    hc: &HilbertConfig,
    ic: &IntegratorConfig,
    observer: F,
) -> Result<FinalState, EvolveError>
where
    F: FnMut(&Sample<'_>) -> Result<(), EvolveError>,
{
    p.validate()
        .map_err(|e| EvolveError::InvalidConfig(e.to_string()))?;
    ic.validate()?;
    if rho0.space() != Space::Composite || rho0.dim() != hc.total_dim() {
        return Err(EvolveError::InvalidConfig(format!(
            "initial state must live on the composite space of dimension {}, got {:?}/{}",
            hc.total_dim(),
            rho0.space(),
            rho0.dim()
        )));
    }
    let y0 = rho0
        .matrix()
        .as_slice()
        .expect("standard layout")
        .to_vec();
    run_loop(y0, 0.0, ic.initial_step, p, hc, ic, true, observer)
}

/// Continue an integration from a checkpointed state; samples resume at
/// the first stride multiple past the resume time.
pub fn resume_with<F>(
    start: ResumePoint,
    p: &SystemParams,
    hc: &HilbertConfig,
    ic: &IntegratorConfig,
    observer: F,
) -> Result<FinalState, EvolveError>
where
    F: FnMut(&Sample<'_>) -> Result<(), EvolveError>,
{
    p.validate()
        .map_err(|e| EvolveError::InvalidConfig(e.to_string()))?;
    ic.validate()?;
    if start.frame != ic.frame {
        return Err(EvolveError::InvalidConfig(format!(
            "checkpoint frame {} does not match configured frame {}",
            start.frame, ic.frame
        )));
    }
    if start.state.nrows() != hc.total_dim() {
        return Err(EvolveError::InvalidConfig(format!(
            "checkpoint dimension {} does not match n_fock {}",
            start.state.nrows(),
            hc.n_fock()
        )));
    }
    let y0 = start
        .state
        .as_slice()
        .expect("standard layout")
        .to_vec();
    let h0 = if start.step > 0.0 { start.step } else { ic.initial_step };
    run_loop(y0, start.t, h0, p, hc, ic, false, observer)
}

/// Convenience wrapper over [`integrate_with`] that measures a
/// [`TrajectoryRecord`] at every sample and attaches photon distributions
/// at the requested snapshot times.
pub fn integrate(
    rho0: &DensityMatrix,
    p: &SystemParams,
    hc: &HilbertConfig,
    ic: &IntegratorConfig,
    snapshot_times: &[f64],
) -> Result<Trajectory, EvolveError> {
    let mut snaps: Vec<f64> = snapshot_times.to_vec();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = 0usize;
    let mut records = Vec::new();
    let final_state = integrate_with(rho0, p, hc, ic, |sample| {
        let mut want = false;
        while next_snap < snaps.len() && sample.t >= snaps[next_snap] - 1e-9 {
            want = true;
            next_snap += 1;
        }
        records.push(TrajectoryRecord::measure(sample, want)?);
        Ok(())
    })?;
    Ok(Trajectory {
        records,
        final_state,
    })
}

fn run_loop<F>(
    y0: Vec<C64>,
    t0: f64,
    h0: f64,
    p: &SystemParams,
    hc: &HilbertConfig,
    ic: &IntegratorConfig,
    fresh_start: bool,
    mut observer: F,
) -> Result<FinalState, EvolveError>
where
    F: FnMut(&Sample<'_>) -> Result<(), EvolveError>,
{
    let n = hc.n_fock();
    let d = hc.total_dim();
    let lindblad = LindbladRhs::new(p, n, ic.frame);
    debug_assert_eq!(lindblad.dim(), d);
    let mut rhs = |t: f64, y: &[C64], out: &mut [C64]| lindblad.eval(t, y, out);

    let ctl = StepControl {
        rtol: ic.rtol,
        atol: ic.atol,
        max_step: ic.max_step,
        min_step: STEP_FLOOR,
    };
    let mut stepper = VernerStepper::new(y0, t0, h0.min(ic.max_step));
    let stride = ic.sample_stride;
    let t_end = ic.t_final;
    let time_fuzz = 1e-9 * t_end.abs().max(1.0);

    let mut next_sample: u64 = if fresh_start {
        // emit the initial state as sample zero
        let y = stepper.y().to_vec();
        emit(&y, t0, stepper.h(), n, d, &mut observer)?;
        1
    } else {
        ((t0 + time_fuzz) / stride).floor() as u64 + 1
    };

    while stepper.t() < t_end - time_fuzz {
        stepper.step(&mut rhs, &ctl, t_end)?;
        loop {
            let ts = next_sample as f64 * stride;
            if ts > stepper.t() + time_fuzz || ts > t_end + time_fuzz {
                break;
            }
            let y_at = if (ts - stepper.t()).abs() <= time_fuzz {
                stepper.y().to_vec()
            } else {
                stepper.interpolate(&mut rhs, ts).to_vec()
            };
            emit(&y_at, ts, stepper.h(), n, d, &mut observer)?;
            next_sample += 1;
        }
    }

    let state = Array2::from_shape_vec((d, d), stepper.y().to_vec()).expect("square state");
    Ok(FinalState {
        t: stepper.t(),
        frame: ic.frame,
        state,
        step: stepper.h(),
        steps_accepted: stepper.stats.accepted,
        steps_rejected: stepper.stats.rejected,
        rhs_evals: stepper.stats.rhs_evals,
    })
}

/// Check hygiene limits on a raw state, symmetrize it, and hand it to the
/// observer.
fn emit<F>(
    y: &[C64],
    t: f64,
    step: f64,
    n: usize,
    d: usize,
    observer: &mut F,
) -> Result<(), EvolveError>
where
    F: FnMut(&Sample<'_>) -> Result<(), EvolveError>,
{
    let raw = ndarray::ArrayView2::from_shape((d, d), y).expect("square state");
    let tr: C64 = raw.diag().sum();
    let trace_error = (tr - C64::new(1.0, 0.0)).norm();
    if trace_error > TRACE_ERROR_LIMIT {
        return Err(EvolveError::TraceDrift { t, trace_error });
    }
    let drift = {
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((raw[[i, j]] - raw[[j, i]].conj()).norm());
            }
        }
        worst
    };
    if drift > HERMITICITY_LIMIT {
        return Err(EvolveError::HermiticityDrift { t, drift });
    }

    let mut tail = 0.0;
    for q in 0..QUBIT_DIM {
        for m in n.saturating_sub(TAIL_LEVELS)..n {
            let idx = q * n + m;
            tail += raw[[idx, idx]].re;
        }
    }
    if tail > TAIL_LIMIT {
        return Err(EvolveError::TailBreach {
            t,
            population: tail,
        });
    }

    let half = C64::new(0.5, 0.0);
    let sym = Array2::from_shape_fn((d, d), |(i, j)| (raw[[i, j]] + raw[[j, i]].conj()) * half);
    let spec = crate::hilbert::hermitian_eig(&sym)?;
    let min_eigenvalue = spec.min_eigenvalue();
    if min_eigenvalue < MIN_EIGENVALUE_LIMIT {
        return Err(EvolveError::PositivityLoss {
            t,
            min_eigenvalue,
        });
    }

    let dm = DensityMatrix::trusted(sym, Space::Composite);
    let sample = Sample {
        t,
        rho: &dm,
        diagnostics: SampleDiagnostics {
            trace_error,
            hermiticity_drift: drift,
            tail_population: tail,
            min_eigenvalue,
        },
        step_size: step,
    };
    observer(&sample)
}
