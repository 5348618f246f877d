//! Metrology benchmarks on reference field states.
//!
//! Prints phase QFI, the squeezed-vacuum ratio r, and the displacement
//! figures M_av / M_opt for vacuum, coherent, thermal, Fock and squeezed
//! states, then cross-checks the spectral formulas against the independent
//! fidelity-curvature oracle.
//!
//!     cargo run --release --example metrology_of_states

use dcesim::hilbert::{fock_ladder, HilbertConfig};
use dcesim::metrology::{m_av, m_opt, qfi_displacement, qfi_fidelity_oracle, qfi_phase, ratio_r};
use dcesim::observables::photon_moments;
use dcesim::states;
use num_complex::Complex64 as C64;

fn main() {
    let n_fock = 80;
    let hc = HilbertConfig::new(n_fock).unwrap();

    let sv = states::squeezed_vacuum(states::squeezing_for_mean_photons(1.0), n_fock)
        .expect("tail fits at n_fock = 80");
    let cases: Vec<(&str, dcesim::DensityMatrix)> = vec![
        ("vacuum", states::vacuum(n_fock)),
        ("coherent |a|=1", states::coherent(C64::new(1.0, 0.0), n_fock)),
        ("coherent |a|=2", states::coherent(C64::new(0.0, 2.0), n_fock)),
        ("thermal n=1", states::thermal(1.0, n_fock)),
        ("fock |1>", states::fock(1, n_fock).unwrap()),
        ("fock |3>", states::fock(3, n_fock).unwrap()),
        ("squeezed n=1", sv),
    ];

    println!(
        "{:<16} {:>8} {:>10} {:>8} {:>8} {:>8}   note",
        "state", "n_mean", "F_ph", "r", "M_av", "M_opt"
    );
    for (name, dm) in &cases {
        let (n_mean, _) = photon_moments(dm);
        let f_ph = qfi_phase(dm).unwrap();
        let disp = qfi_displacement(dm).unwrap();
        let (mav, mopt) = (m_av(&disp), m_opt(&disp));
        let r = ratio_r(f_ph, n_mean);
        let note = if mav > 1.0 + 1e-9 || f_ph > n_mean + 1e-9 {
            "nonclassical"
        } else {
            "classical bound respected"
        };
        println!(
            "{:<16} {:>8.4} {:>10.4} {:>8} {:>8.4} {:>8.4}   {note}",
            name,
            n_mean,
            f_ph,
            r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
            mav,
            mopt,
        );
    }

    // squeezed vacuum saturates r = 1 by construction of the benchmark
    println!("\ncross-check against the fidelity-curvature oracle (delta = 1e-3):");
    let (_, _, num) = fock_ladder(&hc);
    for (name, dm) in cases.iter().filter(|(n, _)| *n != "thermal n=1") {
        let spectral = qfi_phase(dm).unwrap();
        let oracle = qfi_fidelity_oracle(dm, &num, 1e-3).unwrap();
        println!(
            "{:<16} spectral = {:>10.6}  oracle = {:>10.6}  |diff| = {:.2e}",
            name,
            spectral,
            oracle,
            (spectral - oracle).abs()
        );
    }
}
