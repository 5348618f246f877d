//! Scratch timing probe (replaced by real examples later).

use dcesim::evolve::{integrate_with, Frame, IntegratorConfig};
use dcesim::hilbert::HilbertConfig;
use dcesim::model::SystemParams;
use dcesim::states;
use std::time::Instant;

fn main() {
    let p = SystemParams {
        nu: 1.0,
        g: 0.05,
        omega0: 0.5,
        eps: 0.04,
        eta0: 2.00655,
        alpha: 2e-8,
        gamma: 1e-6,
        gamma_phi: 1e-6,
        kappa: 1e-6,
    };
    let args: Vec<String> = std::env::args().collect();
    let n_fock: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(80);
    let t_final: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1000.0);
    let frame = match args.get(3).map(|s| s.as_str()) {
        Some("lab") => Frame::Lab,
        _ => Frame::Rotating,
    };
    let hc = HilbertConfig::new(n_fock).unwrap();
    let rho0 = states::ground_vacuum(&hc);
    let ic = IntegratorConfig {
        t_final,
        sample_stride: 20.0,
        frame,
        ..Default::default()
    };
    let preset = args.get(4).map(|s| s.as_str()).unwrap_or("fig1");
    let p = match preset {
        "fig2" => SystemParams {
            eta0: 2.00715,
            alpha: -5e-8,
            ..p
        },
        "fig2u" => SystemParams {
            eta0: 2.00715,
            alpha: -5e-8,
            gamma: 0.0,
            gamma_phi: 0.0,
            kappa: 0.0,
            ..p
        },
        "fig4" => SystemParams {
            g: 0.15,
            omega0: 2.9,
            eps: 0.08 * 2.9,
            eta0: 3.931,
            alpha: 8e-7,
            ..p
        },
        // half-chirp variants: the verbatim phase (eta0 + a t)·t with a = alpha/2
        // equals the integrated phase eta0·t + alpha·t²/2 of the caption's alpha
        "fig1h" => SystemParams { alpha: 1e-8, ..p },
        "fig2h" => SystemParams {
            eta0: 2.00715,
            alpha: -2.5e-8,
            ..p
        },
        "fig4h" => SystemParams {
            g: 0.15,
            omega0: 2.9,
            eps: 0.08 * 2.9,
            eta0: 3.931,
            alpha: 4e-7,
            ..p
        },
        _ => p,
    };

    let t0 = Instant::now();
    let mut n_last = 0.0;
    let mut samples = 0u64;
    let fs = integrate_with(&rho0, &p, &hc, &ic, |sample| {
        samples += 1;
        if samples % 25 == 1 {
            let rec = dcesim::TrajectoryRecord::measure(sample, false)?;
            println!(
                "t={:8.0} P_e={:.4} n={:9.4} dn={:8.4} S_L={:.4} neg={:.4} F_ph={:10.3} r={:6.3} M_av={:9.3} M_opt={:9.3} tail={:.2e}",
                rec.t, rec.p_e, rec.n_mean, rec.n_std, rec.s_l, rec.negativity, rec.f_ph,
                rec.r.unwrap_or(f64::NAN), rec.m_av, rec.m_opt, rec.tail_population
            );
        }
        let cav = dcesim::hilbert::partial_trace_qubit(sample.rho)?;
        n_last = dcesim::observables::photon_moments(&cav).0;
        Ok(())
    })
    .unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "n_fock={n_fock} frame={frame:?} t_final={t_final}: {:.1}s wall, {} steps ({} rejected), {} evals, {} samples, n_mean(end)={n_last:.4}, h(end)={:.4}",
        dt, fs.steps_accepted, fs.steps_rejected, fs.rhs_evals, samples, fs.step
    );
    println!(
        "  => {:.2} ms/step, projected wall for t=1e4: {:.0}s, t=3e4: {:.0}s",
        1e3 * dt / fs.steps_accepted as f64,
        dt * 1e4 / t_final,
        dt * 3e4 / t_final
    );
}
