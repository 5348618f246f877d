//! Adaptive Verner 6(5) stepper on flat complex state vectors.
//!
//! Nine-stage embedded pair: the step advances with the 6th-order weights,
//! the 5th-order difference drives a PI step-size controller. The last
//! stage is evaluated at the step endpoint on the accepted solution, so it
//! doubles as the first stage of the next step (FSAL). One lazily computed
//! extra stage at mid-step provides 5th-order dense output for hitting
//! sample times without constraining the step size.
//!
//! Tableau: Verner's "most efficient" 6(5) pair with interpolant
//! (RKV65.IIIXb).

use super::EvolveError;
use num_complex::Complex64 as C64;

pub(crate) const STAGES: usize = 9;
pub(crate) const DENSE_STAGES: usize = 10;
const INTERP_ORDER: usize = 6;

#[rustfmt::skip]
const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.923_996_296_296_296_2e-2, 7.669_337_037_037_037e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.35975e-1, 0.0, 0.107925, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.318_683_415_233_148_4, 0.0, -5.042_058_063_628_562, 4.220_674_648_395_414, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-41.872_591_664_327_516, 0.0, 159.432_562_163_137_5, -122.119_213_565_010_03, 5.531_743_066_200_054, 0.0, 0.0, 0.0, 0.0],
    [-54.430_156_935_316_504, 0.0, 207.067_251_365_018_48, -158.610_813_784_59, 6.991_816_585_950_242, -1.859_723_106_220_323_4e-2, 0.0, 0.0, 0.0],
    [-54.663_741_787_281_98, 0.0, 207.952_806_255_389_36, -159.288_957_474_499_5, 7.018_743_740_796_944, -1.833_878_590_504_572_2e-2, -5.119_484_997_882_099e-4, 0.0, 0.0],
    [3.438_957_868_357_036e-2, 0.0, 0.0, 0.258_262_455_563_350_3, 0.420_937_118_967_353_7, 4.405_396_469_669_31, -176.483_119_024_298_65, 172.364_133_401_415_07, 0.0],
];

#[rustfmt::skip]
const B_HIGH: [f64; STAGES] = [
    3.438_957_868_357_036e-2, 0.0, 0.0, 0.258_262_455_563_350_3, 0.420_937_118_967_353_7,
    4.405_396_469_669_31, -176.483_119_024_298_65, 172.364_133_401_415_07, 0.0,
];

#[rustfmt::skip]
const B_LOW: [f64; STAGES] = [
    4.909_967_648_382_49e-2, 0.0, 0.0, 0.225_111_222_951_652_42, 0.469_468_225_302_956_2,
    0.806_579_224_998_886_8, 0.0, -0.607_119_489_177_796, 5.686_113_944_047_569_6e-2,
];

#[rustfmt::skip]
const C: [f64; STAGES] = [
    0.0, 0.6e-1, 9.593_333_333_333_333e-2, 0.1439, 0.4973, 0.9725, 0.9995, 1.0, 1.0,
];

/// Weights of the single extra stage (at c = 1/2) used by the interpolant.
#[rustfmt::skip]
const A_DENSE: [f64; DENSE_STAGES] = [
    1.652_415_901_357_280_6e-2, 0.0, 0.0, 0.305_312_818_751_417_9, 0.207_120_093_820_197_9,
    -1.293_879_140_655_123, 57.119_884_115_881_49, -55.879_792_075_109_32,
    2.483_002_829_776_601_4e-2, 0.0,
];

const C_DENSE: f64 = 0.5;

/// Interpolation polynomial coefficients: cont_i(s) = s · Σ_j b[i][j] s^j.
#[rustfmt::skip]
const B_DENSE: [[f64; INTERP_ORDER]; DENSE_STAGES] = [
    [1.0, -5.308_169_607_103_577, 10.181_680_448_958_68, -7.520_036_991_611_715, 0.934_048_536_863_116_1, 0.746_867_191_577_065],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 6.272_050_253_212_501, -16.026_181_474_677_46, 12.844_356_324_519_618, -1.148_794_504_476_759_1, -1.683_168_143_014_549_8],
    [0.0, 6.876_491_702_846_304, -24.635_767_260_846_333, 33.210_786_483_797_17, -17.494_615_282_636_44, 2.464_041_475_806_649_6],
    [0.0, -35.544_451_710_599_6, 165.701_617_019_024_2, -385.463_539_549_114_3, 442.432_413_701_570_17, -182.720_642_991_211_2],
    [0.0, 1_918.654_856_698_011_4, -9_268.121_508_966_042, 20_858.337_028_772_55, -22_645.827_671_584_81, 8_960.474_176_055_992],
    [0.0, -1_883.069_802_132_718_2, 9_101.025_187_200_634, -20_473.188_551_959_534, 22_209.765_551_256_532, -8_782.168_250_963_5],
    [0.0, 0.119_024_796_351_236_43, -0.125_026_967_050_393_76, 1.779_956_919_394_999_1, -4.660_932_123_043_763, 2.886_977_374_347_921],
    [0.0, -8.0, 32.0, -40.0, 16.0, 0.0],
];

// PI controller: scale = safety · err^(−ALPHA) · err_prev^(BETA), with the
// error estimator of order 6 (5th-order embedded difference).
const ERR_ORDER: f64 = 6.0;
const PI_ALPHA: f64 = 0.7 / ERR_ORDER;
const PI_BETA: f64 = 0.4 / ERR_ORDER;
const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;

// chunk of the state processed at a time; keeps the accumulator in L1
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

pub(crate) struct VernerStepper {
    len: usize,
    t: f64,
    h: f64,
    t_prev: f64,
    h_last: f64,
    y: Vec<C64>,
    y_prev: Vec<C64>,
    y_next: Vec<C64>,
    k: Vec<Vec<C64>>,
    stage: Vec<C64>,
    interp: Vec<C64>,
    err_prev: f64,
    have_fsal: bool,
    dense_ready: bool,
    pub stats: StepStats,
}

impl VernerStepper {
    pub fn new(y0: Vec<C64>, t0: f64, h0: f64) -> Self {
        let len = y0.len();
        let zero = vec![C64::new(0.0, 0.0); len];
        Self {
            len,
            t: t0,
            h: h0,
            t_prev: t0,
            h_last: 0.0,
            y_prev: y0.clone(),
            y_next: zero.clone(),
            y: y0,
            k: (0..DENSE_STAGES).map(|_| zero.clone()).collect(),
            stage: zero.clone(),
            interp: zero,
            err_prev: 1e-4,
            have_fsal: false,
            dense_ready: false,
            stats: StepStats::default(),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    #[cfg(test)]
    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    pub fn y(&self) -> &[C64] {
        &self.y
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Advance by one accepted step, capped so the step never overshoots
    /// `t_limit`. Rejected attempts retry internally with a smaller step.
    pub fn step<R>(&mut self, rhs: &mut R, ctl: &StepControl, t_limit: f64) -> Result<(), EvolveError>
    where
        R: FnMut(f64, &[C64], &mut [C64]),
    {
        if self.have_fsal {
            self.k.swap(0, 8);
            self.have_fsal = false;
        } else {
            rhs(self.t, &self.y, &mut self.k[0]);
            self.stats.rhs_evals += 1;
        }

        loop {
            let h = self.h.min(ctl.max_step).min(t_limit - self.t);
            if h < ctl.min_step {
                return Err(EvolveError::StepUnderflow { t: self.t, step: h });
            }

            // stages 1..7 (B_HIGH has no k8 weight, so the solution needs
            // only k0..k7; k8 is the endpoint evaluation below)
            for i in 1..STAGES - 1 {
                combine(&mut self.stage, &self.y, h, &A[i][..i], &self.k[..i]);
                rhs(self.t + C[i] * h, &self.stage, &mut self.k[i]);
            }
            self.stats.rhs_evals += (STAGES - 2) as u64;

            combine(&mut self.y_next, &self.y, h, &B_HIGH[..8], &self.k[..8]);
            {
                let (head, tail) = self.k.split_at_mut(8);
                rhs(self.t + h, &self.y_next, &mut tail[0]);
                let _ = head;
            }
            self.stats.rhs_evals += 1;

            let err = self.error_norm(h, ctl);

            if err <= 1.0 {
                self.stats.accepted += 1;
                self.t_prev = self.t;
                self.h_last = h;
                std::mem::swap(&mut self.y_prev, &mut self.y);
                std::mem::swap(&mut self.y, &mut self.y_next);
                self.t += h;
                self.have_fsal = true;
                self.dense_ready = false;

                let scale = if err == 0.0 {
                    MAX_SCALE
                } else {
                    (SAFETY * err.powf(-PI_ALPHA) * self.err_prev.powf(PI_BETA))
                        .clamp(MIN_SCALE, MAX_SCALE)
                };
                self.err_prev = err.max(1e-4);
                self.h = (h * scale).min(ctl.max_step);
                return Ok(());
            }

            self.stats.rejected += 1;
            let scale = (SAFETY * err.powf(-1.0 / ERR_ORDER)).clamp(MIN_SCALE, 0.9);
            self.h = h * scale;
            if self.h < ctl.min_step {
                return Err(EvolveError::StepUnderflow {
                    t: self.t,
                    step: self.h,
                });
            }
        }
    }

    /// Dense-output evaluation inside the last accepted step,
    /// t_prev ≤ t_query ≤ t. The extra mid-step stage is computed on first
    /// use and reused for further queries in the same step.
    pub fn interpolate<R>(&mut self, rhs: &mut R, t_query: f64) -> &[C64]
    where
        R: FnMut(f64, &[C64], &mut [C64]),
    {
        assert!(self.h_last > 0.0, "no accepted step to interpolate in");
        if !self.dense_ready {
            combine(
                &mut self.stage,
                &self.y_prev,
                self.h_last,
                &A_DENSE[..9],
                &self.k[..9],
            );
            let (head, tail) = self.k.split_at_mut(9);
            rhs(self.t_prev + C_DENSE * self.h_last, &self.stage, &mut tail[0]);
            let _ = head;
            self.stats.rhs_evals += 1;
            self.dense_ready = true;
        }

        let s = ((t_query - self.t_prev) / self.h_last).clamp(0.0, 1.0);
        let mut cont = [0.0_f64; DENSE_STAGES];
        for (i, coefs) in B_DENSE.iter().enumerate() {
            let mut v = coefs[INTERP_ORDER - 1];
            for j in (0..INTERP_ORDER - 1).rev() {
                v = v * s + coefs[j];
            }
            cont[i] = v * s;
        }

        // reuse `interp` as output buffer
        let mut buf = std::mem::take(&mut self.interp);
        combine(&mut buf, &self.y_prev, self.h_last, &cont, &self.k);
        self.interp = buf;
        &self.interp
    }

    /// RMS of |err_i| / (atol + rtol·max(|y_i|, |y_next_i|)).
    fn error_norm(&self, h: f64, ctl: &StepControl) -> f64 {
        let mut acc = 0.0_f64;
        let mut echunk = [C64::new(0.0, 0.0); CHUNK];
        let mut start = 0;
        while start < self.len {
            let end = (start + CHUNK).min(self.len);
            let width = end - start;
            let ec = &mut echunk[..width];
            ec.fill(C64::new(0.0, 0.0));
            for (j, kj) in self.k[..STAGES].iter().enumerate() {
                let w = B_HIGH[j] - B_LOW[j];
                if w == 0.0 {
                    continue;
                }
                let hw = h * w;
                for (e, kv) in ec.iter_mut().zip(&kj[start..end]) {
                    *e += C64::new(hw * kv.re, hw * kv.im);
                }
            }
            for ((e, yo), yn) in ec.iter().zip(&self.y[start..end]).zip(&self.y_next[start..end]) {
                let den = ctl.atol + ctl.rtol * yo.norm().max(yn.norm());
                let r = e.norm() / den;
                acc += r * r;
            }
            start = end;
        }
        (acc / self.len as f64).sqrt()
    }
}

/// dst = base + h · Σ_j coefs[j] · ks[j], chunked so dst stays cache-hot
/// across the k accumulation.
fn combine(dst: &mut [C64], base: &[C64], h: f64, coefs: &[f64], ks: &[Vec<C64>]) {
    let len = base.len();
    let mut start = 0;
    while start < len {
        let end = (start + CHUNK).min(len);
        dst[start..end].copy_from_slice(&base[start..end]);
        for (c, k) in coefs.iter().zip(ks) {
            if *c == 0.0 {
                continue;
            }
            let hc = h * *c;
            for (d, kv) in dst[start..end].iter_mut().zip(&k[start..end]) {
                *d += C64::new(hc * kv.re, hc * kv.im);
            }
        }
        start = end;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // y' = i·ω·y, exact solution y0·e^{iωt}
    fn phase_rhs(omega: f64) -> impl FnMut(f64, &[C64], &mut [C64]) {
        move |_t, y, out| {
            for (o, v) in out.iter_mut().zip(y) {
                *o = C64::new(0.0, omega) * *v;
            }
        }
    }

    fn ctl(rtol: f64) -> StepControl {
        StepControl {
            rtol,
            atol: 1e-12,
            max_step: 1.0,
            min_step: 1e-12,
        }
    }

    #[test]
    fn reproduces_a_pure_phase_rotation() {
        let mut rhs = phase_rhs(3.0);
        let mut st = VernerStepper::new(vec![C64::new(1.0, 0.0)], 0.0, 1e-3);
        let c = ctl(1e-10);
        let t_end = 10.0;
        while st.t() < t_end - 1e-12 {
            st.step(&mut rhs, &c, t_end).unwrap();
        }
        let exact = C64::new(0.0, 3.0 * t_end).exp();
        assert!((st.y()[0] - exact).norm() < 1e-8);
        assert!(st.stats.accepted > 10);
    }

    #[test]
    fn interpolant_is_consistent_at_step_endpoints() {
        let mut rhs = phase_rhs(2.0);
        let mut st = VernerStepper::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5)], 0.0, 1e-2);
        let c = ctl(1e-9);
        st.step(&mut rhs, &c, 10.0).unwrap();
        st.step(&mut rhs, &c, 10.0).unwrap();
        let (t0, t1) = (st.t_prev(), st.t());
        let y1 = st.y().to_vec();
        let at_start = st.interpolate(&mut rhs, t0).to_vec();
        let y0 = vec![
            C64::new(0.0, 2.0 * t0).exp(),
            C64::new(0.0, 0.5) * C64::new(0.0, 2.0 * t0).exp(),
        ];
        for (a, b) in at_start.iter().zip(&y0) {
            assert!((a - b).norm() < 1e-9, "start mismatch {a} vs {b}");
        }
        let at_end = st.interpolate(&mut rhs, t1).to_vec();
        for (a, b) in at_end.iter().zip(&y1) {
            assert!((a - b).norm() < 1e-12, "end mismatch {a} vs {b}");
        }
    }

    #[test]
    fn interpolant_tracks_the_exact_solution_inside_steps() {
        let mut rhs = phase_rhs(1.5);
        let mut st = VernerStepper::new(vec![C64::new(1.0, 0.0)], 0.0, 5e-2);
        let c = ctl(1e-9);
        while st.t() < 4.0 - 1e-12 {
            st.step(&mut rhs, &c, 4.0).unwrap();
            let tm = 0.5 * (st.t_prev() + st.t());
            let got = st.interpolate(&mut rhs, tm)[0];
            let exact = C64::new(0.0, 1.5 * tm).exp();
            assert!(
                (got - exact).norm() < 1e-8,
                "interpolant off by {:.3e} at t = {tm}",
                (got - exact).norm()
            );
        }
    }

    #[test]
    fn tightening_tolerances_reduces_the_error() {
        let t_end = 20.0;
        let exact = C64::new(0.0, 2.0 * t_end).exp();
        let mut errs = Vec::new();
        for rtol in [1e-6, 1e-9] {
            let mut rhs = phase_rhs(2.0);
            let mut st = VernerStepper::new(vec![C64::new(1.0, 0.0)], 0.0, 1e-3);
            let c = ctl(rtol);
            while st.t() < t_end - 1e-12 {
                st.step(&mut rhs, &c, t_end).unwrap();
            }
            errs.push((st.y()[0] - exact).norm());
        }
        assert!(errs[1] < errs[0] / 50.0, "errors: {errs:?}");
    }

    #[test]
    fn fsal_reuse_keeps_evaluation_count_low() {
        let mut rhs = phase_rhs(1.0);
        let mut st = VernerStepper::new(vec![C64::new(1.0, 0.0)], 0.0, 1e-2);
        let c = ctl(1e-8);
        while st.t() < 5.0 - 1e-12 {
            st.step(&mut rhs, &c, 5.0).unwrap();
        }
        let per_step = st.stats.rhs_evals as f64 / st.stats.accepted as f64;
        // 8 evals per accepted step (plus the very first k0 and rejections)
        assert!(
            per_step < 8.5,
            "expected ~8 evals/step, got {per_step} ({:?})",
            st.stats
        );
    }
}
