//! Uniform circle sampling of power series through the FFT.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `f(r e^{2 pi i j / res})` for `j < res`, where `f = sum coeffs[k] z^k`.
/// Frequencies at or above `res` alias onto `k mod res`.
pub fn circle_values(coeffs: &[Complex64], r: f64, res: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); res];
    let mut rk = 1.0;
    for (k, c) in coeffs.iter().enumerate() {
        if rk == 0.0 {
            break;
        }
        buf[k % res] += c * rk;
        rk *= r;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(res).process(&mut buf));
    buf
}

/// Discrete Fourier coefficients `(1/res) sum_j s_j e^{-2 pi i j k / res}`.
pub fn fourier_coeffs(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Smallest power of two `>= n` (at least 4).
pub fn pow2_at_least(n: usize) -> usize {
    n.max(4).next_power_of_two()
}
