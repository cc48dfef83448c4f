//! Weighted Bergman kernel `B_z(zeta) = sum (conj(z) zeta)^n / (2 w_{2n+1})`
//! and its derivatives, summed with a certified tail bound.
//!
//! The bound uses `w_{2n+1} >= rho^{2n+1} w^(rho)` for any `rho` in
//! `(sqrt|x|, 1)`, so the omitted terms are dominated by a geometric series.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::nullable;
use crate::error::{Error, Result};
use crate::fourier::{circle_values, pow2_at_least};
use crate::logspace::log_add;
use crate::quad::{ln_integrate_delta, Span};
use crate::weights::{Integrand, RadialWeight};

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 1_000_000;
const REFINE_AFTER: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    /// Bound on the modulus of the omitted tail.
    pub trunc_bound: f64,
    pub terms_used: usize,
}

/// Tolerance used for the moments feeding a kernel evaluation at `tol`.
pub(crate) fn moment_tol(tol: f64) -> f64 {
    (tol * 0.1).max(1e-14)
}

fn ln_falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln()).sum()
}

/// Candidate radius for the tail bound: `ln rho` and `ln w^(rho)`.
struct Certificate {
    ln_rho: f64,
    ln_tail: f64,
}

fn certificates(w: &RadialWeight, ax: f64, refine: bool, tol: f64) -> Result<Vec<Certificate>> {
    let s = ax.sqrt();
    let mut rhos = vec![(s + 1.0) / 2.0];
    if refine {
        rhos.extend([(3.0 * s + 1.0) / 4.0, (s + 3.0) / 4.0, (s + 7.0) / 8.0]);
    }
    let mut out = Vec::new();
    for rho in rhos {
        let lt = w.tail_mag(1.0 - rho, tol)?.ln();
        if lt.is_finite() {
            out.push(Certificate { ln_rho: rho.ln(), ln_tail: lt });
        }
    }
    Ok(out)
}

/// Sum `pre * sum_{n >= nd} n!/(n-nd)! x^{n-nd} / (2 w_{2n+1})`.
fn series(w: &RadialWeight, x: Complex64, nd: usize, pre: Complex64, tol: f64) -> Result<KernelValue> {
    let ax = x.norm();
    if !(ax < 1.0) {
        return Err(Error::domain(format!("kernel needs |x| < 1, got {ax}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let mt = moment_tol(tol);
    let ln_pre = pre.norm().ln();
    let (lx, phase) = (ax.ln(), x.arg());
    let slack = 1.0 + 10.0 * mt;
    let mut certs = certificates(w, ax, false, mt)?;
    if certs.is_empty() {
        return Err(Error::domain("weight has no mass near the boundary"));
    }
    let mut refined = false;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = nd;
    loop {
        let k = (n - nd) as f64;
        let lxk = if n == nd { 0.0 } else { k * lx };
        let ln_mag = ln_falling(n, nd) + lxk - std::f64::consts::LN_2 - w.moment((2 * n + 1) as f64, mt)?;
        if ln_mag.is_finite() {
            sum += pre * Complex64::from_polar(ln_mag.exp(), k * phase);
        }
        let used = n - nd + 1;
        if ax == 0.0 || pre.norm() == 0.0 {
            return Ok(KernelValue { value: sum, trunc_bound: 0.0, terms_used: used });
        }
        // tail over m > n, ratio of consecutive bounds at most q
        let m = n + 1;
        let bound = certs
            .iter()
            .map(|c| {
                let lq = ((m + 1) as f64 / (m + 1 - nd) as f64).ln() + lx - 2.0 * c.ln_rho;
                if lq >= 0.0 {
                    return f64::INFINITY;
                }
                let lb = ln_pre + ln_falling(m, nd) + (m - nd) as f64 * lx
                    - (2 * m + 1) as f64 * c.ln_rho
                    - std::f64::consts::LN_2
                    - c.ln_tail;
                (lb - crate::logspace::ln_one_minus_exp(lq)).exp() * slack
            })
            .fold(f64::INFINITY, f64::min);
        if bound <= tol * sum.norm() || bound == 0.0 {
            return Ok(KernelValue { value: sum, trunc_bound: bound, terms_used: used });
        }
        if used >= REFINE_AFTER && !refined {
            certs = certificates(w, ax, true, mt)?;
            refined = true;
        }
        if used >= MAX_TERMS {
            return Err(Error::Accuracy {
                msg: format!("kernel tail not certified within {MAX_TERMS} terms"),
                estimate: sum.norm(),
                achieved: bound / sum.norm(),
            });
        }
        n += 1;
    }
}

/// `B(x) = sum x^n / (2 w_{2n+1})`, i.e. `B_z(zeta)` with `x = conj(z) zeta`.
pub fn kernel_eval(w: &RadialWeight, x: Complex64, tol: f64) -> Result<KernelValue> {
    series(w, x, 0, Complex64::new(1.0, 0.0), tol)
}

/// `d^nd/dx^nd B(x)`.
pub fn kernel_eval_derivative(w: &RadialWeight, x: Complex64, nd: usize, tol: f64) -> Result<KernelValue> {
    series(w, x, nd, Complex64::new(1.0, 0.0), tol)
}

/// `d^nd/dz^nd B_zeta(z)`.
pub fn kernel_derivative(w: &RadialWeight, z: Complex64, zeta: Complex64, nd: usize, tol: f64) -> Result<KernelValue> {
    if !(z.norm() < 1.0 && zeta.norm() < 1.0) {
        return Err(Error::domain("kernel derivative needs |z|, |zeta| < 1"));
    }
    series(w, zeta.conj() * z, nd, zeta.conj().powu(nd as u32), tol)
}

/// Taylor coefficients of `zeta -> d^nd/dzeta^nd B_z(zeta)` for real `z >= 0`,
/// truncated where the tail at `|zeta| = 1` drops below `tol` relative.
pub fn derivative_coeffs(w: &RadialWeight, z: f64, nd: usize, tol: f64) -> Result<Vec<Complex64>> {
    let kv = series(w, Complex64::new(z, 0.0), nd, Complex64::new(z.powi(nd as i32), 0.0), tol)?;
    let mt = moment_tol(tol);
    (nd..nd + kv.terms_used)
        .map(|n| {
            let lz = if n == 0 { 0.0 } else { n as f64 * z.ln() };
            let l = ln_falling(n, nd) + lz - std::f64::consts::LN_2 - w.moment((2 * n + 1) as f64, mt)?;
            Ok(Complex64::new(l.exp(), 0.0))
        })
        .collect()
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct NormRow {
    pub z: f64,
    #[serde(with = "nullable")]
    pub lhs: f64,
    #[serde(with = "nullable")]
    pub rhs: f64,
    #[serde(with = "nullable")]
    pub ratio: f64,
    /// The 2-D quadrature missed its tolerance; `lhs` is a coarse estimate.
    pub coarse: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct NormCheck {
    pub omega: String,
    pub nu: String,
    pub p: f64,
    pub n: usize,
    pub rows: Vec<NormRow>,
    pub flagged: bool,
}

/// `ln int_D |g|^p nu dA` for `g = sum coeffs[k] zeta^k`.
pub(crate) fn ln_lp_norm_p(nu: &RadialWeight, coeffs: &[Complex64], p: f64, tol: f64) -> Result<(f64, bool)> {
    let res = pow2_at_least(8 * coeffs.len());
    let mp = |d: f64| {
        let r = 1.0 - d;
        let vals = circle_values(coeffs, r, res);
        let s: f64 = vals.iter().map(|v| v.norm().powf(p)).sum::<f64>() / res as f64;
        s.ln() + (-d).ln_1p()
    };
    match nu.ln_integral(Integrand::Custom(&mp), Span::FULL, tol) {
        Ok(v) => Ok((v + std::f64::consts::LN_2, false)),
        Err(Error::Accuracy { estimate, .. }) => Ok((estimate + std::f64::consts::LN_2, true)),
        Err(e) => Err(e),
    }
}

/// Two sides of `||B_z^(N)||^p_{A^p_nu}` against
/// `int_0^{|z|} nu^(t) / (w^(t)^p (1-t)^{p(N+1)}) dt + 1` over a grid of `|z|`.
pub fn kernel_norm_check(w: &RadialWeight, nu: &RadialWeight, p: f64, nd: usize, zs: &[f64], tol: f64) -> Result<NormCheck> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("p must be positive, got {p}")));
    }
    if zs.iter().any(|z| !(0.0..1.0).contains(z)) {
        return Err(Error::domain("z grid must lie in [0, 1)"));
    }
    let mut breaks = w.breakpoints();
    breaks.extend(nu.breakpoints());
    let rows: Vec<NormRow> = zs
        .par_iter()
        .map(|&z| {
            let coeffs = derivative_coeffs(w, z, nd, tol)?;
            let (lhs, coarse) = ln_lp_norm_p(nu, &coeffs, p, tol)?;
            let inner = moment_tol(tol);
            let lnf = |d: f64| {
                let a = nu.tail_mag(d, inner).map(|m| m.ln()).unwrap_or(f64::NAN);
                let b = w.tail_mag(d, inner).map(|m| m.ln()).unwrap_or(f64::NAN);
                a - p * b - p * (nd + 1) as f64 * d.ln()
            };
            let integral = if z == 0.0 {
                f64::NEG_INFINITY
            } else {
                ln_integrate_delta(&lnf, Span { hi: 1.0, lo: 1.0 - z }, &breaks, tol)?
            };
            let rhs = log_add(integral, 0.0);
            Ok(NormRow { z, lhs: lhs.exp(), rhs: rhs.exp(), ratio: (lhs - rhs).exp(), coarse })
        })
        .collect::<Result<_>>()?;
    let flagged = rows.iter().any(|r| r.coarse) || w.is_flagged() || nu.is_flagged();
    Ok(NormCheck { omega: w.descriptor().to_string(), nu: nu.descriptor().to_string(), p, n: nd, rows, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: f64 = 1e-10;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn std_kernel_closed_form() {
        for &alpha in &[0.0, 1.0, 2.5] {
            let w = RadialWeight::standard(alpha).unwrap();
            for &x in &[c(0.0, 0.0), c(0.5, 0.0), c(-0.3, 0.6), c(0.95, 0.0)] {
                let kv = kernel_eval(&w, x, 1e-11).unwrap();
                let want = (c(1.0, 0.0) - x).powf(-(2.0 + alpha));
                assert!((kv.value - want).norm() <= 1e-9 * want.norm(), "{alpha} {x} {} {want}", kv.value);
                assert!(kv.trunc_bound <= 1e-11 * kv.value.norm() * 1.0001);
            }
        }
    }

    #[test]
    fn trivial_values() {
        let w = RadialWeight::standard(0.0).unwrap();
        assert!((kernel_eval(&w, c(0.0, 0.0), T).unwrap().value - 1.0).norm() < 1e-14);
        assert!((kernel_eval(&w, c(0.5, 0.0), T).unwrap().value - 4.0).norm() < 1e-9);
        let w1 = RadialWeight::standard(1.0).unwrap();
        assert!((kernel_eval(&w1, c(0.5, 0.0), T).unwrap().value - 8.0).norm() < 1e-9);
        let d = kernel_derivative(&w, c(0.0, 0.0), c(0.5, 0.0), 1, T).unwrap();
        assert!((d.value - 1.0).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_closed_form() {
        let w = RadialWeight::standard(0.0).unwrap();
        let (z, zeta) = (c(0.2, 0.3), c(0.5, -0.1));
        for nd in 0..4u32 {
            let d = kernel_derivative(&w, z, zeta, nd as usize, 1e-11).unwrap();
            // d^N/dz^N (1 - a z)^{-2} = (N+1)! a^N (1 - a z)^{-2-N}
            let a = zeta.conj();
            let fact: f64 = (1..=nd + 1).map(|i| i as f64).product();
            let want = a.powu(nd) * fact * (c(1.0, 0.0) - a * z).powi(-2 - nd as i32);
            assert!((d.value - want).norm() < 1e-9 * want.norm());
        }
    }

    #[test]
    fn derivative_symmetry() {
        let w = RadialWeight::pow(1.5).unwrap();
        let (z, zeta) = (c(0.3, 0.0), c(0.0, 0.5));
        let lhs = z * kernel_derivative(&w, z, zeta, 1, T).unwrap().value;
        let rhs = (zeta * kernel_derivative(&w, zeta, z, 1, T).unwrap().value).conj();
        assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1e-300));
    }

    #[test]
    fn zeroth_derivative_is_eval() {
        let w = RadialWeight::exponential(1.0, 1.0).unwrap();
        let (z, zeta) = (c(0.4, 0.2), c(0.3, 0.5));
        let a = kernel_derivative(&w, z, zeta, 0, T).unwrap().value;
        let b = kernel_eval(&w, zeta.conj() * z, T).unwrap().value;
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn truncation_bound_is_sound() {
        let w = RadialWeight::pow(0.5).unwrap();
        let x = c(0.8, 0.1);
        let kv = kernel_eval(&w, x, 1e-6).unwrap();
        let fine = kernel_eval(&w, x, 1e-13).unwrap();
        assert!(fine.terms_used >= kv.terms_used);
        assert!((fine.value - kv.value).norm() <= kv.trunc_bound + fine.trunc_bound);
    }

    #[test]
    fn outside_disc_is_rejected() {
        let w = RadialWeight::pow(0.0).unwrap();
        assert!(matches!(kernel_eval(&w, c(1.0, 0.0), T), Err(Error::Domain(_))));
    }

    #[test]
    fn norm_check_at_origin() {
        let w = RadialWeight::standard(0.0).unwrap();
        let r = kernel_norm_check(&w, &w, 2.0, 1, &[0.0], 1e-8).unwrap();
        assert!((r.rows[0].rhs - 1.0).abs() < 1e-12);
        // B_0^(1) = 0, so the left side vanishes
        assert!(r.rows[0].lhs.is_finite());
    }

    #[test]
    fn norm_check_std_p1_band() {
        let w = RadialWeight::standard(0.0).unwrap();
        let r = kernel_norm_check(&w, &w, 1.0, 1, &[0.5, 0.9, 0.99], 1e-7).unwrap();
        for row in &r.rows {
            assert!(row.ratio > 0.1 && row.ratio < 10.0, "{row:?}");
        }
    }
}
