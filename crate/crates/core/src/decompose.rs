//! Dyadic block decompositions adapted to a weight, the diagonal operator
//! `I^w`, Cesaro means, the smooth polynomials `V_n` and Hadamard products.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::nullable;
use crate::error::{Error, Result};
use crate::fourier::pow2_at_least;
use crate::logspace::{log_add, log_sum};
use crate::lp::hardy_mean_coeffs;
use crate::project::AnalyticFunction;
use crate::quad::{ln_integrate_delta, Span};
use crate::weights::RadialWeight;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Relative slack when flooring `1/(1-rho_n)`, so that `1 - 2^-n` maps to `2^n`.
const FLOOR_SLACK: f64 = 1e-9;
const MAX_BLOCKS: usize = 100_000;

/// Minimal `rho` with `w^(rho) <= w^(0) e^{-ln_drop}`, as `1 - rho`.
fn solve_delta(w: &RadialWeight, target: f64, tol: f64) -> Result<f64> {
    let below = |d: f64| -> Result<bool> { Ok(w.tail_mag(d, tol)?.ln() <= target) };
    let (mut hi, mut lo) = (1.0f64, 0.5f64);
    if below(hi)? {
        return Ok(1.0);
    }
    while !below(lo)? {
        hi = lo;
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Ok(0.0);
        }
    }
    // invariant: tail(hi) > target >= tail(lo)
    for _ in 0..200 {
        let mid = (hi.ln() + lo.ln()) / 2.0;
        let mid = mid.exp();
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * lo {
            break;
        }
    }
    Ok(lo)
}

/// `rho_n` for `n = 0..=count`, with `w^(rho_n) = w^(0) K^{-n}`.
pub fn rho_sequence(w: &RadialWeight, k: f64, count: usize, tol: f64) -> Result<Vec<f64>> {
    if !(k > 1.0) {
        return Err(Error::domain(format!("K must exceed 1, got {k}")));
    }
    let total = w.tail_mag(1.0, tol)?.ln();
    (0..=count)
        .into_par_iter()
        .map(|n| {
            if n == 0 {
                return Ok(0.0);
            }
            Ok(1.0 - solve_delta(w, total - n as f64 * k.ln(), tol)?)
        })
        .collect()
}

/// `M_n = floor(1 / (1 - rho_n))`, saturating.
pub fn m_index(rho: f64) -> u64 {
    let d = 1.0 - rho;
    if d <= 0.0 {
        return u64::MAX;
    }
    ((1.0 + FLOOR_SLACK) / d).floor() as u64
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Block {
    pub n: usize,
    pub start: u64,
    /// Exclusive.
    pub end: u64,
    /// `(re, im)` of the coefficients `start..end` (truncated to the input).
    pub coeffs: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub k: f64,
    pub rho: Vec<f64>,
    pub mn: Vec<u64>,
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn block_coeffs(&self, i: usize) -> Vec<Complex64> {
        let b = &self.blocks[i];
        let mut c = vec![ZERO; b.start as usize];
        c.extend(b.coeffs.iter().map(|&(re, im)| Complex64::new(re, im)));
        c
    }

    /// `sum_n Delta_n f`.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for b in &self.blocks {
            out.extend(b.coeffs.iter().map(|&(re, im)| Complex64::new(re, im)));
        }
        out
    }
}

/// Split `f` into `Delta_0 f` (frequencies `< M_1`) and `Delta_n f`
/// (frequencies in `[M_n, M_{n+1})`).
pub fn delta_blocks(w: &RadialWeight, k: f64, f: &[Complex64], tol: f64) -> Result<BlockDecomposition> {
    if !(k > 1.0) {
        return Err(Error::domain(format!("K must exceed 1, got {k}")));
    }
    let len = f.len() as u64;
    let total = w.tail_mag(1.0, tol)?.ln();
    let mut rho = vec![0.0];
    let mut mn = vec![m_index(0.0)];
    while *mn.last().unwrap() < len.max(1) || mn.len() < 2 {
        let n = rho.len();
        if n > MAX_BLOCKS {
            return Err(Error::domain("block sequence does not reach the degree of f"));
        }
        let r = 1.0 - solve_delta(w, total - n as f64 * k.ln(), tol)?;
        rho.push(r);
        mn.push(m_index(r));
    }
    let mut blocks = Vec::new();
    for n in 0..mn.len() - 1 {
        let start = if n == 0 { 0 } else { mn[n] };
        let end = mn[n + 1].max(start);
        let (a, b) = (start.min(len) as usize, end.min(len) as usize);
        blocks.push(Block { n, start, end, coeffs: f[a..b].iter().map(|c| (c.re, c.im)).collect() });
    }
    Ok(BlockDecomposition { k, rho, mn, blocks })
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DecompositionNorm {
    #[serde(with = "nullable")]
    pub value: f64,
    /// `(n, ||Delta_n f||_{H^p})`.
    pub block_norms: Vec<(usize, f64)>,
    /// For `p = 2`: largest relative gap between sampled and Parseval block norms.
    pub parseval_gap: Option<f64>,
    pub decomposition: BlockDecomposition,
}

/// `sum_n K^{-n} ||Delta_n f||^p_{H^p}`, block norms by sampling the unit
/// circle at 8x the top frequency of each block.
pub fn decomposition_norm(w: &RadialWeight, p: f64, f: &[Complex64], k: f64, tol: f64) -> Result<DecompositionNorm> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("p must be positive and finite, got {p}")));
    }
    let dec = delta_blocks(w, k, f, tol)?;
    let mut norms = Vec::new();
    let mut terms = Vec::new();
    let mut gap: f64 = 0.0;
    for (i, b) in dec.blocks.iter().enumerate() {
        if b.coeffs.iter().all(|&(re, im)| re == 0.0 && im == 0.0) {
            norms.push((b.n, 0.0));
            continue;
        }
        let c = dec.block_coeffs(i);
        let res = pow2_at_least(8 * c.len());
        let h = hardy_mean_coeffs(&c, 1.0, p, res)?;
        if p == 2.0 {
            let exact = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            gap = gap.max((h - exact).abs() / exact);
        }
        norms.push((b.n, h));
        terms.push(p * h.ln() - b.n as f64 * k.ln());
    }
    Ok(DecompositionNorm {
        value: log_sum(terms).exp(),
        block_norms: norms,
        parseval_gap: (p == 2.0).then_some(gap),
        decomposition: dec,
    })
}

/// `I^w f = sum f^(k) w_{2k+1} z^k`.
pub fn i_omega(w: &RadialWeight, f: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    f.iter().enumerate().map(|(k, a)| Ok(a * w.moment((2 * k + 1) as f64, tol)?.exp())).collect()
}

/// Cesaro mean `sigma_n f = sum_{j<=n} (1 - j/(n+1)) f^(j) z^j`.
pub fn cesaro_mean(f: &[Complex64], n: usize) -> Vec<Complex64> {
    f.iter().take(n + 1).enumerate().map(|(j, a)| a * (1.0 - j as f64 / (n + 1) as f64)).collect()
}

/// Smooth step: 1 on `(-inf, 1]`, 0 on `[2, inf)`, built from `exp(-1/y)`.
pub fn psi_cutoff(x: f64) -> f64 {
    let s = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        let (a, b) = (s(2.0 - x), s(x - 1.0));
        a / (a + b)
    }
}

/// `V_n` with the default cutoff.
pub fn vn_polynomial(n: i64) -> Result<Vec<Complex64>> {
    vn_polynomial_with(n, &psi_cutoff)
}

/// `V_0 = 1 + z`; for `n >= 1` the coefficient of `z^k` is
/// `Psi(k / 2^n) - Psi(k / 2^{n-1})` on `[2^{n-1}, 2^{n+1})`.
pub fn vn_polynomial_with(n: i64, psi: &dyn Fn(f64) -> f64) -> Result<Vec<Complex64>> {
    if n < 0 {
        return Err(Error::domain(format!("V_n needs n >= 0, got {n}")));
    }
    if n > 40 {
        return Err(Error::domain("V_n degree too large"));
    }
    if n == 0 {
        return Ok(vec![Complex64::new(1.0, 0.0); 2]);
    }
    let h = 1u64 << (n - 1);
    let mut c = vec![ZERO; (4 * h) as usize];
    for k in h..4 * h {
        let t = k as f64 / h as f64;
        c[k as usize] = Complex64::new(psi(t / 2.0) - psi(t), 0.0);
    }
    Ok(c)
}

/// Coefficientwise product.
pub fn hadamard(f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    f.iter().zip(g).map(|(a, b)| a * b).collect()
}

/// Both sides of `(f*g)(r^2 e^{it}) = (1/2pi) int f(r e^{i(t+s)}) g(r e^{-is}) ds`;
/// the integral is a uniform sum, exact for polynomials at this resolution.
pub fn circle_identity(f: &[Complex64], g: &[Complex64], r: f64, t: f64) -> (Complex64, Complex64) {
    let eval = |c: &[Complex64], z: Complex64| c.iter().rev().fold(ZERO, |acc, a| acc * z + a);
    let lhs = eval(&hadamard(f, g), Complex64::from_polar(r * r, t));
    let res = pow2_at_least(2 * (f.len() + g.len()));
    let rhs = (0..res)
        .map(|j| {
            let s = std::f64::consts::TAU * j as f64 / res as f64;
            eval(f, Complex64::from_polar(r, t + s)) * eval(g, Complex64::from_polar(r, -s))
        })
        .sum::<Complex64>()
        / res as f64;
    (lhs, rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LacunaryPair {
    /// `g_t = sum (tz)^{2^k} / w_{2^{k+1}}`.
    pub g: AnalyticFunction,
    /// `f_{t,beta} = sum (tz)^{2^k} / w_{2^{k+1}}^beta`.
    pub f: AnalyticFunction,
    /// Terms beyond the returned ones were dropped because a moment underflowed.
    pub truncated: bool,
}

pub fn lacunary_test_functions(w: &RadialWeight, t: f64, beta: f64, k_max: u32, tol: f64) -> Result<LacunaryPair> {
    if !(t > 0.5 && t < 1.0) {
        return Err(Error::domain(format!("t must lie in (1/2, 1), got {t}")));
    }
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    let (mut g, mut f) = (Vec::new(), Vec::new());
    let mut truncated = false;
    for k in 0..=k_max.min(62) {
        let e = (1u64 << k) as f64;
        let lw = w.moment(2.0 * e, tol)?;
        let (lg, lf) = (e * t.ln() - lw, e * t.ln() - beta * lw);
        if !lw.is_finite() || !lg.is_finite() || !lf.is_finite() || lg > 700.0 || lf > 700.0 {
            truncated = true;
            break;
        }
        g.push((k, Complex64::new(lg.exp(), 0.0)));
        f.push((k, Complex64::new(lf.exp(), 0.0)));
    }
    Ok(LacunaryPair { g: AnalyticFunction::Lacunary(g), f: AnalyticFunction::Lacunary(f), truncated })
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Onto2Row {
    pub r: f64,
    #[serde(with = "nullable")]
    pub integral: f64,
    #[serde(with = "nullable")]
    pub series: f64,
    #[serde(with = "nullable")]
    pub ratio: f64,
}

/// `int_0^r dt / (w^(t)^alpha (1-t)^gamma)` against
/// `sum_{n>=N} r^{2^{n+1}} / (2^{n(1-gamma)} w_{2^{n+1}}^alpha)`.
pub fn onto2_check(w: &RadialWeight, alpha: f64, gamma: f64, rs: &[f64], n0: usize, tol: f64) -> Result<Vec<Onto2Row>> {
    if !(alpha > 0.0 && gamma > 0.0) {
        return Err(Error::domain("alpha and gamma must be positive"));
    }
    let breaks = w.breakpoints();
    rs.par_iter()
        .map(|&r| {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::domain(format!("r must lie in (0, 1), got {r}")));
            }
            let lnf = |d: f64| -alpha * w.tail_mag(d, tol * 0.1).map(|m| m.ln()).unwrap_or(f64::NAN) - gamma * d.ln();
            let li = ln_integrate_delta(&lnf, Span { hi: 1.0, lo: 1.0 - r }, &breaks, tol)?;
            let mut ls = f64::NEG_INFINITY;
            let mut prev = f64::INFINITY;
            for n in n0..1000 {
                let e = 2f64.powi(n as i32 + 1);
                let term = e * r.ln() - n as f64 * (1.0 - gamma) * std::f64::consts::LN_2 - alpha * w.moment(e, tol)?;
                ls = log_add(ls, term);
                if term < ls + tol.ln() - 3.0 && term < prev {
                    break;
                }
                prev = term;
            }
            Ok(Onto2Row { r, integral: li.exp(), series: ls.exp(), ratio: (li - ls).exp() })
        })
        .collect()
}
