//! Explicit pathological weights.
//!
//! All three constructions restrict a base weight to a union of intervals
//! accumulating at the boundary. Intervals are generated until their inner
//! endpoint underflows; the last retained interval then reaches the
//! boundary, so the tail does not vanish at representable scales (for the
//! double exponential base: while `1/(1-r)` is a finite double).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::classify::{self, ScaleGrid, Verdict};
use crate::error::{Error, Result};
use crate::quad::{Span, DEFAULT_TOL};
use crate::weights::{fmt_num, RadialWeight};

/// `ln phi` as a function of `1 - t`, or `psi(x)`; shareable between threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Base family for the bounded-regularity construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BaseFamily {
    #[default]
    Pow,
    Std,
}

#[derive(Clone, Debug)]
pub struct Thm10Params {
    pub family: BaseFamily,
    pub alpha: f64,
    /// Exponent of `phi(t) = ((1-t)/2)^gamma`; defaults to `2 beta`.
    pub gamma: Option<f64>,
    /// First retained interval; chosen automatically when absent.
    pub n: Option<usize>,
    pub m: f64,
}

impl Default for Thm10Params {
    fn default() -> Self {
        Thm10Params { family: BaseFamily::Pow, alpha: 1.0, gamma: None, n: None, m: 2.0 }
    }
}

#[derive(Clone, Debug)]
pub struct Prop12Params {
    /// `psi(x) = c log2(1 + x)`.
    pub c: f64,
    pub n: Option<usize>,
}

impl Default for Prop12Params {
    fn default() -> Self {
        Prop12Params { c: 1.0, n: None }
    }
}

/// A constructed weight together with the scales at which its advertised
/// (non-)memberships show up.
#[derive(Clone)]
pub struct Construction {
    pub name: &'static str,
    pub weight: RadialWeight,
    pub base: RadialWeight,
    pub params: BTreeMap<String, f64>,
    /// Deltas `1 - r` at which the doubling ratio should blow up.
    pub doubling_deltas: Vec<f64>,
    /// Deltas at which the reverse doubling ratio should collapse to one.
    pub reverse_deltas: Vec<f64>,
    /// Moment indices for the M-class ratio.
    pub moment_xs: Vec<f64>,
    /// Indices for the Dostanic profile.
    pub dostanic_ns: Vec<f64>,
    /// `ln phi` in terms of `1 - t`, for the sandwich check.
    pub ln_phi: Option<ScalarFn>,
    /// `ln (1 - r_x)` for integer `x >= 1` (index 0 unused).
    pub ln_deltas: Vec<f64>,
    pub verified_range: String,
}

impl fmt::Debug for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Construction")
            .field("name", &self.name)
            .field("weight", &self.weight.descriptor())
            .field("params", &self.params)
            .field("verified_range", &self.verified_range)
            .finish()
    }
}

/// `t_n = 1 - 2^{-2^n}` as a distance to the boundary.
pub fn prop9_t_delta(n: u32) -> f64 {
    2f64.powf(-(2f64.powi(n as i32)))
}

/// `s_n = 1 - 1/(n 2^{2^n})` as a distance to the boundary.
pub fn prop9_s_delta(n: u32) -> f64 {
    prop9_t_delta(n) / n as f64
}

/// Double exponential weight kept on `[s_n, t_{n+1}]`, `n >= 2`.
pub fn prop9() -> Result<Construction> {
    let base = RadialWeight::double_exponential();
    let mut pieces = Vec::new();
    let mut n = 2u32;
    loop {
        let hi = prop9_s_delta(n);
        if hi <= 0.0 {
            break;
        }
        let lo = prop9_t_delta(n + 1);
        pieces.push(Span { hi, lo });
        if lo == 0.0 {
            break;
        }
        n += 1;
    }
    let last = n;
    let weight = base.restricted(pieces, "construct:prop9")?;
    let reverse_deltas: Vec<f64> = (2..=last).map(prop9_t_delta).filter(|&d| d > 0.0).collect();
    let params = params(&[("K_reverse", 2.0), ("K_moment", 16.0), ("pieces", (last - 1) as f64)]);
    Ok(Construction {
        name: "prop9",
        weight,
        base,
        params,
        doubling_deltas: Vec::new(),
        reverse_deltas,
        moment_xs: (0..14).map(|k| 2f64.powi(k)).collect(),
        dostanic_ns: Vec::new(),
        ln_phi: None,
        ln_deltas: Vec::new(),
        verified_range: format!("intervals n = 2..={last}, the last one reaching the boundary; tails resolved for 1 - r >= 2^-1023"),
    })
}

/// `ln (1 - r_x)` with `r_x = 1 - 2^{-x psi(x)}`, for `x = 1, 2, ...` until
/// `1 - r_x` underflows (that entry is kept, as `-inf` or subnormal).
fn ln_delta_table(psi: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let mut out = vec![f64::NAN];
    let mut x = 1.0;
    loop {
        let ld = -x * psi(x) * std::f64::consts::LN_2;
        out.push(ld);
        if ld.exp() == 0.0 || out.len() > 100_000 {
            return out;
        }
        x += 1.0;
    }
}

/// Smallest `x >= 1` with `psi(x) >= y`.
fn psi_inverse(psi: &dyn Fn(f64) -> f64, y: f64) -> Result<f64> {
    if psi(1.0) >= y {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while psi(hi) < y {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::domain(format!("psi stays below {y} up to x = 1e12")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(mid) >= y {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The two displayed largeness requirements on `N`, plus the lower bound
/// coming from `K`, checked for every index whose scale is representable.
/// Returns the first failure, if any.
fn n_failure(ld: &[f64], n: usize, beta: f64, m: f64) -> Option<String> {
    let jmax = (ld.len() - 2) / 2;
    let ln_beta = beta.ln();
    let ln2m = (2.0 * m).ln();
    for k in n..jmax {
        for j in k + 1..=jmax {
            let ln_y = ld[2 * k] - ld[2 * j + 1];
            if !ln_y.is_finite() {
                continue;
            }
            if ln_beta + ln_y.ln() > ln_y - ln2m {
                return Some(format!("beta log y <= y/(2M) fails at k = {k}, j = {j}"));
            }
        }
    }
    let r2n = -ld[2 * n].exp_m1();
    let bound = -(4.0 * (1.0 / r2n + beta)).ln();
    for j in n + 1..=jmax {
        if ld[2 * j] - ld[2 * j - 2] > bound {
            return Some(format!("(1-r_2j)/(1-r_2j-2) bound fails at j = {j}"));
        }
    }
    None
}

struct NChoice {
    n: usize,
    auto: bool,
    failure: Option<String>,
}

fn choose_n(ld: &[f64], n_min: usize, beta: f64, m: f64, given: Option<usize>) -> Result<NChoice> {
    let jmax = (ld.len() - 2) / 2;
    if let Some(n) = given {
        if n < 1 || n + classify::VERDICT_WINDOW > jmax {
            return Err(Error::domain(format!("N = {n} must lie in 1..={}", jmax.saturating_sub(classify::VERDICT_WINDOW))));
        }
        let mut failure = n_failure(ld, n, beta, m);
        if n < n_min {
            failure.get_or_insert(format!("N below the lower bound {n_min} coming from K"));
        }
        return Ok(NChoice { n, auto: false, failure });
    }
    let mut n = n_min.max(1);
    while n + classify::VERDICT_WINDOW <= jmax {
        if n_failure(ld, n, beta, m).is_none() {
            return Ok(NChoice { n, auto: true, failure: None });
        }
        n += 1;
    }
    Err(Error::domain("no admissible N leaves enough representable intervals"))
}

/// Pieces `[r_{2j+1}, r_{2j+2}]`, `j >= n`, as spans in `1 - r`.
fn odd_even_pieces(ld: &[f64], n: usize) -> Vec<Span> {
    let mut out = Vec::new();
    let mut j = n;
    while 2 * j + 1 < ld.len() {
        let hi = ld[2 * j + 1].exp();
        if hi == 0.0 {
            break;
        }
        let lo = if 2 * j + 2 < ld.len() { ld[2 * j + 2].exp() } else { 0.0 };
        out.push(Span { hi, lo });
        if lo == 0.0 {
            break;
        }
        j += 1;
    }
    out
}

/// Largest `j` for which both `1 - r_{2j}` and `1 - r_{2j+1}` are positive.
fn last_full_index(ld: &[f64]) -> usize {
    let mut j = 0;
    while 2 * j + 3 < ld.len() && ld[2 * j + 3].exp() > 0.0 {
        j += 1;
    }
    j
}

/// Checks `-phi'/phi <~ 1/(1-t)` and monotonicity on `1 - t = 2^{-j/4}`;
/// `ln_phi` takes `1 - t`.
///
/// The slope of `-ln phi` against `-ln(1-t)` must stay in `[0, 64]`.
pub fn validate_phi(ln_phi: &dyn Fn(f64) -> f64) -> Result<f64> {
    const SLOPE_MAX: f64 = 64.0;
    let h = std::f64::consts::LN_2 / 4.0;
    let mut worst: f64 = 0.0;
    let mut prev = ln_phi(1.0);
    if !(prev < 0.0) {
        return Err(Error::domain(format!("phi(0) = {} must lie in (0, 1)", prev.exp())));
    }
    for i in 1..=4 * 60 {
        let u = i as f64 * h;
        let d = (-u).exp();
        let cur = ln_phi(d);
        let slope = (prev - cur) / h;
        if !cur.is_finite() || !(0.0..=SLOPE_MAX).contains(&slope) {
            return Err(Error::domain(format!("phi fails the derivative condition at t = 1 - {d:e} (log slope {slope})")));
        }
        worst = worst.max(slope);
        prev = cur;
    }
    Ok(worst)
}

fn family_weight(family: BaseFamily, alpha: f64) -> Result<RadialWeight> {
    match family {
        BaseFamily::Pow => RadialWeight::pow(alpha),
        BaseFamily::Std => RadialWeight::standard(alpha),
    }
}

/// Smallest power of two `K > 4` with `w^(t) <= w^(1 - K(1-t)) / 2` on the
/// dyadic scales `1 - t <= 1/K`.
fn regularity_k(w: &RadialWeight, tol: f64) -> Result<f64> {
    let mut k = 8.0;
    while k <= 1048576.0 {
        let mut ok = true;
        for j in 0..=40 {
            let d = (1.0 / k) * 2f64.powi(-j);
            let ratio = w.tail_mag(d, tol)?.ln_ratio(&w.tail_mag(k * d, tol)?);
            if ratio > -std::f64::consts::LN_2 {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(k);
        }
        k *= 2.0;
    }
    Err(Error::domain(format!("{} has no admissible K up to 2^20", w.descriptor())))
}

/// `W = w` restricted to `[r_{2j+1}, r_{2j+2}]`, `j >= N`, with
/// `phi(t) = ((1-t)/2)^gamma`.
pub fn thm10(p: &Thm10Params) -> Result<Construction> {
    let base = family_weight(p.family, p.alpha)?;
    let beta = fitted_beta(&base)?;
    let gamma = p.gamma.unwrap_or(2.0 * beta);
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    let ln_phi: ScalarFn = Arc::new(move |d: f64| gamma * (d.ln() - std::f64::consts::LN_2));
    let family = match p.family {
        BaseFamily::Pow => "pow",
        BaseFamily::Std => "std",
    };
    thm10_with_phi(&base, beta, ln_phi, p.n, p.m, |n| {
        format!(
            "construct:thm10:family={family},alpha={},gamma={},N={n},M={}",
            fmt_num(p.alpha),
            fmt_num(gamma),
            fmt_num(p.m)
        )
    })
}

/// Reverse doubling exponent of a base weight, after checking that it is
/// doubling in both senses.
fn fitted_beta(base: &RadialWeight) -> Result<f64> {
    let grid = ScaleGrid::default();
    let both = classify::d_both_profile(base, 2.0, &grid, DEFAULT_TOL)?;
    if both.verdict != Verdict::Holds {
        return Err(Error::domain(format!("{} is not classified as doubling in both senses", base.descriptor())));
    }
    both.fitted_exponent
        .filter(|b| *b > 0.0)
        .ok_or_else(|| Error::domain(format!("no reverse doubling exponent for {}", base.descriptor())))
}

/// General form: any `phi` passing [`validate_phi`].
pub fn thm10_with_phi(
    base: &RadialWeight,
    beta: f64,
    ln_phi: ScalarFn,
    n: Option<usize>,
    m: f64,
    descriptor: impl Fn(usize) -> String,
) -> Result<Construction> {
    if !(m > 1.0) {
        return Err(Error::domain(format!("M must exceed 1, got {m}")));
    }
    validate_phi(&*ln_phi)?;
    let k = regularity_k(base, DEFAULT_TOL)?;
    let lp = ln_phi.clone();
    let psi = move |x: f64| -lp(1.0 / x) / (2.0 * beta * std::f64::consts::LN_2);
    let ld = ln_delta_table(&psi);
    let n_min = (0.5 * (psi_inverse(&psi, k.log2())? - 1.0)).ceil().max(1.0) as usize;
    let choice = choose_n(&ld, n_min, beta, m, n)?;
    let mut notes = Vec::new();
    if choice.auto {
        notes.push(format!(
            "N = {} is the first index passing the largeness conditions on the representable range (numerical surrogate)",
            choice.n
        ));
    }
    if let Some(f) = &choice.failure {
        notes.push(format!("requested N = {}: {f}", choice.n));
    }
    let upper = (0..=4 * 60).find_map(|i| {
        let d = (-(i as f64) * std::f64::consts::LN_2 / 4.0).exp();
        let bound = 2.0 * beta * d * d.ln();
        (ln_phi(d) > bound + 1e-12).then_some(d)
    });
    if let Some(d) = upper {
        notes.push(format!("phi exceeds (1-t)^(2 beta (1-t)) at t = 1 - {d:e}"));
    }
    let pieces = odd_even_pieces(&ld, choice.n);
    let weight = base.restricted(pieces.clone(), descriptor(choice.n))?.with_notes(notes);
    let jmax = last_full_index(&ld);
    Ok(Construction {
        name: "thm10",
        params: params(&[("K", k), ("M", m), ("N", choice.n as f64), ("beta", beta), ("pieces", pieces.len() as f64)]),
        weight,
        base: base.clone(),
        doubling_deltas: spread(choice.n, jmax - 1).map(|j| 2.0 * ld[2 * j + 2].exp()).collect(),
        reverse_deltas: Vec::new(),
        moment_xs: moment_scales(&ld, choice.n, jmax),
        dostanic_ns: Vec::new(),
        ln_phi: Some(ln_phi),
        verified_range: format!("j = {}..={jmax}", choice.n),
        ln_deltas: ld,
    })
}

/// Number of construction indices sampled for a profile.
pub const CONSTRUCTION_SAMPLES: usize = 12;

/// [`CONSTRUCTION_SAMPLES`] indices spread evenly over `lo..=hi`; adjacent
/// indices differ too little for a growth trend to show within a window.
fn spread(lo: usize, hi: usize) -> impl Iterator<Item = usize> {
    let n = CONSTRUCTION_SAMPLES;
    let mut v: Vec<usize> = (0..n).map(|i| lo + (i * (hi - lo) + (n - 1) / 2) / (n - 1)).collect();
    v.dedup();
    v.into_iter()
}

/// Geometric midpoints of `[r_{2j}, r_{2j+1}]` in the moment variable.
fn moment_scales(ld: &[f64], n: usize, jmax: usize) -> Vec<f64> {
    spread(n, jmax).map(|j| (-0.5 * (ld[2 * j] + ld[2 * j + 1])).exp()).filter(|x| x.is_finite()).collect()
}

/// `W = 1` on `[r_{2n+1}, r_{2n+2}]`, `n >= N`, `psi(x) = c log2(1+x)`.
pub fn prop12(p: &Prop12Params) -> Result<Construction> {
    if !(p.c > 0.0) || !p.c.is_finite() {
        return Err(Error::domain(format!("c must be positive, got {}", p.c)));
    }
    let c = p.c;
    let psi: ScalarFn = Arc::new(move |x: f64| c * (1.0 + x).log2());
    prop12_with_psi(psi, p.n, |n| format!("construct:prop12:c={},N={n}", fmt_num(c)))
}

/// Checks that `psi` is positive, increasing and `x (psi(x+1) - psi(x))`
/// stays bounded, on `x = 2^{i/4}`, `i = 0..=80`; returns the largest value.
pub fn validate_psi(psi: &dyn Fn(f64) -> f64) -> Result<f64> {
    const C2_MAX: f64 = 64.0;
    if !(psi(1.0) > 0.0) {
        return Err(Error::domain("psi(1) must be positive"));
    }
    let mut worst: f64 = 0.0;
    for i in 0..=80 {
        let x = 2f64.powf(i as f64 / 4.0);
        let inc = x * (psi(x + 1.0) - psi(x));
        if !(inc > 0.0) || inc > C2_MAX || !inc.is_finite() {
            return Err(Error::domain(format!("psi fails x(psi(x+1)-psi(x)) in (0, {C2_MAX}] at x = {x} (value {inc})")));
        }
        worst = worst.max(inc);
    }
    Ok(worst)
}

pub fn prop12_with_psi(psi: ScalarFn, n: Option<usize>, descriptor: impl Fn(usize) -> String) -> Result<Construction> {
    validate_psi(&*psi)?;
    let base = RadialWeight::pow(0.0)?;
    // w^ = 1 - r: beta = 1, and K = 8 is the first power of two above 4.
    let (beta, k, m): (f64, f64, f64) = (1.0, 8.0, 2.0);
    let ld = ln_delta_table(&*psi);
    let n_min = (0.5 * (psi_inverse(&*psi, k.log2())? - 1.0)).ceil().max(1.0) as usize;
    let choice = choose_n(&ld, n_min, beta, m, n)?;
    let mut notes = Vec::new();
    if choice.auto {
        notes.push(format!(
            "N = {} is the first index passing the largeness conditions on the representable range (numerical surrogate)",
            choice.n
        ));
    }
    if let Some(f) = &choice.failure {
        notes.push(format!("requested N = {}: {f}", choice.n));
    }
    let pieces = odd_even_pieces(&ld, choice.n);
    let weight = base.restricted(pieces.clone(), descriptor(choice.n))?.with_notes(notes);
    let jmax = last_full_index(&ld);
    let dostanic_ns = spread(choice.n, jmax).filter_map(|j| dostanic_index(ld[2 * j], ld[2 * j + 1])).collect();
    Ok(Construction {
        name: "prop12",
        params: params(&[("K", k), ("M", m), ("N", choice.n as f64), ("beta", beta), ("pieces", pieces.len() as f64)]),
        weight,
        base,
        doubling_deltas: spread(choice.n, jmax - 1).map(|j| 2.0 * ld[2 * j + 2].exp()).collect(),
        reverse_deltas: Vec::new(),
        moment_xs: moment_scales(&ld, choice.n, jmax),
        dostanic_ns,
        ln_phi: None,
        verified_range: format!("j = {}..={jmax}", choice.n),
        ln_deltas: ld,
    })
}

/// Root `n` of `2 n d1 exp(2 n d0) = 1`, where the square term of the
/// crossing inequality vanishes (`d0 = 1 - r_{2j}`, `d1 = 1 - r_{2j+1}`).
fn dostanic_index(ld0: f64, ld1: f64) -> Option<f64> {
    let d0 = ld0.exp();
    let g = |ln_n: f64| std::f64::consts::LN_2 + ln_n + ld1 + 2.0 * ln_n.exp() * d0;
    let (mut lo, mut hi) = (0.0, -ld1 - std::f64::consts::LN_2);
    if !(g(lo) < 0.0 && g(hi) >= 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi.exp()).filter(|n| *n < 1e300)
}

/// One row of the sandwich `w^ >= W^ >= c w^ phi`.
#[derive(Clone, Debug)]
pub struct SandwichRow {
    pub delta: f64,
    /// `ln (W^ / w^)`, never positive.
    pub ln_upper: f64,
    /// `ln (W^ / (w^ phi))`.
    pub ln_lower: f64,
}

/// Sandwich rows on the given deltas; `c` is the exponential of the least
/// `ln_lower`.
pub fn sandwich_check(c: &Construction, deltas: &[f64], tol: f64) -> Result<(Vec<SandwichRow>, f64)> {
    let ln_phi = c.ln_phi.as_ref().ok_or_else(|| Error::domain(format!("{} has no phi", c.name)))?;
    let mut rows = Vec::with_capacity(deltas.len());
    let mut least = f64::INFINITY;
    for &d in deltas {
        let w = c.weight.tail_mag(d, tol)?;
        let b = c.base.tail_mag(d, tol)?;
        let up = w.ln_ratio(&b);
        let lo = up - ln_phi(d);
        least = least.min(lo);
        rows.push(SandwichRow { delta: d, ln_upper: up, ln_lower: lo });
    }
    Ok((rows, least.exp()))
}

/// `ln (W^(r_{2j+1}) / w^(r_{2j+1}))` for each retained `j`: at least `-ln 2`
/// is what rules out the M class.
pub fn gap_ratios(c: &Construction, tol: f64) -> Result<Vec<(usize, f64)>> {
    let n = *c.params.get("N").ok_or_else(|| Error::domain("construction has no N"))? as usize;
    let jmax = last_full_index(&c.ln_deltas);
    (n..=jmax)
        .map(|j| {
            let d = c.ln_deltas[2 * j + 1].exp();
            Ok((j, c.weight.tail_mag(d, tol)?.ln_ratio(&c.base.tail_mag(d, tol)?)))
        })
        .collect()
}

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{doubling_profile, dostanic_profile, m_class_profile, reverse_doubling_profile};

    #[test]
    fn prop9_endpoints() {
        assert_eq!(1.0 - prop9_t_delta(1), 0.75);
        assert_eq!(1.0 - prop9_t_delta(2), 0.9375);
        assert_eq!(prop9_s_delta(2), 1.0 / 32.0);
    }

    #[test]
    fn prop9_reverse_doubling_collapses_at_t_n() {
        let c = prop9().unwrap();
        for &d in &c.reverse_deltas {
            let a = c.weight.tail_mag(d, DEFAULT_TOL).unwrap();
            let b = c.weight.tail_mag(d / 2.0, DEFAULT_TOL).unwrap();
            assert_eq!(a.ln_ratio(&b), 0.0, "at delta {d}");
        }
        let rep = reverse_doubling_profile(&c.weight, 2.0, &ScaleGrid::from_deltas(c.reverse_deltas.clone()), DEFAULT_TOL).unwrap();
        assert_eq!(rep.verdict, Verdict::Diverges);
    }

    #[test]
    fn prop9_tail_positive_everywhere() {
        let c = prop9().unwrap();
        for j in 0..1023 {
            let d = 2f64.powi(-j);
            assert!(!c.weight.tail_mag(d, DEFAULT_TOL).unwrap().is_zero(), "2^-{j}");
        }
    }

    #[test]
    fn prop12_sequence() {
        let c = prop12(&Prop12Params::default()).unwrap();
        assert!((c.ln_deltas[2].exp() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(c.params["N"], 3.0);
        assert_eq!(c.weight.descriptor(), "construct:prop12:c=1,N=3");
    }

    #[test]
    fn prop12_tail_exact() {
        let c = prop12(&Prop12Params::default()).unwrap();
        let ld = &c.ln_deltas;
        // tail at r_{2N+1} is the sum of the retained interval lengths
        let n = 3;
        let mut s = 0.0;
        for j in n..20 {
            s += ld[2 * j + 1].exp() - ld[2 * j + 2].exp();
        }
        let got = c.weight.tail(1.0 - ld[2 * n + 1].exp(), DEFAULT_TOL).unwrap().exp();
        assert!((got - s).abs() < 1e-15 * s.max(1e-300) + 1e-17);
    }

    #[test]
    fn prop12_not_doubling_and_dostanic_grows() {
        let c = prop12(&Prop12Params::default()).unwrap();
        let g = ScaleGrid::from_deltas(c.doubling_deltas.clone());
        assert_eq!(doubling_profile(&c.weight, &g, DEFAULT_TOL).unwrap().verdict, Verdict::Diverges);
        let d = dostanic_profile(&c.weight, 1.5, &c.dostanic_ns, DEFAULT_TOL).unwrap();
        let r: Vec<f64> = d.grid.iter().map(|g| g.ratio).collect();
        assert!(r.len() >= 8);
        assert!(r.windows(2).all(|w| w[1] > w[0]), "{r:?}");
        // the climb is logarithmic in j, too slow to pass the divergence rule
        assert_eq!(d.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn thm10_pow() {
        let c = thm10(&Thm10Params::default()).unwrap();
        assert_eq!(c.params["K"], 8.0);
        assert!((c.params["beta"] - 2.0).abs() < 1e-6);
        let g = ScaleGrid::from_deltas(c.doubling_deltas.clone());
        assert_eq!(doubling_profile(&c.weight, &g, DEFAULT_TOL).unwrap().verdict, Verdict::Diverges);
        let deltas: Vec<f64> = (1..60).map(|j| 2f64.powi(-j)).collect();
        let (rows, cst) = sandwich_check(&c, &deltas, DEFAULT_TOL).unwrap();
        assert!(rows.iter().all(|r| r.ln_upper <= 1e-12));
        assert!(cst > 0.0);
        for (j, v) in gap_ratios(&c, DEFAULT_TOL).unwrap() {
            assert!(v >= -std::f64::consts::LN_2, "j = {j}: {v}");
        }
        let m = m_class_profile(&c.weight, 2.0, &c.moment_xs, &g, DEFAULT_TOL).unwrap();
        assert_ne!(m.verdict, Verdict::Holds);
    }

    #[test]
    fn bad_phi_is_rejected() {
        let ln_phi: ScalarFn = Arc::new(|d: f64| -1.0 - d.ln().powi(2));
        match validate_phi(&*ln_phi) {
            Err(Error::Domain(m)) => assert!(m.contains("t = ")),
            r => panic!("{r:?}"),
        }
        let psi = |x: f64| x;
        assert!(validate_psi(&psi).is_err());
    }
}
