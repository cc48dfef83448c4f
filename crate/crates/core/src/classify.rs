//! Numerical class-membership tests for radial weights.
//!
//! Each test evaluates a ratio along a grid of scales approaching the
//! boundary and reads a verdict off the last few points. A ratio that
//! should stay bounded ("sup type") diverges when it grows monotonically or
//! overflows; a ratio that should stay above one ("inf type") is judged on
//! its defect `1/(ratio - 1)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::LogMag;
use crate::quad::{ln_integrate_delta, Span};
use crate::weights::{Factor, Integrand, RadialWeight};

/// Points inspected by the verdict rule.
pub const VERDICT_WINDOW: usize = 8;
/// Minimum growth over the window for a monotone profile to count as divergent.
pub const DIVERGE_GROWTH: f64 = 1.5;
/// Maximum growth over the window for a profile to count as bounded.
pub const HOLD_GROWTH: f64 = 1.25;
/// Growth over the window above which a strictly increasing profile is
/// reported as inconclusive rather than bounded.
pub const TREND_GROWTH: f64 = 1.01;

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Diverges,
    Inconclusive,
}

/// Which direction a ratio has to stay bounded in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// `sup ratio < inf`
    Above,
    /// `inf ratio > 1`
    AboveOne,
}

pub(crate) mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub scale: f64,
    #[serde(with = "nullable")]
    pub ratio: f64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ClassReport {
    #[serde(rename = "class")]
    pub class_name: String,
    pub weight: String,
    pub params: BTreeMap<String, f64>,
    pub grid: Vec<GridPoint>,
    #[serde(with = "nullable")]
    pub est_constant: f64,
    pub verdict: Verdict,
    pub flagged: bool,
    pub diagnostics: Vec<String>,
    /// Scales at which the ratio left the floating point range.
    pub overflow_scales: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub secondary: BTreeMap<String, Vec<GridPoint>>,
}

/// Distances to the boundary at which a profile is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleGrid {
    pub deltas: Vec<f64>,
}

impl ScaleGrid {
    /// `r_j = 1 - 2^{-j}`, `j = 0..=jmax`.
    pub fn dyadic(jmax: u32) -> Self {
        ScaleGrid { deltas: (0..=jmax).map(|j| 2f64.powi(-(j as i32))).collect() }
    }

    pub fn from_deltas(deltas: Vec<f64>) -> Self {
        ScaleGrid { deltas }
    }

    /// Keep only `r >= 1 - dmax`.
    pub fn clipped(&self, dmax: f64) -> Self {
        ScaleGrid { deltas: self.deltas.iter().cloned().filter(|&d| d <= dmax).collect() }
    }
}

impl Default for ScaleGrid {
    fn default() -> Self {
        ScaleGrid::dyadic(40)
    }
}

/// Verdict for a sequence of ratios ordered towards the boundary.
pub fn verdict(ratios: &[f64], bound: Bound) -> Verdict {
    let vals: Vec<f64> = match bound {
        Bound::Above => ratios.to_vec(),
        Bound::AboveOne => ratios
            .iter()
            .map(|&r| if r <= 1.0 { f64::INFINITY } else { 1.0 / (r - 1.0) })
            .collect(),
    };
    if vals.iter().any(|v| v.is_infinite() || v.is_nan()) {
        return Verdict::Diverges;
    }
    if vals.len() < VERDICT_WINDOW {
        return Verdict::Inconclusive;
    }
    let w = &vals[vals.len() - VERDICT_WINDOW..];
    let increasing = w.windows(2).all(|p| p[1] > p[0]);
    if increasing && w[w.len() - 1] >= DIVERGE_GROWTH * w[0] {
        return Verdict::Diverges;
    }
    // a steady climb below the divergence threshold is not evidence of a bound
    let climbing = w.windows(2).all(|p| p[1] > p[0] * (1.0 + 1e-9)) && w[w.len() - 1] > TREND_GROWTH * w[0];
    if climbing {
        return Verdict::Inconclusive;
    }
    let max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= HOLD_GROWTH * w[0] || (w[0] == 0.0 && max == 0.0) {
        return Verdict::Holds;
    }
    Verdict::Inconclusive
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(a, b)| (*a, *b)).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Ratios for each grid point; the grid is cut at the first accuracy failure.
type Points = Vec<Result<f64>>;

fn report(class_name: &str, w: &RadialWeight, params: BTreeMap<String, f64>, scales: &[f64], points: Points, bound: Bound) -> Result<ClassReport> {
    let mut ratios = Vec::with_capacity(points.len());
    let mut truncated = None;
    for (i, p) in points.into_iter().enumerate() {
        match p {
            Ok(v) => ratios.push(v),
            Err(e) if e.is_accuracy() => {
                truncated = Some(format!("grid truncated at scale {} after accuracy failure: {e}", scales[i]));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let grid: Vec<GridPoint> = scales.iter().zip(&ratios).map(|(&s, &r)| GridPoint { scale: s, ratio: r }).collect();
    let overflow_scales: Vec<f64> = grid.iter().filter(|g| !g.ratio.is_finite()).map(|g| g.scale).collect();
    let est = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut diagnostics = Vec::new();
    if !overflow_scales.is_empty() {
        diagnostics.push(format!("ratio overflows at {} of {} scales", overflow_scales.len(), grid.len()));
    }
    let flagged = w.is_flagged() || truncated.is_some();
    diagnostics.extend(truncated);
    diagnostics.extend(w.notes().iter().cloned());
    Ok(ClassReport {
        class_name: class_name.to_string(),
        weight: w.descriptor().to_string(),
        params,
        grid,
        est_constant: est,
        verdict: verdict(&ratios, bound),
        flagged,
        diagnostics,
        overflow_scales,
        fitted_exponent: None,
        secondary: BTreeMap::new(),
    })
}

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn r_of(d: f64) -> f64 {
    1.0 - d
}

fn tail_ratio(w: &RadialWeight, d1: f64, d2: f64, tol: f64) -> Result<f64> {
    let a = w.tail_mag(d1, tol)?;
    let b = w.tail_mag(d2, tol)?;
    Ok(a.ln_ratio(&b).exp())
}

/// `w^(r) / w^((1+r)/2)` along the grid: bounded for doubling weights.
pub fn doubling_profile(w: &RadialWeight, grid: &ScaleGrid, tol: f64) -> Result<ClassReport> {
    let pts: Points = grid.deltas.par_iter().map(|&d| tail_ratio(w, d, d / 2.0, tol)).collect();
    let scales: Vec<f64> = grid.deltas.iter().map(|&d| r_of(d)).collect();
    report("Dhat", w, params(&[("tol", tol)]), &scales, pts, Bound::Above)
}

/// `w^(r) / w^(1 - (1-r)/K)`: stays above one for reverse doubling weights.
///
/// Also fits `beta` in `w^(t) <~ ((1-t)/(1-r))^beta w^(r)` from the slope of
/// `ln w^` against `ln(1-r)` over the last ten grid points.
pub fn reverse_doubling_profile(w: &RadialWeight, k: f64, grid: &ScaleGrid, tol: f64) -> Result<ClassReport> {
    if !(k > 1.0) {
        return Err(Error::domain(format!("K must exceed 1, got {k}")));
    }
    let pairs: Vec<Result<(LogMag, LogMag)>> =
        grid.deltas.par_iter().map(|&d| Ok((w.tail_mag(d, tol)?, w.tail_mag(d / k, tol)?))).collect();
    let pts: Points = pairs.iter().map(|p| p.as_ref().map(|(a, b)| a.ln_ratio(b).exp()).map_err(clone_err)).collect();
    let scales: Vec<f64> = grid.deltas.iter().map(|&d| r_of(d)).collect();
    let mut rep = report("Dcheck", w, params(&[("K", k), ("tol", tol)]), &scales, pts, Bound::AboveOne)?;
    let min = rep.grid.iter().map(|g| g.ratio).fold(f64::INFINITY, f64::min);
    rep.params.insert("min_ratio".into(), min);
    let n = rep.grid.len();
    let from = n.saturating_sub(10);
    let lx: Vec<f64> = grid.deltas[from..n].iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = pairs[from..n].iter().map(|p| p.as_ref().map(|m| m.0.ln()).unwrap_or(f64::NAN)).collect();
    rep.fitted_exponent = fit_slope(&lx, &ly);
    Ok(rep)
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::Accuracy { msg, estimate, achieved } => Error::Accuracy { msg: msg.clone(), estimate: *estimate, achieved: *achieved },
        Error::Divergent(m) => Error::Divergent(m.clone()),
        Error::Domain(m) => Error::Domain(m.clone()),
        other => Error::Domain(other.to_string()),
    }
}

/// Membership in D = D-hat and D-check together.
pub fn d_both_profile(w: &RadialWeight, k: f64, grid: &ScaleGrid, tol: f64) -> Result<ClassReport> {
    let hat = doubling_profile(w, grid, tol)?;
    let check = reverse_doubling_profile(w, k, grid, tol)?;
    let verdict = match (hat.verdict, check.verdict) {
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        (Verdict::Diverges, _) | (_, Verdict::Diverges) => Verdict::Diverges,
        _ => Verdict::Inconclusive,
    };
    let hat_verdict = hat.verdict;
    let mut rep = hat;
    rep.class_name = "Dboth".into();
    rep.verdict = verdict;
    rep.params.insert("K".into(), k);
    rep.flagged |= check.flagged;
    rep.fitted_exponent = check.fitted_exponent;
    rep.diagnostics.push(format!("doubling part: {}, reverse doubling part: {}", verdict_name(hat_verdict), verdict_name(check.verdict)));
    rep.secondary.insert("reverse_doubling".into(), check.grid);
    Ok(rep)
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Diverges => "diverges",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Moment ratios `w_x / w_{Kx}` (inf type), with condition (10) for the same
/// `M = K` as a secondary profile.
pub fn m_class_profile(w: &RadialWeight, k: f64, xs: &[f64], t_grid: &ScaleGrid, tol: f64) -> Result<ClassReport> {
    if !(k > 1.0) {
        return Err(Error::domain(format!("K must exceed 1, got {k}")));
    }
    let pts: Points = xs.par_iter().map(|&x| Ok((w.moment(x, tol)? - w.moment(k * x, tol)?).exp())).collect();
    let mut rep = report("M", w, params(&[("K", k), ("M", k), ("tol", tol)]), xs, pts, Bound::AboveOne)?;
    let min = rep.grid.iter().map(|g| g.ratio).fold(f64::INFINITY, f64::min);
    rep.params.insert("min_ratio".into(), min);
    let c10 = condition10_profile(w, k, t_grid, tol)?;
    rep.diagnostics.push(format!("condition (10) profile: {}", verdict_name(c10.verdict)));
    rep.flagged |= c10.flagged;
    rep.secondary.insert("condition10".into(), c10.grid);
    Ok(rep)
}

/// `w^(t) / \int_0^t s^{1/(M(1-t))} w(s) ds` for `t >= 1 - 1/M` (sup type).
pub fn condition10_profile(w: &RadialWeight, m: f64, grid: &ScaleGrid, tol: f64) -> Result<ClassReport> {
    if !(m > 0.0) {
        return Err(Error::domain(format!("M must be positive, got {m}")));
    }
    let g = grid.clipped(1.0 / m);
    let pts: Points = g
        .deltas
        .par_iter()
        .map(|&d| {
            let top = w.tail_mag(d, tol)?;
            let bot = w.partial_moment(1.0 / (m * d), d, tol)?;
            Ok(top.ln_ratio(&LogMag::Ln(bot)).exp())
        })
        .collect();
    let scales: Vec<f64> = g.deltas.iter().map(|&d| r_of(d)).collect();
    report("Cond10", w, params(&[("M", m), ("tol", tol)]), &scales, pts, Bound::Above)
}

/// Which side of the moment characterization to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSide {
    /// `w_x <= C x^beta (w_[beta])_x`
    M,
    /// `x^beta (w_[beta])_x <= C w_x`
    Dhat,
}

/// Ratio profile of `w_x` against `x^beta (w_[beta])_x` (sup type).
pub fn moment_characterization(w: &RadialWeight, beta: f64, xs: &[f64], side: MomentSide, tol: f64) -> Result<ClassReport> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    let f = Factor { x: 0.0, bracket: beta, paren: 0.0 };
    let pts: Points = xs
        .par_iter()
        .map(|&x| {
            let a = w.moment(x, tol)?;
            let b = beta * x.ln() + w.ln_integral(Integrand::Factor(Factor { x, ..f }), Span::FULL, tol)?;
            Ok(match side {
                MomentSide::M => (a - b).exp(),
                MomentSide::Dhat => (b - a).exp(),
            })
        })
        .collect();
    let name = match side {
        MomentSide::M => "M",
        MomentSide::Dhat => "Dhat",
    };
    let mut rep = report(name, w, params(&[("beta", beta), ("tol", tol)]), xs, pts, Bound::Above)?;
    rep.diagnostics.push("moment characterization".into());
    Ok(rep)
}

/// `\int_r^1 w^(s)^gamma / (1-s) ds / w^(r)^gamma` (sup type).
pub fn dd_integral_profile(w: &RadialWeight, gamma: f64, grid: &ScaleGrid, tol: f64) -> Result<ClassReport> {
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    let inner_tol = tol * 0.1;
    let breaks = w.breakpoints();
    let pts: Points = grid
        .deltas
        .par_iter()
        .map(|&d| {
            let base = w.tail_mag(d, inner_tol)?;
            let failure = std::sync::Mutex::new(None);
            let f = |s: f64| match w.tail_mag(s, inner_tol) {
                Ok(m) => gamma * m.ln_ratio(&base) - s.ln(),
                Err(e) => {
                    *failure.lock().unwrap() = Some(e);
                    f64::NEG_INFINITY
                }
            };
            let v = match ln_integrate_delta(&f, Span::tail_from(d), &breaks, tol) {
                Ok(v) => v,
                Err(Error::Divergent(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            Ok(v.exp())
        })
        .collect();
    let scales: Vec<f64> = grid.deltas.iter().map(|&d| r_of(d)).collect();
    let mut rep = report("DdIntegral", w, params(&[("gamma", gamma), ("tol", tol)]), &scales, pts, Bound::Above)?;
    if rep.grid.iter().any(|g| g.ratio > 1e12) {
        rep.verdict = Verdict::Diverges;
        rep.diagnostics.push("ratio exceeds 1e12".into());
    }
    Ok(rep)
}

/// `w_{np+1}^{1/p} w_{np'+1}^{1/p'} / w_{2n+1}` (sup type; identically one for p = 2).
pub fn dostanic_profile(w: &RadialWeight, p: f64, ns: &[f64], tol: f64) -> Result<ClassReport> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    let q = p / (p - 1.0);
    let pts: Points = ns
        .par_iter()
        .map(|&n| {
            let a = w.moment(n * p + 1.0, tol)?;
            let b = w.moment(n * q + 1.0, tol)?;
            let c = w.moment(2.0 * n + 1.0, tol)?;
            Ok((a / p + b / q - c).exp())
        })
        .collect();
    report("Dostanic", w, params(&[("p", p), ("tol", tol)]), ns, pts, Bound::Above)
}

/// `(\int_0^t J^p w dr + 1) w^(t)^{p-1}` with `J(r) = \int_0^r dt / (w^(t)(1-t))`.
///
/// `J` is accumulated in `u = -ln(1-r)` (where `dJ = du / w^`) on a table of
/// knots containing every grid point; scales where `ln w^` is no longer a
/// finite double are dropped and reported.
pub fn pplus_necessity(w: &RadialWeight, p: f64, grid: &ScaleGrid, tol: f64) -> Result<ClassReport> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    let mut deltas: Vec<f64> = grid.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let mut usable = Vec::new();
    let mut dropped = 0usize;
    for &d in &deltas {
        let lt = w.tail_mag(d, tol)?.ln();
        if lt.is_finite() && lt > -1e300 {
            usable.push(d);
        } else {
            dropped += 1;
        }
    }
    let step = std::f64::consts::LN_2 / 4.0;
    let umax = usable.iter().map(|d| -d.ln()).fold(0.0, f64::max);
    let mut knots: Vec<f64> = (0..).map(|k| k as f64 * step).take_while(|&u| u < umax).collect();
    knots.extend(usable.iter().map(|d| -d.ln()));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let inv_tail = |u: f64| -> f64 {
        match w.tail_mag((-u).exp(), tol * 0.1) {
            Ok(m) => -m.ln(),
            Err(_) => f64::NAN,
        }
    };
    // ln J at the knots, then ln \int J^p w dr between knots
    let n = knots.len();
    let seg: Vec<f64> = (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|i| crate::quad::ln_adaptive(&inv_tail, knots[i], knots[i + 1], tol, f64::NEG_INFINITY).ln_value)
        .collect();
    let mut ln_j = vec![f64::NEG_INFINITY; n];
    for i in 1..n {
        ln_j[i] = crate::logspace::log_add(ln_j[i - 1], seg[i - 1]);
    }
    let outer: Vec<f64> = (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let (a, b) = (knots[i], knots[i + 1]);
            let f = |u: f64| {
                let inner = crate::quad::ln_adaptive(&inv_tail, a, u, tol, f64::NEG_INFINITY).ln_value;
                let lj = crate::logspace::log_add(ln_j[i], inner);
                p * lj + w.ln_density((-u).exp()) - u
            };
            crate::quad::ln_adaptive(&f, a, b, tol, f64::NEG_INFINITY).ln_value
        })
        .collect();
    let mut cum = vec![f64::NEG_INFINITY; n];
    for i in 1..n {
        cum[i] = crate::logspace::log_add(cum[i - 1], outer[i - 1]);
    }
    let mut scales = Vec::new();
    let mut pts: Points = Vec::new();
    for &d in grid.deltas.iter().filter(|d| usable.contains(d)) {
        let u = -d.ln();
        let i = knots.iter().position(|&k| k == u).unwrap_or(0);
        let lt = w.tail_mag(d, tol)?.ln();
        scales.push(r_of(d));
        pts.push(Ok((crate::logspace::log_add(cum[i], 0.0) + (p - 1.0) * lt).exp()));
    }
    let mut rep = report("Muck7", w, params(&[("p", p), ("tol", tol)]), &scales, pts, Bound::Above)?;
    if dropped > 0 {
        rep.flagged = true;
        rep.diagnostics.push(format!("{dropped} scales dropped: ln of the tail is not representable there"));
    }
    Ok(rep)
}

/// `J(r) = \int_0^r dt / (w^(t)(1-t))`, as a natural log.
pub fn ln_j(w: &RadialWeight, r: f64, tol: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("J needs 0 <= r < 1, got {r}")));
    }
    let f = |u: f64| match w.tail_mag((-u).exp(), tol * 0.1) {
        Ok(m) => -m.ln(),
        Err(_) => f64::NAN,
    };
    let q = crate::quad::ln_adaptive(&f, 0.0, -(-r).ln_1p(), tol, f64::NEG_INFINITY);
    Ok(q.ln_value)
}

/// Derivatives of `L(x) = -ln w_x` and the combinations bounded for the class M.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LRow {
    pub x: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// `x L'`
    pub x_l1: f64,
    /// `-x^2 L''`
    pub neg_x2_l2: f64,
    /// `x^2 (L'^2 - L'')`
    pub x2_combo: f64,
    /// `x^3 (L''' + L'^3 - 3 L' L'')`
    pub x3_combo: f64,
}

/// Exact derivatives of `L` from the log-modified moments `(w_(k))_x / w_x`.
pub fn l_derivatives(w: &RadialWeight, xs: &[f64], tol: f64) -> Result<Vec<LRow>> {
    xs.par_iter()
        .map(|&x| {
            let m0 = w.moment(x, tol)?;
            let m = |k: f64| -> Result<f64> {
                Ok((w.ln_integral(Integrand::Factor(Factor { x, bracket: 0.0, paren: k }), Span::FULL, tol)? - m0).exp())
            };
            let (m1, m2, m3) = (m(1.0)?, m(2.0)?, m(3.0)?);
            let l1 = m1;
            let l2 = m1 * m1 - m2;
            let l3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
            // L'^2 - L'' = m2 and L''' + L'^3 - 3L'L'' = m3
            Ok(LRow { x, l1, l2, l3, x_l1: x * l1, neg_x2_l2: -x * x * l2, x2_combo: x * x * m2, x3_combo: x * x * x * m3 })
        })
        .collect()
}

/// `x L'` as the main profile, with `-x^2 L''`, `x^2(L'^2-L'')` and
/// `x^3(L'''+L'^3-3L'L'')` as secondary profiles; all sup type.
pub fn l_diagnostics(w: &RadialWeight, xs: &[f64], tol: f64) -> Result<ClassReport> {
    let rows = l_derivatives(w, xs, tol)?;
    let pts: Points = rows.iter().map(|r| Ok(r.x_l1)).collect();
    let mut rep = report("Ldiag", w, params(&[("tol", tol)]), xs, pts, Bound::Above)?;
    let col = |f: fn(&LRow) -> f64| -> Vec<GridPoint> { rows.iter().map(|r| GridPoint { scale: r.x, ratio: f(r) }).collect() };
    let others = [
        ("neg_x2_l2", col(|r| r.neg_x2_l2)),
        ("x2_combo", col(|r| r.x2_combo)),
        ("x3_combo", col(|r| r.x3_combo)),
    ];
    let mut verdicts = vec![rep.verdict];
    for (name, g) in others {
        let v = verdict(&g.iter().map(|p| p.ratio.abs()).collect::<Vec<_>>(), Bound::Above);
        rep.diagnostics.push(format!("{name}: {}", verdict_name(v)));
        if name != "neg_x2_l2" {
            verdicts.push(v);
        }
        rep.secondary.insert(name.to_string(), g);
    }
    rep.verdict = if verdicts.contains(&Verdict::Diverges) {
        Verdict::Diverges
    } else if verdicts.iter().all(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(rep)
}

/// Two-weight constants `A_p` and `M_p` with their profiles.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct TwoWeightReport {
    pub omega: String,
    pub nu: String,
    pub p: f64,
    #[serde(with = "nullable")]
    pub a_p: f64,
    #[serde(with = "nullable")]
    pub m_p: f64,
    pub rows: Vec<TwoWeightRow>,
    pub diagnostics: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct TwoWeightRow {
    pub r: f64,
    #[serde(with = "nullable")]
    pub sigma_hat: f64,
    #[serde(with = "nullable", rename = "Ap_integrand")]
    pub ap_integrand: f64,
    #[serde(with = "nullable", rename = "Mp_integrand")]
    pub mp_integrand: f64,
}

/// `A_p = sup nu^^{1/p} sigma^^{1/p'} / w^` and
/// `M_p = sup (\int_0^r nu/w^^p s ds + 1)^{1/p} sigma^^{1/p'}`, over the grid.
pub fn two_weight_constants(omega: &RadialWeight, nu: &RadialWeight, p: f64, grid: &ScaleGrid, tol: f64) -> Result<TwoWeightReport> {
    let sigma = RadialWeight::sigma(omega, nu, p)?;
    let q = p / (p - 1.0);
    let mut diagnostics = Vec::new();
    let sig: Vec<f64> = grid
        .deltas
        .par_iter()
        .map(|&d| match sigma.tail_mag(d, tol) {
            Ok(m) => Ok(m.ln()),
            Err(Error::Divergent(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    if sig.iter().any(|s| s.is_infinite() && *s > 0.0) {
        diagnostics.push("sigma is not integrable near the boundary".into());
    }
    let rows: Vec<TwoWeightRow> = grid
        .deltas
        .par_iter()
        .zip(&sig)
        .map(|(&d, &ls)| {
            let lw = omega.tail_mag(d, tol)?.ln();
            let ln_nu = nu.tail_mag(d, tol)?.ln();
            let a = (ln_nu / p + ls / q - lw).exp();
            let inner_tol = tol * 0.1;
            let failure = std::sync::Mutex::new(None);
            let g = |s: f64| match omega.tail_mag(s, inner_tol) {
                Ok(m) => (-s).ln_1p() - p * m.ln(),
                Err(e) => {
                    *failure.lock().unwrap() = Some(e);
                    f64::NEG_INFINITY
                }
            };
            let li = nu.ln_integral(Integrand::Custom(&g), Span { hi: 1.0, lo: d }, tol)?;
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            let m = (crate::logspace::log_add(li, 0.0) / p + ls / q).exp();
            Ok(TwoWeightRow { r: 1.0 - d, sigma_hat: ls.exp(), ap_integrand: a, mp_integrand: m })
        })
        .collect::<Result<_>>()?;
    let a_p = rows.iter().map(|r| r.ap_integrand).fold(f64::NEG_INFINITY, f64::max);
    let m_p = rows.iter().map(|r| r.mp_integrand).fold(f64::NEG_INFINITY, f64::max);
    Ok(TwoWeightReport {
        omega: omega.descriptor().to_string(),
        nu: nu.descriptor().to_string(),
        p,
        a_p,
        m_p,
        rows,
        diagnostics,
    })
}
