//! Adaptive Gauss-Kronrod quadrature, mostly in log space.
//!
//! Radial integrals over `[r, 1)` are taken in `u = -ln(1-r)`, with
//! `delta = 1 - r` passed to integrands instead of `r` so nothing cancels
//! near the boundary. Every subinterval keeps its own log-scale and the
//! pieces are combined with a log-sum, so integrands ranging over hundreds
//! of orders of magnitude are fine.

use crate::error::{Error, Result};
use crate::logspace::{log_add, log_sum};

pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_SEGMENTS: usize = 4000;
/// Beyond this `u` an integral over `[r,1)` is considered exhausted.
const U_MAX: f64 = 745.0;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Interval `[a,b]` whose integral is `exp(scale) * val` with error `exp(scale) * err`.
#[derive(Clone, Copy, Debug)]
struct Seg {
    a: f64,
    b: f64,
    scale: f64,
    val: f64,
    err: f64,
}

impl Seg {
    fn ln_val(&self) -> f64 {
        self.scale + self.val.ln()
    }
    fn ln_err(&self) -> f64 {
        self.scale + self.err.ln()
    }
}

fn gk15_log(lnf: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Seg {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut lv = [0.0f64; 15];
    lv[0] = lnf(c);
    for j in 0..7 {
        lv[1 + 2 * j] = lnf(c - h * XGK[j]);
        lv[2 + 2 * j] = lnf(c + h * XGK[j]);
    }
    let mut scale = f64::NEG_INFINITY;
    for &v in &lv {
        if v.is_finite() || v == f64::INFINITY {
            scale = scale.max(v);
        }
    }
    // GK nodes stay clear of the ends, so a cliff at an end can hide between
    // the end and the outermost node; charge it to the error until resolved.
    let edge = lnf(a).max(lnf(b));
    let hidden = edge.is_finite() && (scale == f64::NEG_INFINITY || edge > scale + 10.0);
    if scale == f64::NEG_INFINITY || scale.is_nan() {
        if hidden {
            return Seg { a, b, scale: edge, val: 0.0, err: b - a };
        }
        return Seg { a, b, scale: f64::NEG_INFINITY, val: 0.0, err: 0.0 };
    }
    let e = |v: f64| if v.is_nan() { 0.0 } else { (v - scale).exp() };
    let fc = e(lv[0]);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = k;
    for j in 0..7 {
        let f1 = e(lv[1 + 2 * j]);
        let f2 = e(lv[2 + 2 * j]);
        k += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * k;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((e(lv[1 + 2 * j]) - mean).abs() + (e(lv[2 + 2 * j]) - mean).abs());
    }
    let (k, g, asc, abs) = (k * h, g * h, asc * h, abs * h);
    let mut err = (k - g).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    err = err.max(50.0 * f64::EPSILON * abs);
    if hidden {
        let shift = (scale - edge).exp();
        return Seg { a, b, scale: edge, val: k * shift, err: (err * shift).max(b - a) };
    }
    Seg { a, b, scale, val: k, err }
}

/// Result of a log-space integration.
#[derive(Clone, Copy, Debug)]
pub struct LnQuad {
    pub ln_value: f64,
    pub ln_error: f64,
    pub converged: bool,
}

impl LnQuad {
    pub fn rel_error(&self) -> f64 {
        (self.ln_error - self.ln_value).exp()
    }
}

fn totals(segs: &[Seg]) -> (f64, f64) {
    (
        log_sum(segs.iter().map(|s| s.ln_val())),
        log_sum(segs.iter().map(|s| s.ln_err())),
    )
}

/// Integrate `exp(lnf)` over `[a,b]` to relative tolerance `tol`, or until
/// the error drops below `exp(ln_floor)`.
pub fn ln_adaptive(lnf: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, ln_floor: f64) -> LnQuad {
    let mut segs = vec![gk15_log(lnf, a, b)];
    loop {
        let (lv, le) = totals(&segs);
        // evaluating exp(lnf) with |lnf| large carries relative noise ~ eps |lnf|
        let ln_noise = log_sum(segs.iter().map(|s| s.ln_val() + (64.0 * f64::EPSILON * (1.0 + s.scale.abs())).ln()));
        let target = (tol.ln() + lv).max(ln_floor).max(ln_noise);
        if (lv == f64::NEG_INFINITY && le == f64::NEG_INFINITY) || le <= target {
            return LnQuad { ln_value: lv, ln_error: le, converged: true };
        }
        if segs.len() >= MAX_SEGMENTS {
            return LnQuad { ln_value: lv, ln_error: le, converged: false };
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.b - s.a > 1e-13 * (s.a.abs() + s.b.abs()).max(1e-300))
            .max_by(|x, y| x.1.ln_err().total_cmp(&y.1.ln_err()))
            .unwrap_or((usize::MAX, &segs[0]));
        if idx == usize::MAX {
            return LnQuad { ln_value: lv, ln_error: le, converged: false };
        }
        let s = segs.swap_remove(idx);
        let m = 0.5 * (s.a + s.b);
        segs.push(gk15_log(lnf, s.a, m));
        segs.push(gk15_log(lnf, m, s.b));
    }
}

/// Plain adaptive GK15 for signed real integrands.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> (f64, f64, bool) {
    let rule = |a: f64, b: f64| -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WGK[7] * fc;
        let mut g = WG[3] * fc;
        for j in 0..7 {
            let s = f(c - h * XGK[j]) + f(c + h * XGK[j]);
            k += WGK[j] * s;
            if j % 2 == 1 {
                g += WG[j / 2] * s;
            }
        }
        (k * h, ((k - g) * h).abs())
    };
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = rule(a, b);
    segs.push((a, b, v, e));
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= (rel_tol * total.abs()).max(abs_tol) {
            return (total, err, true);
        }
        if segs.len() >= MAX_SEGMENTS {
            return (total, err, false);
        }
        let idx = (0..segs.len()).max_by(|&i, &j| segs[i].3.total_cmp(&segs[j].3)).unwrap();
        let (a, b, _, _) = segs.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = rule(a, m);
        let (v2, e2) = rule(m, b);
        segs.push((a, m, v1, e1));
        segs.push((m, b, v2, e2));
    }
}

/// A radial range `r in [1-hi, 1-lo]`, described by the distances to the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span {
    pub hi: f64,
    pub lo: f64,
}

impl Span {
    pub const FULL: Span = Span { hi: 1.0, lo: 0.0 };

    /// `[r, 1)`.
    pub fn tail_from(delta: f64) -> Span {
        Span { hi: delta, lo: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }

    pub fn intersect(&self, other: &Span) -> Span {
        Span { hi: self.hi.min(other.hi), lo: self.lo.max(other.lo) }
    }
}

fn accuracy(msg: &str, q: LnQuad) -> Error {
    Error::Accuracy {
        msg: msg.to_string(),
        estimate: q.ln_value,
        achieved: q.rel_error(),
    }
}

/// Rough log of the largest contribution of a width-`ln 2 / 2` window,
/// from samples at the cuts and on a grid. Panels far below it are accepted
/// without resolving them to relative accuracy, which keeps integrands with
/// a sharp cutoff (`exp(-x delta)` for huge `x`) from stalling.
fn peak_estimate(lng: &dyn Fn(f64) -> f64, cuts: &[f64], ua: f64, ub: f64, dyadic_end: f64) -> f64 {
    let h = std::f64::consts::LN_2 / 2.0;
    let end = ub.min(U_MAX);
    let width = h.min(end - ua).max(f64::MIN_POSITIVE);
    let mut peak = f64::NEG_INFINITY;
    let mut take = |v: f64| {
        if !v.is_nan() {
            peak = peak.max(v);
        }
    };
    for &c in cuts {
        take(lng(c));
    }
    let mut u = ua;
    let mut step = h;
    while u < end {
        take(lng(u));
        if u > dyadic_end {
            step *= 2.0;
        }
        u += step;
    }
    take(lng(end));
    if peak.is_finite() {
        peak + width.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln \int_{1-hi}^{1-lo} exp(lnf(delta)) dr`, integrating in `u = -ln delta`.
///
/// Panels are split at every `ln 2` in `u` and at `breaks` (given as deltas).
/// For `lo == 0` the panel sequence stops once three consecutive panels are
/// negligible, or a geometric tail can be summed; a growing sequence is
/// reported as [`Error::Divergent`].
pub fn ln_integrate_delta(lnf: &dyn Fn(f64) -> f64, span: Span, breaks: &[f64], tol: f64) -> Result<f64> {
    if span.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let ua = -span.hi.ln();
    let ub = if span.lo > 0.0 { -span.lo.ln() } else { f64::INFINITY };
    let lng = |u: f64| {
        let d = (-u).exp();
        lnf(d) - u
    };
    let mut cuts: Vec<f64> = breaks
        .iter()
        .filter(|&&b| b > 0.0)
        .map(|&b| -b.ln())
        .filter(|&u| u > ua && u < ub)
        .collect();
    let last_break = cuts.iter().cloned().fold(ua, f64::max);
    let step = std::f64::consts::LN_2;
    let mut k = (ua / step).floor() + 1.0;
    let dyadic_end = ub.min(U_MAX).min(last_break.max(ua) + 64.0 * step);
    while k * step < dyadic_end {
        cuts.push(k * step);
        k += 1.0;
    }
    cuts.push(ua);
    if ub.is_finite() {
        cuts.push(ub);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let floor0 = tol.ln() + peak_estimate(&lng, &cuts, ua, ub, dyadic_end) - 30.0;

    let sub_tol = tol * 0.25;
    let mut total = f64::NEG_INFINITY;
    let mut total_err = f64::NEG_INFINITY;
    let mut panel_vals: Vec<f64> = Vec::new();
    let mut ok = true;
    let mut idx = 0usize;
    let mut a = cuts[0];
    let mut width = step;
    loop {
        let b = if idx + 1 < cuts.len() {
            cuts[idx + 1]
        } else if ub.is_finite() {
            break;
        } else {
            if a >= U_MAX {
                break;
            }
            width *= 2.0;
            (a + width).min(U_MAX)
        };
        idx += 1;
        let floor = (tol.ln() + total - 3.0).max(floor0);
        let q = ln_adaptive(&lng, a, b, sub_tol, floor);
        ok &= q.converged;
        total = log_add(total, q.ln_value);
        total_err = log_add(total_err, q.ln_error);
        panel_vals.push(q.ln_value);
        a = b;
        if ub.is_finite() {
            continue;
        }
        if a <= last_break {
            continue;
        }
        let n = panel_vals.len();
        if n >= 3 {
            let tiny = tol.ln() + total - 7.0;
            let last3 = &panel_vals[n - 3..];
            if last3.iter().all(|&v| v < tiny) && last3[2] <= last3[1] {
                break;
            }
        }
        if n >= 4 {
            let v = &panel_vals[n - 4..];
            let q1 = v[1] - v[0];
            let q2 = v[2] - v[1];
            let q3 = v[3] - v[2];
            if q3 < 0.0 && (q3 - q2).abs() < 0.05 * q3.abs() && (q2 - q1).abs() < 0.1 * q3.abs() {
                // remaining panels shrink geometrically by exp(q3)
                let rest = v[3] + q3 - crate::logspace::ln_one_minus_exp(q3);
                if rest < tol.ln() + total - 3.0 {
                    total = log_add(total, rest);
                    break;
                }
            }
            if n >= 16 && a <= dyadic_end {
                // equal-width panels that stop shrinking: power-law or logarithmic blow-up
                let v = &panel_vals[n - 16..];
                let q: Vec<f64> = v.windows(2).map(|p| p[1] - p[0]).collect();
                if q.iter().all(|&x| x > -1e-12) && q.windows(2).all(|p| (p[1] - p[0]).abs() < 1e-6 + 1e-3 * p[1].abs()) {
                    return Err(Error::Divergent(format!("panel integrals stop decaying past u = {a:.1}")));
                }
            }
            if a >= U_MAX {
                if q3 > 0.0 && q2 > 0.0 {
                    return Err(Error::Divergent(format!("panel integrals grow past u = {a:.1}")));
                }
                break;
            }
        }
    }
    let q = LnQuad { ln_value: total, ln_error: total_err, converged: ok };
    if !ok && q.rel_error() > tol * 10.0 {
        return Err(accuracy("radial integral", q));
    }
    Ok(total)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}
