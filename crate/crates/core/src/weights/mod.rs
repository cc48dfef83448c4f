//! Radial weights on the unit interval and their integrals.
//!
//! A weight is handled through `delta = 1 - r` throughout. Integrals of the
//! form `\int r^x (1-r)^b (log 1/r)^c w(r) dr` over a sub-range are the one
//! primitive ([`RadialWeight::ln_integral`]); tails, moments and the modified
//! weights are special cases. Closed forms are used where they exist and can
//! be switched off with [`RadialWeight::quadrature_only`] for cross-checks.

mod dsl;
mod table;

pub use dsl::{parse_construction, parse_weight};
pub use table::Table;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::logspace::{log_sub, log_sum, LogMag};
use crate::quad::{ln_adaptive, ln_integrate_delta, Span};
use crate::special::{binom, ln_beta};

/// Exponents of `r^x (1-r)^bracket (log 1/r)^paren`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Factor {
    pub x: f64,
    pub bracket: f64,
    pub paren: f64,
}

impl Factor {
    pub const ONE: Factor = Factor { x: 0.0, bracket: 0.0, paren: 0.0 };

    pub fn power(x: f64) -> Self {
        Factor { x, ..Factor::ONE }
    }

    pub fn ln_at(&self, delta: f64) -> f64 {
        let mut v = 0.0;
        if self.x != 0.0 {
            v += self.x * (-delta).ln_1p();
        }
        if self.bracket != 0.0 {
            v += self.bracket * delta.ln();
        }
        if self.paren != 0.0 {
            v += self.paren * (-(-delta).ln_1p()).ln();
        }
        v
    }
}

/// `ln \int_{span} g w dr` for `w^(1-d) = exp(-e^{1/d})`, in the mass variable
/// `v = e^{1/d} - e^{1/hi}`: the integral is `w^(hi) \int g(d(v)) e^{-v} dv`
/// with `d(v) = 1 / ln(e^{1/hi} + v)`. The mass near `hi` sits within a few
/// ulps of `d` once `e^{1/hi}` is large, out of reach of any `d`-grid.
fn ln_integral_dblexp(g: Integrand<'_>, span: Span, tol: f64) -> Result<f64> {
    let inv_hi = 1.0 / span.hi;
    let ln_mass = -inv_hi.exp();
    if ln_mass == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let vmax = if span.lo > 0.0 { (1.0 / span.lo).exp() - inv_hi.exp() } else { f64::INFINITY };
    let e_inv = (-inv_hi).exp();
    let lnh = |v: f64| {
        let d = 1.0 / (inv_hi + (v * e_inv).ln_1p());
        g.ln_at(d) - v
    };
    let mut total = f64::NEG_INFINITY;
    let mut total_err = f64::NEG_INFINITY;
    let mut ok = true;
    let (mut a, mut vals) = (0.0f64, Vec::new());
    while a < vmax {
        let b = if a == 0.0 { 1.0 } else { 2.0 * a }.min(vmax);
        let q = ln_adaptive(&lnh, a, b, tol * 0.25, tol.ln() + total - 3.0);
        ok &= q.converged;
        total = crate::logspace::log_add(total, q.ln_value);
        total_err = crate::logspace::log_add(total_err, q.ln_error);
        vals.push(q.ln_value);
        a = b;
        let n = vals.len();
        if n >= 3 && vals[n - 3..].iter().all(|&x| x < tol.ln() + total - 7.0) && vals[n - 1] <= vals[n - 2] {
            break;
        }
        if !b.is_finite() || n > 1100 {
            break;
        }
    }
    if !ok && (total_err - total).exp() > 10.0 * tol {
        return Err(Error::Accuracy { msg: "mass-variable integral".into(), estimate: ln_mass + total, achieved: (total_err - total).exp() });
    }
    Ok(ln_mass + total)
}

/// What to integrate against the weight.
#[derive(Clone, Copy)]
pub enum Integrand<'a> {
    Factor(Factor),
    /// Log of an arbitrary factor, as a function of `delta`.
    Custom(&'a (dyn Fn(f64) -> f64 + Sync)),
}

impl Integrand<'_> {
    fn ln_at(&self, delta: f64) -> f64 {
        match self {
            Integrand::Factor(f) => f.ln_at(delta),
            Integrand::Custom(g) => g(delta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Modifier {
    /// `w(r) (1-r)^beta`
    Bracket,
    /// `w(r) (log 1/r)^beta`
    Paren,
}

#[derive(Debug)]
pub(crate) enum Kind {
    Pow { alpha: f64 },
    Std { alpha: f64 },
    Exp { c: f64, beta: f64 },
    DoubleExp,
    Table(Table),
    Modified { base: RadialWeight, beta: f64, modifier: Modifier },
    Piecewise { base: RadialWeight, pieces: Vec<Span> },
    Sigma { omega: RadialWeight, nu: RadialWeight, p: f64 },
}

#[derive(Debug)]
struct Inner {
    kind: Kind,
    descriptor: String,
    closed_forms: bool,
    notes: Vec<String>,
    cache: RwLock<HashMap<(u64, u64), f64>>,
}

/// A radial weight. Cheap to clone; moments are cached per tolerance.
#[derive(Clone, Debug)]
pub struct RadialWeight {
    inner: Arc<Inner>,
}

impl RadialWeight {
    pub(crate) fn from_kind(kind: Kind, descriptor: impl Into<String>) -> Self {
        Self::build(kind, descriptor.into(), true, Vec::new())
    }

    fn build(kind: Kind, descriptor: String, closed_forms: bool, notes: Vec<String>) -> Self {
        RadialWeight {
            inner: Arc::new(Inner { kind, descriptor, closed_forms, notes, cache: RwLock::new(HashMap::new()) }),
        }
    }

    pub(crate) fn with_notes(self, notes: Vec<String>) -> Self {
        Self::build(self.inner.kind.clone_kind(), self.inner.descriptor.clone(), self.inner.closed_forms, notes)
    }

    /// `(1-r)^alpha`, `alpha > -1`.
    pub fn pow(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("pow weight needs alpha > -1, got {alpha}")));
        }
        Ok(Self::from_kind(Kind::Pow { alpha }, format!("pow:alpha={}", fmt_num(alpha))))
    }

    /// `(alpha+1)(1-r^2)^alpha`, `alpha > -1`.
    pub fn standard(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("std weight needs alpha > -1, got {alpha}")));
        }
        Ok(Self::from_kind(Kind::Std { alpha }, format!("std:alpha={}", fmt_num(alpha))))
    }

    /// `exp(-c / (1-r)^beta)`.
    pub fn exponential(c: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0 && beta > 0.0) || !c.is_finite() || !beta.is_finite() {
            return Err(Error::domain(format!("exp weight needs c > 0 and beta > 0, got c={c}, beta={beta}")));
        }
        Ok(Self::from_kind(Kind::Exp { c, beta }, format!("exp:c={},beta={}", fmt_num(c), fmt_num(beta))))
    }

    /// The weight whose tail is `exp(-exp(1/(1-r)))`.
    pub fn double_exponential() -> Self {
        Self::from_kind(Kind::DoubleExp, "dblexp")
    }

    pub fn table(table: Table, descriptor: impl Into<String>) -> Self {
        let notes = table.notes();
        Self::build(Kind::Table(table), descriptor.into(), true, notes)
    }

    /// `w` restricted to a union of disjoint ranges.
    pub fn restricted(&self, pieces: Vec<Span>, descriptor: impl Into<String>) -> Result<Self> {
        let mut pieces: Vec<Span> = pieces.into_iter().filter(|s| !s.is_empty()).collect();
        pieces.sort_by(|a, b| b.hi.total_cmp(&a.hi));
        for w in pieces.windows(2) {
            if w[1].hi > w[0].lo {
                return Err(Error::domain("restriction ranges overlap"));
            }
        }
        if pieces.is_empty() {
            return Err(Error::domain("restriction to an empty set"));
        }
        Ok(Self::from_kind(Kind::Piecewise { base: self.clone(), pieces }, descriptor))
    }

    /// `sigma = r (w / nu^{1/p})^{p'}`.
    pub fn sigma(omega: &RadialWeight, nu: &RadialWeight, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::domain(format!("sigma needs p > 1, got {p}")));
        }
        let d = format!("sigma({},{},{})", omega.descriptor(), nu.descriptor(), fmt_num(p));
        Ok(Self::from_kind(Kind::Sigma { omega: omega.clone(), nu: nu.clone(), p }, d))
    }

    /// `w_[beta] = w (1-r)^beta` or `w_(beta) = w (log 1/r)^beta`.
    pub fn modified(&self, beta: f64, modifier: Modifier) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!("modifier exponent must be >= 0, got {beta}")));
        }
        let d = match modifier {
            Modifier::Bracket => format!("{}[{}]", self.descriptor(), fmt_num(beta)),
            Modifier::Paren => format!("{}({})", self.descriptor(), fmt_num(beta)),
        };
        if let (Kind::Pow { alpha }, Modifier::Bracket) = (&self.inner.kind, modifier) {
            if self.inner.closed_forms {
                let w = RadialWeight::pow(alpha + beta)?;
                return Ok(Self::build(w.inner.kind.clone_kind(), d, true, Vec::new()));
            }
        }
        Ok(Self::build(
            Kind::Modified { base: self.clone(), beta, modifier },
            d,
            self.inner.closed_forms,
            self.inner.notes.clone(),
        ))
    }

    /// The same weight with every closed form disabled.
    pub fn quadrature_only(&self) -> Self {
        let kind = match &self.inner.kind {
            Kind::Modified { base, beta, modifier } => {
                Kind::Modified { base: base.quadrature_only(), beta: *beta, modifier: *modifier }
            }
            Kind::Piecewise { base, pieces } => Kind::Piecewise { base: base.quadrature_only(), pieces: pieces.clone() },
            Kind::Sigma { omega, nu, p } => {
                Kind::Sigma { omega: omega.quadrature_only(), nu: nu.quadrature_only(), p: *p }
            }
            k => k.clone_kind(),
        };
        Self::build(kind, self.inner.descriptor.clone(), false, self.inner.notes.clone())
    }

    pub fn descriptor(&self) -> &str {
        &self.inner.descriptor
    }

    /// Caveats attached to this weight, e.g. extrapolated table data.
    pub fn notes(&self) -> &[String] {
        &self.inner.notes
    }

    pub fn is_flagged(&self) -> bool {
        !self.inner.notes.is_empty()
    }

    /// `ln w(1 - delta)`.
    pub fn ln_density(&self, delta: f64) -> f64 {
        match &self.inner.kind {
            Kind::Pow { alpha } => {
                if *alpha == 0.0 {
                    0.0
                } else {
                    alpha * delta.ln()
                }
            }
            Kind::Std { alpha } => {
                let base = (alpha + 1.0).ln();
                if *alpha == 0.0 {
                    base
                } else {
                    base + alpha * (delta * (2.0 - delta)).ln()
                }
            }
            Kind::Exp { c, beta } => -c * delta.powf(-beta),
            Kind::DoubleExp => {
                let l = 1.0 / delta;
                l - 2.0 * delta.ln() - l.exp()
            }
            Kind::Table(t) => t.ln_value(1.0 - delta),
            Kind::Modified { base, beta, modifier } => {
                let f = match modifier {
                    Modifier::Bracket => Factor { bracket: *beta, ..Factor::ONE },
                    Modifier::Paren => Factor { paren: *beta, ..Factor::ONE },
                };
                base.ln_density(delta) + f.ln_at(delta)
            }
            Kind::Piecewise { base, pieces } => {
                // pieces are sorted by decreasing `hi`
                let i = pieces.partition_point(|s| s.hi >= delta);
                if i > 0 && delta >= pieces[i - 1].lo {
                    base.ln_density(delta)
                } else {
                    f64::NEG_INFINITY
                }
            }
            Kind::Sigma { omega, nu, p } => {
                let q = p / (p - 1.0);
                let lw = omega.ln_density(delta);
                let ln_nu = nu.ln_density(delta);
                if lw == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                (-delta).ln_1p() + q * (lw - ln_nu / p)
            }
        }
    }

    /// `w(r)`.
    pub fn density(&self, r: f64) -> f64 {
        self.ln_density(1.0 - r).exp()
    }

    /// Distances to the boundary where the density has kinks or jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = match &self.inner.kind {
            Kind::Table(t) => t.deltas(),
            Kind::Modified { base, .. } => base.breakpoints(),
            Kind::Piecewise { base, pieces } => {
                let mut b = base.breakpoints();
                for s in pieces {
                    b.push(s.hi);
                    if s.lo > 0.0 {
                        b.push(s.lo);
                    }
                }
                b
            }
            Kind::Sigma { omega, nu, .. } => {
                let mut b = omega.breakpoints();
                b.extend(nu.breakpoints());
                b
            }
            _ => Vec::new(),
        };
        b.retain(|&d| d > 0.0 && d < 1.0);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Support as a list of spans, for restricted weights.
    pub fn support(&self) -> Vec<Span> {
        match &self.inner.kind {
            Kind::Piecewise { pieces, .. } => pieces.clone(),
            _ => vec![Span::FULL],
        }
    }

    fn has_closed_tail(&self) -> bool {
        if !self.inner.closed_forms {
            return false;
        }
        match &self.inner.kind {
            Kind::Pow { .. } | Kind::DoubleExp => true,
            Kind::Std { alpha } => std_int_alpha(*alpha).is_some(),
            _ => false,
        }
    }

    fn closed_tail(&self, delta: f64) -> Option<LogMag> {
        if !self.has_closed_tail() {
            return None;
        }
        Some(match &self.inner.kind {
            Kind::Pow { alpha } => LogMag::Ln((alpha + 1.0) * delta.ln() - (alpha + 1.0).ln()),
            Kind::DoubleExp => LogMag::neg_exp(1.0 / delta),
            Kind::Std { alpha } => {
                let a = std_int_alpha(*alpha)?;
                if delta == 0.0 {
                    return Some(LogMag::ZERO);
                }
                // (a+1) \int_0^delta (t(2-t))^a dt, expanded in powers of delta
                let mut s = 0.0;
                for k in 0..=a {
                    let c = binom(a, k) * 2f64.powi((a - k) as i32) / (a + k + 1) as f64;
                    s += if k % 2 == 0 { c } else { -c } * delta.powi(k as i32);
                }
                LogMag::Ln(((a + 1) as f64).ln() + (a + 1) as f64 * delta.ln() + s.ln())
            }
            _ => return None,
        })
    }

    /// Mass of `w` on a span.
    pub fn mass(&self, span: Span, tol: f64) -> Result<LogMag> {
        if span.is_empty() {
            return Ok(LogMag::ZERO);
        }
        if let (Some(a), Some(b)) = (self.closed_tail(span.hi), self.closed_tail(span.lo)) {
            return Ok(a.sub(b));
        }
        if let Kind::Piecewise { base, pieces } = &self.inner.kind {
            let mut total = LogMag::ZERO;
            for s in pieces {
                total = total.add(base.mass(s.intersect(&span), tol)?);
            }
            return Ok(total);
        }
        Ok(LogMag::Ln(self.ln_integral(Integrand::Factor(Factor::ONE), span, tol)?))
    }

    /// `w^(r)` at `r = 1 - delta`, as a log-magnitude.
    pub fn tail_mag(&self, delta: f64, tol: f64) -> Result<LogMag> {
        if !(delta > 0.0) {
            return Ok(LogMag::ZERO);
        }
        self.mass(Span::tail_from(delta.min(1.0)), tol)
    }

    /// `ln w^(r)`.
    pub fn tail(&self, r: f64, tol: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::domain(format!("tail needs 0 <= r < 1, got {r}")));
        }
        Ok(self.tail_mag(1.0 - r, tol)?.ln())
    }

    /// `ln w_x`, the moment `\int_0^1 r^x w(r) dr`.
    pub fn moment(&self, x: f64, tol: f64) -> Result<f64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("moment needs finite x >= 0, got {x}")));
        }
        let key = (x.to_bits(), tol.to_bits());
        if let Some(v) = self.inner.cache.read().expect("moment cache").get(&key) {
            return Ok(*v);
        }
        let v = self.ln_integral(Integrand::Factor(Factor::power(x)), Span::FULL, tol)?;
        self.inner.cache.write().expect("moment cache").insert(key, v);
        Ok(v)
    }

    /// `ln \int_{span} g(r) w(r) dr`.
    pub fn ln_integral(&self, g: Integrand<'_>, span: Span, tol: f64) -> Result<f64> {
        if span.is_empty() {
            return Ok(f64::NEG_INFINITY);
        }
        if let Integrand::Factor(f) = g {
            if let Some(v) = self.closed_integral(f, span) {
                return Ok(v);
            }
        }
        match &self.inner.kind {
            Kind::Modified { base, beta, modifier } => {
                let m = match modifier {
                    Modifier::Bracket => Factor { bracket: *beta, ..Factor::ONE },
                    Modifier::Paren => Factor { paren: *beta, ..Factor::ONE },
                };
                match g {
                    Integrand::Factor(f) => {
                        let f = Factor { x: f.x, bracket: f.bracket + m.bracket, paren: f.paren + m.paren };
                        base.ln_integral(Integrand::Factor(f), span, tol)
                    }
                    Integrand::Custom(h) => {
                        let h2 = move |d: f64| h(d) + m.ln_at(d);
                        base.ln_integral(Integrand::Custom(&h2), span, tol)
                    }
                }
            }
            Kind::Piecewise { base, pieces } => {
                if let Integrand::Factor(f) = g {
                    let closed: Option<Vec<f64>> = pieces
                        .iter()
                        .map(|s| {
                            let s = s.intersect(&span);
                            if s.is_empty() {
                                Some(f64::NEG_INFINITY)
                            } else {
                                base.closed_integral(f, s)
                            }
                        })
                        .collect();
                    if let Some(parts) = closed {
                        return Ok(log_sum(parts));
                    }
                }
                if matches!(base.inner.kind, Kind::DoubleExp) && self.inner.closed_forms {
                    let parts = pieces.iter().map(|s| base.ln_integral(g, s.intersect(&span), tol)).collect::<Result<Vec<_>>>()?;
                    return Ok(log_sum(parts));
                }
                let lnf = |d: f64| self.ln_density(d) + g.ln_at(d);
                ln_integrate_delta(&lnf, span, &self.breakpoints(), tol)
            }
            Kind::DoubleExp if self.inner.closed_forms => ln_integral_dblexp(g, span, tol),
            _ => {
                let lnf = |d: f64| self.ln_density(d) + g.ln_at(d);
                ln_integrate_delta(&lnf, span, &self.breakpoints(), tol)
            }
        }
    }

    fn closed_integral(&self, f: Factor, span: Span) -> Option<f64> {
        if !self.inner.closed_forms || f.paren != 0.0 {
            return None;
        }
        let full = span == Span::FULL;
        match &self.inner.kind {
            Kind::Pow { alpha } => {
                let a = alpha + f.bracket;
                if full {
                    return Some(ln_beta(f.x + 1.0, a + 1.0));
                }
                if f.x == 0.0 {
                    let hi = (a + 1.0) * span.hi.ln();
                    let lo = if span.lo > 0.0 { (a + 1.0) * span.lo.ln() } else { f64::NEG_INFINITY };
                    return Some(log_sub(hi, lo) - (a + 1.0).ln());
                }
                if a == 0.0 {
                    // (b^{x+1} - a^{x+1}) / (x+1) with b = 1 - lo, a = 1 - hi
                    let top = (f.x + 1.0) * (-span.lo).ln_1p();
                    let bot = if span.hi >= 1.0 { f64::NEG_INFINITY } else { (f.x + 1.0) * (-span.hi).ln_1p() };
                    return Some(log_sub(top, bot) - (f.x + 1.0).ln());
                }
                None
            }
            Kind::Std { alpha } if f.bracket == 0.0 => {
                if full {
                    return Some(((alpha + 1.0) / 2.0).ln() + ln_beta((f.x + 1.0) / 2.0, alpha + 1.0));
                }
                if f.x == 0.0 {
                    let hi = self.closed_tail(span.hi)?;
                    let lo = self.closed_tail(span.lo)?;
                    return Some(hi.sub(lo).ln());
                }
                None
            }
            Kind::DoubleExp if f.x == 0.0 && f.bracket == 0.0 => {
                Some(LogMag::neg_exp(1.0 / span.hi).sub(LogMag::neg_exp(1.0 / span.lo)).ln())
            }
            _ => None,
        }
    }

    /// `ln w*(r)` with `w*(r) = \int_r^1 log(s/r) s w(s) ds`.
    pub fn omega_star(&self, r: f64, tol: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::domain(format!("omega_star needs 0 < r < 1, got {r}")));
        }
        let lr = r.ln();
        let g = move |d: f64| {
            let ls = (-d).ln_1p();
            (ls - lr).ln() + ls
        };
        self.ln_integral(Integrand::Custom(&g), Span::tail_from(1.0 - r), tol)
    }

    /// `ln \int_0^{1-delta} s^x w(s) ds`.
    pub fn partial_moment(&self, x: f64, delta: f64, tol: f64) -> Result<f64> {
        self.ln_integral(Integrand::Factor(Factor::power(x)), Span { hi: 1.0, lo: delta }, tol)
    }

    /// `ln (w_x)_{(k)} - ln w_x`-style helper: `ln \int r^x (log 1/r)^k w`.
    pub fn paren_moment(&self, x: f64, k: f64, tol: f64) -> Result<f64> {
        self.ln_integral(Integrand::Factor(Factor { x, bracket: 0.0, paren: k }), Span::FULL, tol)
    }
}

impl Kind {
    fn clone_kind(&self) -> Kind {
        match self {
            Kind::Pow { alpha } => Kind::Pow { alpha: *alpha },
            Kind::Std { alpha } => Kind::Std { alpha: *alpha },
            Kind::Exp { c, beta } => Kind::Exp { c: *c, beta: *beta },
            Kind::DoubleExp => Kind::DoubleExp,
            Kind::Table(t) => Kind::Table(t.clone()),
            Kind::Modified { base, beta, modifier } => {
                Kind::Modified { base: base.clone(), beta: *beta, modifier: *modifier }
            }
            Kind::Piecewise { base, pieces } => Kind::Piecewise { base: base.clone(), pieces: pieces.clone() },
            Kind::Sigma { omega, nu, p } => Kind::Sigma { omega: omega.clone(), nu: nu.clone(), p: *p },
        }
    }
}

fn std_int_alpha(alpha: f64) -> Option<u32> {
    if alpha >= 0.0 && alpha <= 8.0 && alpha.fract() == 0.0 {
        Some(alpha as u32)
    } else {
        None
    }
}

/// Shortest decimal that round-trips, used in descriptors.
pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn pow_closed_and_quadrature_agree() {
        for &alpha in &[0.0, 0.5, 1.0, 3.0] {
            let w = RadialWeight::pow(alpha).unwrap();
            let q = w.quadrature_only();
            for &x in &[0.0, 0.5, 1.0, 7.0, 100.0] {
                let a = w.moment(x, T).unwrap();
                let b = q.moment(x, T).unwrap();
                assert!(close(a, b, 1e-10), "alpha={alpha} x={x}: {a} vs {b}");
            }
            for &r in &[0.0, 0.5, 0.99] {
                let a = w.tail(r, T).unwrap();
                let b = q.tail(r, T).unwrap();
                assert!(close(a, b, 1e-10), "alpha={alpha} r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn pow_zero_values() {
        let w = RadialWeight::pow(0.0).unwrap();
        assert!(close(w.moment(3.0, T).unwrap(), 0.25f64.ln(), 1e-14));
        assert!(close(w.tail(0.5, T).unwrap(), 0.5f64.ln(), 1e-14));
    }

    #[test]
    fn std_alpha_one() {
        // 2(1-r^2): tail = 2(delta^2 - delta^3/3), moment_1 = B(1,2) = 1/2
        let w = RadialWeight::standard(1.0).unwrap();
        let d: f64 = 0.25;
        let expect = (2.0 * (d * d - d * d * d / 3.0)).ln();
        assert!(close(w.tail(0.75, T).unwrap(), expect, 1e-14));
        assert!(close(w.moment(1.0, T).unwrap(), 0.5f64.ln(), 1e-14));
        let q = w.quadrature_only();
        assert!(close(q.moment(1.0, T).unwrap(), 0.5f64.ln(), 1e-11));
        assert!(close(q.tail(0.75, T).unwrap(), expect, 1e-11));
    }

    #[test]
    fn std_total_mass_is_one() {
        for &a in &[0.0, 1.0, 2.0, 0.5] {
            let w = RadialWeight::standard(a).unwrap();
            assert!(close(w.moment(1.0, T).unwrap(), 0.5f64.ln(), 1e-11), "{a}");
        }
    }

    #[test]
    fn double_exp_tail_by_quadrature() {
        let w = RadialWeight::double_exponential();
        let q = w.quadrature_only();
        for &r in &[0.0, 0.3, 0.8, 0.9] {
            let a = w.tail(r, T).unwrap();
            let b = q.tail(r, T).unwrap();
            assert!(close(a, b, 1e-9), "r={r}: {a} vs {b}");
        }
        // value at 1 - 2^-20 lives only in loglog form
        let m = w.tail_mag(2f64.powi(-20), T).unwrap();
        assert_eq!(m.lnln(), Some(2f64.powi(20)));
    }

    #[test]
    fn exp_weight_moment_positive_and_decreasing() {
        let w = RadialWeight::exponential(1.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for &x in &[0.0, 1.0, 10.0, 100.0, 1000.0] {
            let m = w.moment(x, T).unwrap();
            assert!(m < prev);
            prev = m;
        }
    }

    #[test]
    fn omega_star_constant_weight() {
        let w = RadialWeight::pow(0.0).unwrap();
        let v = w.omega_star(0.5, T).unwrap().exp();
        let expect = std::f64::consts::LN_2 / 2.0 - 3.0 / 16.0;
        assert!((v - expect).abs() < 1e-12);
        let d: f64 = 1e-6;
        let v = w.omega_star(1.0 - d, T).unwrap().exp();
        assert!((v / (d * d / 2.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn modified_bracket_collapses() {
        let w = RadialWeight::pow(0.0).unwrap().modified(2.0, Modifier::Bracket).unwrap();
        let p2 = RadialWeight::pow(2.0).unwrap();
        for &x in &[0.0, 1.0, 5.5] {
            assert!(close(w.moment(x, T).unwrap(), p2.moment(x, T).unwrap(), 1e-14));
        }
        let q = RadialWeight::standard(1.0).unwrap().modified(2.0, Modifier::Bracket).unwrap();
        let direct = RadialWeight::standard(1.0).unwrap().ln_integral(
            Integrand::Factor(Factor { x: 3.0, bracket: 2.0, paren: 0.0 }),
            Span::FULL,
            T,
        );
        assert!(close(q.moment(3.0, T).unwrap(), direct.unwrap(), 1e-12));
    }

    #[test]
    fn paren_modifier_moment() {
        // \int_0^1 r^x log(1/r) dr = 1/(x+1)^2
        let w = RadialWeight::pow(0.0).unwrap().modified(1.0, Modifier::Paren).unwrap();
        for &x in &[0.0, 2.0, 40.0] {
            let m = w.moment(x, T).unwrap();
            assert!(close(m, -2.0 * (x + 1.0f64).ln(), 1e-11), "{x}");
        }
    }

    #[test]
    fn restricted_weight_mass() {
        let w = RadialWeight::pow(0.0).unwrap();
        let r = w
            .restricted(vec![Span { hi: 0.5, lo: 0.25 }, Span { hi: 0.125, lo: 0.0625 }], "two pieces")
            .unwrap();
        let t = r.tail(0.0, T).unwrap().exp();
        assert!((t - 0.3125).abs() < 1e-15);
        let t = r.tail(0.8, T).unwrap().exp();
        assert!((t - 0.0625).abs() < 1e-15);
        // moment via pieces
        let m = r.moment(1.0, T).unwrap().exp();
        let exact = (0.75f64.powi(2) - 0.5f64.powi(2) + 0.9375f64.powi(2) - 0.875f64.powi(2)) / 2.0;
        assert!((m - exact).abs() < 1e-15);
        let q = r.quadrature_only().moment(1.0, T).unwrap().exp();
        assert!((q - exact).abs() < 1e-11);
    }

    #[test]
    fn sigma_divergence() {
        let om = RadialWeight::pow(0.0).unwrap();
        let nu = RadialWeight::pow(2.0).unwrap();
        let s = RadialWeight::sigma(&om, &nu, 2.0).unwrap();
        assert!(matches!(s.tail(0.5, 1e-10), Err(Error::Divergent(_))));
    }

    #[test]
    fn sigma_log_divergence() {
        let om = RadialWeight::pow(0.0).unwrap();
        let nu = RadialWeight::pow(1.0).unwrap();
        let s = RadialWeight::sigma(&om, &nu, 2.0).unwrap();
        assert!(matches!(s.tail(0.5, 1e-10), Err(Error::Divergent(_))));
    }

    #[test]
    fn dblexp_mass_variable_matches_quadrature() {
        let w = RadialWeight::double_exponential();
        let q = w.quadrature_only();
        for x in [1.0, 7.5, 300.0] {
            let (a, b) = (w.moment(x, 1e-12).unwrap(), q.moment(x, 1e-12).unwrap());
            assert!((a - b).abs() < 1e-9, "x = {x}: {a} vs {b}");
        }
        let r = w.restricted(vec![Span { hi: 0.5, lo: 0.25 }], "piece").unwrap();
        let m = r.moment(0.0, 1e-12).unwrap();
        let want = w.mass(Span { hi: 0.5, lo: 0.25 }, 1e-12).unwrap().ln();
        assert!((m - want).abs() < 1e-10 * want.abs());
    }

    #[test]
    fn exp_tail_deep() {
        // \int_0^d e^{-1/t} dt = d^2 e^{-1/d} (1 - 2d + 6d^2 - ...)
        let w = RadialWeight::exponential(1.0, 1.0).unwrap();
        for j in [18, 24, 30] {
            let d = 2f64.powi(-j);
            let want = 2.0 * d.ln() - 1.0 / d + (-2.0 * d + 6.0 * d * d).ln_1p();
            let got = w.tail_mag(d, 1e-10).unwrap().ln();
            assert!((got - want).abs() < 1e-9 * want.abs(), "j = {j}: {got} vs {want}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(RadialWeight::pow(-1.0).is_err());
        assert!(RadialWeight::exponential(0.0, 1.0).is_err());
        assert!(RadialWeight::pow(0.0).unwrap().moment(-1.0, T).is_err());
        assert!(RadialWeight::pow(0.0).unwrap().tail(1.0, T).is_err());
    }
}
