//! The projections `P_w` and `P+_w`, weighted `L^p` norms, monomial actions
//! and the lower bound for `||P_w||_{L^p_nu -> L^p_eta}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{circle_values, fourier_coeffs};
use crate::kernel::{kernel_eval, moment_tol};
use crate::quad::gauss_legendre;
use crate::weights::RadialWeight;

pub use crate::classify::{two_weight_constants, TwoWeightReport, TwoWeightRow};

/// Largest lacunary exponent `2^k` that is expanded into dense coefficients.
pub const MAX_DENSE_LOG2: u32 = 24;

#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticFunction {
    /// Maclaurin coefficients `a_0, a_1, ...`.
    Coeffs(Vec<Complex64>),
    /// `zeta^{m-n} |zeta|^{2n}`; holomorphic only when `n = 0`.
    MonomialMod { m: f64, n: f64 },
    /// Terms `c z^{2^k}` as `(k, c)`, `k` strictly increasing.
    Lacunary(Vec<(u32, Complex64)>),
}

fn cpx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ln_falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln()).sum()
}

impl AnalyticFunction {
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![cpx(0.0); n + 1];
        c[n] = cpx(1.0);
        AnalyticFunction::Coeffs(c)
    }

    pub fn monomial_mod(m: f64, n: f64) -> Result<Self> {
        let k = m - n;
        if !(k >= 0.0 && k.fract() == 0.0 && n >= 0.0 && k.is_finite()) {
            return Err(Error::domain(format!("monomial_mod needs m - n a nonnegative integer and n >= 0, got ({m}, {n})")));
        }
        Ok(AnalyticFunction::MonomialMod { m, n })
    }

    pub fn lacunary(terms: Vec<(u32, Complex64)>) -> Result<Self> {
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::domain("lacunary exponents must be strictly increasing"));
        }
        if terms.iter().any(|t| !(t.1.re.is_finite() && t.1.im.is_finite())) {
            return Err(Error::domain("lacunary coefficients must be finite"));
        }
        Ok(AnalyticFunction::Lacunary(terms))
    }

    /// Parse `mono:M,N`, `zpow:N`, `poly:C0,C1,...` or `lac:K=C,...`, where a
    /// complex number is written `re` or `re:im`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (head, body) = spec.split_once(':').ok_or_else(|| Error::parse(0, "expected KIND:ARGS"))?;
        let base = head.len() + 1;
        let items: Vec<(usize, &str)> = {
            let mut pos = base;
            body.split(',')
                .map(|s| {
                    let p = pos;
                    pos += s.len() + 1;
                    (p, s.trim())
                })
                .collect()
        };
        let num = |(p, s): (usize, &str)| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::parse(p, format!("bad number '{s}'")))
        };
        let complex = |(p, s): (usize, &str)| -> Result<Complex64> {
            match s.split_once(':') {
                Some((a, b)) => Ok(Complex64::new(num((p, a))?, num((p + a.len() + 1, b))?)),
                None => Ok(cpx(num((p, s))?)),
            }
        };
        match head {
            "mono" => {
                if items.len() != 2 {
                    return Err(Error::parse(base, "mono takes M,N"));
                }
                Self::monomial_mod(num(items[0])?, num(items[1])?)
                    .map_err(|e| Error::parse(base, e.to_string()))
            }
            "zpow" => {
                let n = num(items[0])?;
                if items.len() != 1 || n < 0.0 || n.fract() != 0.0 || n > 1e7 {
                    return Err(Error::parse(base, "zpow takes one nonnegative integer"));
                }
                Ok(Self::monomial(n as usize))
            }
            "poly" => {
                let c = items.into_iter().map(complex).collect::<Result<Vec<_>>>()?;
                if c.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return Err(Error::parse(base, "coefficients must be finite"));
                }
                Ok(AnalyticFunction::Coeffs(c))
            }
            "lac" => {
                let mut terms = Vec::new();
                for (p, s) in items {
                    let (k, c) = s.split_once('=').ok_or_else(|| Error::parse(p, "expected K=C"))?;
                    let k: u32 = k.trim().parse().map_err(|_| Error::parse(p, format!("bad exponent '{k}'")))?;
                    terms.push((k, complex((p + s.find('=').unwrap_or(0) + 1, c))?));
                }
                Self::lacunary(terms).map_err(|e| Error::parse(base, e.to_string()))
            }
            other => Err(Error::parse(0, format!("unknown function kind '{other}'"))),
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        !matches!(self, AnalyticFunction::MonomialMod { n, .. } if *n != 0.0)
    }

    /// Highest angular frequency present.
    pub fn degree_bound(&self) -> usize {
        match self {
            AnalyticFunction::Coeffs(c) => c.iter().rposition(|v| *v != cpx(0.0)).unwrap_or(0),
            AnalyticFunction::MonomialMod { m, n } => (m - n) as usize,
            AnalyticFunction::Lacunary(t) => t.last().map(|(k, _)| 1usize << k).unwrap_or(0),
        }
    }

    /// Dense Maclaurin coefficients, when the function is holomorphic.
    pub fn coefficients(&self) -> Option<Vec<Complex64>> {
        match self {
            AnalyticFunction::Coeffs(c) => Some(c.clone()),
            AnalyticFunction::MonomialMod { m, n } if *n == 0.0 => {
                let AnalyticFunction::Coeffs(c) = Self::monomial(*m as usize) else { unreachable!() };
                Some(c)
            }
            AnalyticFunction::MonomialMod { .. } => None,
            AnalyticFunction::Lacunary(t) => {
                let top = t.last().map(|(k, _)| *k).unwrap_or(0);
                if top > MAX_DENSE_LOG2 {
                    return None;
                }
                let mut c = vec![cpx(0.0); (1usize << top) + 1];
                for (k, v) in t {
                    c[1usize << k] = *v;
                }
                Some(c)
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            AnalyticFunction::Coeffs(c) => c.iter().rev().fold(cpx(0.0), |acc, a| acc * z + a),
            AnalyticFunction::MonomialMod { m, n } => {
                let k = (m - n) as u32;
                z.powu(k) * z.norm().powf(2.0 * n)
            }
            AnalyticFunction::Lacunary(t) => t.iter().map(|(k, c)| c * z.powu(1u32 << k)).sum(),
        }
    }

    /// `f^(k)` on coefficients.
    pub fn derivative(&self, k: usize) -> Result<AnalyticFunction> {
        let c = self
            .coefficients()
            .ok_or_else(|| Error::domain("derivative needs a holomorphic function with dense coefficients"))?;
        if c.len() <= k {
            return Ok(AnalyticFunction::Coeffs(vec![cpx(0.0)]));
        }
        let d = (k..c.len()).map(|n| c[n] * ln_falling(n, k).exp()).collect();
        Ok(AnalyticFunction::Coeffs(d))
    }

    /// `f^(j)(0)`.
    pub fn derivative_at_zero(&self, j: usize) -> Complex64 {
        let a = match self {
            AnalyticFunction::Coeffs(c) => c.get(j).copied().unwrap_or(cpx(0.0)),
            AnalyticFunction::MonomialMod { m, n } => {
                if *n == 0.0 && *m as usize == j {
                    cpx(1.0)
                } else {
                    cpx(0.0)
                }
            }
            AnalyticFunction::Lacunary(t) => {
                t.iter().find(|(k, _)| 1usize << k == j).map(|(_, c)| *c).unwrap_or(cpx(0.0))
            }
        };
        a * ln_falling(j, j).exp()
    }
}

/// A function to integrate: an [`AnalyticFunction`] or samples of an
/// arbitrary function taken on the quadrature grid.
#[derive(Clone, Copy)]
pub enum Input<'a> {
    Analytic(&'a AnalyticFunction),
    Gridded(&'a (dyn Fn(Complex64) -> Complex64 + Sync)),
}

impl Input<'_> {
    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Input::Analytic(f) => f.eval(z),
            Input::Gridded(g) => g(z),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialNode {
    pub r: f64,
    pub delta: f64,
    /// Weight for `dr`.
    pub weight: f64,
}

/// Tensor grid: Gauss-Legendre in `u = -ln(1-r)` on panels of width `ln 2`,
/// uniform in angle.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub nodes: Vec<RadialNode>,
    pub angular: usize,
    pub tol: f64,
}

const NODES_PER_PANEL: usize = 16;
const MAX_PANELS: usize = 1000;

impl QuadratureSpec {
    /// Grid resolving every weight in `ws`: cut where the remaining tail mass
    /// falls below `1e-3 tol` of the total.
    pub fn for_weights(ws: &[&RadialWeight], angular: usize, tol: f64) -> Result<Self> {
        if !angular.is_power_of_two() || angular < 4 {
            return Err(Error::domain(format!("angular resolution must be a power of two >= 4, got {angular}")));
        }
        let ln2 = std::f64::consts::LN_2;
        let mut cuts: Vec<f64> = Vec::new();
        let mut u_end: f64 = 0.0;
        let mut spans = Vec::new();
        for w in ws {
            let total = w.tail_mag(1.0, tol)?.ln();
            let mut j = 1;
            while j < MAX_PANELS && w.tail_mag(0.5f64.powi(j as i32), tol)?.ln() > total + (1e-3 * tol).ln() {
                j += 1;
            }
            u_end = u_end.max(j as f64 * ln2);
            cuts.extend(w.breakpoints().into_iter().filter(|&b| b > 0.0).map(|b| -b.ln()));
            spans.extend(w.support().into_iter().map(|s| (-s.hi.ln(), if s.lo > 0.0 { -s.lo.ln() } else { f64::INFINITY })));
        }
        cuts.extend((0..=(u_end / ln2).round() as usize).map(|k| k as f64 * ln2));
        cuts.retain(|&u| u <= u_end);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let gl = gauss_legendre(NODES_PER_PANEL);
        let mut nodes = Vec::new();
        for pair in cuts.windows(2) {
            for &(sa, sb) in &spans {
                let (a, b) = (pair[0].max(sa), pair[1].min(sb));
                if b <= a {
                    continue;
                }
                let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
                for &(x, wt) in &gl {
                    let u = mid + half * x;
                    let delta = (-u).exp();
                    nodes.push(RadialNode { r: 1.0 - delta, delta, weight: wt * half * delta });
                }
            }
        }
        Ok(QuadratureSpec { nodes, angular, tol })
    }

    pub fn for_weight(w: &RadialWeight, angular: usize, tol: f64) -> Result<Self> {
        Self::for_weights(&[w], angular, tol)
    }

    /// Samples `f(r_i e^{2 pi i j / M})`, one row per radial node.
    pub fn sample(&self, f: Input<'_>) -> Vec<Vec<Complex64>> {
        let m = self.angular;
        self.nodes
            .par_iter()
            .map(|nd| (0..m).map(|j| f.eval(Complex64::from_polar(nd.r, std::f64::consts::TAU * j as f64 / m as f64))).collect())
            .collect()
    }

    /// `w(r_i) 2 r_i dr_i`, the area weight of each ring.
    fn ring_weights(&self, w: &RadialWeight) -> Vec<f64> {
        self.nodes.iter().map(|nd| w.ln_density(nd.delta).exp() * 2.0 * nd.r * nd.weight).collect()
    }
}

/// Number of kernel terms needed at `|z|`.
fn kernel_degree(w: &RadialWeight, z: Complex64, tol: f64) -> Result<usize> {
    Ok(kernel_eval(w, Complex64::new(z.norm(), 0.0), tol)?.terms_used)
}

/// `ln(1 / (2 w_{2n+1}))` for `n < count`.
fn ln_kernel_coeffs(w: &RadialWeight, count: usize, tol: f64) -> Result<Vec<f64>> {
    let mt = moment_tol(tol);
    (0..count).map(|n| Ok(-std::f64::consts::LN_2 - w.moment((2 * n + 1) as f64, mt)?)).collect()
}

/// Angular resolution suited to projecting a function of frequency `deg` at `z`.
pub fn angular_for(w: &RadialWeight, deg: usize, z: Complex64, tol: f64) -> Result<usize> {
    Ok(crate::fourier::pow2_at_least(4 * kernel_degree(w, z, tol)?.max(deg + 1)))
}

/// `P_w f(z)`. Holomorphic coefficient inputs use the reproducing identity.
pub fn project(w: &RadialWeight, f: Input<'_>, z: Complex64, quad: &QuadratureSpec) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::domain("projection point must satisfy |z| < 1"));
    }
    if let Input::Analytic(a) = f {
        if a.is_holomorphic() {
            return Ok(a.eval(z));
        }
    }
    project_quadrature(w, f, z, quad)
}

/// `P_w f(z)` by quadrature: the coefficients `<f, zeta^n> / (2 w_{2n+1})`
/// come from the angular FFT of each ring.
pub fn project_quadrature(w: &RadialWeight, f: Input<'_>, z: Complex64, quad: &QuadratureSpec) -> Result<Complex64> {
    let deg = kernel_degree(w, z, quad.tol)?;
    if quad.angular <= 2 * deg {
        return Err(Error::domain(format!("angular resolution {} too small for {deg} kernel terms", quad.angular)));
    }
    let c = projected_coeffs(w, f, deg, quad)?;
    Ok(c.iter().enumerate().map(|(n, a)| a * z.powu(n as u32)).sum())
}

/// The first `count` Taylor coefficients of `P_w f`, from the quadrature grid.
pub fn projected_coeffs(w: &RadialWeight, f: Input<'_>, count: usize, quad: &QuadratureSpec) -> Result<Vec<Complex64>> {
    if quad.angular < count {
        return Err(Error::domain(format!("angular resolution {} below {count} coefficients", quad.angular)));
    }
    let rows = quad.sample(f);
    let ring = quad.ring_weights(w);
    let mut inner = vec![cpx(0.0); count];
    for ((row, rw), nd) in rows.iter().zip(&ring).zip(&quad.nodes) {
        if *rw == 0.0 {
            continue;
        }
        let fc = fourier_coeffs(row);
        let mut rn = 1.0;
        for (n, acc) in inner.iter_mut().enumerate() {
            *acc += fc[n] * (rw * rn);
            rn *= nd.r;
        }
    }
    let lk = ln_kernel_coeffs(w, count, quad.tol)?;
    Ok(inner.iter().zip(&lk).map(|(a, l)| a * l.exp()).collect())
}

/// `<f, g>` in `L^2_w`, on the quadrature grid.
pub fn inner_product(w: &RadialWeight, f: Input<'_>, g: Input<'_>, quad: &QuadratureSpec) -> Complex64 {
    let (fr, gr) = (quad.sample(f), quad.sample(g));
    let m = quad.angular as f64;
    quad.ring_weights(w)
        .iter()
        .zip(fr.iter().zip(&gr))
        .filter(|(rw, _)| **rw != 0.0)
        .map(|(rw, (a, b))| a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<Complex64>() * (rw / m))
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlusValue {
    pub value: f64,
    /// Set when the input is not a nonnegative function on the grid.
    pub warning: Option<String>,
}

/// `P+_w f(z) = int f |B_z| w dA` on the quadrature grid.
pub fn project_plus(w: &RadialWeight, f: Input<'_>, z: Complex64, quad: &QuadratureSpec) -> Result<PlusValue> {
    if !(z.norm() < 1.0) {
        return Err(Error::domain("projection point must satisfy |z| < 1"));
    }
    let deg = kernel_degree(w, z, quad.tol)?;
    if quad.angular <= deg {
        return Err(Error::domain(format!("angular resolution {} too small for {deg} kernel terms", quad.angular)));
    }
    let lk = ln_kernel_coeffs(w, deg, quad.tol)?;
    let kc: Vec<Complex64> = lk.iter().enumerate().map(|(n, l)| z.conj().powu(n as u32) * l.exp()).collect();
    let rows = quad.sample(f);
    let ring = quad.ring_weights(w);
    let mut negative = false;
    let m = quad.angular as f64;
    let mut total = cpx(0.0);
    for ((row, rw), nd) in rows.iter().zip(&ring).zip(&quad.nodes) {
        if *rw == 0.0 {
            continue;
        }
        let b = circle_values(&kc, nd.r, quad.angular);
        let s: Complex64 = row.iter().zip(&b).map(|(fv, bv)| fv * bv.norm()).sum();
        negative |= row.iter().any(|v| v.re < 0.0 || v.im.abs() > 1e-12 * v.norm().max(1.0));
        total += s * (rw / m);
    }
    let warning = negative.then(|| "input is not a nonnegative function on the grid".to_string());
    Ok(PlusValue { value: total.re, warning })
}

/// Coefficient `w_{2m+1} / w_{2(m-n)+1}` of `P_w(zeta^{m-n}|zeta|^{2n}) = c z^{m-n}`.
pub fn project_monomial(w: &RadialWeight, m: f64, n: f64, tol: f64) -> Result<f64> {
    AnalyticFunction::monomial_mod(m, n)?;
    Ok((w.moment(2.0 * m + 1.0, tol)? - w.moment(2.0 * (m - n) + 1.0, tol)?).exp())
}

/// `||f||_{L^p_v}`. Holomorphic coefficient inputs at `p = 2` use Parseval.
pub fn lp_norm(v: &RadialWeight, f: Input<'_>, p: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("p must be positive, got {p}")));
    }
    if let Input::Analytic(a) = f {
        if p == 2.0 && a.is_holomorphic() {
            let terms: Vec<(usize, Complex64)> = match a {
                AnalyticFunction::Lacunary(t) => t.iter().map(|(k, c)| (1usize << k, *c)).collect(),
                _ => a.coefficients().unwrap_or_default().into_iter().enumerate().collect(),
            };
            let mut s = 0.0;
            for (k, c) in terms {
                if c != cpx(0.0) {
                    s += c.norm_sqr() * 2.0 * v.moment((2 * k + 1) as f64, quad.tol)?.exp();
                }
            }
            return Ok(s.sqrt());
        }
    }
    let rows = quad.sample(f);
    let ring = quad.ring_weights(v);
    let m = quad.angular as f64;
    let s: f64 = rows.iter().zip(&ring).map(|(row, rw)| rw * row.iter().map(|x| x.norm().powf(p)).sum::<f64>() / m).sum();
    Ok(s.powf(1.0 / p))
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    /// `(m, n, bound)` for every pair.
    pub pairs: Vec<(f64, f64, f64)>,
}

/// `max (w_{2m+1}/w_{2(m-n)+1})^p eta_{p(m-n)+1} / nu_{p(m+n)+1}` over the
/// pairs: a lower bound for `||P_w||^p` from `L^p_nu` to `L^p_eta`.
pub fn operator_lower_bound(
    w: &RadialWeight,
    nu: &RadialWeight,
    eta: &RadialWeight,
    p: f64,
    pairs: &[(f64, f64)],
    tol: f64,
) -> Result<LowerBound> {
    let rows = pairs
        .par_iter()
        .map(|&(m, n)| {
            let c = project_monomial(w, m, n, tol)?.ln();
            let l = p * c + eta.moment(p * (m - n) + 1.0, tol)? - nu.moment(p * (m + n) + 1.0, tol)?;
            Ok((m, n, l.exp()))
        })
        .collect::<Result<Vec<_>>>()?;
    let value = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(LowerBound { value, pairs: rows })
}
