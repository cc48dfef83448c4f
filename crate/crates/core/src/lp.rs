//! Hardy means, weighted Bergman norms by radial integration, and the
//! derivative side of the Littlewood-Paley formula.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::nullable;
use crate::error::{Error, Result};
use crate::fourier::{circle_values, pow2_at_least};
use crate::logspace::log_add;
use crate::project::AnalyticFunction;
use crate::quad::Span;
use crate::weights::{Integrand, Modifier, RadialWeight};

fn check_res(deg: usize, res: usize) -> Result<()> {
    if !res.is_power_of_two() || res < 4 * deg.max(1) {
        return Err(Error::domain(format!("angular resolution {res} must be a power of two >= 4 * degree ({deg})")));
    }
    Ok(())
}

/// `M_p(r, f)` for a polynomial given by its coefficients.
pub fn hardy_mean_coeffs(coeffs: &[Complex64], r: f64, p: f64, res: usize) -> Result<f64> {
    let deg = coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)).unwrap_or(0);
    check_res(deg, res)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("radius must lie in [0, 1], got {r}")));
    }
    if !(p > 0.0) {
        return Err(Error::domain(format!("p must be positive, got {p}")));
    }
    let vals = circle_values(coeffs, r, res);
    if p.is_infinite() {
        return Ok(sup_on_circle(coeffs, r, &vals));
    }
    let s = vals.iter().map(|v| v.norm().powf(p)).sum::<f64>() / res as f64;
    Ok(s.powf(1.0 / p))
}

/// Largest sample, polished by golden-section search on the neighbouring
/// sample intervals.
fn sup_on_circle(coeffs: &[Complex64], r: f64, vals: &[Complex64]) -> f64 {
    let res = vals.len();
    let (j, best) = vals.iter().map(|v| v.norm()).enumerate().fold((0, 0.0), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    let h = std::f64::consts::TAU / res as f64;
    let f = |t: f64| {
        let z = Complex64::from_polar(r, t);
        coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a).norm()
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (j as f64 * h - h, j as f64 * h + h);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(f((a + b) / 2.0))
}

/// `M_p(r, f) = ((1/2pi) int |f(r e^{it})|^p dt)^{1/p}`, `p = inf` for the maximum.
pub fn hardy_mean(f: &AnalyticFunction, r: f64, p: f64, res: usize) -> Result<f64> {
    if let AnalyticFunction::MonomialMod { m, n } = f {
        check_res((m - n) as usize, res)?;
        return Ok(r.powf(m + n));
    }
    let c = f.coefficients().ok_or_else(|| Error::domain("degree too large for circle sampling"))?;
    hardy_mean_coeffs(&c, r, p, res)
}

/// `(|c|, e)` when `f = c zeta^e`-like in modulus: `|f(re^{it})| = |c| r^e`.
fn single_term(f: &AnalyticFunction) -> Option<(f64, f64)> {
    match f {
        AnalyticFunction::MonomialMod { m, n } => Some((1.0, m + n)),
        AnalyticFunction::Coeffs(c) => {
            let nz: Vec<usize> = (0..c.len()).filter(|&k| c[k] != Complex64::new(0.0, 0.0)).collect();
            (nz.len() == 1).then(|| (c[nz[0]].norm(), nz[0] as f64))
        }
        AnalyticFunction::Lacunary(t) => (t.len() == 1).then(|| (t[0].1.norm(), (1u64 << t[0].0) as f64)),
    }
}

/// `ln ||f||^p_{A^p_w} = ln 2 int_0^1 M_p^p(r, f) w(r) r dr`.
pub fn ln_bergman_norm_p(w: &RadialWeight, f: &AnalyticFunction, p: f64, tol: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("p must be positive and finite, got {p}")));
    }
    if let Some((c, e)) = single_term(f) {
        return Ok(p * c.ln() + std::f64::consts::LN_2 + w.moment(p * e + 1.0, tol)?);
    }
    let c = f.coefficients().ok_or_else(|| Error::domain("degree too large for circle sampling"))?;
    if c.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Ok(f64::NEG_INFINITY);
    }
    // |f|^p is not a trigonometric polynomial unless p = 2: oversample
    let res = pow2_at_least(32 * c.len());
    let mp = |d: f64| {
        let r = 1.0 - d;
        let s = if p == 2.0 {
            let mut acc = 0.0;
            let mut r2k = 1.0;
            for a in &c {
                acc += a.norm_sqr() * r2k;
                r2k *= r * r;
            }
            acc
        } else {
            circle_values(&c, r, res).iter().map(|v| v.norm().powf(p)).sum::<f64>() / res as f64
        };
        s.ln() + (-d).ln_1p()
    };
    Ok(std::f64::consts::LN_2 + w.ln_integral(Integrand::Custom(&mp), Span::FULL, tol)?)
}

/// `||f||_{A^p_w}` by radial integration of `M_p^p`.
pub fn bergman_norm(w: &RadialWeight, f: &AnalyticFunction, p: f64, tol: f64) -> Result<f64> {
    Ok((ln_bergman_norm_p(w, f, p, tol)? / p).exp())
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LpRow {
    pub index: usize,
    #[serde(with = "nullable")]
    pub lhs: f64,
    #[serde(with = "nullable")]
    pub rhs: f64,
    #[serde(with = "nullable")]
    pub ratio: f64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LpReport {
    pub weight: String,
    pub p: f64,
    pub k: usize,
    pub rows: Vec<LpRow>,
    #[serde(with = "nullable")]
    pub min: f64,
    #[serde(with = "nullable")]
    pub max: f64,
    /// `max / min`.
    #[serde(with = "nullable")]
    pub spread: f64,
    pub flagged: bool,
}

/// `||f||^p_{A^p_w}` against
/// `int |f^(k)|^p (1-|z|)^{kp} w dA + sum_{j<k} |f^(j)(0)|^p` for each member.
pub fn lp_ratio(w: &RadialWeight, p: f64, k: usize, family: &[AnalyticFunction], tol: f64) -> Result<LpReport> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let wk = w.modified(k as f64 * p, Modifier::Bracket)?;
    let rows: Vec<LpRow> = family
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            let lhs = ln_bergman_norm_p(w, f, p, tol)?;
            let d = ln_bergman_norm_p(&wk, &f.derivative(k)?, p, tol)?;
            let poly = (0..k).map(|j| p * f.derivative_at_zero(j).norm().ln()).fold(f64::NEG_INFINITY, log_add);
            let rhs = log_add(d, poly);
            Ok(LpRow { index, lhs: lhs.exp(), rhs: rhs.exp(), ratio: (lhs - rhs).exp() })
        })
        .collect::<Result<_>>()?;
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(LpReport { weight: w.descriptor().to_string(), p, k, rows, min, max, spread: max / min, flagged: w.is_flagged() })
}

/// `||f^(k)||_{A^p_{w[kp]}} + sum_{j<=k} |f^(j)(0)|`.
pub fn dirichlet_norm(w: &RadialWeight, p: f64, k: usize, f: &AnalyticFunction, tol: f64) -> Result<f64> {
    let wk = w.modified(k as f64 * p, Modifier::Bracket)?;
    let d = bergman_norm(&wk, &f.derivative(k)?, p, tol)?;
    Ok(d + (0..=k).map(|j| f.derivative_at_zero(j).norm()).sum::<f64>())
}

/// The `monomials:A..B` family (inclusive).
pub fn parse_family(spec: &str) -> Result<Vec<AnalyticFunction>> {
    let body = spec.strip_prefix("monomials:").ok_or_else(|| Error::parse(0, "expected monomials:A..B"))?;
    let (a, b) = body.split_once("..").ok_or_else(|| Error::parse(10, "expected A..B"))?;
    let a: usize = a.trim().parse().map_err(|_| Error::parse(10, format!("bad start '{a}'")))?;
    let b: usize = b.trim().parse().map_err(|_| Error::parse(12 + a.to_string().len(), format!("bad end '{b}'")))?;
    if b < a || b > 1_000_000 {
        return Err(Error::parse(10, "empty or oversized range"));
    }
    Ok((a..=b).map(AnalyticFunction::monomial).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: f64 = 1e-10;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hardy_monomial() {
        for &p in &[0.5, 1.0, 2.0, 3.3, f64::INFINITY] {
            let v = hardy_mean(&AnalyticFunction::monomial(5), 0.7, p, 32).unwrap();
            assert!((v - 0.7f64.powi(5)).abs() < 1e-14, "{p}");
        }
    }

    #[test]
    fn hardy_one_plus_z() {
        let f = AnalyticFunction::Coeffs(vec![c(1.0), c(1.0)]);
        for &r in &[0.0, 0.3, 0.9, 1.0] {
            assert!((hardy_mean(&f, r, 2.0, 8).unwrap() - (1.0 + r * r).sqrt()).abs() < 1e-14);
        }
        // brute force circle sum with 10^6 points
        let n = 1_000_000;
        let brute = ((0..n)
            .map(|j| (c(1.0) + Complex64::from_polar(0.5, std::f64::consts::TAU * j as f64 / n as f64)).norm().powi(4))
            .sum::<f64>()
            / n as f64)
            .powf(0.25);
        assert!((hardy_mean(&f, 0.5, 4.0, 64).unwrap() - brute).abs() < 1e-12);
        assert!((hardy_mean(&f, 0.5, f64::INFINITY, 16).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn hardy_needs_resolution() {
        let f = AnalyticFunction::monomial(10);
        assert!(matches!(hardy_mean(&f, 0.5, 2.0, 32), Err(Error::Domain(_))));
        assert!(matches!(hardy_mean(&f, 0.5, 2.0, 48), Err(Error::Domain(_))));
    }

    #[test]
    fn bergman_norm_paths_agree() {
        let w = RadialWeight::standard(1.0).unwrap();
        let f = AnalyticFunction::Coeffs(vec![c(1.0), Complex64::new(0.0, 0.3), c(0.0), c(-0.2)]);
        let parseval: f64 = [(0, 1.0), (1, 0.09), (3, 0.04)]
            .iter()
            .map(|&(k, a): &(usize, f64)| a * 2.0 * w.moment((2 * k + 1) as f64, T).unwrap().exp())
            .sum();
        assert!((bergman_norm(&w, &f, 2.0, T).unwrap().powi(2) - parseval).abs() < 1e-9 * parseval);
        // p = 3 through the FFT path against the grid norm; f has no zeros in the disc
        let q = crate::project::QuadratureSpec::for_weight(&w, 64, T).unwrap();
        let grid = crate::project::lp_norm(&w, crate::project::Input::Gridded(&|z| f.eval(z)), 3.0, &q).unwrap();
        let b = bergman_norm(&w, &f, 3.0, T).unwrap();
        assert!((b - grid).abs() < 1e-8 * grid, "{b} {grid}");
    }

    #[test]
    fn bergman_monomials() {
        let w = RadialWeight::pow(0.0).unwrap();
        for n in 0..10 {
            let v = bergman_norm(&w, &AnalyticFunction::monomial(n), 2.0, T).unwrap();
            assert!((v - 1.0 / ((n + 1) as f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn lp_ratio_of_z() {
        let w = RadialWeight::pow(0.0).unwrap();
        let r = lp_ratio(&w, 2.0, 1, &[AnalyticFunction::monomial(1)], T).unwrap();
        assert!((r.rows[0].lhs - 0.5).abs() < 1e-14);
        assert!((r.rows[0].rhs - 1.0 / 6.0).abs() < 1e-14);
        assert!((r.rows[0].ratio - 3.0).abs() < 1e-13);
    }

    #[test]
    fn dirichlet_examples() {
        let w = RadialWeight::pow(0.0).unwrap();
        let v = dirichlet_norm(&w, 2.0, 1, &AnalyticFunction::monomial(1), T).unwrap();
        assert!((v - ((2.0f64 / 12.0).sqrt() + 1.0)).abs() < 1e-13);
        let k = AnalyticFunction::Coeffs(vec![Complex64::new(0.6, -0.8)]);
        assert!((dirichlet_norm(&w, 2.0, 2, &k, T).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn family_parsing() {
        assert_eq!(parse_family("monomials:1..3").unwrap().len(), 3);
        assert!(parse_family("monomials:5..2").is_err());
        assert!(parse_family("poly:1").is_err());
    }
}
