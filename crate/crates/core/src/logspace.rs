//! Log-space arithmetic.
//!
//! Tails of the double exponential weights fall below `f64::MIN_POSITIVE`
//! almost immediately, and even their logarithms overflow a little later.
//! [`LogMag`] stores a positive magnitude either as `ln v` or, when that is
//! itself astronomically negative, as `ln(-ln v)`.

use std::cmp::Ordering;

/// Above this loglog value the `Ln` form would lose all precision.
const SWITCH: f64 = 700.0;

/// `ln(e^a + e^b)`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`; `-inf` when they coincide.
pub fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = b - a;
    if d >= 0.0 {
        return f64::NEG_INFINITY;
    }
    a + ln_one_minus_exp(d)
}

/// `ln(1 - e^d)` for `d <= 0`, accurate at both ends.
pub fn ln_one_minus_exp(d: f64) -> f64 {
    if d > -std::f64::consts::LN_2 {
        (-d.exp_m1()).ln()
    } else {
        (-d.exp()).ln_1p()
    }
}

/// Log of a sum of exponentials.
pub fn log_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// A non-negative magnitude in one of two logarithmic encodings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogMag {
    /// value = `exp(x)`
    Ln(f64),
    /// value = `exp(-exp(l))`
    LnLn(f64),
}

impl LogMag {
    pub const ZERO: LogMag = LogMag::Ln(f64::NEG_INFINITY);

    pub fn from_ln(x: f64) -> Self {
        LogMag::Ln(x)
    }

    /// `exp(-exp(l))`, kept in the `Ln` form while that is accurate.
    pub fn neg_exp(l: f64) -> Self {
        if l == f64::INFINITY {
            LogMag::ZERO
        } else if l < SWITCH {
            LogMag::Ln(-l.exp())
        } else {
            LogMag::LnLn(l)
        }
    }

    fn normalize(self) -> Self {
        match self {
            LogMag::LnLn(l) if l < SWITCH => LogMag::Ln(-l.exp()),
            m => m,
        }
    }

    /// Natural log of the value; `-inf` once it is unrepresentable.
    pub fn ln(&self) -> f64 {
        match *self {
            LogMag::Ln(x) => x,
            LogMag::LnLn(l) => -l.exp(),
        }
    }

    pub fn value(&self) -> f64 {
        self.ln().exp()
    }

    /// `ln(-ln v)` for values below one.
    pub fn lnln(&self) -> Option<f64> {
        match *self {
            LogMag::Ln(x) if x < 0.0 => Some((-x).ln()),
            LogMag::Ln(_) => None,
            LogMag::LnLn(l) => Some(l),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, LogMag::Ln(x) if x == f64::NEG_INFINITY)
    }

    /// `ln(self / other)`, possibly infinite.
    pub fn ln_ratio(&self, other: &LogMag) -> f64 {
        match (*self, *other) {
            (LogMag::Ln(a), LogMag::Ln(b)) => {
                if a == b {
                    0.0
                } else {
                    a - b
                }
            }
            (LogMag::Ln(a), LogMag::LnLn(l)) => a + l.exp(),
            (LogMag::LnLn(l), LogMag::Ln(b)) => -l.exp() - b,
            (LogMag::LnLn(l1), LogMag::LnLn(l2)) => {
                if l1 == l2 {
                    0.0
                } else if l2 > l1 {
                    l2.exp() * -(l1 - l2).exp_m1()
                } else {
                    -(l1.exp() * -(l2 - l1).exp_m1())
                }
            }
        }
    }

    /// Sum of two magnitudes.
    pub fn add(self, other: LogMag) -> LogMag {
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return other;
        }
        let (big, small) = if self >= other { (self, other) } else { (other, self) };
        let c = small.ln_ratio(&big).exp().ln_1p();
        match big {
            LogMag::Ln(x) => LogMag::Ln(x + c),
            LogMag::LnLn(l) => LogMag::LnLn(l + (-c * (-l).exp()).ln_1p()).normalize(),
        }
    }

    /// `self - other`, clamped at zero.
    pub fn sub(self, other: LogMag) -> LogMag {
        if other.is_zero() {
            return self;
        }
        let d = other.ln_ratio(&self);
        if d >= 0.0 {
            return LogMag::ZERO;
        }
        let c = ln_one_minus_exp(d);
        match self {
            LogMag::Ln(x) => LogMag::Ln(x + c),
            LogMag::LnLn(l) => LogMag::LnLn(l + (-c * (-l).exp()).ln_1p()).normalize(),
        }
    }

    /// Multiply by `exp(s)`.
    pub fn scale_ln(self, s: f64) -> LogMag {
        match self {
            LogMag::Ln(x) => LogMag::Ln(x + s),
            LogMag::LnLn(l) => LogMag::LnLn(l + (-s * (-l).exp()).ln_1p()).normalize(),
        }
    }
}

impl PartialOrd for LogMag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_zero() && other.is_zero() {
            return Some(Ordering::Equal);
        }
        self.ln_ratio(other).partial_cmp(&0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_sub_roundtrip() {
        let a = 3.0f64.ln();
        let b = 1.0f64.ln();
        assert!((log_add(a, b) - 4.0f64.ln()).abs() < 1e-15);
        assert!((log_sub(a, b) - 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(log_sub(a, a), f64::NEG_INFINITY);
    }

    #[test]
    fn lnln_ratio_matches_direct() {
        let a = LogMag::LnLn(800.0);
        let b = LogMag::LnLn(800.5);
        // exp(800.5) - exp(800)
        let expect = 800f64.exp() * (0.5f64.exp() - 1.0);
        let got = a.ln_ratio(&b);
        assert!(got.is_infinite() || ((got - expect) / expect).abs() < 1e-12);
        let c = LogMag::neg_exp(3.0);
        let d = LogMag::neg_exp(2.0);
        let expect = 2f64.exp() - 3f64.exp();
        assert!((c.ln_ratio(&d) - expect).abs() < 1e-12);
        assert!(c < d);
    }

    #[test]
    fn add_and_sub_in_both_forms() {
        let x = LogMag::Ln(-2.0);
        let y = LogMag::Ln(-3.0);
        let s = x.add(y);
        assert!((s.ln() - log_add(-2.0, -3.0)).abs() < 1e-15);
        let d = s.sub(y);
        assert!((d.ln() + 2.0).abs() < 1e-14);
        let big = LogMag::LnLn(720.0);
        let half = big.scale_ln(-(2f64).ln());
        let back = half.add(half);
        assert!((back.ln_ratio(&big)).abs() < 1e-9);
        assert!(big.sub(big).is_zero());
    }

    #[test]
    fn normalize_small_lnln() {
        assert_eq!(LogMag::neg_exp(1.0), LogMag::Ln(-1f64.exp()));
        assert!(matches!(LogMag::neg_exp(750.0), LogMag::LnLn(_)));
    }
}
