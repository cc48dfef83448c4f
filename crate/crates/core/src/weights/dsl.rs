//! Textual weight descriptors.
//!
//! ```text
//! pow:alpha=A            (1-r)^A
//! std:alpha=A            (A+1)(1-r^2)^A
//! exp:c=C,beta=B         exp(-C/(1-r)^B)
//! dblexp                 tail exp(-exp(1/(1-r)))
//! table:PATH             CSV of r,omega
//! construct:prop9
//! construct:thm10[:k=v,...]   keys: family, alpha, gamma, N, M
//! construct:prop12[:k=v,...]  keys: c, N
//! ```

use std::path::Path;

use super::{RadialWeight, Table};
use crate::constructs::{self, Prop12Params, Thm10Params};
use crate::error::{Error, Result};

/// A `key=value` pair with the byte offset of its value.
struct Pair<'a> {
    key: &'a str,
    val: &'a str,
    pos: usize,
}

fn pairs(s: &str, offset: usize) -> Result<Vec<Pair<'_>>> {
    let mut out = Vec::new();
    if s.is_empty() {
        return Ok(out);
    }
    let mut pos = offset;
    for item in s.split(',') {
        let eq = item.find('=').ok_or_else(|| Error::parse(pos, format!("expected key=value, found '{item}'")))?;
        let (k, v) = (&item[..eq], &item[eq + 1..]);
        if k.is_empty() {
            return Err(Error::parse(pos, "empty key"));
        }
        out.push(Pair { key: k, val: v, pos: pos + eq + 1 });
        pos += item.len() + 1;
    }
    Ok(out)
}

fn num(p: &Pair<'_>) -> Result<f64> {
    let v: f64 = p
        .val
        .parse()
        .map_err(|_| Error::parse(p.pos, format!("'{}' is not a number", p.val)))?;
    if !v.is_finite() {
        return Err(Error::parse(p.pos, format!("'{}' is not finite", p.val)));
    }
    Ok(v)
}

fn int(p: &Pair<'_>) -> Result<usize> {
    p.val
        .parse()
        .map_err(|_| Error::parse(p.pos, format!("'{}' is not a non-negative integer", p.val)))
}

/// Exactly the listed keys, in order.
fn fixed<'a>(ps: &'a [Pair<'a>], keys: &[&str], end: usize) -> Result<Vec<&'a Pair<'a>>> {
    if ps.len() != keys.len() {
        let pos = ps.get(keys.len()).map_or(end, |p| p.pos);
        return Err(Error::parse(pos, format!("expected parameters {}", keys.join(","))));
    }
    for (p, k) in ps.iter().zip(keys) {
        if p.key != *k {
            return Err(Error::parse(p.pos - p.key.len() - 1, format!("expected '{k}', found '{}'", p.key)));
        }
    }
    Ok(ps.iter().collect())
}

/// Parse a weight descriptor such as `pow:alpha=1`.
pub fn parse_weight(text: &str) -> Result<RadialWeight> {
    let s = text.trim();
    let (family, rest, off) = match s.find(':') {
        Some(i) => (&s[..i], &s[i + 1..], i + 1),
        None => (s, "", s.len()),
    };
    match family {
        "pow" => {
            let ps = pairs(rest, off)?;
            let f = fixed(&ps, &["alpha"], s.len())?;
            RadialWeight::pow(num(f[0])?)
        }
        "std" => {
            let ps = pairs(rest, off)?;
            let f = fixed(&ps, &["alpha"], s.len())?;
            RadialWeight::standard(num(f[0])?)
        }
        "exp" => {
            let ps = pairs(rest, off)?;
            let f = fixed(&ps, &["c", "beta"], s.len())?;
            RadialWeight::exponential(num(f[0])?, num(f[1])?)
        }
        "dblexp" => {
            if !rest.is_empty() || s.contains(':') {
                return Err(Error::parse(off, "dblexp takes no parameters"));
            }
            Ok(RadialWeight::double_exponential())
        }
        "table" => {
            if rest.is_empty() {
                return Err(Error::parse(off, "table needs a path"));
            }
            let t = Table::from_csv(Path::new(rest))?;
            Ok(RadialWeight::table(t, s))
        }
        "construct" => Ok(parse_construct(rest, off)?.weight),
        "" => Err(Error::parse(0, "empty descriptor")),
        other => Err(Error::parse(0, format!("unknown weight family '{other}'"))),
    }
}

/// Parse `prop9`, `thm10[:k=v,...]` or `prop12[:k=v,...]`.
pub fn parse_construction(text: &str) -> Result<constructs::Construction> {
    parse_construct(text.trim(), 0)
}

fn parse_construct(rest: &str, off: usize) -> Result<constructs::Construction> {
    let (which, params, poff) = match rest.find(':') {
        Some(i) => (&rest[..i], &rest[i + 1..], off + i + 1),
        None => (rest, "", off + rest.len()),
    };
    let ps = pairs(params, poff)?;
    match which {
        "prop9" => {
            if let Some(p) = ps.first() {
                return Err(Error::parse(p.pos, "prop9 takes no parameters"));
            }
            constructs::prop9()
        }
        "thm10" => {
            let mut t = Thm10Params::default();
            for p in &ps {
                match p.key {
                    "family" => {
                        t.family = match p.val {
                            "pow" => constructs::BaseFamily::Pow,
                            "std" => constructs::BaseFamily::Std,
                            v => return Err(Error::parse(p.pos, format!("family must be pow or std, got '{v}'"))),
                        }
                    }
                    "alpha" => t.alpha = num(p)?,
                    "gamma" => t.gamma = Some(num(p)?),
                    "N" => t.n = Some(int(p)?),
                    "M" => t.m = num(p)?,
                    k => return Err(Error::parse(p.pos - k.len() - 1, format!("unknown thm10 parameter '{k}'"))),
                }
            }
            constructs::thm10(&t)
        }
        "prop12" => {
            let mut t = Prop12Params::default();
            for p in &ps {
                match p.key {
                    "c" => t.c = num(p)?,
                    "N" => t.n = Some(int(p)?),
                    k => return Err(Error::parse(p.pos - k.len() - 1, format!("unknown prop12 parameter '{k}'"))),
                }
            }
            constructs::prop12(&t)
        }
        other => Err(Error::parse(off, format!("unknown construction '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        assert_eq!(parse_weight("pow:alpha=1").unwrap().descriptor(), "pow:alpha=1");
        assert_eq!(parse_weight("std:alpha=0.5").unwrap().descriptor(), "std:alpha=0.5");
        assert_eq!(parse_weight("exp:c=1,beta=2").unwrap().descriptor(), "exp:c=1,beta=2");
        assert_eq!(parse_weight("dblexp").unwrap().descriptor(), "dblexp");
    }

    #[test]
    fn parse_error_positions() {
        match parse_weight("pow:alpha=x") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 10),
            r => panic!("{r:?}"),
        }
        match parse_weight("exp:c=1,gamma=2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 8),
            r => panic!("{r:?}"),
        }
        assert!(matches!(parse_weight("foo:alpha=1"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse_weight("pow:alpha=-1"), Err(Error::Domain(_))));
        assert!(matches!(parse_weight("dblexp:x=1"), Err(Error::Parse { .. })));
    }
}
