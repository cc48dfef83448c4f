//! Littlewood-Paley ratios: the weighted norm of f against the weighted norm
//! of its k-th derivative, over monomials.
//!
//! cargo run --example littlewood_paley

use bergman_weights::lp::{bergman_norm, hardy_mean, lp_ratio, parse_family};
use bergman_weights::project::AnalyticFunction;
use bergman_weights::weights::parse_weight;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-10;
    let family = parse_family("monomials:1..200")?;
    for spec in ["std:alpha=1", "exp:c=1,beta=1"] {
        let w = parse_weight(spec)?;
        for k in [1, 2] {
            let r = lp_ratio(&w, 2.0, k, &family, tol)?;
            println!("{spec:<16} k = {k}: min {:.4e} max {:.4e} spread {:.4e}", r.min, r.max, r.spread);
        }
    }
    let f = AnalyticFunction::parse("poly:1,0:0.5,-0.25")?;
    for r in [0.5, 0.9, 1.0] {
        println!("M_3({r}, f) = {:.12}", hardy_mean(&f, r, 3.0, 64)?);
    }
    println!("||f|| in A^3 of std:alpha=1 = {:.12}", bergman_norm(&parse_weight("std:alpha=1")?, &f, 3.0, tol)?);
    Ok(())
}
