//! Doubling, reverse doubling and moment-class verdicts on dyadic grids.
//!
//! cargo run --example classify_weights

use bergman_weights::classify::{doubling_profile, m_class_profile, reverse_doubling_profile, verdict_name, ScaleGrid};
use bergman_weights::report::to_json;
use bergman_weights::weights::parse_weight;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-10;
    let grid = ScaleGrid::dyadic(40);
    let xs: Vec<f64> = (0..=30).map(|k| 2f64.powi(k)).collect();
    println!("{:<22} {:>12} {:>12} {:>12}", "weight", "Dhat", "Dcheck", "M");
    for spec in ["pow:alpha=0", "std:alpha=3", "exp:c=1,beta=1", "dblexp"] {
        let w = parse_weight(spec)?;
        let hat = doubling_profile(&w, &grid, tol)?;
        let check = reverse_doubling_profile(&w, 2.0, &grid, tol)?;
        let m = m_class_profile(&w, 2.0, &xs, &grid, tol)?;
        println!(
            "{spec:<22} {:>12} {:>12} {:>12}",
            verdict_name(hat.verdict),
            verdict_name(check.verdict),
            verdict_name(m.verdict)
        );
    }
    let short = ScaleGrid::dyadic(8);
    let rep = doubling_profile(&parse_weight("std:alpha=1")?, &short, tol)?;
    print!("{}", to_json(&rep)?);
    Ok(())
}
