//! The pathological weights: which scale grids expose their (non-)membership,
//! and how closely the modified tails track the base weight.
//!
//! cargo run --example constructions

use bergman_weights::classify::{doubling_profile, verdict_name, ScaleGrid};
use bergman_weights::constructs::{gap_ratios, prop12, prop9, sandwich_check, thm10, Prop12Params, Thm10Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-10;
    let p9 = prop9()?;
    println!("{}: {}", p9.weight.descriptor(), p9.verified_range);

    let t = thm10(&Thm10Params::default())?;
    println!("{} params {:?}", t.weight.descriptor(), t.params);
    let deltas: Vec<f64> = (1..30).map(|j| 2f64.powi(-j)).collect();
    let (rows, c) = sandwich_check(&t, &deltas, tol)?;
    println!("sandwich constant {c:.4e}, max ln(W^/w^) {:.3e}", rows.iter().map(|r| r.ln_upper).fold(f64::NEG_INFINITY, f64::max));

    let p12 = prop12(&Prop12Params::default())?;
    let rep = doubling_profile(&p12.weight, &ScaleGrid::from_deltas(p12.doubling_deltas.clone()), tol)?;
    println!("{} doubling: {}", p12.weight.descriptor(), verdict_name(rep.verdict));
    for (x, g) in gap_ratios(&p12, tol)?.iter().take(5) {
        println!("  j = {x}: ln(W^/w^) = {g:.4e} (>= -ln 2)");
    }
    Ok(())
}
