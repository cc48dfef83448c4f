//! Build weights from the DSL and read off moments and tails.
//!
//! cargo run --example weights_and_moments

use bergman_weights::logspace::LogMag;
use bergman_weights::weights::parse_weight;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-10;
    for spec in ["pow:alpha=1", "std:alpha=2", "exp:c=1,beta=1", "dblexp", "pow:alpha=-0.5", "construct:prop12"] {
        let w = parse_weight(spec)?;
        println!("{}", w.descriptor());
        for x in [1.0, 100.0, 1e6] {
            println!("  ln w_{x:<8e} = {:.12e}", w.moment(x, tol)?);
        }
        for j in [1, 10, 40] {
            let d = 2f64.powi(-j);
            // tails too small for a logarithm come back as ln(-ln)
            match w.tail_mag(d, tol)? {
                LogMag::LnLn(ll) => println!("  tail at 1 - 2^-{j:<2}: ln(-ln w^) = {ll:.6}"),
                LogMag::Ln(l) => println!("  tail at 1 - 2^-{j:<2}: ln w^ = {l:.12e}"),
            }
        }
    }
    Ok(())
}
