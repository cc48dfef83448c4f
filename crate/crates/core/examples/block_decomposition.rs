//! Frequency blocks cut where the tail drops by a factor K, and the
//! block-sum norm compared with the Bergman norm.
//!
//! cargo run --example block_decomposition

use bergman_weights::decompose::{decomposition_norm, delta_blocks, lacunary_test_functions, rho_sequence};
use bergman_weights::lp::bergman_norm;
use bergman_weights::project::AnalyticFunction;
use bergman_weights::weights::parse_weight;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-10;
    let w = parse_weight("std:alpha=1")?;
    let rho = rho_sequence(&w, 2.0, 12, tol)?;
    println!("rho_n: {:?}", rho.iter().map(|r| format!("{r:.6}")).collect::<Vec<_>>());

    let f: Vec<Complex64> = (0..100).map(|k| Complex64::new(1.0 / (1.0 + k as f64), (k as f64).sin())).collect();
    let d = delta_blocks(&w, 2.0, &f, tol)?;
    for b in d.blocks.iter().take(6) {
        println!("block {:>2}: [{}, {})", b.n, b.start, b.end);
    }
    let dn = decomposition_norm(&w, 2.0, &f, 2.0, tol)?;
    let b = bergman_norm(&w, &AnalyticFunction::Coeffs(f), 2.0, tol)?;
    println!("block sum {:.6e}, ||f||^2 {:.6e}, ratio {:.4}", dn.value, b * b, dn.value / (b * b));

    let pair = lacunary_test_functions(&w, 0.9, 0.5, 12, tol)?;
    println!("lacunary g_t has {} terms", pair.g.coefficients().map_or(0, |c| c.iter().filter(|a| a.norm() > 0.0).count()));
    Ok(())
}
