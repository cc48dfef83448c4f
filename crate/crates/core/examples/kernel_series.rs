//! Reproducing kernel series with a rigorous truncation bound, and its
//! derivatives checked against the closed form of the standard weights.
//!
//! cargo run --example kernel_series

use bergman_weights::kernel::{kernel_derivative, kernel_eval, kernel_norm_check};
use bergman_weights::weights::RadialWeight;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-12;
    let w = RadialWeight::standard(1.0)?;
    for x in [Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.8), Complex64::new(0.95, 0.0)] {
        let k = kernel_eval(&w, x, tol)?;
        let exact = (Complex64::new(1.0, 0.0) - x).powf(-3.0);
        println!(
            "B({x:.2}) = {:.12} terms {:>5} bound {:.1e} |err| {:.1e}",
            k.value,
            k.terms_used,
            k.trunc_bound,
            (k.value - exact).norm()
        );
    }
    let (z, zeta) = (Complex64::new(0.2, 0.1), Complex64::new(0.4, -0.3));
    let d2 = kernel_derivative(&w, z, zeta, 2, tol)?;
    println!("d^2/dz^2 B_zeta(z) = {:.12}", d2.value);

    let nu = RadialWeight::pow(0.0)?;
    let check = kernel_norm_check(&w, &nu, 1.0, 1, &[0.5, 0.9, 0.99], 1e-8)?;
    for r in &check.rows {
        println!("|z| = {:<5} lhs {:.6e} rhs {:.6e} ratio {:.4}", r.z, r.lhs, r.rhs, r.ratio);
    }
    Ok(())
}
