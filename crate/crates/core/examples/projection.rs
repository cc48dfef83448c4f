//! Bergman projection of non-holomorphic data on a radial x angular grid,
//! its maximal counterpart, and monomial lower bounds for operator norms.
//!
//! cargo run --example projection

use bergman_weights::project::{
    angular_for, operator_lower_bound, project, project_monomial, project_plus, AnalyticFunction, Input, QuadratureSpec,
};
use bergman_weights::weights::parse_weight;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-10;
    let w = parse_weight("std:alpha=1")?;
    let z = Complex64::new(0.4, 0.3);
    let quad = QuadratureSpec::for_weight(&w, angular_for(&w, 32, z, tol)?, tol)?;

    // zeta^3 |zeta|^4 projects to c z^3
    let f = AnalyticFunction::monomial_mod(5.0, 2.0)?;
    let p = project(&w, Input::Analytic(&f), z, &quad)?;
    println!("P(zeta^3|zeta|^4)(z) / z^3 = {:.12}", p / z.powu(3));
    println!("closed form                 = {:.12}", project_monomial(&w, 5.0, 2.0, tol)?);

    // arbitrary sampled data
    let g = |u: Complex64| u.conj() * u.conj() + (u.norm_sqr() * 3.0).sin();
    println!("P g(z)  = {:.12}", project(&w, Input::Gridded(&g), z, &quad)?);
    let abs_g = |u: Complex64| Complex64::new(g(u).norm(), 0.0);
    println!("P+|g|(z) = {:.12}", project_plus(&w, Input::Gridded(&abs_g), z, &quad)?.value);

    let nu = parse_weight("pow:alpha=1")?;
    let pairs: Vec<(f64, f64)> = (0..20).map(|m| (m as f64, (m / 2) as f64)).collect();
    let lb = operator_lower_bound(&w, &nu, &nu, 3.0, &pairs, tol)?;
    println!("||P||^3 on L^3 of pow:alpha=1 >= {:.6}", lb.value);
    Ok(())
}
