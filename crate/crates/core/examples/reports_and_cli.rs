//! Two-weight constants written as CSV, and the command front end driven
//! in-process (the `bergman` binary is a thin wrapper around the same call).
//!
//! cargo run --example reports_and_cli

use bergman_weights::classify::{two_weight_constants, ScaleGrid};
use bergman_weights::cli;
use bergman_weights::report::{to_csv, Cell};
use bergman_weights::weights::parse_weight;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-10;
    let (omega, nu) = (parse_weight("pow:alpha=1")?, parse_weight("std:alpha=1")?);
    let rep = two_weight_constants(&omega, &nu, 2.0, &ScaleGrid::dyadic(10), tol)?;
    println!("A_2 = {:.6}, M_2 = {:.6}", rep.a_p, rep.m_p);
    let rows: Vec<Vec<Cell>> = rep
        .rows
        .iter()
        .map(|r| vec![Cell::Float(r.r), Cell::Float(r.sigma_hat), Cell::Float(r.ap_integrand), Cell::Float(r.mp_integrand)])
        .collect();
    print!("{}", to_csv(&["r", "sigma_hat", "Ap_integrand", "Mp_integrand"], &rows)?);

    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(["bergman", "kernel", "--weight", "std:alpha=0", "--x", "0.5,0"], &mut out, &mut err);
    println!("exit {code}\n{}", String::from_utf8_lossy(&out));
    Ok(())
}
