//! How the three-δ composite and one eigenvalue approach the a → 0 limit.
//!
//! `cargo run --release --example convergence_table`

use pointint::convergence::{
    eigenvalue_drift, element_slopes, expansion_check, u_limit_table, DEFAULT_A_SEQ,
};
use pointint::spectrum::{BoxDomain, ScanOptions};
use pointint::transfer::PointParams;

fn main() -> pointint::Result<()> {
    let p = PointParams::new(0.0, 3.0, -2.0, -7.0, 5.0)?;
    let rows = u_limit_table(&p, 1.0, &DEFAULT_A_SEQ)?;
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "a", "e11", "e12", "e21", "e22", "det"
    );
    for r in &rows {
        let [e11, e12, e21, e22] = r.element_errors;
        println!(
            "{:>8.0e} {e11:>10.2e} {e12:>10.2e} {e21:>10.2e} {e22:>10.2e} {:>10.1e}",
            r.a, r.det_error
        );
    }
    println!("log-log slopes {:?}", element_slopes(&rows));
    println!(
        "expansion slope {:?}",
        expansion_check(&p, 1.0, &[1e-2, 1e-3, 1e-4])?
    );

    let d = BoxDomain::symmetric(15.0)?;
    let drift = eigenvalue_drift(
        &p,
        &d,
        10,
        &[0.2, 0.1, 0.05, 0.02, 0.01],
        &ScanOptions::default(),
    )?;
    println!("k_10 = {:.9}", drift.k_exact);
    for r in &drift.rows {
        println!("a={:<5} k={:.9} error={:+.2e}", r.a, r.k_n, r.error);
    }
    Ok(())
}
