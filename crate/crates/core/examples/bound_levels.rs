//! Negative-energy levels, reported as κ with E = −κ².
//!
//! `cargo run --example bound_levels`

use pointint::renorm::realize;
use pointint::spectrum::{approx_bound_levels, exact_bound_levels, BoxDomain};
use pointint::transfer::PointParams;

fn main() -> pointint::Result<()> {
    let p = PointParams::new(0.0, 3.0, -2.0, -7.0, 5.0)?;
    let d = BoxDomain::symmetric(15.0)?;
    println!("exact kappa: {:?}", exact_bound_levels(&p, &d)?);
    for a in [0.2, 0.05, 0.01] {
        let kappas = approx_bound_levels(&realize(&p, a)?, &d)?;
        println!("three-delta a={a}: {kappas:.6?}");
    }
    Ok(())
}
