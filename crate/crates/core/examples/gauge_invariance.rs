//! The phase θ only enters as a vector potential: the levels do not move.
//!
//! `cargo run --release --example gauge_invariance`

use std::f64::consts::PI;

use pointint::checks::gauge_spread;
use pointint::spectrum::{BoxDomain, ScanOptions};
use pointint::transfer::PointParams;

fn main() -> pointint::Result<()> {
    let d = BoxDomain::symmetric(15.0)?;
    let thetas = [0.0, 0.5, 1.0, PI / 2.0, PI];
    for (name, p) in [
        ("gamma != 0", PointParams::new(0.0, 3.0, -2.0, -7.0, 5.0)?),
        ("gamma == 0", PointParams::new(0.0, 5.0, 3.0, 0.0, 0.2)?),
    ] {
        let g = gauge_spread(&p, &d, 0.2, &ScanOptions::default(), &thetas)?;
        println!(
            "{name}: spread exact {:.1e}, three-delta {:.1e}, direct products {:.1e} / {:.1e}",
            g.exact, g.approx, g.exact_direct, g.approx_direct
        );
    }
    Ok(())
}
