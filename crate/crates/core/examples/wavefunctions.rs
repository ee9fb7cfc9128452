//! Sampled eigenfunctions of one level and their node counts.
//!
//! `cargo run --example wavefunctions -- 7`

use pointint::spectrum::{
    count_nodes, eigenfunction_approx_level, eigenfunction_exact_level, paired_spectra,
    uniform_grid, BoxDomain, ScanOptions,
};
use pointint::transfer::PointParams;

fn main() -> pointint::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let p = PointParams::new(0.0, 5.0, 3.0, 0.0, 0.2)?;
    let d = BoxDomain::symmetric(15.0)?;
    let s = paired_spectra(&p, &d, 0.2, &ScanOptions::default())?;
    let grid = uniform_grid(&d, 3001);

    let exact = eigenfunction_exact_level(&p, &d, s.exact.require(n)?, &grid)?;
    let approx = eigenfunction_approx_level(&s.realization, &d, s.approx.require(n)?, &grid)?;

    println!(
        "n={n}: exact {} nodes, three-delta {} nodes",
        count_nodes(&exact),
        count_nodes(&approx)
    );
    println!("norms {:.12} {:.12}", exact.norm_sq(), approx.norm_sq());
    if let Some(left) = exact.left_limit_at_zero {
        let i0 = exact.xs.iter().position(|&x| x == 0.0).unwrap();
        println!(
            "phi(-0) = {:.6}, phi(+0) = {:.6}",
            left.re, exact.phis[i0].re
        );
    }
    for i in (0..grid.len()).step_by(250) {
        println!(
            "{:>7.2} {:>10.6} {:>10.6}",
            grid[i], exact.phis[i].re, approx.phis[i].re
        );
    }
    Ok(())
}
