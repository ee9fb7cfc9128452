//! Exact point-interaction levels next to the three-δ approximant's.
//!
//! `cargo run --example paired_spectrum`

use pointint::spectrum::{paired_spectra, BoxDomain, ScanOptions};
use pointint::transfer::PointParams;

fn main() -> pointint::Result<()> {
    let p = PointParams::new(0.0, 3.0, -2.0, -7.0, 5.0)?;
    let d = BoxDomain::symmetric(15.0)?;
    let s = paired_spectra(&p, &d, 0.2, &ScanOptions::default())?;

    println!("{} approximant level(s) have no exact partner", s.escaped);
    println!("{:>3} {:>14} {:>14}", "n", "k exact", "k three-delta");
    for a in &s.approx.levels {
        let exact = s
            .exact
            .level(a.n)
            .map_or("-".to_string(), |e| format!("{:.9}", e.k));
        let tag = if a.bound { " (bound, kappa)" } else { "" };
        println!("{:>3} {:>14} {:>14.9}{tag}", a.n, exact, a.k);
    }
    for w in s.exact.warnings.iter().chain(&s.approx.warnings) {
        eprintln!("warning: {w}");
    }
    Ok(())
}
