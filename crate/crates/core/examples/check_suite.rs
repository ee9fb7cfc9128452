//! Runs the full invariant suite on one configuration.
//!
//! `cargo run --release --example check_suite`

use pointint::checks::{run_checks, CheckInput};
use pointint::spectrum::{BoxDomain, ScanOptions};
use pointint::transfer::PointParams;

fn main() -> pointint::Result<()> {
    let input = CheckInput {
        params: PointParams::new(0.0, 3.0, -2.0, -7.0, 5.0)?,
        domain: BoxDomain::symmetric(15.0)?,
        a: 0.2,
        scan: ScanOptions::default(),
        sample_points: 3001,
    };
    let report = run_checks(&input);
    for c in &report.checks {
        println!(
            "{:<4} {:<22} {}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    std::process::exit(if report.passed { 0 } else { 1 });
}
