//! Which three-δ schedule each kind of interaction is realized with.
//!
//! `cargo run --example special_cases`

use pointint::renorm::{classify_branch, realize, u_elements_closed_form};
use pointint::transfer::PointParams;

fn main() -> pointint::Result<()> {
    let cases = [
        ("delta, v=2", PointParams::delta_potential(2.0)?),
        ("epsilon, u=0.5", PointParams::eps_potential(0.5)?),
        ("gamma=0", PointParams::new(0.0, 5.0, 3.0, 0.0, 0.2)?),
        (
            "alpha=delta=-1",
            PointParams::new(0.0, -1.0, 0.7, 0.0, -1.0)?,
        ),
        ("general", PointParams::new(0.4, 3.0, -2.0, -7.0, 5.0)?),
    ];
    for (name, p) in cases {
        println!("{name}: {:?}", classify_branch(&p));
        for a in [1e-2, 1e-4] {
            let r = realize(&p, a)?;
            let u = u_elements_closed_form(&r, 1.0)?;
            println!(
                "  a={a:.0e}: v-={:.4e} v0={:.4e} v+={:.4e} A={:.3} pi-shift={} det-1={:.1e}",
                r.v_minus,
                r.v_0,
                r.v_plus,
                r.vector_potential,
                r.extra_phase_pi,
                u.det() - 1.0
            );
        }
    }
    Ok(())
}
