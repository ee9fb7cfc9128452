//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pointint::checks::{free_box_error, gauge_spread, jump_residual, propagator_det_error};
use pointint::convergence::{expansion_check, u_limit_table};
use pointint::renorm::{realize, three_delta_matrix, u_elements_closed_form};
use pointint::spectrum::{
    count_nodes, eigenfunction_approx_level, eigenfunction_exact_level, paired_spectra,
    uniform_grid, BoxDomain, PairedSpectra, ScanOptions,
};
use pointint::transfer::{delta_matrix, propagator, PointParams};

fn coupled() -> PointParams {
    PointParams::new(0.0, 3.0, -2.0, -7.0, 5.0).unwrap()
}

fn uncoupled() -> PointParams {
    PointParams::new(0.0, 5.0, 3.0, 0.0, 0.2).unwrap()
}

fn box_15() -> BoxDomain {
    BoxDomain::symmetric(15.0).unwrap()
}

fn reference_run(p: &PointParams) -> PairedSpectra {
    paired_spectra(p, &box_15(), 0.2, &ScanOptions::default()).unwrap()
}

type Outcome = Result<String, String>;

fn within(label: &str, got: f64, want: f64, tol: f64) -> Outcome {
    if (got - want).abs() <= tol {
        Ok(format!("{label}={got:.7}"))
    } else {
        Err(format!("{label}={got:.9}, expected {want} +/- {tol:e}"))
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for p in parts {
        match p {
            Ok(s) => ok.push(s),
            Err(s) => bad.push(s),
        }
    }
    if bad.is_empty() {
        Ok(ok.join(" "))
    } else {
        Err(bad.join("; "))
    }
}

fn coupled_exact() -> Outcome {
    let s = reference_run(&coupled());
    all(vec![
        within("k10", s.exact.require(10).unwrap().k, 0.894964, 1e-6),
        within("k13", s.exact.require(13).unwrap().k, 1.130869, 1e-6),
    ])
}

fn coupled_approx() -> Outcome {
    let s = reference_run(&coupled());
    all(vec![
        within("k10", s.approx.require(10).unwrap().k, 0.905264, 1e-6),
        within("k13", s.approx.require(13).unwrap().k, 1.142775, 1e-6),
    ])
}

fn uncoupled_levels() -> Outcome {
    let s = reference_run(&uncoupled());
    all(vec![
        within("exact k7", s.exact.require(7).unwrap().k, 0.775671, 1e-6),
        within("approx k7", s.approx.require(7).unwrap().k, 0.775312, 1e-6),
    ])
}

fn node_laws() -> Outcome {
    let d = box_15();
    // the default window stops at n = 13
    let opts = ScanOptions {
        k_hi: 1.5,
        grid_steps: 6500,
        ..ScanOptions::default()
    };
    let s = paired_spectra(&coupled(), &d, 0.2, &opts).unwrap();
    let grid = uniform_grid(&d, 12000);
    let w = eigenfunction_exact_level(&coupled(), &d, s.exact.require(13).unwrap(), &grid)
        .map_err(|e| e.to_string())?;
    let exact_nodes = count_nodes(&w);
    let mut bad = Vec::new();
    for n in 1..=15 {
        let level = s.approx.require(n).map_err(|e| e.to_string())?;
        let w = eigenfunction_approx_level(&s.realization, &d, level, &grid)
            .map_err(|e| e.to_string())?;
        let nodes = count_nodes(&w);
        if nodes != n - 1 {
            bad.push(format!("approx n={n} has {nodes} nodes"));
        }
    }
    if exact_nodes != 10 {
        bad.push(format!("exact n=13 has {exact_nodes} nodes"));
    }
    if bad.is_empty() {
        Ok(format!(
            "exact n=13: {exact_nodes} nodes; approx n=1..15: n-1 nodes"
        ))
    } else {
        Err(bad.join(", "))
    }
}

/// Random target interactions in SL(2,R) on both schedules.
fn random_params(rng: &mut ChaCha8Rng) -> PointParams {
    let theta = rng.gen_range(-PI..PI);
    let alpha = rng.gen_range(0.2..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let beta = rng.gen_range(-5.0..5.0);
    let gamma = if rng.gen_bool(0.2) {
        0.0
    } else {
        rng.gen_range(0.2..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
    };
    let delta = (1.0 + beta * gamma) / alpha;
    PointParams::new(theta, alpha, beta, gamma, delta).unwrap()
}

fn determinants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let draws = 10_000;
    let mut worst_g = 0.0f64;
    let mut worst_u = 0.0f64;
    for _ in 0..draws {
        let a_vec = rng.gen_range(-5.0..5.0);
        let k = rng.gen_range(0.0..5.0);
        let x = rng.gen_range(-5.0..5.0);
        worst_g = worst_g.max(propagator_det_error(a_vec, k, x).unwrap());

        let p = random_params(&mut rng);
        if (p.alpha() + p.delta() + 2.0).abs() < 1e-3 {
            continue;
        }
        let a = 10f64.powf(rng.gen_range(-4.0..0.0));
        let k = rng.gen_range(0.0..5.0);
        let r = realize(&p, a).unwrap();
        let u = u_elements_closed_form(&r, k).unwrap();
        worst_u = worst_u.max((u.det() - 1.0).abs());
    }
    let msg = format!(
        "{draws} draws: max|det G - e^(2iAx)|={worst_g:.1e} max|det U_a - 1|={worst_u:.1e}"
    );
    if worst_g <= 1e-10 && worst_u <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn limits() -> Outcome {
    let mut parts = Vec::new();
    for (name, p) in [("gamma!=0", coupled()), ("gamma=0", uncoupled())] {
        let row = u_limit_table(&p, 1.0, &[1e-6]).unwrap()[0];
        let worst = row.element_errors.iter().cloned().fold(0.0, f64::max);
        parts.push(if worst < 1e-4 {
            Ok(format!("{name} max element error {worst:.2e}"))
        } else {
            Err(format!("{name} max element error {worst:.2e}"))
        });
    }
    let slope = expansion_check(&coupled(), 1.0, &[1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
        .unwrap()
        .unwrap_or(f64::NAN);
    parts.push(within("expansion slope", slope, 3.0, 0.3));
    all(parts)
}

fn gauge() -> Outcome {
    let thetas = [0.0, 0.7, PI, 2.3];
    let mut parts = Vec::new();
    for (name, p) in [("gamma!=0", coupled()), ("gamma=0", uncoupled())] {
        let g = gauge_spread(&p, &box_15(), 0.2, &ScanOptions::default(), &thetas).unwrap();
        let msg = format!(
            "{name}: exact {:.1e} approx {:.1e} exact-direct {:.1e} approx-direct {:.1e}",
            g.exact, g.approx, g.exact_direct, g.approx_direct
        );
        parts.push(if g.max() <= 1e-10 { Ok(msg) } else { Err(msg) });
    }
    all(parts)
}

fn special_cases() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let v = rng.gen_range(-20.0..20.0);
        let u: f64 = rng.gen_range(-20.0..20.0);
        let a = 10f64.powf(rng.gen_range(-5.0..0.0));
        let k = rng.gen_range(0.0..4.0);

        // single δ: all the strength sits at the origin, no field
        let r = realize(&PointParams::delta_potential(v).unwrap(), a).unwrap();
        if (r.v_minus, r.v_0, r.v_plus, r.vector_potential) != (0.0, v, 0.0, 0.0) {
            return Err(format!("delta v={v} a={a}: got {r:?}"));
        }
        let g = propagator(0.0, k, a).unwrap();
        let expect = g * delta_matrix(v) * g;
        let got = three_delta_matrix(&r, k).unwrap();
        let worst = got
            .entries()
            .iter()
            .zip(expect.entries())
            .map(|(x, y)| (**x - *y).norm())
            .fold(0.0, f64::max);
        if worst > 1e-12 * expect.max_abs().max(1.0) {
            return Err(format!(
                "delta v={v} a={a} k={k}: composite differs by {worst:e}"
            ));
        }

        // ε potential: v₀ = u/a², v± = −1/a + 2/u
        if u.abs() < 1e-3 {
            continue;
        }
        let r = realize(&PointParams::eps_potential(u).unwrap(), a).unwrap();
        let side = -1.0 / a + 2.0 / u;
        if r.v_0 != u / (a * a) || r.v_plus != side || r.v_minus != side {
            return Err(format!("eps u={u} a={a}: got {r:?}"));
        }
    }
    Ok("500 random draws of each reduction".into())
}

fn jumps() -> Outcome {
    let d = box_15();
    let mut worst = 0.0f64;
    let mut count = 0;
    for p in [coupled(), uncoupled()] {
        let s = reference_run(&p);
        for level in s.exact.levels.iter().filter(|l| l.n <= 13) {
            let r = jump_residual(&p, &d, level).map_err(|e| e.to_string())?;
            if r > 1e-4 {
                return Err(format!("n={}: relative mismatch {r:e}", level.n));
            }
            worst = worst.max(r);
            count += 1;
        }
    }
    Ok(format!("{count} states, max relative mismatch {worst:.1e}"))
}

fn free_box() -> Outcome {
    let e = free_box_error(&box_15(), 12).map_err(|e| e.to_string())?;
    if e <= 1e-9 {
        Ok(format!("max |k_n - n*pi/30| = {e:.1e}"))
    } else {
        Err(format!("max |k_n - n*pi/30| = {e:.1e}"))
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "gamma!=0 exact spectrum",
            limit: Duration::from_secs(5),
            run: coupled_exact,
        },
        Criterion {
            id: 2,
            name: "gamma!=0 three-delta",
            limit: Duration::from_secs(5),
            run: coupled_approx,
        },
        Criterion {
            id: 3,
            name: "gamma=0 spectra",
            limit: Duration::from_secs(5),
            run: uncoupled_levels,
        },
        Criterion {
            id: 4,
            name: "node laws",
            limit: Duration::from_secs(10),
            run: node_laws,
        },
        Criterion {
            id: 5,
            name: "determinant identities",
            limit: Duration::from_secs(2),
            run: determinants,
        },
        Criterion {
            id: 6,
            name: "limit convergence",
            limit: Duration::from_secs(2),
            run: limits,
        },
        Criterion {
            id: 7,
            name: "gauge invariance",
            limit: Duration::from_secs(20),
            run: gauge,
        },
        Criterion {
            id: 8,
            name: "special-case reductions",
            limit: Duration::from_secs(1),
            run: special_cases,
        },
        Criterion {
            id: 9,
            name: "jump condition",
            limit: Duration::from_secs(5),
            run: jumps,
        },
        Criterion {
            id: 10,
            name: "free-box oracle",
            limit: Duration::from_secs(1),
            run: free_box,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= c.limit => ("PASS", d),
            Ok(d) => (
                "FAIL",
                format!("{d}; took {elapsed:.2?}, limit {:?}", c.limit),
            ),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {status} {:<26} {:>9.3?}  {detail}",
            c.id, c.name, elapsed
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
