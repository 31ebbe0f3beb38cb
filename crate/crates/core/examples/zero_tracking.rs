//! Zeros of the Jacobian field `J(., t)` for the Globevnik counterexample.
//!
//! Prints each tracked branch with its multiplicity and checks the per-`t`
//! sum rule: the zeros counted with multiplicity (half on the boundary)
//! equal the winding of `J(e^{i psi}, t)` around 0.

use crfolio::cli::tasks::sum_rule;
use crfolio::extension::analyze;
use crfolio::family::build_rotating_circles;
use crfolio::function::{BoundaryFunction, FunctionSpec};
use crfolio::jacobian::{compute_j, track_zeros};

fn main() -> crfolio::Result<()> {
    let fam = build_rotating_circles(1.0, 2.0, 256)?;
    let f = BoundaryFunction::from_spec(
        &FunctionSpec {
            name: "globevnik_n".into(),
            n: Some(2),
            value: None,
        },
        1,
    )?;
    let jac = compute_j(&analyze(&f, &fam)?)?;
    println!("J_max = {:.4} (normalized), max |J| = {:.4}", jac.j_max(), jac.max_abs());

    let chain = track_zeros(&jac)?;
    for b in &chain.branches {
        let far = b.roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        println!(
            "branch {:>2}: kappa {:<3} closed {:<5} central {:<5} samples {:>4} max |zeta| {far:.4}",
            b.id,
            b.kappa(),
            b.closed,
            b.is_central(),
            b.nodes.len()
        );
    }
    println!("central cycle present: {}", chain.central_cycle_present);

    let (samples, agreements, gap) = sum_rule(&jac, 50, 7)?;
    println!("sum rule: {agreements}/{samples} exact, max gap {gap}");
    Ok(())
}
