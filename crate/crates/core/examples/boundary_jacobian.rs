//! Boundary Jacobian and regularity audit of a rotating circle family.
//!
//! For `G(zeta, t) = R e^{it} + r zeta` the determinant of the boundary
//! differential is `2 i R r sin(t - psi)`; it vanishes on the fold `t = psi`.

use std::f64::consts::TAU;

use crfolio::family::audit::{boundary_jacobian, closure_intersection_empty, regularity_audit};
use crfolio::family::build_rotating_circles;
use num_complex::Complex64;

fn main() -> crfolio::Result<()> {
    let (big, r) = (1.0, 2.0);
    let fam = build_rotating_circles(big, r, 256)?;

    let mut worst = 0.0f64;
    for j in 0..64 {
        let t = TAU * j as f64 / 64.0;
        for k in 0..64 {
            let psi = TAU * k as f64 / 64.0;
            let expect = Complex64::new(0.0, 2.0 * big * r * (t - psi).sin());
            worst = worst.max((boundary_jacobian(&fam, psi, t) - expect).norm());
        }
    }
    println!("max |J_boundary - 2iRr sin(t - psi)| = {worst:.2e}");

    let audit = regularity_audit(&fam);
    println!(
        "interior rank ok: {}, boundary ranks full/one short/lower: {}/{}/{}",
        audit.interior_rank_ok,
        audit.boundary_rank_histogram.full,
        audit.boundary_rank_histogram.one_short,
        audit.boundary_rank_histogram.lower
    );

    // R < r: every disc contains the origin
    let closure = closure_intersection_empty(&fam)?;
    println!("closed discs share a point: {} (witness {:?})", !closure.empty, closure.witness);
    Ok(())
}
