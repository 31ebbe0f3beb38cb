//! Both sides of the symmetry relation
//!
//! ```text
//! 2 sum_j kappa_j wind(G(C_j), b)  =  (1/pi) var arg J along G^{-1}(b)
//! ```
//!
//! for the synthetic field `J = zeta` (both sides 2 inside the central
//! image) and for the Globevnik field far from the discs (both sides 0).

use crfolio::extension::analyze;
use crfolio::family::build_rotating_circles;
use crfolio::function::{BoundaryFunction, FunctionSpec};
use crfolio::jacobian::{compute_j, synthetic_j, track_zeros, JacobianField};
use crfolio::topology::BoundaryMap;
use crfolio::verify::symmetry_relation;
use num_complex::Complex64;

fn show(label: &str, jac: &JacobianField, map: &BoundaryMap, probes: &[Complex64]) -> crfolio::Result<()> {
    let chain = track_zeros(jac)?;
    for &b in probes {
        let r = symmetry_relation(jac, &chain, map, b)?;
        match r.reason {
            None => println!("{label:<10} b = {b:<12}  lhs {:>8.5}  rhs {:>8.5}  gap {:.1e}", r.lhs, r.rhs, r.abs_gap),
            Some(why) => println!("{label:<10} b = {b:<12}  not admissible: {why}"),
        }
    }
    Ok(())
}

fn main() -> crfolio::Result<()> {
    let fam = build_rotating_circles(1.0, 2.0, 256)?;
    let map = BoundaryMap::new(&fam)?;

    let zeta = synthetic_j(&fam, |_| vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    show("J = zeta", &zeta, &map, &[Complex64::new(0.0, 0.0), Complex64::new(0.3, -0.2)])?;

    let f = BoundaryFunction::from_spec(
        &FunctionSpec {
            name: "globevnik_n".into(),
            n: Some(2),
            value: None,
        },
        1,
    )?;
    let jac = compute_j(&analyze(&f, &fam)?)?;
    show("Globevnik", &jac, &map, &[Complex64::new(3.6, 1.0), Complex64::new(-4.0, 2.5)])?;
    Ok(())
}
