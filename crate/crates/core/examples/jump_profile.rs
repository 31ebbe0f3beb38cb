//! Jump profile along a path crossing the translated strip with the
//! synthetic field `J = zeta - 0.1`.
//!
//! `Z(b)` is the variation of `arg Theta` along the level curve over `b`;
//! it is only integer-valued when `Theta` is constant along level arcs,
//! which a generic `J` does not provide. The profile shows by how much.

use crfolio::family::build_translated_circles;
use crfolio::jacobian::{synthetic_j, track_zeros};
use crfolio::topology::BoundaryMap;
use crfolio::verify::{jump_profile, subdivide_path};
use num_complex::Complex64;

fn main() -> crfolio::Result<()> {
    let c = Complex64::new;
    let fam = build_translated_circles(1.0, &[c(0.0, 0.0), c(3.0, 0.0)], 256)?;
    let map = BoundaryMap::new(&fam)?;
    let jac = synthetic_j(&fam, move |_| vec![c(-0.1, 0.0), c(1.0, 0.0)]);
    let chain = track_zeros(&jac)?;

    let path = subdivide_path(&[c(1.5, -1.5), c(1.5, 1.5)], 40);
    let p = jump_profile(&jac, &chain, &map, &path)?;
    println!("{:>4} {:>16} {:>10} {:>22}", "k", "b", "Z", "N");
    for k in 0..path.len() {
        let z = p.z[k].map_or("-".to_string(), |z| format!("{z:.4}"));
        let n = p.n[k].map_or("-".to_string(), |n| format!("{n:.4}"));
        println!("{k:>4} {:>16} {z:>10} {n:>22}", format!("{:.2}", path[k]));
    }
    println!(
        "integrality defect {:.3}, total jump {:.3}, max |dN| {:.3e} (bound {:.3e})",
        p.integrality_defect,
        p.total_jump(),
        p.max_n_step,
        p.n_step_bound
    );
    Ok(())
}
