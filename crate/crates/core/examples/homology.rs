//! Condition (a) (no point common to all closed discs) against condition
//! (iii) (the central cycle `t -> G(0, t)` is homologically nontrivial).
//! The two agree on planar families.

use crfolio::family::{build_rotating_circles, build_translated_circles};
use crfolio::topology::homology_test;
use num_complex::Complex64;

fn main() -> crfolio::Result<()> {
    let families = [
        ("rotating(1, 2)", build_rotating_circles(1.0, 2.0, 128)?),
        ("rotating(2, 1)", build_rotating_circles(2.0, 1.0, 128)?),
        (
            "translated(1, 0 -> 3)",
            build_translated_circles(1.0, &[Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)], 128)?,
        ),
    ];
    for (name, fam) in &families {
        let h = homology_test(fam)?;
        let nonzero = h.central_image_winding.iter().filter(|p| p.winding != 0).count();
        println!(
            "{name:<22} (a) {:<5} (iii) {:<5} agree {:<5} probes {:>3} (nonzero winding at {nonzero}) witness {:?}",
            h.condition_a, h.condition_iii, h.routes_agree, h.probes_used, h.closure.witness
        );
    }
    Ok(())
}
