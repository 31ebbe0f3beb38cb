//! Level curves `G^{-1}(b)` and the Brouwer degree of `G` on the boundary.
//!
//! For rotating circles `G(zeta, t) = e^{it} + 2 zeta`, the level curve over
//! `b = 0` is `zeta(t) = -e^{it}/2`; `b = 2` has two boundary preimages of
//! opposite orientation, so the degree is 0.

use crfolio::family::build_rotating_circles;
use crfolio::topology::BoundaryMap;
use num_complex::Complex64;

fn main() -> crfolio::Result<()> {
    let fam = build_rotating_circles(1.0, 2.0, 256)?;
    let map = BoundaryMap::new(&fam)?;

    let fibers = map.trace(Complex64::new(0.0, 0.0))?;
    let err = fibers[0]
        .samples
        .iter()
        .map(|(z, t)| (z + Complex64::from_polar(0.5, *t)).norm())
        .fold(0.0, f64::max);
    println!("b = 0: {} level curve(s), max |zeta(t) + e^(it)/2| = {err:.2e}", fibers.len());

    for b in [Complex64::new(2.0, 0.0), Complex64::new(-1.2, 1.3), Complex64::new(4.0, 0.0)] {
        let pre = map.preimages(b)?;
        let signs: Vec<&str> = pre.iter().map(|p| if p.det > 0.0 { "+" } else { "-" }).collect();
        let traced = map.trace(b)?;
        let defect = traced.iter().map(|f| f.defect(&fam)).fold(0.0, f64::max);
        println!(
            "b = {b}: degree {}, boundary preimages [{}], {} level curve(s), max |G - b| {defect:.1e}",
            map.degree(b)?,
            signs.join(" "),
            traced.len()
        );
    }
    Ok(())
}
