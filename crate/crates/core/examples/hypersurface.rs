//! Discs attached to the unit sphere in C^2.
//!
//! `K_mu` is real at every boundary sample; `|z1|^2` has constant trace on
//! each Hopf disc (so every trace extends) yet is not CR on the sphere.

use crfolio::family::{build_hopf_discs, build_tangent_lines};
use crfolio::function::{BoundaryFunction, FunctionSpec};
use crfolio::hypersurface::{boundary_points, k_mu_reality, tangential_cr_residual, tangential_samples, trace_spread, Surface};
use num_complex::Complex64;

fn main() -> crfolio::Result<()> {
    let hopf = build_hopf_discs(8)?;
    let tangent = build_tangent_lines(2.0, 1.0, 8)?;
    for (name, fam) in [("hopf_discs", &hopf), ("tangent_lines", &tangent)] {
        let surface = Surface::through_boundary(fam);
        let k = k_mu_reality(fam, &surface, 32)?;
        println!(
            "{name:<14} on {}: max |Im K_mu|/|K_mu| = {:.1e} over {:?} samples",
            surface.label(),
            k.worst(),
            k.samples
        );
    }

    let sphere = Surface::default();
    let r = 0.5f64.sqrt();
    let p = [Complex64::new(r, 0.0), Complex64::new(r, 0.0)];
    for name in ["abs_z1_sq", "expr:z1*z2", "expr:z2bar"] {
        let f = BoundaryFunction::from_spec(&FunctionSpec::named(name), 2)?;
        let s = tangential_samples(&f, &sphere, &[p])?[0];
        let pts = boundary_points(&hopf, 16, 16);
        println!(
            "{name:<12} Hopf trace spread {:.1e}  dbar_b f at p = {:.6}  (antisymmetric: {})  max over Hopf boundaries {:.3}",
            trace_spread(&f, &hopf, 64),
            s.d12,
            s.d12 == -s.d21,
            tangential_cr_residual(&f, &sphere, &pts)?
        );
    }
    Ok(())
}
