//! The full verdict pipeline over a handful of (family, function) pairs.

use crfolio::family::{build_hopf_discs, build_rotating_circles, build_tangent_lines, build_translated_circles, DiscFamily};
use crfolio::function::{BoundaryFunction, FunctionSpec};
use crfolio::verify::{run_verdict, VerdictOptions};
use num_complex::Complex64;

fn main() -> crfolio::Result<()> {
    let strip = build_translated_circles(1.0, &[Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)], 128)?;
    let inner = build_rotating_circles(1.0, 2.0, 128)?;
    let tangent = build_tangent_lines(2.0, 1.0, 8)?;
    let hopf = build_hopf_discs(8)?;

    let spec = |name: &str, n: Option<i32>| FunctionSpec {
        name: name.into(),
        n,
        value: None,
    };
    let runs: [(&str, &DiscFamily, FunctionSpec); 6] = [
        ("translated", &strip, spec("z_sq", None)),
        ("translated", &strip, spec("zbar", None)),
        ("translated", &strip, spec("expr:z^3 + 2*z", None)),
        ("rotating(1, 2)", &inner, spec("globevnik_n", Some(2))),
        ("tangent_lines", &tangent, spec("z_sq", None)),
        ("hopf_discs", &hopf, spec("abs_z1_sq", None)),
    ];
    let opts = VerdictOptions::default();
    for (name, fam, fspec) in runs {
        let f = BoundaryFunction::from_spec(&fspec, fam.dim())?;
        let r = run_verdict(&f, fam, &opts)?;
        let e = &r.evidence;
        println!(
            "{name:<15} {:<20} -> {:<34} J_max {:<10} dbar {}",
            f.label(),
            r.verdict.to_string(),
            e.j_max.map_or("-".into(), |v| format!("{v:.2e}")),
            e.dbar_residual.map_or("-".into(), |v| format!("{v:.2e}")),
        );
    }
    Ok(())
}
