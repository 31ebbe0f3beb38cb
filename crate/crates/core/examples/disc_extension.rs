//! Does the boundary trace of `f` extend holomorphically into every disc?
//!
//! On the circle `z = R e^{it} + r zeta` the trace of `z^2 / conj(z)` is a
//! rational function of `zeta` with a single pole at `-(r/R) e^{it}`: it
//! extends when `R < r` and fails when `R > r`. `conj(z)` never extends.

use crfolio::extension::{analyze, moment_test};
use crfolio::family::{build_rotating_circles, build_translated_circles, DiscFamily};
use crfolio::function::{BoundaryFunction, FunctionSpec};
use num_complex::Complex64;

fn report(label: &str, f: &BoundaryFunction, fam: &DiscFamily) -> crfolio::Result<()> {
    let ext = analyze(f, fam)?;
    let worst_rel = ext.nodes().iter().map(|n| n.residual / n.rms).fold(0.0, f64::max);
    let moments = moment_test(f, fam, 3, 256)?;
    println!(
        "{label:<34} residual {:.2e}  relative {worst_rel:.2e}  extends {:<5}  max moment {:.2e}",
        ext.residual(),
        ext.extends(),
        moments.max_moment
    );
    Ok(())
}

fn main() -> crfolio::Result<()> {
    let globevnik = BoundaryFunction::from_spec(
        &FunctionSpec {
            name: "globevnik_n".into(),
            n: Some(2),
            value: None,
        },
        1,
    )?;
    let zbar = BoundaryFunction::from_spec(&FunctionSpec::named("zbar"), 1)?;
    let square = BoundaryFunction::from_spec(&FunctionSpec::named("z_sq"), 1)?;

    let inner = build_rotating_circles(1.0, 2.0, 128)?;
    let outer = build_rotating_circles(2.0, 1.0, 128)?;
    let strip = build_translated_circles(1.0, &[Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)], 128)?;

    report("z^2/conj(z), rotating(1, 2)", &globevnik, &inner)?;
    report("z^2/conj(z), rotating(2, 1)", &globevnik, &outer)?;
    report("conj(z), translated", &zbar, &strip)?;
    report("z^2, translated", &square, &strip)?;
    Ok(())
}
