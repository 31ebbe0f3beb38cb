//! The two classical counterexamples, assertion by assertion.

use crfolio::verify::counterexample_suite;

fn main() -> crfolio::Result<()> {
    let report = counterexample_suite(256)?;
    for case in &report.cases {
        println!("{} [{}]", case.name, if case.passed { "ok" } else { "FAILED" });
        for a in &case.assertions {
            println!("    {:<36} {:>12.4e}  {:<32} {}", a.name, a.value, a.requirement, if a.passed { "ok" } else { "no" });
        }
    }
    println!("all passed: {}", report.passed);
    Ok(())
}
