//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs at the full grids (circle N = 256, resolution 256).

use std::f64::consts::TAU;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crfolio::cli::tasks::sum_rule;
use crfolio::cli::{build_report, RunConfig, Task};
use crfolio::extension::{analyze_with, ExtensionOptions};
use crfolio::family::audit::{boundary_jacobian, closure_intersection_empty};
use crfolio::family::{
    build_custom, build_hopf_discs, build_rotating_circles, build_tangent_lines, build_translated_circles, DiscFamily,
    FamilySpec, ParamKind,
};
use crfolio::function::{BoundaryFunction, FunctionSpec};
use crfolio::hypersurface::{self, Surface};
use crfolio::jacobian::{compute_j, synthetic_j, track_zeros};
use crfolio::topology::BoundaryMap;
use crfolio::verify::{
    jump_profile, random_regular_values, run_verdict, subdivide_path, symmetry_relation, Verdict, VerdictOptions,
};

const N: usize = 256;
const RES: usize = 256;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn func(name: &str, dim: usize) -> BoundaryFunction {
    BoundaryFunction::from_spec(&FunctionSpec::named(name), dim).expect("catalog function")
}

fn globevnik() -> BoundaryFunction {
    BoundaryFunction::from_spec(
        &FunctionSpec {
            name: "globevnik_n".into(),
            n: Some(2),
            value: None,
        },
        1,
    )
    .expect("catalog function")
}

fn ext_opts() -> ExtensionOptions {
    ExtensionOptions {
        circle_points: N,
        ..ExtensionOptions::default()
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn translated() -> DiscFamily {
    build_translated_circles(1.0, &[c(0.0, 0.0), c(3.0, 0.0)], RES).expect("translated circles")
}

// circles of radius 1 + 0.15 cos t around 1.5 e^{it}, with a quadratic bend
fn custom_family() -> DiscFamily {
    let table = (0..RES)
        .map(|j| {
            let t = TAU * j as f64 / RES as f64;
            vec![vec![
                Complex64::from_polar(1.5, t),
                c(1.0 + 0.15 * t.cos(), 0.0),
                Complex64::from_polar(0.2, 2.0 * t),
            ]]
        })
        .collect();
    build_custom(table, ParamKind::Circle).expect("custom family")
}

// ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for (big, r) in [(1.0, 2.0), (2.0, 1.0), (1.5, 0.7)] {
        let fam = build_rotating_circles(big, r, RES).map_err(e2s)?;
        let scale = 2.0 * big * r;
        for j in 0..RES {
            let t = TAU * j as f64 / RES as f64;
            for k in 0..N {
                let psi = TAU * k as f64 / N as f64;
                let expect = c(0.0, scale * (t - psi).sin());
                worst = worst.max((boundary_jacobian(&fam, psi, t) - expect).norm() / scale);
            }
        }
    }
    ensure(worst < 1e-8, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("max relative error {worst:.2e} over 3 radius pairs"))
}

fn criterion_2() -> Outcome {
    let f = globevnik();
    let fam = build_rotating_circles(1.0, 2.0, RES).map_err(e2s)?;
    let ext = analyze_with(&f, &fam, ext_opts()).map_err(e2s)?;
    let residual = ext.residual();
    ensure(residual < 1e-10, || format!("extension residual {residual:.3e}"))?;
    let closure = closure_intersection_empty(&fam).map_err(e2s)?;
    let witness = closure.witness.ok_or("no common point found")?;
    ensure(!closure.empty && witness.norm() < 1e-2, || format!("witness {witness}"))?;
    let jac = compute_j(&ext).map_err(e2s)?;
    ensure(jac.j_max() > 0.1, || format!("J_max {:.3e}", jac.j_max()))?;
    let report = run_verdict(&f, &fam, &VerdictOptions { extension: ext_opts(), ..VerdictOptions::default() })
        .map_err(e2s)?;
    let dbar = report.evidence.dbar_residual.ok_or("no dbar residual")?;
    ensure(dbar > 0.1, || format!("dbar residual {dbar:.3e}"))?;
    ensure(report.verdict == Verdict::PreconditionFails("condition_a".into()), || {
        format!("verdict {}", report.verdict)
    })?;
    let swapped = build_rotating_circles(2.0, 1.0, RES).map_err(e2s)?;
    let ext2 = analyze_with(&f, &swapped, ext_opts()).map_err(e2s)?;
    let rel = ext2.nodes().iter().map(|n| n.residual / n.rms).fold(0.0, f64::max);
    ensure(rel > 0.1, || format!("swapped relative residual {rel:.3e}"))?;
    Ok(format!(
        "residual {residual:.1e}, witness |{:.1e}|, J_max {:.3}, dbar {dbar:.3}, {}, swapped residual {rel:.3}",
        witness.norm(),
        jac.j_max(),
        report.verdict
    ))
}

fn degree_probes(fam: &DiscFamily, seed: u64, count: usize) -> Result<Vec<(Complex64, i64)>, String> {
    let map = BoundaryMap::new(fam).map_err(e2s)?;
    let r = fam.image_radius() * 1.1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count {
        attempts += 1;
        let b = c(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if !map.is_regular(b) {
            continue;
        }
        if let Ok(d) = map.degree(b) {
            out.push((b, d));
        }
    }
    ensure(out.len() == count, || format!("only {} admissible probes", out.len()))?;
    Ok(out)
}

fn criterion_3() -> Outcome {
    let families = [
        ("rotating_circles(1,2)", build_rotating_circles(1.0, 2.0, RES).map_err(e2s)?),
        ("translated_circles(1, 0->3)", translated()),
        ("custom", custom_family()),
    ];
    for (name, fam) in &families {
        for (b, d) in degree_probes(fam, 3, 20)? {
            ensure(d == 0, || format!("{name}: degree {d} at {b}"))?;
        }
    }
    let map = BoundaryMap::new(&families[0].1).map_err(e2s)?;
    let pre = map.preimages(c(2.0, 0.0)).map_err(e2s)?;
    ensure(pre.len() == 2 && pre[0].det * pre[1].det < 0.0, || format!("b = 2 preimages {pre:?}"))?;
    Ok("degree 0 at 20 probes on 3 families; b = 2 has 2 preimages of opposite sign".into())
}

fn criterion_4() -> Outcome {
    let fam = build_rotating_circles(1.0, 2.0, RES).map_err(e2s)?;
    let map = BoundaryMap::new(&fam).map_err(e2s)?;
    let ext = analyze_with(&globevnik(), &fam, ext_opts()).map_err(e2s)?;
    let jac = compute_j(&ext).map_err(e2s)?;
    let chain = track_zeros(&jac).map_err(e2s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0f64; 3];
    let mut used = 0;
    while used < 20 {
        let b = Complex64::from_polar(rng.gen_range(3.5..6.0), TAU * rng.gen::<f64>());
        let r = symmetry_relation(&jac, &chain, &map, b).map_err(e2s)?;
        ensure(r.admissible, || format!("probe {b} inadmissible: {:?}", r.reason))?;
        worst = [worst[0].max(r.lhs.abs()), worst[1].max(r.rhs.abs()), worst[2].max(r.abs_gap)];
        used += 1;
    }
    ensure(worst.iter().all(|w| *w < 0.05), || format!("max |lhs|, |rhs|, |gap| = {worst:?}"))?;

    let synth = synthetic_j(&fam, |_| vec![c(0.0, 0.0), c(1.0, 0.0)]);
    let schain = track_zeros(&synth).map_err(e2s)?;
    let mut synth_probes = vec![c(0.0, 0.0)];
    for _ in 0..4 {
        synth_probes.push(Complex64::from_polar(0.5 * rng.gen::<f64>(), TAU * rng.gen::<f64>()));
    }
    for b in synth_probes {
        let r = symmetry_relation(&synth, &schain, &map, b).map_err(e2s)?;
        ensure(r.admissible && (r.lhs - 2.0).abs() < 0.05 && (r.rhs - 2.0).abs() < 0.05, || {
            format!("synthetic at {b}: {r:?}")
        })?;
    }
    Ok(format!(
        "Globevnik max |lhs| {:.1e}, |rhs| {:.1e}, |gap| {:.1e}; synthetic lhs = rhs = 2 at 5 probes",
        worst[0], worst[1], worst[2]
    ))
}

fn criterion_5() -> Outcome {
    let fam = build_rotating_circles(1.0, 2.0, RES).map_err(e2s)?;
    let mut notes = Vec::new();
    for n in [2, 3] {
        let f = BoundaryFunction::from_spec(
            &FunctionSpec {
                name: "globevnik_n".into(),
                n: Some(n),
                value: None,
            },
            1,
        )
        .map_err(e2s)?;
        let ext = analyze_with(&f, &fam, ext_opts()).map_err(e2s)?;
        let jac = compute_j(&ext).map_err(e2s)?;
        ensure(jac.j_max() > 1e-8, || format!("n = {n}: J vanishes"))?;
        let chain = track_zeros(&jac).map_err(e2s)?;
        let central = chain.branches.iter().find(|b| b.is_central());
        ensure(chain.central_cycle_present && central.is_some_and(|b| b.kappa() >= 1.0), || {
            format!("n = {n}: no central branch with kappa >= 1")
        })?;
        let (samples, agreements, gap) = sum_rule(&jac, 50, 5).map_err(e2s)?;
        ensure(agreements == samples, || format!("n = {n}: sum rule {agreements}/{samples}, max gap {gap}"))?;
        notes.push(format!("n = {n}: central kappa {}, sum rule {agreements}/{samples}", central.unwrap().kappa()));
    }
    Ok(notes.join("; "))
}

fn criterion_6() -> Outcome {
    let fam = build_rotating_circles(1.0, 2.0, RES).map_err(e2s)?;
    let map = BoundaryMap::new(&fam).map_err(e2s)?;
    let fibers = map.trace(c(0.0, 0.0)).map_err(e2s)?;
    ensure(fibers.len() == 1 && fibers[0].closed, || format!("{} fibers at b = 0", fibers.len()))?;
    let span = fibers[0].samples.last().unwrap().1 - fibers[0].samples[0].1;
    ensure((span - TAU).abs() < 1e-9, || format!("fiber spans {span}"))?;
    let err = fibers[0]
        .samples
        .iter()
        .map(|(z, t)| (z + Complex64::from_polar(0.5, *t)).norm())
        .fold(0.0, f64::max);
    ensure(err < 1e-8, || format!("b = 0 fiber error {err:.3e}"))?;

    let suite = [
        build_rotating_circles(1.0, 2.0, RES).map_err(e2s)?,
        build_rotating_circles(2.0, 1.0, RES).map_err(e2s)?,
        translated(),
    ];
    let mut worst = 0.0f64;
    let mut traced = 0;
    for fam in &suite {
        let map = BoundaryMap::new(fam).map_err(e2s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for b in random_regular_values(&map, &mut rng, 20) {
            for f in map.trace(b).map_err(e2s)? {
                worst = worst.max(f.defect(fam));
                traced += 1;
            }
        }
    }
    ensure(worst < 1e-8, || format!("max |G - b| {worst:.3e}"))?;
    Ok(format!("b = 0 error {err:.1e}; {traced} fibers with max |G - b| {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let families = [
        ("translated_circles", translated()),
        ("rotating_circles(2,1)", build_rotating_circles(2.0, 1.0, RES).map_err(e2s)?),
    ];
    let functions = [func("z_sq", 1), func("expr:z^3 + 2*z", 1), func("const", 1)];
    let opts = VerdictOptions {
        extension: ext_opts(),
        ..VerdictOptions::default()
    };
    for (name, fam) in &families {
        for f in &functions {
            let r = run_verdict(f, fam, &opts).map_err(e2s)?;
            let e = &r.evidence;
            let (j, spread, dbar) = (e.j_max.unwrap_or(f64::NAN), e.fiber_spread.unwrap_or(f64::NAN), e.dbar_residual.unwrap_or(f64::NAN));
            ensure(
                r.verdict == Verdict::HolomorphicConfirmed && j < 1e-8 && spread < 1e-6 && dbar < 1e-6,
                || format!("{name}, {}: {} (J_max {j:.2e}, spread {spread:.2e}, dbar {dbar:.2e})", f.label(), r.verdict),
            )?;
        }
    }
    Ok("HOLOMORPHIC_CONFIRMED with J_max, spread and dbar all small in 6 runs".into())
}

fn criterion_8() -> Outcome {
    let fam = translated();
    let map = BoundaryMap::new(&fam).map_err(e2s)?;
    let jac = synthetic_j(&fam, |_| vec![c(-0.1, 0.0), c(1.0, 0.0)]);
    let chain = track_zeros(&jac).map_err(e2s)?;
    // probes on the fold or the end-circle images are inadmissible, so the
    // path is sampled densely enough to leave at least 50 admissible ones
    let path = subdivide_path(&[c(1.5, -1.5), c(1.5, 1.5)], 80);
    let p = jump_profile(&jac, &chain, &map, &path).map_err(e2s)?;
    let defined = p.z.iter().flatten().count();
    let ends = (p.z[0], *p.z.last().unwrap());
    let summary = format!(
        "{defined}/{} probes defined, integrality defect {:.3}, endpoint Z {:?}, max |dN| {:.2e} (bound {:.2e})",
        p.z.len(),
        p.integrality_defect,
        ends,
        p.max_n_step,
        p.n_step_bound
    );
    ensure(defined >= 50, || summary.clone())?;
    ensure(p.integrality_defect < 0.05, || summary.clone())?;
    ensure(matches!(ends, (Some(a), Some(b)) if a.abs() < 0.05 && b.abs() < 0.05), || summary.clone())?;
    ensure(p.max_n_step < p.n_step_bound, || summary.clone())?;
    Ok(summary)
}

fn criterion_9() -> Outcome {
    let hopf = build_hopf_discs(8).map_err(e2s)?;
    let tl = build_tangent_lines(2.0, 1.0, 8).map_err(e2s)?;
    let mut worst_k = 0.0f64;
    for fam in [&hopf, &tl] {
        let k = hypersurface::k_mu_reality(fam, &Surface::through_boundary(fam), 32).map_err(e2s)?;
        ensure(k.samples[0] > 0 && k.samples[1] > 0, || "no K_mu samples".into())?;
        worst_k = worst_k.max(k.worst());
    }
    ensure(worst_k < 1e-8, || format!("K_mu relative Im {worst_k:.3e}"))?;
    let f = func("abs_z1_sq", 2);
    let spread = hypersurface::trace_spread(&f, &hopf, 64);
    ensure(spread < 1e-12, || format!("Hopf trace spread {spread:.3e}"))?;
    let r = 0.5f64.sqrt();
    let sphere = Surface::default();
    let at = hypersurface::tangential_samples(&f, &sphere, &[[c(r, 0.0), c(r, 0.0)]]).map_err(e2s)?;
    let d = at[0].d12.norm();
    ensure((d - 0.5).abs() < 1e-4, || format!("|dbar_b f| = {d}"))?;
    let points = hypersurface::boundary_points(&hopf, 7, 16);
    for g in [func("abs_z1_sq", 2), func("expr:z1bar*z2 + z2bar^2", 2)] {
        for s in hypersurface::tangential_samples(&g, &sphere, &points).map_err(e2s)? {
            ensure(s.d12 == -s.d21, || format!("antisymmetry broken at {:?}", s.point))?;
        }
    }
    Ok(format!(
        "K_mu relative Im {worst_k:.1e}; trace spread {spread:.1e}; |dbar_b f| {d:.6}; antisymmetry exact at {} points",
        points.len()
    ))
}

// ---------------------------------------------------------------------------

fn config(task: Task, family: FamilySpec, function: Option<FunctionSpec>) -> RunConfig {
    let mut cfg = RunConfig::new(task, Some(family), function);
    cfg.seed = 10;
    cfg
}

fn rotating(big: f64, r: f64) -> FamilySpec {
    FamilySpec::RotatingCircles {
        big,
        r,
        resolution: RES,
    }
}

fn translated_spec() -> FamilySpec {
    FamilySpec::TranslatedCircles {
        rho: 1.0,
        center_path: vec![c(0.0, 0.0), c(3.0, 0.0)],
        resolution: RES,
    }
}

fn builtin_suite() -> Vec<RunConfig> {
    let glob = FunctionSpec {
        name: "globevnik_n".into(),
        n: Some(2),
        value: None,
    };
    let sq = FunctionSpec::named("z_sq");
    let mut fibers = config(Task::Fibers, rotating(1.0, 2.0), None);
    fibers.probes.points = vec![c(0.0, 0.0), c(2.0, 0.0), c(-1.2, 1.3), c(4.0, 0.0)];
    vec![
        config(Task::Verdict, rotating(1.0, 2.0), Some(glob.clone())),
        config(Task::Verdict, translated_spec(), Some(sq.clone())),
        config(Task::Verdict, rotating(2.0, 1.0), Some(sq.clone())),
        config(
            Task::Verdict,
            FamilySpec::TangentLines {
                ball_radius: 2.0,
                inner_radius: 1.0,
                resolution: 8,
            },
            Some(sq),
        ),
        config(Task::Verdict, FamilySpec::HopfDiscs { resolution: 8 }, Some(FunctionSpec::named("abs_z1_sq"))),
        config(Task::Jacobian, rotating(1.0, 2.0), Some(glob)),
        config(Task::Homology, translated_spec(), None),
        config(Task::Homology, rotating(2.0, 1.0), None),
        fibers,
    ]
}

/// Verdict plus every integer quantity a task reports.
fn invariants(task: Task, report: &Value) -> Value {
    let ev = &report["evidence"];
    let mut out = serde_json::json!({ "verdict": report.get("verdict"), "error": report.get("error").map(|e| &e["kind"]) });
    match task {
        Task::Verdict => {
            out["homology"] = serde_json::json!([ev["homology"]["condition_a"], ev["homology"]["condition_iii"]]);
            out["extends"] = ev["extension"]["extends"].clone();
            out["fibers_used"] = ev["fibers_used"].clone();
        }
        Task::Jacobian => {
            let mut kappas: Vec<String> = ev["branches"]
                .as_array()
                .into_iter()
                .flatten()
                .map(|b| format!("{}:{}:{}", b["kappa"], b["central"], b["closed"]))
                .collect();
            kappas.sort();
            out["branches"] = serde_json::json!(kappas);
            out["sum_rule"] = serde_json::json!([ev["sum_rule"]["samples"], ev["sum_rule"]["agreements"]]);
            out["zero_disc_nodes"] = serde_json::json!(ev["zero_disc_nodes"].as_array().map_or(0, Vec::len));
        }
        Task::Homology => {
            out["flags"] = serde_json::json!([
                ev["computed"]["condition_a"],
                ev["computed"]["condition_iii"],
                ev["computed"]["routes_agree"],
                ev["computed"]["certified_by_probe"]
            ]);
        }
        Task::Fibers => {
            out["probes"] = Value::Array(
                ev["probes"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|p| serde_json::json!([p["degree"], p["preimages"], p["fibers"].as_array().map_or(0, Vec::len)]))
                    .collect(),
            );
        }
        _ => {}
    }
    out
}

fn criterion_10() -> Outcome {
    let mut compared = 0;
    for cfg in builtin_suite() {
        let (a, _, code_a) = build_report(&cfg);
        let (b, _, code_b) = build_report(&cfg);
        ensure(a.deterministic_part() == b.deterministic_part() && code_a == code_b, || {
            format!("{} report differs between runs", cfg.task.name())
        })?;
        ensure(a.error.is_none(), || format!("{} failed: {:?}", cfg.task.name(), a.error))?;
        let fine = cfg.refined(2);
        let (f, _, code_f) = build_report(&fine);
        let base = invariants(cfg.task, &serde_json::to_value(&a).map_err(e2s)?);
        let doubled = invariants(cfg.task, &serde_json::to_value(&f).map_err(e2s)?);
        ensure(base == doubled && code_a == code_f, || {
            format!("{} changes under grid doubling: {base} vs {doubled}", cfg.task.name())
        })?;
        compared += 1;
    }
    Ok(format!("{compared} configs byte-identical on rerun and stable under grid doubling"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "boundary Jacobian of rotating circles", criterion_1),
        (2, "Globevnik counterexample", criterion_2),
        (3, "Brouwer degree", criterion_3),
        (4, "symmetry relation", criterion_4),
        (5, "zero tracking and sum rule", criterion_5),
        (6, "fiber tracing", criterion_6),
        (7, "degeneracy equivalence", criterion_7),
        (8, "planar jump profile", criterion_8),
        (9, "hypersurface layer", criterion_9),
        (10, "determinism and grid stability", criterion_10),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
