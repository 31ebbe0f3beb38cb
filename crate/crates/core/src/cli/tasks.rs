//! One runner per task; each returns its evidence and CSV dumps.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use super::config::{RunConfig, Task};
use crate::error::{Error, Result};
use crate::extension::{analyze_with, moment_test, ExtensionField, ExtensionOptions, MomentReport};
use crate::family::audit::{regularity_audit_with, AuditOptions, RegularityReport};
use crate::family::{DiscFamily, ParamKind, ParamPoint};
use crate::function::BoundaryFunction;
use crate::hypersurface::{self, KReality, MinorField, Surface};
use crate::jacobian::{compute_j, synthetic_j, theta_field, track_zeros, JacobianField, ThetaCompatibility, ZeroChain};
use crate::topology::{fibers_csv, homology_test, BoundaryMap, FiberOptions, HomologyVerdict};
use crate::verify::{
    certified_homology, counterexample_suite, family_summary, jump_profile, random_regular_values, run_verdict,
    subdivide_path, symmetry_relation, CounterexampleReport, FamilySummary, HomologySummary, JumpProfile,
    SymmetryReport, Verdict, VerdictOptions, Thresholds,
};

/// What a task produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub evidence: Value,
    pub verdict: Option<Verdict>,
    /// `(file name, contents)` pairs.
    pub csv: Vec<(String, String)>,
    /// Set when the task ran but its expectations failed.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(evidence: impl Serialize) -> Result<Self> {
        Ok(Self {
            evidence: serde_json::to_value(evidence).map_err(|e| Error::Domain(format!("serializing evidence: {e}")))?,
            verdict: None,
            csv: Vec::new(),
            failure: None,
        })
    }

    fn with_csv(mut self, name: &str, contents: String) -> Self {
        self.csv.push((name.to_string(), contents));
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            return 1;
        }
        self.verdict.as_ref().map_or(0, Verdict::exit_code)
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.task == Task::Counterexamples {
        return counterexamples(cfg);
    }
    let family = cfg.build_family()?;
    let f = cfg.build_function(family.dim())?;
    match cfg.task {
        Task::Extend => extend(cfg, &family, required(f.as_ref())?),
        Task::Jacobian => jacobian(cfg, &family, f.as_ref()),
        Task::Fibers => fibers(cfg, &family),
        Task::Homology => homology(cfg, &family),
        Task::Symmetry => symmetry(cfg, &family, f.as_ref()),
        Task::Jumps => jumps(cfg, &family, f.as_ref()),
        Task::Verdict => verdict(cfg, &family, required(f.as_ref())?),
        Task::Hypersurface => hypersurface_task(cfg, &family, f.as_ref()),
        Task::Counterexamples => unreachable!(),
    }
}

fn required(f: Option<&BoundaryFunction>) -> Result<&BoundaryFunction> {
    f.ok_or_else(|| Error::Config("function: required for this task".into()))
}

fn extension_options(cfg: &RunConfig) -> ExtensionOptions {
    ExtensionOptions {
        circle_points: cfg.grid.circle_points,
        rel_tolerance: cfg.tolerances.extension,
        ..ExtensionOptions::default()
    }
}

fn fiber_options(cfg: &RunConfig) -> FiberOptions {
    FiberOptions {
        steps: cfg.grid.fiber_steps,
        corrector_tolerance: cfg.tolerances.corrector,
        seed_grid: cfg.grid.seed_grid,
    }
}

fn audit(cfg: &RunConfig, family: &DiscFamily) -> RegularityReport {
    let opts = AuditOptions {
        raster_cells: cfg.grid.raster_cells,
        rank_threshold: cfg.tolerances.rank,
        ..AuditOptions::default()
    };
    regularity_audit_with(family, &opts)
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

/// Explicit probes, or seeded random regular values.
fn probes(cfg: &RunConfig, map: &BoundaryMap) -> Vec<Complex64> {
    if cfg.probes.points.is_empty() {
        random_regular_values(map, &mut rng(cfg), cfg.probes.random)
    } else {
        cfg.probes.points.clone()
    }
}

/// `J` from the config's synthetic coefficients or from the extension of `f`.
fn build_j(cfg: &RunConfig, family: &DiscFamily, f: Option<&BoundaryFunction>) -> Result<(JacobianField, Option<ExtensionField>)> {
    if let Some(j) = &cfg.jacobian {
        let coeffs = j.synthetic.clone();
        return Ok((synthetic_j(family, move |_| coeffs.clone()), None));
    }
    let ext = analyze_with(required(f)?, family, extension_options(cfg))?;
    if let Some(e) = ext.first_failure() {
        return Err(e);
    }
    Ok((compute_j(&ext)?, Some(ext)))
}

fn error_text(e: &Error) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ExtendEvidence {
    family: FamilySummary,
    function: String,
    smoothness: String,
    circle_points: usize,
    residual: f64,
    rel_tolerance: f64,
    extends: bool,
    worst_node: usize,
    boundary_mismatch: f64,
    failure: Option<String>,
    moments: Option<MomentReport>,
    moment_error: Option<String>,
}

fn extend(cfg: &RunConfig, family: &DiscFamily, f: &BoundaryFunction) -> Result<Outcome> {
    let ext = analyze_with(f, family, extension_options(cfg))?;
    let worst_node = ext
        .nodes()
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1.residual / a.1.rms.max(f64::MIN_POSITIVE)).total_cmp(&(b.1.residual / b.1.rms.max(f64::MIN_POSITIVE))))
        .map_or(0, |(j, _)| j);
    let moments = moment_test(f, family, cfg.moments, cfg.grid.circle_points);
    let mut csv = String::from("node,residual,rms\n");
    for (j, n) in ext.nodes().iter().enumerate() {
        csv.push_str(&format!("{j},{:.12e},{:.12e}\n", n.residual, n.rms));
    }
    let ev = ExtendEvidence {
        family: family_summary(family),
        function: f.label().to_string(),
        smoothness: f.smoothness_note.clone(),
        circle_points: cfg.grid.circle_points,
        residual: ext.residual(),
        rel_tolerance: cfg.tolerances.extension,
        extends: ext.extends(),
        worst_node,
        boundary_mismatch: ext.boundary_mismatch(),
        failure: ext.first_failure().map(|e| error_text(&e)),
        moment_error: moments.as_ref().err().map(error_text),
        moments: moments.ok(),
    };
    Ok(Outcome::new(ev)?.with_csv("extension.csv", csv))
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BranchSummary {
    id: usize,
    kappa: f64,
    closed: bool,
    central: bool,
    samples: usize,
}

#[derive(Serialize)]
struct SumRule {
    samples: usize,
    agreements: usize,
    max_gap: f64,
}

#[derive(Serialize)]
struct PlanarJacobianEvidence {
    source: &'static str,
    j_max: f64,
    max_abs: f64,
    scale: f64,
    term_scale: f64,
    degenerate: bool,
    branches: Vec<BranchSummary>,
    central_cycle_present: Option<bool>,
    zero_disc_nodes: Vec<usize>,
    collisions: Vec<usize>,
    chain_error: Option<String>,
    sum_rule: Option<SumRule>,
    theta: Option<ThetaCompatibility>,
    theta_error: Option<String>,
}

#[derive(Serialize)]
struct MinorEvidence {
    j_max: f64,
    max_abs: [f64; 4],
    term_scale: f64,
    center_max: f64,
    degenerate: bool,
    implication_holds: bool,
}

fn minor_evidence(m: &MinorField, threshold: f64) -> MinorEvidence {
    MinorEvidence {
        j_max: m.j_max(),
        max_abs: [m.max_abs(0), m.max_abs(1), m.max_abs(2), m.max_abs(3)],
        term_scale: m.term_scale,
        center_max: m.center_max(),
        degenerate: m.j_max() < threshold,
        implication_holds: hypersurface::minor_implication_check(m),
    }
}

fn minors_csv(m: &MinorField) -> String {
    let mut out = String::from("node,re_zeta,im_zeta,abs_m0,abs_m1,abs_m2,abs_m3\n");
    for s in &m.samples {
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            s.node,
            s.zeta.re,
            s.zeta.im,
            s.minors[0].norm(),
            s.minors[1].norm(),
            s.minors[2].norm(),
            s.minors[3].norm()
        ));
    }
    out
}

fn random_param(family: &DiscFamily, rng: &mut ChaCha8Rng) -> ParamPoint {
    match family.params().kind {
        ParamKind::Circle => ParamPoint::scalar(TAU * rng.gen::<f64>()),
        _ => ParamPoint::scalar(rng.gen::<f64>()),
    }
}

/// `sum kappa_j` against the boundary winding of `J(., t)` at random `t`.
pub fn sum_rule(jac: &JacobianField, samples: usize, seed: u64) -> Result<(usize, usize, f64)> {
    let family = jac.family();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agreements = 0;
    let mut max_gap = 0.0f64;
    for _ in 0..samples {
        let p = random_param(family, &mut rng);
        let total: f64 = jac.roots_at(&p)?.iter().map(|z| z.kappa).sum();
        let winding = JacobianField::boundary_winding(&jac.coeffs_at(&p)?)?;
        let gap = (total - winding).abs();
        max_gap = max_gap.max(gap);
        if gap == 0.0 {
            agreements += 1;
        }
    }
    Ok((samples, agreements, max_gap))
}

fn jacobian(cfg: &RunConfig, family: &DiscFamily, f: Option<&BoundaryFunction>) -> Result<Outcome> {
    if family.dim() == 2 {
        let ext = analyze_with(required(f)?, family, extension_options(cfg))?;
        if let Some(e) = ext.first_failure() {
            return Err(e);
        }
        let m = hypersurface::compute_minors(&ext, cfg.grid.angles)?;
        let csv = minors_csv(&m);
        return Ok(Outcome::new(minor_evidence(&m, cfg.tolerances.j_degenerate))?.with_csv("minors.csv", csv));
    }
    let (jac, _) = build_j(cfg, family, f)?;
    let degenerate = jac.j_max() < cfg.tolerances.j_degenerate;
    let mut ev = PlanarJacobianEvidence {
        source: if cfg.jacobian.is_some() { "synthetic" } else { "extension" },
        j_max: jac.j_max(),
        max_abs: jac.max_abs(),
        scale: jac.scale(),
        term_scale: jac.term_scale(),
        degenerate,
        branches: Vec::new(),
        central_cycle_present: None,
        zero_disc_nodes: Vec::new(),
        collisions: Vec::new(),
        chain_error: None,
        sum_rule: None,
        theta: None,
        theta_error: None,
    };
    let mut out_csv = Vec::new();
    if !degenerate {
        match track_zeros(&jac) {
            Ok(chain) => {
                fill_chain(&mut ev, &chain);
                out_csv.push(("zeros.csv".to_string(), chain.to_csv()));
                out_csv.push(("zero_discs.csv".to_string(), chain.zero_disc_csv()));
            }
            Err(e) => ev.chain_error = Some(error_text(&e)),
        }
        let (samples, agreements, max_gap) = sum_rule(&jac, 50, cfg.seed)?;
        ev.sum_rule = Some(SumRule {
            samples,
            agreements,
            max_gap,
        });
        match theta_field(&jac, cfg.grid.circle_points.min(256)).and_then(|t| t.compatibility(&jac, f, 97)) {
            Ok(c) => ev.theta = Some(c),
            Err(e) => ev.theta_error = Some(error_text(&e)),
        }
    }
    let mut out = Outcome::new(ev)?;
    out.csv = out_csv;
    Ok(out)
}

fn branch_summaries(chain: &ZeroChain) -> Vec<BranchSummary> {
    chain
        .branches
        .iter()
        .map(|b| BranchSummary {
            id: b.id,
            kappa: b.kappa(),
            closed: b.closed,
            central: b.is_central(),
            samples: b.nodes.len(),
        })
        .collect()
}

fn fill_chain(ev: &mut PlanarJacobianEvidence, chain: &ZeroChain) {
    ev.branches = branch_summaries(chain);
    ev.central_cycle_present = Some(chain.central_cycle_present);
    ev.zero_disc_nodes = chain.zero_disc_nodes.clone();
    ev.collisions = chain.collisions.clone();
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FiberSummary {
    closed: bool,
    hit_boundary: bool,
    samples: usize,
    defect: f64,
}

#[derive(Serialize)]
struct ProbeFibers {
    b: Complex64,
    regular: bool,
    critical_distance: f64,
    degree: Option<i64>,
    degree_error: Option<String>,
    preimages: usize,
    fibers: Vec<FiberSummary>,
    trace_error: Option<String>,
}

#[derive(Serialize)]
struct FibersEvidence {
    family: FamilySummary,
    mesh: f64,
    probes: Vec<ProbeFibers>,
    max_defect: f64,
}

fn fibers(cfg: &RunConfig, family: &DiscFamily) -> Result<Outcome> {
    let map = BoundaryMap::with_options(family, fiber_options(cfg))?;
    let mut csv = Vec::new();
    let mut rows = Vec::new();
    let mut max_defect = 0.0f64;
    for (k, b) in probes(cfg, &map).into_iter().enumerate() {
        let degree = map.degree(b);
        let preimages = map.preimages(b).map_or(0, |p| p.len());
        let traced = map.trace(b);
        let mut summaries = Vec::new();
        if let Ok(fibers) = &traced {
            for fib in fibers {
                let defect = fib.defect(family);
                max_defect = max_defect.max(defect);
                summaries.push(FiberSummary {
                    closed: fib.closed,
                    hit_boundary: fib.hit_boundary,
                    samples: fib.samples.len(),
                    defect,
                });
            }
            if !fibers.is_empty() {
                csv.push((format!("fibers_{k:03}.csv"), fibers_csv(fibers)));
            }
        }
        rows.push(ProbeFibers {
            b,
            regular: map.is_regular(b),
            critical_distance: map.critical_distance(b),
            degree: degree.as_ref().ok().copied(),
            degree_error: degree.err().map(|e| error_text(&e)),
            preimages,
            fibers: summaries,
            trace_error: traced.err().map(|e| error_text(&e)),
        });
    }
    let ev = FibersEvidence {
        family: family_summary(family),
        mesh: map.mesh(),
        probes: rows,
        max_defect,
    };
    let mut out = Outcome::new(ev)?;
    out.csv = csv;
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct HomologyEvidence {
    family: FamilySummary,
    regularity: RegularityReport,
    computed: Option<HomologyVerdict>,
    certified: Option<HomologySummary>,
}

fn homology(cfg: &RunConfig, family: &DiscFamily) -> Result<Outcome> {
    let (computed, certified) = if family.dim() == 1 {
        (Some(homology_test(family)?), None)
    } else {
        let c = certified_homology(family)
            .ok_or_else(|| Error::Domain("no homology flags are known for this two-dimensional family".into()))?;
        (None, Some(c))
    };
    Outcome::new(HomologyEvidence {
        family: family_summary(family),
        regularity: audit(cfg, family),
        computed,
        certified,
    })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SymmetryEvidence {
    source: &'static str,
    j_max: f64,
    branches: Vec<BranchSummary>,
    reports: Vec<SymmetryReport>,
    admissible: usize,
    max_abs_gap: Option<f64>,
}

fn symmetry(cfg: &RunConfig, family: &DiscFamily, f: Option<&BoundaryFunction>) -> Result<Outcome> {
    let (jac, _) = build_j(cfg, family, f)?;
    let chain = track_zeros(&jac)?;
    let map = BoundaryMap::with_options(family, fiber_options(cfg))?;
    let reports = probes(cfg, &map)
        .into_iter()
        .map(|b| symmetry_relation(&jac, &chain, &map, b))
        .collect::<Result<Vec<_>>>()?;
    let admissible: Vec<&SymmetryReport> = reports.iter().filter(|r| r.admissible).collect();
    let ev = SymmetryEvidence {
        source: if cfg.jacobian.is_some() { "synthetic" } else { "extension" },
        j_max: jac.j_max(),
        branches: branch_summaries(&chain),
        admissible: admissible.len(),
        max_abs_gap: admissible.iter().map(|r| r.abs_gap).reduce(f64::max),
        reports,
    };
    Ok(Outcome::new(ev)?.with_csv("zeros.csv", chain.to_csv()))
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct JumpsEvidence {
    source: &'static str,
    branches: Vec<BranchSummary>,
    defined_probes: usize,
    integrality_defect: f64,
    total_jump: f64,
    endpoint_z: [Option<f64>; 2],
    max_n_step: f64,
    n_step_bound: f64,
    profile: JumpProfile,
}

fn jumps(cfg: &RunConfig, family: &DiscFamily, f: Option<&BoundaryFunction>) -> Result<Outcome> {
    let path_cfg = cfg.path.as_ref().ok_or_else(|| Error::Config("path: required for jumps".into()))?;
    let (jac, _) = build_j(cfg, family, f)?;
    let chain = track_zeros(&jac)?;
    let map = BoundaryMap::with_options(family, fiber_options(cfg))?;
    let path = subdivide_path(&path_cfg.vertices, path_cfg.samples);
    let profile = jump_profile(&jac, &chain, &map, &path)?;
    let csv = profile.to_csv();
    let ev = JumpsEvidence {
        source: if cfg.jacobian.is_some() { "synthetic" } else { "extension" },
        branches: branch_summaries(&chain),
        defined_probes: profile.z.iter().flatten().count(),
        integrality_defect: profile.integrality_defect,
        total_jump: profile.total_jump(),
        endpoint_z: [profile.z[0], *profile.z.last().expect("path has samples")],
        max_n_step: profile.max_n_step,
        n_step_bound: profile.n_step_bound,
        profile,
    };
    Ok(Outcome::new(ev)?.with_csv("jumps.csv", csv))
}

// ---------------------------------------------------------------------------

pub fn verdict_options(cfg: &RunConfig) -> VerdictOptions {
    VerdictOptions {
        seed: cfg.seed,
        fiber_probes: cfg.probes.random,
        symmetry_probes: cfg.probes.symmetry,
        extension: extension_options(cfg),
        surface: cfg.surface,
        thresholds: Thresholds {
            j_degenerate: cfg.tolerances.j_degenerate,
            fiber_spread: cfg.tolerances.fiber_spread,
            dbar: cfg.tolerances.dbar,
        },
        ..VerdictOptions::default()
    }
}

fn verdict(cfg: &RunConfig, family: &DiscFamily, f: &BoundaryFunction) -> Result<Outcome> {
    let report = run_verdict(f, family, &verdict_options(cfg))?;
    let mut out = Outcome::new(&report.evidence)?;
    out.verdict = Some(report.verdict);
    Ok(out)
}

// ---------------------------------------------------------------------------

fn counterexamples(cfg: &RunConfig) -> Result<Outcome> {
    let report: CounterexampleReport = counterexample_suite(cfg.grid.resolution.unwrap_or(256))?;
    let failures = report.failures();
    let mut out = Outcome::new(&report)?;
    if !failures.is_empty() {
        out.failure = Some(format!("counterexample assertions failed: {}", failures.join("; ")));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct HypersurfaceEvidence {
    family: FamilySummary,
    surface: Surface,
    k_reality: KReality,
    function: Option<String>,
    trace_spread: Option<f64>,
    tangential_residual: Option<f64>,
    tangential_error: Option<String>,
    extension_residual: Option<f64>,
    minors: Option<MinorEvidence>,
    minor_error: Option<String>,
}

fn hypersurface_task(cfg: &RunConfig, family: &DiscFamily, f: Option<&BoundaryFunction>) -> Result<Outcome> {
    let surface = cfg.surface.unwrap_or_else(|| Surface::through_boundary(family));
    let k_reality = hypersurface::k_mu_reality(family, &surface, cfg.grid.angles)?;
    let mut ev = HypersurfaceEvidence {
        family: family_summary(family),
        surface,
        k_reality,
        function: None,
        trace_spread: None,
        tangential_residual: None,
        tangential_error: None,
        extension_residual: None,
        minors: None,
        minor_error: None,
    };
    let mut csv = Vec::new();
    if let Some(f) = f {
        ev.function = Some(f.label().to_string());
        ev.trace_spread = Some(hypersurface::trace_spread(f, family, 4 * cfg.grid.angles));
        let points = hypersurface::boundary_points(family, (family.node_count() / 64).max(1), cfg.grid.angles);
        match hypersurface::tangential_cr_residual(f, &surface, &points) {
            Ok(r) => ev.tangential_residual = Some(r),
            Err(e) => ev.tangential_error = Some(error_text(&e)),
        }
        let ext = analyze_with(f, family, extension_options(cfg))?;
        ev.extension_residual = Some(ext.residual());
        if ext.extends() {
            match hypersurface::compute_minors(&ext, cfg.grid.angles) {
                Ok(m) => {
                    csv.push(("minors.csv".to_string(), minors_csv(&m)));
                    ev.minors = Some(minor_evidence(&m, cfg.tolerances.j_degenerate));
                }
                Err(e) => ev.minor_error = Some(error_text(&e)),
            }
        }
    }
    let mut out = Outcome::new(ev)?;
    out.csv = csv;
    Ok(out)
}
