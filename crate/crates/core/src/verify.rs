//! Theorem-level checks: the symmetry relation between zero chains of `J`
//! and level curves of `G`, jump counting along paths for interval
//! families, the verdict pipeline, and the two classical counterexamples.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{analyze_with, ExtensionOptions};
use crate::family::audit::{closure_intersection_empty, regularity_audit, RegularityReport};
use crate::family::{build_hopf_discs, build_rotating_circles, DiscFamily, ParamKind, ParamPoint};
use crate::function::{BoundaryFunction, FunctionSpec};
use crate::hypersurface::{self, Surface};
use crate::jacobian::{compute_j, theta_field, track_zeros, JacobianField, ZeroChain};
use crate::numerics::{closed_winding, poly};
use crate::topology::{homology_test, project_to_fiber, BoundaryMap, Fiber, HomologyVerdict};

const TAU: f64 = 2.0 * PI;

/// Degeneracy threshold on `J_max`.
pub const J_DEGENERATE: f64 = 1e-8;
/// Threshold on the spread of `F` along level curves of `G`.
pub const FIBER_SPREAD_TOLERANCE: f64 = 1e-6;
/// Threshold on the finite-difference `dbar f`.
pub const DBAR_TOLERANCE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// argument variation along level curves

/// Total change of `arg J` along a fiber, refining between samples by
/// re-projection whenever a step turns by more than a quarter revolution.
fn arg_variation_along(jac: &JacobianField, fiber: &Fiber) -> Result<f64> {
    let family = jac.family();
    let eval = |z: Complex64, t: f64| -> Result<Complex64> {
        let v = jac.eval(z, &ParamPoint::scalar(t))?;
        if v.norm() == 0.0 {
            return Err(Error::Domain(format!("J vanishes on the level curve at t = {t}")));
        }
        Ok(v)
    };
    let mut total = 0.0;
    let mut prev = eval(fiber.samples[0].0, fiber.samples[0].1)?;
    for w in fiber.samples.windows(2) {
        let ((z0, t0), (z1, t1)) = (w[0], w[1]);
        let next = eval(z1, t1)?;
        let step = (next / prev).arg();
        if step.abs() <= PI / 2.0 {
            total += step;
        } else {
            let mut pieces = 2usize;
            loop {
                let mut acc = 0.0;
                let mut last = prev;
                let mut ok = true;
                for k in 1..=pieces {
                    let s = k as f64 / pieces as f64;
                    let (z, t) = (z0 + (z1 - z0) * s, t0 + (t1 - t0) * s);
                    let z = if k == pieces {
                        z1
                    } else {
                        project_to_fiber(family, fiber.b, z, t).unwrap_or(z)
                    };
                    let v = if z.norm() > 1.0 { eval(z / z.norm(), t)? } else { eval(z, t)? };
                    let d = (v / last).arg();
                    if d.abs() > PI / 2.0 {
                        ok = false;
                        break;
                    }
                    acc += d;
                    last = v;
                }
                if ok {
                    total += acc;
                    break;
                }
                pieces *= 2;
                if pieces > 1 << 12 {
                    return Err(Error::Domain(format!(
                        "arg J turns too fast along the level curve near t = {t0}"
                    )));
                }
            }
        }
        prev = next;
    }
    Ok(total)
}

/// Distance in `zeta` from the level-curve samples to the tracked roots at
/// the nearest parameter node.
fn chain_clearance(chain: &ZeroChain, family: &DiscFamily, fibers: &[Fiber]) -> (f64, f64) {
    let count = family.node_count();
    let dt = family.params().spacing();
    let mut per_node: Vec<Vec<Complex64>> = vec![Vec::new(); count];
    let mut motion = 0.0f64;
    for b in &chain.branches {
        for (i, n) in b.nodes.iter().enumerate() {
            per_node[n % count].push(b.roots[i]);
            if i > 0 {
                motion = motion.max((b.roots[i] - b.roots[i - 1]).norm());
            }
        }
    }
    let mut step = 0.0f64;
    let mut clearance = f64::INFINITY;
    let periodic = family.params().kind == ParamKind::Circle;
    for f in fibers {
        for (k, (z, t)) in f.samples.iter().enumerate() {
            if k > 0 {
                step = step.max((z - f.samples[k - 1].0).norm());
            }
            let j = (t / dt).round() as i64;
            let j = if periodic {
                j.rem_euclid(count as i64) as usize
            } else {
                j.clamp(0, count as i64 - 1) as usize
            };
            if chain.zero_disc_nodes.contains(&j) {
                clearance = 0.0;
            }
            for r in &per_node[j] {
                clearance = clearance.min((z - r).norm());
            }
        }
    }
    (clearance, motion.max(step))
}

/// Image `G(zeta_j(t), t)` of a zero branch, with roots interpolated
/// linearly at eight points per parameter step.
fn densified_image(family: &DiscFamily, roots: &[Complex64], t: &[f64], closed: bool) -> Vec<Complex64> {
    const PER_STEP: usize = 8;
    let n = roots.len();
    let segments = if closed { n } else { n.saturating_sub(1) };
    let period = family.params().period();
    let mut out = Vec::with_capacity(segments * PER_STEP + 1);
    for i in 0..segments {
        let (z0, t0) = (roots[i], t[i]);
        let (z1, mut t1) = (roots[(i + 1) % n], t[(i + 1) % n]);
        if i + 1 == n {
            // closing step wraps across whole periods
            t1 += period * ((t0 - t1) / period).ceil();
            if t1 <= t0 {
                t1 += period;
            }
        }
        for k in 0..PER_STEP {
            let s = k as f64 / PER_STEP as f64;
            out.push(family.planar_jet(z0 + (z1 - z0) * s, t0 + (t1 - t0) * s).0);
        }
    }
    if !closed && n > 0 {
        out.push(family.planar_jet(roots[n - 1], t[n - 1]).0);
    }
    out
}

// ---------------------------------------------------------------------------
// symmetry relation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchWinding {
    pub branch: usize,
    pub kappa: f64,
    pub winding: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub b: Complex64,
    /// `2 sum_j kappa_j wind(G(C_j), b)`.
    pub lhs: f64,
    /// `(1/pi)` times the variation of `arg J` along `G^{-1}(b)`.
    pub rhs: f64,
    pub abs_gap: f64,
    pub admissible: bool,
    pub reason: Option<String>,
    pub fibers: usize,
    pub branch_windings: Vec<BranchWinding>,
}

impl SymmetryReport {
    fn inadmissible(b: Complex64, reason: String) -> Self {
        Self {
            b,
            lhs: f64::NAN,
            rhs: f64::NAN,
            abs_gap: f64::NAN,
            admissible: false,
            reason: Some(reason),
            fibers: 0,
            branch_windings: Vec::new(),
        }
    }
}

/// Both sides of the symmetry relation at the value `b` (circle families).
pub fn symmetry_relation(jac: &JacobianField, chain: &ZeroChain, map: &BoundaryMap, b: Complex64) -> Result<SymmetryReport> {
    let family = jac.family();
    if family.params().kind != ParamKind::Circle {
        return Err(Error::Config("the symmetry relation needs closed zero chains; use jump_profile on interval families".into()));
    }
    if jac.max_abs() <= J_DEGENERATE * jac.term_scale() {
        return Err(Error::Domain("J vanishes identically; Theta is undefined and the relation is not invoked".into()));
    }
    if !chain.zero_disc_nodes.is_empty() {
        return Ok(SymmetryReport::inadmissible(b, "J vanishes on whole discs".into()));
    }
    let fibers = match map.trace(b) {
        Ok(f) => f,
        Err(e) => return Ok(SymmetryReport::inadmissible(b, e.to_string())),
    };
    let (clearance, mesh) = chain_clearance(chain, family, &fibers);
    if clearance < 5.0 * mesh {
        return Ok(SymmetryReport::inadmissible(
            b,
            format!("level curve passes within {clearance:.3e} of a zero of J (5 mesh = {:.3e})", 5.0 * mesh),
        ));
    }

    let mut lhs = 0.0;
    let mut branch_windings = Vec::new();
    for br in &chain.branches {
        if !br.closed {
            return Ok(SymmetryReport::inadmissible(b, format!("zero branch {} does not close", br.id)));
        }
        let images = densified_image(family, &br.roots, &br.t, true);
        let step = (0..images.len())
            .map(|i| (images[(i + 1) % images.len()] - images[i]).norm())
            .fold(0.0, f64::max);
        let winding = match closed_winding(&images, b, step.max(1e-300)) {
            Ok(w) => w,
            Err(e) => return Ok(SymmetryReport::inadmissible(b, format!("branch {}: {e}", br.id))),
        };
        lhs += 2.0 * br.kappa() * winding as f64;
        branch_windings.push(BranchWinding {
            branch: br.id,
            kappa: br.kappa(),
            winding,
        });
    }
    let mut rhs = 0.0;
    for f in &fibers {
        rhs += arg_variation_along(jac, f)? / PI;
    }
    Ok(SymmetryReport {
        b,
        lhs,
        rhs,
        abs_gap: (lhs - rhs).abs(),
        admissible: true,
        reason: None,
        fibers: fibers.len(),
        branch_windings,
    })
}

// ---------------------------------------------------------------------------
// jump profile

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub segment: usize,
    pub branch: usize,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpProfile {
    pub path: Vec<Complex64>,
    /// `(1/(pi i)) sum_j kappa_j int_{G(C_j)} dz / (z - b)`.
    pub chi: Vec<Complex64>,
    /// Variation of `arg Theta` along the level curve over `2 pi`; `None`
    /// where `b` is not a regular value or the level curve meets a zero of `J`.
    pub z: Vec<Option<f64>>,
    pub n: Vec<Option<Complex64>>,
    pub jump_events: Vec<JumpEvent>,
    /// `max |Z - round(Z)|` over defined probes.
    pub integrality_defect: f64,
    /// `max |N(b_{k+1}) - N(b_k)|` over adjacent defined probes.
    pub max_n_step: f64,
    /// `10 * path mesh * field scale`.
    pub n_step_bound: f64,
}

impl JumpProfile {
    /// Signed sum of the jump contributions.
    pub fn total_jump(&self) -> f64 {
        self.jump_events.iter().map(|e| e.contribution).sum()
    }

    /// CSV with columns `k,re_b,im_b,re_chi,im_chi,z,re_n,im_n`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("k,re_b,im_b,re_chi,im_chi,z,re_n,im_n\n");
        for k in 0..self.path.len() {
            let z = self.z[k].map(|v| format!("{v:.12e}")).unwrap_or_default();
            let (nr, ni) = self.n[k]
                .map(|v| (format!("{:.12e}", v.re), format!("{:.12e}", v.im)))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{k},{:.12e},{:.12e},{:.12e},{:.12e},{z},{nr},{ni}",
                self.path[k].re, self.path[k].im, self.chi[k].re, self.chi[k].im
            );
        }
        out
    }
}

/// Uniform subdivision of a polyline into `samples` points.
pub fn subdivide_path(vertices: &[Complex64], samples: usize) -> Vec<Complex64> {
    if vertices.len() < 2 || samples < 2 {
        return vertices.to_vec();
    }
    let lengths: Vec<f64> = vertices.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let total: f64 = lengths.iter().sum();
    (0..samples)
        .map(|k| {
            let mut s = total * k as f64 / (samples - 1) as f64;
            for (i, l) in lengths.iter().enumerate() {
                if s <= *l || i == lengths.len() - 1 {
                    let u = if *l > 0.0 { (s / l).min(1.0) } else { 0.0 };
                    return vertices[i] + (vertices[i + 1] - vertices[i]) * u;
                }
                s -= l;
            }
            *vertices.last().unwrap()
        })
        .collect()
}

fn segment_crossing(p0: Complex64, p1: Complex64, q0: Complex64, q1: Complex64) -> Option<f64> {
    let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
    let (d, e) = (p1 - p0, q1 - q0);
    let denom = cross(d, e);
    if denom.abs() <= 1e-14 * d.norm() * e.norm() || e.norm() == 0.0 {
        return None;
    }
    let s = cross(q0 - p0, e) / denom;
    let u = cross(q0 - p0, d) / denom;
    ((0.0..1.0).contains(&s) && (0.0..1.0).contains(&u)).then_some(denom.signum())
}

/// `chi`, `Z` and `N` along the probes of `path` for an interval family.
pub fn jump_profile(jac: &JacobianField, chain: &ZeroChain, map: &BoundaryMap, path: &[Complex64]) -> Result<JumpProfile> {
    let family = jac.family();
    if family.params().kind != ParamKind::Interval {
        return Err(Error::Config("jump profiles are defined for interval families".into()));
    }
    if path.len() < 2 {
        return Err(Error::Config("path: needs at least two probes".into()));
    }
    let images: Vec<(usize, f64, Vec<Complex64>)> = chain
        .branches
        .iter()
        .map(|b| {
            (
                b.id,
                b.kappa(),
                densified_image(family, &b.roots, &b.t, false),
            )
        })
        .collect();
    let scale = map.image_scale();
    for (k, b) in path.iter().enumerate() {
        for (_, _, img) in &images {
            if img.iter().any(|z| (z - b).norm() < 1e-12 * scale) {
                return Err(Error::PathHitsCriticalImage { segment: k.saturating_sub(1) });
            }
        }
    }

    let rows: Vec<(Complex64, Option<f64>)> = path
        .par_iter()
        .map(|&b| -> Result<(Complex64, Option<f64>)> {
            let mut chi = Complex64::new(0.0, 0.0);
            for (_, kappa, img) in &images {
                let mut log = Complex64::new(0.0, 0.0);
                for w in img.windows(2) {
                    log += ((w[1] - b) / (w[0] - b)).ln();
                }
                chi += log * (*kappa / (PI * Complex64::i()));
            }
            let z = match map.trace(b) {
                Ok(fibers) => {
                    let (clearance, mesh) = chain_clearance(chain, family, &fibers);
                    if clearance < 5.0 * mesh {
                        None
                    } else {
                        let mut total = 0.0;
                        for f in &fibers {
                            total += arg_variation_along(jac, f)?;
                        }
                        // arg Theta = 2 arg J
                        Some(2.0 * total / TAU)
                    }
                }
                Err(Error::Domain(_)) => None,
                Err(e) => return Err(e),
            };
            Ok((chi, z))
        })
        .collect::<Result<Vec<_>>>()?;

    let chi: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
    let z: Vec<Option<f64>> = rows.iter().map(|r| r.1).collect();
    let n: Vec<Option<Complex64>> = chi.iter().zip(&z).map(|(c, z)| z.map(|z| c - z)).collect();

    let mut jump_events = Vec::new();
    for k in 0..path.len() - 1 {
        for (id, kappa, img) in &images {
            // net crossing count, so a path sliding along an image that
            // folds back on itself reports nothing spurious
            let net: f64 = img
                .windows(2)
                .filter_map(|w| segment_crossing(path[k], path[k + 1], w[0], w[1]))
                .sum();
            if net != 0.0 {
                jump_events.push(JumpEvent {
                    segment: k,
                    branch: *id,
                    contribution: net * kappa,
                });
            }
        }
    }
    let integrality_defect = z.iter().flatten().map(|v| (v - v.round()).abs()).fold(0.0, f64::max);
    let mut max_n_step = 0.0f64;
    let mut mesh = 0.0f64;
    for k in 0..path.len() - 1 {
        mesh = mesh.max((path[k + 1] - path[k]).norm());
        if let (Some(a), Some(b)) = (n[k], n[k + 1]) {
            max_n_step = max_n_step.max((b - a).norm());
        }
    }
    let field_scale = chi.iter().map(|c| c.norm()).fold(1.0, f64::max);
    Ok(JumpProfile {
        path: path.to_vec(),
        chi,
        z,
        n,
        jump_events,
        integrality_defect,
        max_n_step,
        n_step_bound: 10.0 * mesh * field_scale,
    })
}

// ---------------------------------------------------------------------------
// verdict pipeline

/// Outcome of [`run_verdict`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    HolomorphicConfirmed,
    CrConfirmed,
    ConditionStarFails,
    PreconditionFails(String),
    NondegenerateWitness(String),
    Inconclusive(String),
}

impl Verdict {
    /// Process exit code of the verdict.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::NondegenerateWitness(_) => 3,
            Verdict::Inconclusive(_) => 4,
            _ => 0,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::HolomorphicConfirmed => write!(f, "HOLOMORPHIC_CONFIRMED"),
            Verdict::CrConfirmed => write!(f, "CR_CONFIRMED"),
            Verdict::ConditionStarFails => write!(f, "CONDITION_STAR_FAILS"),
            Verdict::PreconditionFails(w) => write!(f, "PRECONDITION_FAILS({w})"),
            Verdict::NondegenerateWitness(w) => write!(f, "NONDEGENERATE_WITNESS({w})"),
            Verdict::Inconclusive(w) => write!(f, "INCONCLUSIVE({w})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictOptions {
    pub seed: u64,
    /// Level curves sampled for the spread of `F`.
    pub fiber_probes: usize,
    /// Values `b` at which the symmetry relation is evaluated.
    pub symmetry_probes: usize,
    pub extension: ExtensionOptions,
    /// Anchor stride of the Theta compatibility check.
    pub theta_stride: usize,
    /// Hypersurface for the tangential operator (two-dimensional families);
    /// a sphere through the boundary is used when absent.
    pub surface: Option<Surface>,
    pub thresholds: Thresholds,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            fiber_probes: 20,
            symmetry_probes: 4,
            extension: ExtensionOptions::default(),
            theta_stride: 97,
            surface: None,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub builder: String,
    pub dim: usize,
    pub param_kind: ParamKind,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSummary {
    pub residual: f64,
    pub extends: bool,
    pub rel_tolerance: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomologySummary {
    pub condition_a: bool,
    pub condition_iii: bool,
    /// `computed` for planar families, `certified` for the builtin
    /// two-dimensional ones.
    pub source: String,
    pub detail: Option<HomologyVerdict>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub j_degenerate: f64,
    pub fiber_spread: f64,
    pub dbar: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            j_degenerate: J_DEGENERATE,
            fiber_spread: FIBER_SPREAD_TOLERANCE,
            dbar: DBAR_TOLERANCE,
        }
    }
}

/// Every quantity the verdict depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEvidence {
    pub family: FamilySummary,
    pub function: String,
    pub regularity: RegularityReport,
    pub regular: bool,
    pub extension: ExtensionSummary,
    pub homology: Option<HomologySummary>,
    /// `max |J| / term_scale` (planar) or the normalized largest minor.
    pub j_max: Option<f64>,
    pub j_max_abs: Option<f64>,
    pub j_scale: Option<f64>,
    pub j_error: Option<String>,
    pub theta_residual: Option<f64>,
    pub fiber_spread: Option<f64>,
    pub fibers_used: usize,
    pub dbar_residual: Option<f64>,
    pub symmetry: Vec<SymmetryReport>,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub evidence: VerdictEvidence,
    pub verdict: Verdict,
}

/// The verdict as a function of the evidence alone.
///
/// Regularity is recorded but does not gate: the builtin two-dimensional
/// families drop to rank 3 at their disc centres.
pub fn decide(e: &VerdictEvidence) -> Verdict {
    if !e.extension.extends {
        return Verdict::ConditionStarFails;
    }
    match &e.homology {
        Some(h) if !h.condition_a => return Verdict::PreconditionFails("condition_a".into()),
        Some(h) if !h.condition_iii => return Verdict::PreconditionFails("condition_iii".into()),
        None => return Verdict::Inconclusive("homology test unavailable".into()),
        _ => {}
    }
    let Some(j_max) = e.j_max else {
        return Verdict::Inconclusive(format!("J not computed: {}", e.j_error.as_deref().unwrap_or("unknown")));
    };
    let t = e.thresholds;
    let spread_small = e.fiber_spread.map(|s| s < t.fiber_spread);
    let dbar_small = e.dbar_residual.map(|d| d < t.dbar);
    let planar = e.family.dim == 1;
    let degenerate_indicators = match (planar, spread_small, dbar_small) {
        (true, Some(a), Some(b)) => Some(a && b),
        (false, _, Some(b)) => Some(b),
        _ => None,
    };
    let agree = match (planar, spread_small, dbar_small) {
        (true, Some(a), Some(b)) => a == b,
        _ => true,
    };
    if j_max < t.j_degenerate {
        return match degenerate_indicators {
            Some(true) if planar => Verdict::HolomorphicConfirmed,
            Some(true) => Verdict::CrConfirmed,
            Some(false) => Verdict::Inconclusive("J vanishes but F is not constant on level curves or dbar f is not small".into()),
            None => Verdict::Inconclusive("degeneracy indicators unavailable".into()),
        };
    }
    if !agree || degenerate_indicators == Some(true) {
        return Verdict::Inconclusive(format!("J_max = {j_max:.3e} but the degeneracy indicators disagree"));
    }
    Verdict::NondegenerateWitness(format!(
        "all preconditions hold and J_max = {j_max:.3e} exceeds {:.0e}",
        t.j_degenerate
    ))
}

pub fn family_summary(family: &DiscFamily) -> FamilySummary {
    FamilySummary {
        builder: family.provenance().builder.clone(),
        dim: family.dim(),
        param_kind: family.params().kind,
        nodes: family.node_count(),
    }
}

/// Hand-certified homological flags of the builtin two-dimensional families.
pub fn certified_homology(family: &DiscFamily) -> Option<HomologySummary> {
    let (a, iii) = match family.provenance().builder.as_str() {
        "tangent_lines" => (true, true),
        "hopf_discs" => (false, false),
        _ => return None,
    };
    Some(HomologySummary {
        condition_a: a,
        condition_iii: iii,
        source: "certified".into(),
        detail: None,
    })
}

/// Sample points of `Omega = G(b Sigma)` for the finite-difference `dbar`.
fn omega_points(family: &DiscFamily, nodes: usize, angles: usize) -> Vec<Vec<Complex64>> {
    let stride = (family.node_count() / nodes.max(1)).max(1);
    (0..family.node_count())
        .step_by(stride)
        .flat_map(|j| {
            let g = family.coeffs_at(&family.node(j));
            (0..angles)
                .map(|k| {
                    let z = Complex64::from_polar(1.0, TAU * k as f64 / angles as f64);
                    g.iter().map(|c| poly::horner(c, z)).collect()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Level curves through random interior points, for the spread of `F`.
pub fn random_regular_values(map: &BoundaryMap, rng: &mut ChaCha8Rng, count: usize) -> Vec<Complex64> {
    let family = map.family();
    let periodic = family.params().kind == ParamKind::Circle;
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count {
        attempts += 1;
        let r = 0.9 * rng.gen::<f64>().sqrt();
        let z = Complex64::from_polar(r, TAU * rng.gen::<f64>());
        let t = if periodic { TAU * rng.gen::<f64>() } else { rng.gen::<f64>() };
        let b = family.planar_jet(z, t).0;
        if map.is_regular(b) {
            out.push(b);
        }
    }
    out
}

/// The full pipeline for `f` on `family`.
pub fn run_verdict(f: &BoundaryFunction, family: &DiscFamily, opts: &VerdictOptions) -> Result<VerdictReport> {
    let regularity = regularity_audit(family);
    let regular = regularity.interior_rank_ok && regularity.critical_on_boundary;
    let ext = analyze_with(f, family, opts.extension)?;
    let extension = ExtensionSummary {
        residual: ext.residual(),
        extends: ext.extends(),
        rel_tolerance: opts.extension.rel_tolerance,
        failure: ext.first_failure().map(|e| e.to_string()),
    };
    let mut ev = VerdictEvidence {
        family: family_summary(family),
        function: f.label().to_string(),
        regularity,
        regular,
        extension,
        homology: None,
        j_max: None,
        j_max_abs: None,
        j_scale: None,
        j_error: None,
        theta_residual: None,
        fiber_spread: None,
        fibers_used: 0,
        dbar_residual: None,
        symmetry: Vec::new(),
        thresholds: opts.thresholds,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    if family.dim() == 1 {
        let h = homology_test(family)?;
        ev.homology = Some(HomologySummary {
            condition_a: h.condition_a,
            condition_iii: h.condition_iii,
            source: "computed".into(),
            detail: Some(h),
        });
        ev.dbar_residual = Some(
            omega_points(family, 32, 32)
                .iter()
                .map(|p| f.dbar_fd(p, 1e-5 * p[0].norm().max(1.0))[0].norm())
                .fold(0.0, f64::max),
        );
        if ev.extension.extends {
            match compute_j(&ext) {
                Ok(jac) => {
                    ev.j_max = Some(jac.j_max());
                    ev.j_max_abs = Some(jac.max_abs());
                    ev.j_scale = Some(jac.scale());
                    let map = BoundaryMap::new(family)?;
                    let probes = random_regular_values(&map, &mut rng, opts.fiber_probes);
                    let spreads = probes
                        .par_iter()
                        .map(|b| -> Result<(f64, usize)> {
                            let fibers = map.trace(*b)?;
                            let mut worst = 0.0f64;
                            for fib in &fibers {
                                let stride = (fib.samples.len() / 64).max(1);
                                let (z0, t0) = fib.samples[0];
                                let f0 = ext.eval(z0, &ParamPoint::scalar(t0))?;
                                for (z, t) in fib.samples.iter().step_by(stride) {
                                    let zz = if z.norm() > 1.0 { z / z.norm() } else { *z };
                                    worst = worst.max((ext.eval(zz, &ParamPoint::scalar(*t))? - f0).norm());
                                }
                            }
                            Ok((worst, fibers.len()))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    ev.fiber_spread = Some(spreads.iter().map(|s| s.0).fold(0.0, f64::max));
                    ev.fibers_used = spreads.iter().map(|s| s.1).sum();
                    if jac.j_max() >= opts.thresholds.j_degenerate {
                        if let Ok(theta) = theta_field(&jac, 128) {
                            ev.theta_residual = theta.compatibility(&jac, Some(f), opts.theta_stride).ok().map(|c| c.residual);
                        }
                        if family.params().kind == ParamKind::Circle {
                            if let Ok(chain) = track_zeros(&jac) {
                                let mut probes = Vec::new();
                                let mut attempts = 0;
                                while probes.len() < opts.symmetry_probes && attempts < 200 {
                                    attempts += 1;
                                    let cand = random_regular_values(&map, &mut rng, 1);
                                    probes.extend(cand);
                                }
                                for b in probes {
                                    if let Ok(r) = symmetry_relation(&jac, &chain, &map, b) {
                                        ev.symmetry.push(r);
                                    }
                                }
                            }
                        }
                    }
                }
                Err(e) => ev.j_error = Some(e.to_string()),
            }
        }
    } else {
        ev.homology = certified_homology(family);
        let surface = opts.surface.unwrap_or_else(|| Surface::through_boundary(family));
        let points: Vec<[Complex64; 2]> = hypersurface::boundary_points(family, (family.node_count() / 64).max(1), 16);
        ev.dbar_residual = hypersurface::tangential_cr_residual(f, &surface, &points).ok();
        if ev.extension.extends {
            match hypersurface::compute_minors(&ext, 16) {
                Ok(m) => {
                    ev.j_max = Some(m.j_max());
                    ev.j_max_abs = Some((0..4).map(|k| m.max_abs(k)).fold(0.0, f64::max));
                    ev.j_scale = Some(m.term_scale);
                }
                Err(e) => ev.j_error = Some(e.to_string()),
            }
        }
    }
    let verdict = decide(&ev);
    Ok(VerdictReport { evidence: ev, verdict })
}

// ---------------------------------------------------------------------------
// counterexamples

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub requirement: String,
    pub passed: bool,
}

fn assertion(name: &str, value: f64, requirement: &str, passed: bool) -> Assertion {
    Assertion {
        name: name.into(),
        value,
        requirement: requirement.into(),
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleCase {
    pub name: String,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub cases: Vec<CounterexampleCase>,
    pub passed: bool,
}

impl CounterexampleReport {
    pub fn failures(&self) -> Vec<String> {
        self.cases
            .iter()
            .flat_map(|c| {
                c.assertions
                    .iter()
                    .filter(|a| !a.passed)
                    .map(move |a| format!("{}: {}", c.name, a.name))
            })
            .collect()
    }
}

fn case(name: &str, assertions: Vec<Assertion>) -> CounterexampleCase {
    CounterexampleCase {
        name: name.into(),
        passed: assertions.iter().all(|a| a.passed),
        assertions,
    }
}

/// Rotating circles with `f = z^2 / conj(z)` (both radius orders) and the
/// Hopf discs with `f = |z1|^2`.
pub fn counterexample_suite(resolution: usize) -> Result<CounterexampleReport> {
    let globevnik = BoundaryFunction::from_spec(
        &FunctionSpec {
            name: "globevnik_n".into(),
            n: Some(2),
            value: None,
        },
        1,
    )?;

    let fam = build_rotating_circles(1.0, 2.0, resolution)?;
    let ext = analyze_with(&globevnik, &fam, ExtensionOptions::default())?;
    let closure = closure_intersection_empty(&fam)?;
    let jac = compute_j(&ext)?;
    let dbar = omega_points(&fam, 32, 32)
        .iter()
        .map(|p| globevnik.dbar_fd(p, 1e-5 * p[0].norm().max(1.0))[0].norm())
        .fold(f64::INFINITY, f64::min);
    let rotating = case(
        "rotating_circles(R=1, r=2), f = z^2/conj(z)",
        vec![
            assertion("extension residual", ext.residual(), "< 1e-10", ext.residual() < 1e-10),
            assertion(
                "discs share a point",
                closure.surviving_cells as f64,
                "condition (a) fails",
                !closure.empty,
            ),
            assertion("J_max", jac.j_max(), "> 0.1", jac.j_max() > 0.1),
            assertion("min |dbar f| on Omega", dbar, "> 0.1", dbar > 0.1),
        ],
    );

    let swapped = build_rotating_circles(2.0, 1.0, resolution)?;
    let ext = analyze_with(&globevnik, &swapped, ExtensionOptions::default())?;
    let rel = ext.nodes().iter().map(|n| n.residual / n.rms).fold(0.0, f64::max);
    let swapped_case = case(
        "rotating_circles(R=2, r=1), f = z^2/conj(z)",
        vec![assertion("relative extension residual", rel, "> 0.1 (pole inside the discs)", rel > 0.1)],
    );

    let hopf = build_hopf_discs(8)?;
    let abs = BoundaryFunction::from_spec(&FunctionSpec::named("abs_z1_sq"), 2)?;
    let spread = hypersurface::trace_spread(&abs, &hopf, 64);
    let center = (0..hopf.node_count())
        .map(|j| hopf.eval_raw(Complex64::new(0.0, 0.0), &hopf.node(j)).iter().map(|v| v.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let r = 0.5f64.sqrt();
    let p = [Complex64::new(r, 0.0), Complex64::new(r, 0.0)];
    let tangential = hypersurface::tangential_samples(&abs, &Surface::default(), &[p])?;
    let d = tangential[0].d12.norm();
    let antisym = (tangential[0].d12 + tangential[0].d21).norm();
    let hopf_case = case(
        "hopf_discs, f = |z1|^2",
        vec![
            assertion("boundary trace spread", spread, "< 1e-12 (constant traces extend)", spread < 1e-12),
            assertion("max |G(0, t)|", center, "= 0 (common point)", center == 0.0),
            assertion("|dbar_b f| at (1/sqrt2, 1/sqrt2)", d, "0.5 +- 1e-4", (d - 0.5).abs() < 1e-4),
            assertion("antisymmetry defect", antisym, "= 0", antisym == 0.0),
        ],
    );

    let cases = vec![rotating, swapped_case, hopf_case];
    Ok(CounterexampleReport {
        passed: cases.iter().all(|c| c.passed),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::build_translated_circles;
    use crate::jacobian::synthetic_j;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn synthetic_symmetry_at_center() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        let jac = synthetic_j(&fam, |_| vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let chain = track_zeros(&jac).unwrap();
        let map = BoundaryMap::new(&fam).unwrap();
        let r = symmetry_relation(&jac, &chain, &map, c(0.0, 0.0)).unwrap();
        assert!(r.admissible, "{r:?}");
        assert_eq!(r.lhs, 2.0);
        assert!((r.rhs - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn symmetry_far_away() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        let f = BoundaryFunction::from_spec(
            &FunctionSpec {
                name: "globevnik_n".into(),
                n: Some(2),
                value: None,
            },
            1,
        )
        .unwrap();
        let ext = analyze_with(&f, &fam, ExtensionOptions::default()).unwrap();
        let jac = compute_j(&ext).unwrap();
        let chain = track_zeros(&jac).unwrap();
        let map = BoundaryMap::new(&fam).unwrap();
        let r = symmetry_relation(&jac, &chain, &map, c(3.6, 1.0)).unwrap();
        assert!(r.admissible, "{r:?}");
        assert!(r.abs_gap < 0.05 && r.lhs.abs() < 0.05 && r.rhs.abs() < 0.05, "{r:?}");
    }

    #[test]
    fn verdict_examples() {
        let tr = build_translated_circles(1.0, &[c(0.0, 0.0), c(3.0, 0.0)], 64).unwrap();
        let opts = VerdictOptions::default();
        let sq = BoundaryFunction::from_spec(&FunctionSpec::named("z_sq"), 1).unwrap();
        let r = run_verdict(&sq, &tr, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::HolomorphicConfirmed, "{:?}", r.evidence);
        let zb = BoundaryFunction::from_spec(&FunctionSpec::named("zbar"), 1).unwrap();
        let r = run_verdict(&zb, &tr, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::ConditionStarFails);
        assert!((r.evidence.extension.residual - 1.0).abs() < 1e-9);
        assert_eq!(decide(&r.evidence), r.verdict);
    }

    #[test]
    fn verdict_display_and_codes() {
        let v = Verdict::PreconditionFails("condition_a".into());
        assert_eq!(v.to_string(), "PRECONDITION_FAILS(condition_a)");
        assert_eq!(v.exit_code(), 0);
        assert_eq!(Verdict::Inconclusive("x".into()).exit_code(), 4);
        assert_eq!(Verdict::NondegenerateWitness("x".into()).exit_code(), 3);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"kind":"PRECONDITION_FAILS","detail":"condition_a"}"#);
    }

    #[test]
    fn path_subdivision() {
        let p = subdivide_path(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)], 5);
        assert_eq!(p.len(), 5);
        assert!((p[2] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p[4] - c(1.0, 1.0)).norm() < 1e-15);
    }
}
