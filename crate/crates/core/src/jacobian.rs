//! The Jacobian field `J = i zeta (F_zeta G_t - G_zeta F_t)` of a planar
//! family and its extension, the phase `Theta = J / conj(J)`, and zero
//! chains of `J(., t)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::ExtensionField;
use crate::family::{DiscFamily, ParamKind, ParamPoint};
use crate::function::BoundaryFunction;
use crate::numerics::interp::CENTRAL6;
use crate::numerics::roots::{count_in_circle, roots_in_disc, RootOptions};
use crate::numerics::{fourier_coeffs, poly, spectral_derivative, CircleSamples, PeriodicGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Taylor coefficients of `J(., t)` at an arbitrary parameter point.
pub type CoeffFn = Arc<dyn Fn(&ParamPoint) -> Result<Vec<Complex64>> + Send + Sync>;

/// Sampled `J` with per-node Taylor data.
#[derive(Clone)]
pub struct JacobianField {
    family: DiscFamily,
    node_coeffs: Vec<Vec<Complex64>>,
    coeff_fn: CoeffFn,
    scale: f64,
    term_scale: f64,
    max_abs: f64,
}

impl std::fmt::Debug for JacobianField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobianField")
            .field("nodes", &self.node_coeffs.len())
            .field("scale", &self.scale)
            .field("term_scale", &self.term_scale)
            .field("max_abs", &self.max_abs)
            .finish()
    }
}

const SAMPLE_RADII: usize = 16;
const SAMPLE_ANGLES: usize = 64;

fn polar_samples() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(SAMPLE_RADII * SAMPLE_ANGLES);
    for i in 0..SAMPLE_RADII {
        let r = i as f64 / (SAMPLE_RADII - 1) as f64;
        for k in 0..SAMPLE_ANGLES {
            out.push(Complex64::from_polar(r, 2.0 * PI * k as f64 / SAMPLE_ANGLES as f64));
        }
    }
    out
}

/// The two products `F_zeta G_t` and `G_zeta F_t` as coefficient vectors.
fn jacobian_terms(
    g: &[Complex64],
    g_t: &[Complex64],
    f: &[Complex64],
    f_t: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    (
        poly::mul(&poly::derivative(f), g_t),
        poly::mul(&poly::derivative(g), f_t),
    )
}

fn assemble(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let diff = poly::sub(a, b);
    // the t-derivative of F leaves a noise floor near 1e-14 per coefficient; the
    // tail below it only adds spurious degree
    let tol = 1e-12 * (poly::l1_norm(a) + poly::l1_norm(b));
    poly::shift(&poly::scale(&poly::trim(&diff, tol), Complex64::i()))
}

fn extension_coeffs(ext: &ExtensionField, p: &ParamPoint, node: Option<usize>) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let family = ext.family();
    let g = family.coeffs_at(p).swap_remove(0);
    let g_t = family.dt_coeffs_at(p, 0).swap_remove(0);
    let f = match node {
        Some(j) => ext.node_coeffs(j)?.to_vec(),
        None => ext.coeffs_at(p)?,
    };
    let f_t = ext.dt_coeffs_at(p, 0)?;
    Ok(jacobian_terms(&g, &g_t, &f, &f_t))
}

/// `J` from an extension field (planar families).
pub fn compute_j(ext: &ExtensionField) -> Result<JacobianField> {
    let family = ext.family().clone();
    if family.dim() != 1 {
        return Err(Error::Config("compute_j needs a planar family; use the hypersurface minors for n = 2".into()));
    }
    if let Some(err) = ext.first_failure() {
        return Err(err);
    }
    let samples = polar_samples();
    let per_node = (0..family.node_count())
        .into_par_iter()
        .map(|j| -> Result<(Vec<Complex64>, f64)> {
            let (a, b) = extension_coeffs(ext, &family.node(j), Some(j))?;
            let coeffs = assemble(&a, &b);
            let term_sq = samples
                .iter()
                .map(|z| {
                    let t = z.norm() * (poly::horner(&a, *z).norm() + poly::horner(&b, *z).norm());
                    t * t
                })
                .sum::<f64>();
            Ok((coeffs, term_sq))
        })
        .collect::<Result<Vec<_>>>()?;
    let count = (per_node.len() * samples.len()) as f64;
    let term_scale = (per_node.iter().map(|p| p.1).sum::<f64>() / count).sqrt();
    let node_coeffs: Vec<Vec<Complex64>> = per_node.into_iter().map(|p| p.0).collect();
    let ext = ext.clone();
    let coeff_fn: CoeffFn = Arc::new(move |p: &ParamPoint| {
        let (a, b) = extension_coeffs(&ext, p, None)?;
        Ok(assemble(&a, &b))
    });
    Ok(JacobianField::assemble_field(family, node_coeffs, coeff_fn, Some(term_scale)))
}

/// Synthetic `J` given by its Taylor coefficients as a function of `t`.
pub fn synthetic_j(
    family: &DiscFamily,
    coeffs: impl Fn(&ParamPoint) -> Vec<Complex64> + Send + Sync + 'static,
) -> JacobianField {
    let node_coeffs = (0..family.node_count()).map(|j| coeffs(&family.node(j))).collect();
    let coeff_fn: CoeffFn = Arc::new(move |p: &ParamPoint| Ok(coeffs(p)));
    JacobianField::assemble_field(family.clone(), node_coeffs, coeff_fn, None)
}

impl JacobianField {
    fn assemble_field(
        family: DiscFamily,
        node_coeffs: Vec<Vec<Complex64>>,
        coeff_fn: CoeffFn,
        term_scale: Option<f64>,
    ) -> Self {
        let samples = polar_samples();
        let (sum_sq, max_abs) = node_coeffs
            .par_iter()
            .map(|c| {
                samples.iter().fold((0.0, 0.0f64), |(s, m), z| {
                    let v = poly::horner(c, *z).norm();
                    (s + v * v, m.max(v))
                })
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1.max(b.1)));
        let scale = (sum_sq / (node_coeffs.len() * samples.len()) as f64).sqrt();
        Self {
            family,
            node_coeffs,
            coeff_fn,
            scale,
            term_scale: term_scale.unwrap_or(scale),
            max_abs,
        }
    }

    pub fn family(&self) -> &DiscFamily {
        &self.family
    }

    pub fn node_coeffs(&self, j: usize) -> &[Complex64] {
        &self.node_coeffs[j]
    }

    pub fn coeffs_at(&self, p: &ParamPoint) -> Result<Vec<Complex64>> {
        (self.coeff_fn)(p)
    }

    pub fn eval(&self, zeta: Complex64, p: &ParamPoint) -> Result<Complex64> {
        Ok(poly::horner(&self.coeffs_at(p)?, zeta))
    }

    /// RMS of `|J|` over the sampled closed disc and all nodes.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// RMS of `|zeta F_zeta G_t| + |zeta G_zeta F_t|`; the natural size of
    /// `J` before cancellation (equal to `scale` for synthetic fields).
    pub fn term_scale(&self) -> f64 {
        self.term_scale
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// `max |J| / term_scale`, zero when both vanish.
    pub fn j_max(&self) -> f64 {
        if self.term_scale > 0.0 {
            self.max_abs / self.term_scale
        } else {
            0.0
        }
    }

    /// Max of `|J|` on the unit circle at node `j`.
    fn node_sup(&self, j: usize) -> f64 {
        (0..SAMPLE_ANGLES)
            .map(|k| poly::horner(&self.node_coeffs[j], Complex64::from_polar(1.0, 2.0 * PI * k as f64 / SAMPLE_ANGLES as f64)).norm())
            .fold(0.0, f64::max)
    }

    /// Principal-value winding of `J(., t)` around 0 on the unit circle:
    /// the mean of the windings on radii `1 - delta` and `1 + delta`, so
    /// boundary zeros count one half.
    pub fn boundary_winding(coeffs: &[Complex64]) -> Result<f64> {
        let delta = 1e-6;
        let inner = count_in_circle(coeffs, ZERO, 1.0 - delta)?;
        let outer = count_in_circle(coeffs, ZERO, 1.0 + delta)?;
        Ok(0.5 * (inner + outer) as f64)
    }

    /// Roots of `J(., t)` in the closed unit disc with multiplicities `kappa`.
    pub fn roots_at(&self, p: &ParamPoint) -> Result<Vec<ZeroPoint>> {
        roots_of(&self.coeffs_at(p)?)
    }
}

/// A root of `J(., t)` with multiplicity `kappa` (halved on the boundary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroPoint {
    pub z: Complex64,
    pub multiplicity: usize,
    pub kappa: f64,
}

/// Roots of a Taylor polynomial in `|z| <= 1`; roots within `1e-6` of the
/// unit circle count with half their multiplicity.
pub fn roots_of(coeffs: &[Complex64]) -> Result<Vec<ZeroPoint>> {
    let roots = roots_in_disc(coeffs, 1.0, RootOptions::default())?;
    Ok(roots
        .into_iter()
        .filter(|r| r.z.norm() <= 1.0 + 1e-6)
        .map(|r| {
            let boundary = (r.z.norm() - 1.0).abs() < 1e-6;
            ZeroPoint {
                z: r.z,
                multiplicity: r.multiplicity,
                kappa: if boundary {
                    0.5 * r.multiplicity as f64
                } else {
                    r.multiplicity as f64
                },
            }
        })
        .collect())
}

/// One continuous root curve `zeta_j(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub nodes: Vec<usize>,
    pub t: Vec<f64>,
    pub roots: Vec<Complex64>,
    pub kappas: Vec<f64>,
    /// Closes up across the period of a circle parameter.
    pub closed: bool,
}

impl Branch {
    /// Multiplicity at the first sample (constant off collisions).
    pub fn kappa(&self) -> f64 {
        self.kappas[0]
    }

    pub fn is_central(&self) -> bool {
        self.roots.iter().all(|z| z.norm() < 1e-8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroChain {
    pub branches: Vec<Branch>,
    pub zero_disc_nodes: Vec<usize>,
    pub central_cycle_present: bool,
    /// Nodes where the multiset of multiplicities changed.
    pub collisions: Vec<usize>,
}

impl ZeroChain {
    /// CSV with columns `t,re,im,kappa,branch_id`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,kappa,branch_id\n");
        for b in &self.branches {
            for i in 0..b.t.len() {
                let _ = writeln!(out, "{:.12e},{:.12e},{:.12e},{},{}", b.t[i], b.roots[i].re, b.roots[i].im, b.kappas[i], b.id);
            }
        }
        out
    }

    pub fn zero_disc_csv(&self) -> String {
        let mut out = String::from("node\n");
        for n in &self.zero_disc_nodes {
            let _ = writeln!(out, "{n}");
        }
        out
    }
}

/// Roots of `J(., t)` at every node, stitched into branches.
pub fn track_zeros(jac: &JacobianField) -> Result<ZeroChain> {
    let family = jac.family();
    let count = family.node_count();
    if family.params().kind == ParamKind::Box3 {
        return Err(Error::Config("zero tracking is defined for one-parameter families".into()));
    }
    let dt = family.params().spacing();
    let per_node: Vec<Option<Vec<ZeroPoint>>> = (0..count)
        .into_par_iter()
        .map(|j| -> Result<Option<Vec<ZeroPoint>>> {
            if jac.node_sup(j) < 1e-10 * jac.scale() || jac.scale() == 0.0 {
                return Ok(None);
            }
            roots_of(jac.node_coeffs(j)).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    if per_node.iter().all(|r| r.is_none()) {
        return Err(Error::Config("J vanishes identically; there are no zero chains to track".into()));
    }
    let zero_disc_nodes: Vec<usize> = (0..count).filter(|j| per_node[*j].is_none()).collect();

    let mut branches: Vec<Branch> = Vec::new();
    // open branch index per root of the previous node
    let mut active: Vec<usize> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut collisions = Vec::new();
    for j in 0..count {
        let Some(roots) = &per_node[j] else {
            active.clear();
            prev = None;
            continue;
        };
        if let Some(pj) = prev {
            let before: usize = per_node[pj].as_ref().map(|r| r.iter().map(|z| z.multiplicity).sum()).unwrap_or(0);
            let after: usize = roots.iter().map(|z| z.multiplicity).sum();
            if before.abs_diff(after) > 2 {
                return Err(Error::TrackingInstability {
                    from: pj,
                    to: j,
                    before,
                    after,
                });
            }
            let mut a: Vec<f64> = per_node[pj].as_ref().unwrap().iter().map(|z| z.kappa).collect();
            let mut b: Vec<f64> = roots.iter().map(|z| z.kappa).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            if a != b {
                collisions.push(j);
            }
        }
        let assignment = match prev {
            Some(_) => match_roots(&branches, &active, roots, dt),
            None => vec![None; roots.len()],
        };
        let mut next_active = Vec::with_capacity(roots.len());
        for (r, slot) in roots.iter().zip(assignment) {
            let id = match slot {
                Some(id) => id,
                None => {
                    branches.push(Branch {
                        id: branches.len(),
                        nodes: Vec::new(),
                        t: Vec::new(),
                        roots: Vec::new(),
                        kappas: Vec::new(),
                        closed: false,
                    });
                    branches.len() - 1
                }
            };
            let b = &mut branches[id];
            b.nodes.push(j);
            b.t.push(family.node(j).t[0]);
            b.roots.push(r.z);
            b.kappas.push(r.kappa);
            next_active.push(id);
        }
        active = next_active;
        prev = Some(j);
    }

    if family.params().kind == ParamKind::Circle && zero_disc_nodes.is_empty() {
        close_periodic(&mut branches, count, dt);
    }

    let central_cycle_present = branches
        .iter()
        .any(|b| b.is_central() && b.nodes.len() + zero_disc_nodes.len() >= count);
    Ok(ZeroChain {
        branches,
        zero_disc_nodes,
        central_cycle_present,
        collisions,
    })
}

/// Greedy nearest matching of new roots to the open branches, gated by
/// five parameter steps of root motion.
fn match_roots(branches: &[Branch], active: &[usize], roots: &[ZeroPoint], dt: f64) -> Vec<Option<usize>> {
    let mut pairs = Vec::new();
    for (ai, &id) in active.iter().enumerate() {
        let b = &branches[id];
        let last = *b.roots.last().unwrap();
        let speed = if b.roots.len() >= 2 {
            (last - b.roots[b.roots.len() - 2]).norm() / dt
        } else {
            0.0
        };
        let gate = 5.0 * dt * speed.max(1.0);
        for (ri, r) in roots.iter().enumerate() {
            let d = (r.z - last).norm();
            if d <= gate {
                pairs.push((d, ai, ri));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_branch = vec![false; active.len()];
    let mut out = vec![None; roots.len()];
    for (_, ai, ri) in pairs {
        if used_branch[ai] || out[ri].is_some() {
            continue;
        }
        used_branch[ai] = true;
        out[ri] = Some(active[ai]);
    }
    out
}

/// Joins branches that end at the last node to branches starting at node 0.
fn close_periodic(branches: &mut Vec<Branch>, count: usize, dt: f64) {
    let ends: Vec<usize> = branches.iter().filter(|b| *b.nodes.last().unwrap() == count - 1).map(|b| b.id).collect();
    let starts: Vec<usize> = branches.iter().filter(|b| b.nodes[0] == 0).map(|b| b.id).collect();
    let mut pairs = Vec::new();
    for &e in &ends {
        for &s in &starts {
            let d = (branches[s].roots[0] - *branches[e].roots.last().unwrap()).norm();
            if d <= 5.0 * dt {
                pairs.push((d, e, s));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_e = Vec::new();
    let mut used_s = Vec::new();
    let mut joins = Vec::new();
    for (_, e, s) in pairs {
        if used_e.contains(&e) || used_s.contains(&s) {
            continue;
        }
        used_e.push(e);
        used_s.push(s);
        joins.push((e, s));
    }
    let mut removed = vec![false; branches.len()];
    for (e, s) in joins {
        if e == s {
            branches[e].closed = true;
            continue;
        }
        // the start branch continues the end branch past the period
        let tail = branches[s].clone();
        let period = dt * count as f64;
        let b = &mut branches[e];
        b.nodes.extend(tail.nodes.iter().map(|n| n + count));
        b.t.extend(tail.t.iter().map(|t| t + period));
        b.roots.extend(tail.roots);
        b.kappas.extend(tail.kappas);
        removed[s] = true;
    }
    let mut kept: Vec<Branch> = branches.drain(..).zip(removed).filter(|(_, r)| !r).map(|(b, _)| b).collect();
    for (i, b) in kept.iter_mut().enumerate() {
        b.id = i;
    }
    *branches = kept;
}

/// Boundary Jacobians of a planar family and a boundary function, with
/// gradients in the frame `(d_t, d_psi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJacobians {
    pub circle_points: usize,
    pub t: Vec<f64>,
    /// `det[grad F, grad conj G]` per node and angle.
    pub j_plus: Vec<Vec<Complex64>>,
    /// `det[grad G, grad F]`, equal to `J` on the boundary.
    pub j_minus: Vec<Vec<Complex64>>,
    /// `det[grad G, grad conj G]`.
    pub g_gbar: Vec<Vec<Complex64>>,
}

/// `J_+` and `J_-` on the boundary, from the trace `f o G` itself (no
/// extension is needed, so non-extendible `f` can be examined formally).
pub fn compute_j_pm(f: &BoundaryFunction, family: &DiscFamily, circle_points: usize) -> Result<BoundaryJacobians> {
    if family.dim() != 1 {
        return Err(Error::Config("boundary Jacobians are planar".into()));
    }
    let grid = PeriodicGrid::new(circle_points)?;
    let h = 1e-3;
    let trace = |t: f64| -> Vec<Complex64> {
        let c = &family.coeffs_at(&ParamPoint::scalar(t))[0];
        grid.unit_points().iter().map(|z| f.eval(&[poly::horner(c, *z)])).collect()
    };
    let rows = (0..family.node_count())
        .into_par_iter()
        .map(|j| -> Result<(f64, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
            let t = family.node(j).t[0];
            let values = trace(t);
            let f_psi = spectral_derivative(&fourier_coeffs(&CircleSamples::new(grid, values)?)?).inverse().into_values();
            let mut f_t = vec![ZERO; grid.size()];
            for (k, w) in CENTRAL6 {
                let plus = trace(t + k * h);
                let minus = trace(t - k * h);
                for i in 0..grid.size() {
                    f_t[i] += (plus[i] - minus[i]) * (w / h);
                }
            }
            let p = ParamPoint::scalar(t);
            let c = &family.coeffs_at(&p)[0];
            let ct = &family.dt_coeffs_at(&p, 0)[0];
            let mut jp = Vec::with_capacity(grid.size());
            let mut jm = Vec::with_capacity(grid.size());
            let mut gg = Vec::with_capacity(grid.size());
            for (i, z) in grid.unit_points().into_iter().enumerate() {
                let g_psi = Complex64::i() * z * poly::horner_with_derivative(c, z).1;
                let g_t = poly::horner(ct, z);
                jp.push(f_t[i] * g_psi.conj() - f_psi[i] * g_t.conj());
                jm.push(g_t * f_psi[i] - f_t[i] * g_psi);
                gg.push(g_t * g_psi.conj() - g_psi * g_t.conj());
            }
            Ok((t, jp, jm, gg))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = BoundaryJacobians {
        circle_points,
        t: Vec::new(),
        j_plus: Vec::new(),
        j_minus: Vec::new(),
        g_gbar: Vec::new(),
    };
    for (t, jp, jm, gg) in rows {
        out.t.push(t);
        out.j_plus.push(jp);
        out.j_minus.push(jm);
        out.g_gbar.push(gg);
    }
    Ok(out)
}

impl BoundaryJacobians {
    /// `max |J_- - det[grad G, grad conj G] * (dbar f)(G)|` over all samples.
    pub fn dbar_relation_residual(&self, family: &DiscFamily, dbar: impl Fn(Complex64) -> Complex64) -> f64 {
        let grid = PeriodicGrid::new(self.circle_points).expect("grid validated at construction");
        let points = grid.unit_points();
        let mut worst = 0.0f64;
        for (j, t) in self.t.iter().enumerate() {
            let c = &family.coeffs_at(&ParamPoint::scalar(*t))[0];
            for (i, z) in points.iter().enumerate() {
                let g = poly::horner(c, *z);
                worst = worst.max((self.j_minus[j][i] - self.g_gbar[j][i] * dbar(g)).norm());
            }
        }
        worst
    }

    pub fn max_abs_plus(&self) -> f64 {
        self.j_plus.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_minus(&self) -> f64 {
        self.j_minus.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `Theta = J / conj(J)` on the boundary grid, masked where `|J|` is small.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaField {
    pub circle_points: usize,
    pub mask_level: f64,
    /// Per node, per angle.
    pub theta: Vec<Vec<Option<Complex64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCompatibility {
    /// `max |Theta(u1) - Theta(u2)|` over refined same-fiber pairs.
    pub residual: f64,
    pub pairs: usize,
    /// `max |Theta - sigma(G)|` when a closed-form `dbar f` is known.
    pub sigma_residual: Option<f64>,
    pub max_unimodularity_error: f64,
}

pub fn theta_field(jac: &JacobianField, circle_points: usize) -> Result<ThetaField> {
    if jac.scale() == 0.0 || jac.max_abs() < 1e-10 * jac.term_scale().max(f64::MIN_POSITIVE) {
        return Err(Error::Domain("degenerate: J vanishes identically, Theta undefined".into()));
    }
    let grid = PeriodicGrid::new(circle_points)?;
    let points = grid.unit_points();
    let level = 0.01 * jac.scale();
    let theta = (0..jac.family().node_count())
        .map(|j| {
            points
                .iter()
                .map(|z| {
                    let v = poly::horner(jac.node_coeffs(j), *z);
                    (v.norm() > level).then(|| v / v.conj())
                })
                .collect()
        })
        .collect();
    Ok(ThetaField {
        circle_points,
        mask_level: level,
        theta,
    })
}

impl ThetaField {
    /// Compares `Theta` at boundary points on a common `G`-fiber. Candidate
    /// partners come from a spatial hash of the sampled image at mesh scale
    /// and are refined by Newton onto the exact fiber before comparison.
    /// Every `stride`-th unmasked sample is used as an anchor.
    pub fn compatibility(
        &self,
        jac: &JacobianField,
        f: Option<&BoundaryFunction>,
        stride: usize,
    ) -> Result<ThetaCompatibility> {
        let family = jac.family();
        let grid = PeriodicGrid::new(self.circle_points)?;
        let points = grid.unit_points();
        let n = points.len();
        let nodes = family.node_count();
        let images: Vec<Vec<Complex64>> = (0..nodes)
            .map(|j| {
                let c = &family.taylor_data()[j][0];
                points.iter().map(|z| poly::horner(c, *z)).collect()
            })
            .collect();
        let mut mesh = 0.0f64;
        for j in 0..nodes {
            for i in 0..n {
                mesh = mesh.max((images[j][(i + 1) % n] - images[j][i]).norm());
                if j + 1 < nodes {
                    mesh = mesh.max((images[j + 1][i] - images[j][i]).norm());
                }
            }
        }
        let key = |z: Complex64| ((z.re / mesh).floor() as i64, (z.im / mesh).floor() as i64);
        let mut hash: HashMap<(i64, i64), Vec<(usize, usize)>> = HashMap::new();
        for j in 0..nodes {
            for i in 0..n {
                hash.entry(key(images[j][i])).or_default().push((j, i));
            }
        }
        let dt = family.params().spacing();
        let periodic = family.params().kind == ParamKind::Circle;
        let param_gap = |psi1: f64, t1: f64, psi2: f64, t2: f64| {
            let dpsi = (psi1 - psi2).rem_euclid(2.0 * PI);
            let dpsi = dpsi.min(2.0 * PI - dpsi);
            let mut dtt = (t1 - t2).abs();
            if periodic {
                dtt = dtt.min(2.0 * PI - dtt);
            }
            dpsi.max(dtt)
        };
        let mut anchors = Vec::new();
        for j in 0..nodes {
            for i in 0..n {
                if self.theta[j][i].is_some() {
                    anchors.push((j, i));
                }
            }
        }
        let results = anchors
            .par_iter()
            .step_by(stride.max(1))
            .map(|&(j, i)| -> Result<(f64, usize)> {
                let b = images[j][i];
                let (psi1, t1) = (grid.angle(i), family.node(j).t[0]);
                let theta1 = self.theta[j][i].unwrap();
                let (kx, ky) = key(b);
                let mut found: Vec<(f64, f64)> = Vec::new();
                let mut worst = 0.0f64;
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        let Some(cands) = hash.get(&(kx + dx, ky + dy)) else { continue };
                        for &(jj, ii) in cands {
                            let (psi0, t0) = (grid.angle(ii), family.node(jj).t[0]);
                            if param_gap(psi1, t1, psi0, t0) < 3.0 * dt.max(grid.spacing()) {
                                continue;
                            }
                            let Some((psi2, t2)) = family.boundary_newton(b, psi0, t0) else { continue };
                            if param_gap(psi1, t1, psi2, t2) < 1e-6 {
                                continue;
                            }
                            if found.iter().any(|&(p, t)| param_gap(p, t, psi2, t2) < 1e-6) {
                                continue;
                            }
                            found.push((psi2, t2));
                            let v = jac.eval(Complex64::from_polar(1.0, psi2), &ParamPoint::scalar(t2))?;
                            if v.norm() <= self.mask_level {
                                continue;
                            }
                            worst = worst.max((v / v.conj() - theta1).norm());
                        }
                    }
                }
                Ok((worst, found.len()))
            })
            .collect::<Result<Vec<_>>>()?;
        let residual = results.iter().map(|r| r.0).fold(0.0, f64::max);
        let pairs = results.iter().map(|r| r.1).sum();

        let max_unimodularity_error = self
            .theta
            .iter()
            .flatten()
            .flatten()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max);

        let sigma_residual = match f {
            Some(f) if f.dbar_exact(&[Complex64::new(0.3, 0.1)]).is_some() => {
                let mut worst = 0.0f64;
                for j in 0..nodes {
                    for i in 0..n {
                        let Some(th) = self.theta[j][i] else { continue };
                        let d = f.dbar_exact(&[images[j][i]]).unwrap()[0];
                        if d.norm() < 1e-12 {
                            continue;
                        }
                        worst = worst.max((th + d / d.conj()).norm());
                    }
                }
                Some(worst)
            }
            _ => None,
        };
        Ok(ThetaCompatibility {
            residual,
            pairs,
            sigma_residual,
            max_unimodularity_error,
        })
    }
}

/// A point where the directional-derivative identity was checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalCheck {
    pub max_residual: f64,
    /// Residual relative to the largest `|J|` met on the fibers.
    pub relative: f64,
    pub samples: usize,
}

/// Checks `J = -i zeta G_zeta d^G F` along traced fibers, where `d^G F`
/// is the derivative of `F` along the fiber, obtained by re-projecting the
/// fiber at `t +- k h` and differencing with sixth-order weights.
pub fn directional_derivative_check(
    ext: &ExtensionField,
    jac: &JacobianField,
    fibers: &[crate::topology::Fiber],
    per_fiber: usize,
) -> Result<DirectionalCheck> {
    let family = ext.family();
    let mut worst = 0.0f64;
    let mut largest = 0.0f64;
    let mut samples = 0;
    for fiber in fibers {
        let stride = (fiber.samples.len() / per_fiber.max(1)).max(1);
        for &(zeta, t) in fiber.samples.iter().step_by(stride) {
            if zeta.norm() > 1.0 - 1e-2 {
                continue;
            }
            let h = 1e-3;
            let along = |s: f64| -> Option<Complex64> {
                let z = crate::topology::project_to_fiber(family, fiber.b, zeta, t + s)?;
                if z.norm() > 1.0 {
                    return None;
                }
                ext.eval(z, &ParamPoint::scalar(t + s)).ok()
            };
            let mut d = ZERO;
            let mut ok = true;
            for (k, w) in CENTRAL6 {
                match (along(k * h), along(-k * h)) {
                    (Some(a), Some(b)) => d += (a - b) * (w / h),
                    _ => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let p = ParamPoint::scalar(t);
            let gz = family.d_zeta_raw(zeta, &p)[0];
            let jv = jac.eval(zeta, &p)?;
            largest = largest.max(jv.norm());
            worst = worst.max((jv + Complex64::i() * zeta * gz * d).norm());
            samples += 1;
        }
    }
    Ok(DirectionalCheck {
        max_residual: worst,
        relative: if largest > 0.0 { worst / largest } else { worst },
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::analyze;
    use crate::family::{build_rotating_circles, build_translated_circles};
    use crate::function::FunctionSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn globevnik() -> ExtensionField {
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
        analyze(&f, &fam).unwrap()
    }

    #[test]
    fn square_gives_vanishing_j() {
        let fam = build_translated_circles(1.0, &[c(0.0, 0.0), c(3.0, 0.0)], 32).unwrap();
        let f = BoundaryFunction::from_spec(&FunctionSpec::named("z_sq"), 1).unwrap();
        let jac = compute_j(&analyze(&f, &fam).unwrap()).unwrap();
        assert!(jac.j_max() < 1e-8, "{}", jac.j_max());
    }

    #[test]
    fn globevnik_j_matches_closed_form() {
        let ext = globevnik();
        let jac = compute_j(&ext).unwrap();
        for &(z, t) in &[(c(0.3, -0.2), 0.7), (c(-0.5, 0.5), 3.9)] {
            let e = Complex64::from_polar(1.0, t);
            let w = z / e;
            let closed = -2.0 * z * e.powi(3) * (1.0 + 2.0 * w).powi(2) * (1.0 - w * w) / (2.0 + w).powi(2);
            let got = jac.eval(z, &ParamPoint::scalar(t)).unwrap();
            assert!((got - closed).norm() < 1e-8, "{got} vs {closed}");
        }
        assert_eq!(jac.node_coeffs(5)[0], ZERO);
        assert!(jac.j_max() > 0.1);
    }

    #[test]
    fn globevnik_roots_and_sum_rule() {
        let ext = globevnik();
        let jac = compute_j(&ext).unwrap();
        let roots = roots_of(jac.node_coeffs(3)).unwrap();
        let total: f64 = roots.iter().map(|r| r.kappa).sum();
        assert_eq!(total, 4.0, "{roots:?}");
        assert_eq!(JacobianField::boundary_winding(jac.node_coeffs(3)).unwrap(), 4.0);
        let chain = track_zeros(&jac).unwrap();
        assert!(chain.central_cycle_present);
        assert!(chain.zero_disc_nodes.is_empty());
    }

    #[test]
    fn synthetic_chains() {
        let fam = build_rotating_circles(1.0, 2.0, 32).unwrap();
        let jac = synthetic_j(&fam, |p| vec![ZERO, -Complex64::from_polar(0.5, p.t[0]), c(1.0, 0.0)]);
        let chain = track_zeros(&jac).unwrap();
        assert_eq!(chain.branches.len(), 2, "{:?}", chain.branches.iter().map(|b| b.nodes.len()).collect::<Vec<_>>());
        assert!(chain.branches.iter().all(|b| b.kappa() == 1.0 && b.closed));
        assert!(chain.central_cycle_present);

        let sq = synthetic_j(&fam, |_| vec![ZERO, ZERO, c(1.0, 0.0)]);
        let chain = track_zeros(&sq).unwrap();
        assert_eq!(chain.branches.len(), 1);
        assert_eq!(chain.branches[0].kappa(), 2.0);
        assert!(chain.to_csv().starts_with("t,re,im,kappa,branch_id\n"));
    }

    #[test]
    fn boundary_jacobian_relations() {
        let fam = build_rotating_circles(1.0, 2.0, 32).unwrap();
        let absq = BoundaryFunction::from_spec(&FunctionSpec::named("expr:z*zbar"), 1).unwrap();
        let pm = compute_j_pm(&absq, &fam, 128).unwrap();
        assert!(pm.dbar_relation_residual(&fam, |z| z) < 1e-6);
        let zbar = BoundaryFunction::from_spec(&FunctionSpec::named("zbar"), 1).unwrap();
        assert!(compute_j_pm(&zbar, &fam, 128).unwrap().max_abs_plus() < 1e-9);
        let sq = BoundaryFunction::from_spec(&FunctionSpec::named("z_sq"), 1).unwrap();
        assert!(compute_j_pm(&sq, &fam, 128).unwrap().max_abs_minus() < 1e-9);
    }

    #[test]
    fn theta_is_compatible_for_globevnik() {
        let ext = globevnik();
        let jac = compute_j(&ext).unwrap();
        let theta = theta_field(&jac, 128).unwrap();
        let comp = theta.compatibility(&jac, Some(ext.function()), 97).unwrap();
        assert!(comp.pairs > 0);
        assert!(comp.residual < 1e-3, "{comp:?}");
        assert!(comp.sigma_residual.unwrap() < 1e-3, "{comp:?}");
        assert!(comp.max_unimodularity_error < 1e-12);
    }
}
