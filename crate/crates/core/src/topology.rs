//! Level curves of planar families, boundary preimages and degree, zero
//! counts, and the homological condition.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::audit::{bounding_box, closure_intersection_empty, ClosureIntersection};
use crate::family::raster::Raster;
use crate::family::{DiscFamily, ParamKind, ParamPoint};
use crate::numerics::roots::{roots_in_disc, RootOptions};
use crate::numerics::{closed_winding, poly};

const TAU: f64 = 2.0 * PI;

/// One connected piece of `G^{-1}(b)` in the closed solid `Sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub b: Complex64,
    /// `(zeta(t), t)`; `t` is unwrapped past the period on circle families.
    pub samples: Vec<(Complex64, f64)>,
    pub closed: bool,
    pub hit_boundary: bool,
}

impl Fiber {
    /// `max |G(zeta, t) - b|` over the samples.
    pub fn defect(&self, family: &DiscFamily) -> f64 {
        self.samples
            .iter()
            .map(|(z, t)| (family.planar_jet(*z, *t).0 - self.b).norm())
            .fold(0.0, f64::max)
    }
}

/// CSV with columns `fiber,t,re,im`.
pub fn fibers_csv(fibers: &[Fiber]) -> String {
    let mut out = String::from("fiber,t,re,im\n");
    for (k, f) in fibers.iter().enumerate() {
        for (z, t) in &f.samples {
            let _ = writeln!(out, "{k},{t:.12e},{:.12e},{:.12e}", z.re, z.im);
        }
    }
    out
}

/// Tuning of the level-curve tracer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberOptions {
    /// Nominal steps per unit-length parameter range (per period on circles).
    pub steps: usize,
    /// Bound on the Newton correction after a predictor step.
    pub corrector_tolerance: f64,
    /// Seeding grid for boundary preimages, per side.
    pub seed_grid: usize,
}

impl Default for FiberOptions {
    fn default() -> Self {
        Self {
            steps: 1024,
            corrector_tolerance: 1e-6,
            seed_grid: 256,
        }
    }
}

/// A solution of `G(e^{i psi}, t) = b` with the sign-bearing determinant of
/// the real differential in the frame `(d_psi, d_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPreimage {
    pub psi: f64,
    pub t: f64,
    pub det: f64,
}

impl BoundaryPreimage {
    /// The level curve enters the open disc here as `t` increases.
    pub fn entering(&self) -> bool {
        self.det < 0.0
    }
}

/// Boundary sampling of a planar family shared by the fiber, degree and
/// zero-count operations: a `(psi, t)` grid of images and fold values.
#[derive(Debug, Clone)]
pub struct BoundaryMap {
    family: DiscFamily,
    opts: FiberOptions,
    psi_count: usize,
    t_values: Vec<f64>,
    images: Vec<Complex64>,
    /// Images of sign changes of the determinant (fold curve samples).
    folds: Vec<Complex64>,
    mesh: f64,
    det_scale: f64,
    image_scale: f64,
}

impl BoundaryMap {
    pub fn new(family: &DiscFamily) -> Result<Self> {
        Self::with_options(family, FiberOptions::default())
    }

    pub fn with_options(family: &DiscFamily, opts: FiberOptions) -> Result<Self> {
        if family.dim() != 1 {
            return Err(Error::Config("level curves and degrees are computed for planar families".into()));
        }
        if family.params().kind == ParamKind::Box3 {
            return Err(Error::Config("planar families have one parameter".into()));
        }
        let m = opts.seed_grid.max(16);
        let periodic = family.params().kind == ParamKind::Circle;
        let t_values: Vec<f64> = if periodic {
            (0..m).map(|j| TAU * j as f64 / m as f64).collect()
        } else {
            (0..m).map(|j| j as f64 / (m - 1) as f64).collect()
        };
        let rows: Vec<(Vec<Complex64>, Vec<f64>)> = t_values
            .par_iter()
            .map(|&t| {
                let p = ParamPoint::scalar(t);
                let c = &family.coeffs_at(&p)[0];
                let ct = &family.dt_coeffs_at(&p, 0)[0];
                (0..m)
                    .map(|i| {
                        let z = Complex64::from_polar(1.0, TAU * i as f64 / m as f64);
                        let (g, gz) = poly::horner_with_derivative(c, z);
                        let gp = Complex64::i() * z * gz;
                        let gt = poly::horner(ct, z);
                        (g, gp.re * gt.im - gp.im * gt.re)
                    })
                    .unzip()
            })
            .collect();
        let mut images = Vec::with_capacity(m * m);
        let mut dets = Vec::with_capacity(m * m);
        for (g, d) in rows {
            images.extend(g);
            dets.extend(d);
        }
        let at = |j: usize, i: usize| j * m + i;
        let mut mesh = 0.0f64;
        let mut folds = Vec::new();
        for j in 0..m {
            for i in 0..m {
                let ii = (i + 1) % m;
                mesh = mesh.max((images[at(j, ii)] - images[at(j, i)]).norm());
                let jj = if j + 1 < m {
                    Some(j + 1)
                } else if periodic {
                    Some(0)
                } else {
                    None
                };
                if let Some(jj) = jj {
                    mesh = mesh.max((images[at(jj, i)] - images[at(j, i)]).norm());
                }
                for (a, b) in [(at(j, i), at(j, ii))].into_iter().chain(jj.map(|jj| (at(j, i), at(jj, i)))) {
                    let (da, db) = (dets[a], dets[b]);
                    if da == 0.0 || da.signum() != db.signum() {
                        let s = if da == db { 0.0 } else { da / (da - db) };
                        folds.push(images[a] + (images[b] - images[a]) * s.clamp(0.0, 1.0));
                    }
                }
            }
        }
        let det_scale = dets.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        let image_scale = images.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1.0);
        Ok(Self {
            family: family.clone(),
            opts,
            psi_count: m,
            t_values,
            images,
            folds,
            mesh,
            det_scale,
            image_scale,
        })
    }

    pub fn family(&self) -> &DiscFamily {
        &self.family
    }

    /// Largest image spacing of adjacent grid samples.
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// `max(1, max |G|)` on the boundary; the scale of fiber defects.
    pub fn image_scale(&self) -> f64 {
        self.image_scale
    }

    /// Distance from `b` to the sampled fold values of `G` on the boundary.
    pub fn critical_distance(&self, b: Complex64) -> f64 {
        self.folds.iter().map(|z| (z - b).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Whether `b` is a regular value at the resolution of the sampling grid.
    pub fn is_regular(&self, b: Complex64) -> bool {
        self.critical_distance(b) > 10.0 * self.mesh
    }

    /// Distance from `b` to the images of the end circles of an interval
    /// family (`infinity` on circle families).
    pub fn end_distance(&self, b: Complex64) -> f64 {
        if self.family.params().kind == ParamKind::Circle {
            return f64::INFINITY;
        }
        let m = self.psi_count;
        let first = &self.images[..m];
        let last = &self.images[(m - 1) * m..];
        first.iter().chain(last).map(|z| (z - b).norm()).fold(f64::INFINITY, f64::min)
    }

    /// All solutions of `G(e^{i psi}, t) = b`, by Newton from every grid
    /// cell whose corner images come near `b`, deduplicated at `1e-6`.
    pub fn preimages(&self, b: Complex64) -> Result<Vec<BoundaryPreimage>> {
        let m = self.psi_count;
        let periodic = self.family.params().kind == ParamKind::Circle;
        let rows = if periodic { m } else { m - 1 };
        let dt = if periodic { TAU / m as f64 } else { 1.0 / (m - 1) as f64 };
        let mut found: Vec<BoundaryPreimage> = (0..rows)
            .into_par_iter()
            .flat_map_iter(|j| {
                let jj = (j + 1) % m;
                let mut local = Vec::new();
                for i in 0..m {
                    let ii = (i + 1) % m;
                    let corners = [
                        self.images[j * m + i],
                        self.images[j * m + ii],
                        self.images[jj * m + i],
                        self.images[jj * m + ii],
                    ];
                    let (lo, hi) = bounding_box(corners.iter());
                    let pad = 0.5 * ((hi.re - lo.re).max(hi.im - lo.im)) + 1e-12;
                    if b.re < lo.re - pad || b.re > hi.re + pad || b.im < lo.im - pad || b.im > hi.im + pad {
                        continue;
                    }
                    let psi0 = TAU * (i as f64 + 0.5) / m as f64;
                    let t0 = self.t_values[j] + 0.5 * dt;
                    if let Some((psi, t)) = self.family.boundary_newton(b, psi0, t0) {
                        local.push((psi, t));
                    }
                }
                local
            })
            .map(|(psi, t)| {
                let z = Complex64::from_polar(1.0, psi);
                let (_, gz, gt) = self.family.planar_jet(z, t);
                let gp = Complex64::i() * z * gz;
                BoundaryPreimage {
                    psi,
                    t,
                    det: gp.re * gt.im - gp.im * gt.re,
                }
            })
            .collect();
        found.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.psi.total_cmp(&b.psi)));
        let mut out: Vec<BoundaryPreimage> = Vec::new();
        for p in found {
            let dup = out.iter().any(|q| {
                let dpsi = (p.psi - q.psi).rem_euclid(TAU);
                let mut dtt = (p.t - q.t).abs();
                if periodic {
                    dtt = dtt.min(TAU - dtt);
                }
                dpsi.min(TAU - dpsi) < 1e-6 && dtt < 1e-6
            });
            if !dup {
                out.push(p);
            }
        }
        for p in &out {
            if p.det.abs() < 1e-10 * self.det_scale {
                return Err(Error::DegeneratePreimage {
                    psi: p.psi,
                    t: p.t,
                    det: p.det,
                });
            }
        }
        Ok(out)
    }

    /// `sum sign det` over the boundary preimages of `b`.
    pub fn degree(&self, b: Complex64) -> Result<i64> {
        self.degree_excluding(b, None)
    }

    /// Degree of `G` restricted to the complement of `G^{-1}(O)` for the
    /// open disc `O = (center, radius)`; requires `b` outside the closure
    /// of `O`, so that the restriction loses no preimage of `b`.
    pub fn degree_excluding(&self, b: Complex64, excluded: Option<(Complex64, f64)>) -> Result<i64> {
        if let Some((c, r)) = excluded {
            if (b - c).norm() <= r {
                return Err(Error::Domain(format!("probe {b} lies in the excluded patch")));
            }
        }
        let end = self.end_distance(b);
        if end <= 10.0 * self.mesh {
            return Err(Error::NearSingularWinding {
                point: b,
                distance: end,
                mesh: self.mesh,
            });
        }
        let pre = self.preimages(b)?;
        Ok(pre
            .iter()
            .filter(|p| match excluded {
                Some((c, r)) => {
                    let g = self.family.planar_jet(Complex64::from_polar(1.0, p.psi), p.t).0;
                    (g - c).norm() >= r
                }
                None => true,
            })
            .map(|p| if p.det > 0.0 { 1 } else { -1 })
            .sum())
    }

    /// The level set `G^{-1}(b)` in the closed solid, one [`Fiber`] per
    /// connected piece met by the seeds.
    pub fn trace(&self, b: Complex64) -> Result<Vec<Fiber>> {
        let distance = self.critical_distance(b);
        if distance <= 10.0 * self.mesh {
            return Err(Error::Domain(format!(
                "{b} is within {distance:.3e} of a critical value of G on the boundary (mesh {:.3e}); not a regular value",
                self.mesh
            )));
        }
        let family = &self.family;
        let periodic = family.params().kind == ParamKind::Circle;
        let start = interior_roots(family, b, 0.0)?;
        let entries: Vec<BoundaryPreimage> = self.preimages(b)?.into_iter().filter(|p| p.entering()).collect();
        let degree = family.coeffs_at(&ParamPoint::scalar(0.0))[0].len().saturating_sub(1).max(1);
        let mut fibers = Vec::new();
        for e in &entries {
            let seed = Complex64::from_polar(1.0, e.psi);
            let limit = if periodic { e.t + TAU * (degree + 1) as f64 } else { 1.0 };
            let trace = self.follow(b, seed, e.t, limit, None)?;
            fibers.push(Fiber {
                b,
                samples: trace.samples,
                closed: false,
                hit_boundary: true,
            });
        }
        let mut consumed = vec![false; start.len()];
        for k in 0..start.len() {
            if consumed[k] {
                continue;
            }
            consumed[k] = true;
            if !periodic {
                let trace = self.follow(b, start[k], 0.0, 1.0, None)?;
                fibers.push(Fiber {
                    b,
                    samples: trace.samples,
                    closed: false,
                    hit_boundary: trace.exited,
                });
                continue;
            }
            let trace = self.follow(b, start[k], 0.0, TAU * start.len() as f64, Some(&start))?;
            if let Some(visited) = trace.closed_through {
                for v in visited {
                    consumed[v] = true;
                }
                fibers.push(Fiber {
                    b,
                    samples: trace.samples,
                    closed: true,
                    hit_boundary: false,
                });
            }
            // open pieces through t = 0 were traced from their entry points
        }
        Ok(fibers)
    }

    /// Predictor-corrector continuation of `G(zeta, t) = b` from `(zeta0, t0)`
    /// forward to `t_end`, the unit circle, or (with `period_roots`) closure.
    fn follow(
        &self,
        b: Complex64,
        zeta0: Complex64,
        t0: f64,
        t_end: f64,
        period_roots: Option<&[Complex64]>,
    ) -> Result<Trace> {
        let family = &self.family;
        let span = if family.params().kind == ParamKind::Circle { TAU } else { 1.0 };
        let h_max = span / self.opts.steps as f64;
        let h_min = h_max * 1e-9;
        let velocity = |z: Complex64, t: f64| -> Result<Complex64> {
            let (_, gz, gt) = family.planar_jet(z, t);
            if gz.norm() < 1e-10 * self.image_scale {
                return Err(Error::FiberCriticalPoint { t, zeta: z });
            }
            Ok(-gt / gz)
        };
        let mut samples = vec![(zeta0, t0)];
        let (mut z, mut t) = (zeta0, t0);
        let mut h = h_max;
        let mut next_period = t0 + TAU;
        let mut visited = vec![];
        if let Some(roots) = period_roots {
            visited.push(nearest_index(roots, zeta0));
        }
        let mut exited = false;
        while t < t_end - 1e-15 {
            let mut step = h.min(t_end - t);
            let mut at_period = false;
            if period_roots.is_some() && t + step >= next_period - 1e-15 {
                step = next_period - t;
                at_period = true;
            }
            let k1 = velocity(z, t)?;
            let k2 = velocity(z + k1 * (0.5 * step), t + 0.5 * step)?;
            let k3 = velocity(z + k2 * (0.5 * step), t + 0.5 * step)?;
            let k4 = velocity(z + k3 * step, t + step)?;
            let predicted = z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
            let corrected = project_to_fiber(family, b, predicted, t + step);
            let good = corrected.map_or(false, |c| {
                (c - predicted).norm() <= self.opts.corrector_tolerance && (c - z).norm() <= 0.05
            });
            if !good {
                if step <= h_min {
                    return Err(Error::FiberCriticalPoint { t, zeta: z });
                }
                h = 0.5 * step;
                continue;
            }
            let corrected = corrected.unwrap();
            if corrected.norm() >= 1.0 {
                // locate the exit on the unit circle between t and t + step
                if let Some((psi, te)) = family.boundary_newton(b, corrected.arg(), t + step) {
                    let te = if family.params().kind == ParamKind::Circle {
                        te + TAU * ((t + step - te) / TAU).round()
                    } else {
                        te
                    };
                    let leaves_seed = samples.len() > 1 || te > t + 1e-9;
                    if leaves_seed && te >= t - 1e-12 && te <= t + step + 1e-12 {
                        samples.push((Complex64::from_polar(1.0, psi), te.max(t)));
                        exited = true;
                        break;
                    }
                }
                if step <= h_min {
                    return Err(Error::FiberCriticalPoint { t, zeta: z });
                }
                h = 0.5 * step;
                continue;
            }
            z = corrected;
            t += step;
            samples.push((z, t));
            if at_period {
                next_period += TAU;
                let roots = period_roots.unwrap();
                let k = nearest_index(roots, z);
                if (roots[k] - z).norm() > 1e-6 {
                    return Err(Error::RootFinder(format!("level curve at t = {t} does not return to a seed root")));
                }
                if k == visited[0] {
                    return Ok(Trace {
                        samples,
                        exited: false,
                        closed_through: Some(visited),
                    });
                }
                visited.push(k);
            }
            h = (h * 1.5).min(h_max);
        }
        Ok(Trace {
            samples,
            exited,
            closed_through: None,
        })
    }
}

struct Trace {
    samples: Vec<(Complex64, f64)>,
    exited: bool,
    closed_through: Option<Vec<usize>>,
}

fn nearest_index(points: &[Complex64], z: Complex64) -> usize {
    (0..points.len())
        .min_by(|a, b| (points[*a] - z).norm().total_cmp(&(points[*b] - z).norm()))
        .unwrap_or(0)
}

/// Solutions of `G(zeta, t) = b` with `|zeta| < 1`, with multiplicity.
pub fn interior_roots(family: &DiscFamily, b: Complex64, t: f64) -> Result<Vec<Complex64>> {
    let mut c = family.coeffs_at(&ParamPoint::scalar(t)).swap_remove(0);
    c[0] -= b;
    let roots = roots_in_disc(&c, 1.0, RootOptions::default())?;
    Ok(roots
        .into_iter()
        .filter(|r| r.z.norm() < 1.0)
        .flat_map(|r| std::iter::repeat(r.z).take(r.multiplicity))
        .collect())
}

/// Newton projection of `zeta` onto `G(., t) = b`.
pub(crate) fn project_to_fiber(family: &DiscFamily, b: Complex64, zeta: Complex64, t: f64) -> Option<Complex64> {
    let mut z = zeta;
    let scale = b.norm().max(1.0);
    for _ in 0..30 {
        let (g, gz, _) = family.planar_jet(z, t);
        let r = g - b;
        if r.norm() < 1e-14 * scale {
            return Some(z);
        }
        if gz.norm() == 0.0 {
            return None;
        }
        let dz = r / gz;
        z -= dz;
        if !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        if dz.norm() < 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    let (g, _, _) = family.planar_jet(z, t);
    ((g - b).norm() < 1e-11 * scale).then_some(z)
}

/// Level set `G^{-1}(b)` with default options.
pub fn trace_fiber(family: &DiscFamily, b: Complex64) -> Result<Vec<Fiber>> {
    BoundaryMap::new(family)?.trace(b)
}

/// Brouwer degree of `G` on the boundary over the value `b`.
pub fn brouwer_degree(family: &DiscFamily, b: Complex64) -> Result<i64> {
    BoundaryMap::new(family)?.degree(b)
}

/// Number of zeros of `G(., t) - b` in the disc as a winding integral over
/// the unit circle.
pub fn zero_count_integral(family: &DiscFamily, b: Complex64, t: f64) -> Result<i64> {
    let c = &family.coeffs_at(&ParamPoint::scalar(t))[0];
    let n = 512;
    let values: Vec<Complex64> = (0..n)
        .map(|i| poly::horner(c, Complex64::from_polar(1.0, TAU * i as f64 / n as f64)))
        .collect();
    let mesh = (0..n).map(|i| (values[(i + 1) % n] - values[i]).norm()).fold(0.0, f64::max);
    closed_winding(&values, b, mesh)
}

/// Outcome of the homology test on a planar family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomologyVerdict {
    pub condition_a: bool,
    pub closure: ClosureIntersection,
    /// Winding of the central image around each admissible probe.
    pub central_image_winding: Vec<ProbeWinding>,
    pub condition_iii: bool,
    /// Some probe off the union of closed discs certifies a nonzero class.
    pub certified_by_probe: bool,
    pub routes_agree: bool,
    pub probes_used: usize,
    /// When the discs share a point: the zero count there is positive at
    /// every sampled parameter.
    pub common_point_counts_positive: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeWinding {
    pub b: Complex64,
    pub winding: i64,
}

/// Raster of the union of the closed discs `G(Sigma)`.
pub(crate) fn hull_raster(family: &DiscFamily, cells: usize, boundary_points: usize) -> Raster {
    let polygons: Vec<Vec<Complex64>> = (0..family.node_count())
        .into_par_iter()
        .map(|j| {
            let c = &family.taylor_data()[j][0];
            (0..boundary_points)
                .map(|i| poly::horner(c, Complex64::from_polar(1.0, TAU * i as f64 / boundary_points as f64)))
                .collect()
        })
        .collect();
    let (lo, hi) = bounding_box(polygons.iter().flatten());
    let diam = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
    let cell = diam / cells as f64;
    let pad = Complex64::new(4.0 * cell, 4.0 * cell);
    let mut raster = Raster::new(lo - pad, hi + pad, cell);
    let (nx, ny) = raster.shape();
    let mask = polygons
        .par_iter()
        .fold(
            || vec![false; nx * ny],
            |mut acc, poly| {
                for (a, m) in acc.iter_mut().zip(raster.polygon_mask(poly)) {
                    *a |= m;
                }
                acc
            },
        )
        .reduce(|| vec![false; nx * ny], |a, b| a.iter().zip(b).map(|(x, y)| *x || y).collect());
    raster.set_all(true);
    raster.intersect(&mask);
    raster
}

/// Condition (a) from the closure intersection and condition (iii) from
/// the winding of the central image `t -> G(0, t)` around probes off the
/// union of closed discs; the two agree on planar families.
pub fn homology_test(family: &DiscFamily) -> Result<HomologyVerdict> {
    if family.dim() != 1 {
        return Err(Error::Config("the homology test is planar; n = 2 families carry fixed flags".into()));
    }
    let closure = closure_intersection_empty(family)?;
    let condition_a = closure.empty;
    let periodic = family.params().kind == ParamKind::Circle;

    let hull = hull_raster(family, 256, 256);
    let (lo, hi) = {
        let cells = hull.set_cells();
        bounding_box(cells.iter())
    };
    let center = (lo + hi) * 0.5;
    let diam = (hi - lo).norm();
    let mut probes: Vec<Complex64> = (0..64)
        .map(|k| center + Complex64::from_polar(2.0 * diam, TAU * k as f64 / 64.0))
        .collect();
    for comp in hull.complement_components() {
        if !comp.touches_edge && !hull.near_boundary(comp.representative, 2.0 * hull.cell_size()) {
            probes.push(comp.representative);
        }
    }

    // central image, closed by a chord on interval families
    let count = 4 * family.node_count().max(256);
    let mut central: Vec<Complex64> = (0..count)
        .map(|k| {
            let t = if periodic {
                TAU * k as f64 / count as f64
            } else {
                k as f64 / (count - 1) as f64
            };
            family.planar_jet(Complex64::new(0.0, 0.0), t).0
        })
        .collect();
    if !periodic {
        let (a, b) = (*central.last().unwrap(), central[0]);
        let mesh = (central[1] - central[0]).norm().max(1e-12);
        let steps = ((a - b).norm() / mesh).ceil() as usize;
        for s in 1..steps {
            central.push(a + (b - a) * (s as f64 / steps as f64));
        }
    }
    let mesh = (0..central.len())
        .map(|i| (central[(i + 1) % central.len()] - central[i]).norm())
        .fold(0.0, f64::max);
    let central_image_winding: Vec<ProbeWinding> = probes
        .iter()
        .filter_map(|b| closed_winding(&central, *b, mesh).ok().map(|w| ProbeWinding { b: *b, winding: w }))
        .collect();

    let certified_by_probe = if periodic {
        central_image_winding.iter().any(|p| p.winding != 0)
    } else {
        // the relative class is nontrivial when the end discs are disjoint
        let ends = [0, family.node_count() - 1].map(|j| {
            let c = &family.taylor_data()[j][0];
            (0..256)
                .map(|i| poly::horner(c, Complex64::from_polar(1.0, TAU * i as f64 / 256.0)))
                .collect::<Vec<_>>()
        });
        let disjoint = end_discs_disjoint(&ends[0], &ends[1]);
        disjoint || central_image_winding.iter().any(|p| p.winding != 0)
    };

    let common_point_counts_positive = match (condition_a, closure.witness) {
        (false, Some(w)) => {
            let stride = (family.node_count() / 64).max(1);
            let ok = (0..family.node_count())
                .step_by(stride)
                .map(|j| zero_count_integral(family, w, family.node(j).t[0]))
                .all(|r| matches!(r, Ok(n) if n >= 1));
            Some(ok)
        }
        _ => None,
    };

    Ok(HomologyVerdict {
        condition_a,
        closure,
        probes_used: probes.len(),
        central_image_winding,
        condition_iii: condition_a,
        certified_by_probe,
        routes_agree: certified_by_probe == condition_a,
        common_point_counts_positive,
    })
}

/// Two Jordan polygons bound disjoint closed regions: no vertex of either
/// lies inside or on the other and the boundaries do not cross.
fn end_discs_disjoint(a: &[Complex64], b: &[Complex64]) -> bool {
    let inside = |poly: &[Complex64], z: Complex64| -> bool {
        let mesh = (0..poly.len()).map(|i| (poly[(i + 1) % poly.len()] - poly[i]).norm()).fold(0.0, f64::max);
        matches!(closed_winding(poly, z, mesh * 0.1), Ok(w) if w != 0)
    };
    let (alo, ahi) = bounding_box(a.iter());
    let (blo, bhi) = bounding_box(b.iter());
    let gap = (blo.re - ahi.re).max(alo.re - bhi.re).max(blo.im - ahi.im).max(alo.im - bhi.im);
    if gap > 0.0 {
        return true;
    }
    let min_dist = a
        .iter()
        .map(|z| b.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    let mesh = (0..a.len()).map(|i| (a[(i + 1) % a.len()] - a[i]).norm()).fold(0.0, f64::max);
    min_dist > 2.0 * mesh && !inside(a, b[0]) && !inside(b, a[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_rotating_circles, build_translated_circles};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn central_fiber_of_rotating_circles() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        let fibers = trace_fiber(&fam, c(0.0, 0.0)).unwrap();
        assert_eq!(fibers.len(), 1);
        let f = &fibers[0];
        assert!(f.closed && !f.hit_boundary);
        for (z, t) in &f.samples {
            assert!((z + Complex64::from_polar(0.5, *t)).norm() < 1e-8);
        }
        assert!((f.samples.last().unwrap().1 - TAU).abs() < 1e-12);
    }

    #[test]
    fn far_values_have_empty_fibers() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        assert!(trace_fiber(&fam, c(4.0, 1.0)).unwrap().is_empty());
    }

    #[test]
    fn translated_fiber_exits() {
        let fam = build_translated_circles(1.0, &[c(0.0, 0.0), c(3.0, 0.0)], 64).unwrap();
        let b = c(0.5, 0.3);
        let fibers = trace_fiber(&fam, b).unwrap();
        assert_eq!(fibers.len(), 1);
        let f = &fibers[0];
        assert!(f.hit_boundary && !f.closed);
        assert!(f.defect(&fam) < 1e-10);
        let (z_end, t_end) = *f.samples.last().unwrap();
        assert!((z_end.norm() - 1.0).abs() < 1e-8);
        // exits when |b - 3t| = 1
        let expect = (0.5 + (1.0f64 - 0.09).sqrt()) / 3.0;
        assert!((t_end - expect).abs() < 1e-6, "{t_end} vs {expect}");
    }

    #[test]
    fn degree_examples() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        let map = BoundaryMap::new(&fam).unwrap();
        let pre = map.preimages(c(2.0, 0.0)).unwrap();
        assert_eq!(pre.len(), 2, "{pre:?}");
        assert!(pre[0].det * pre[1].det < 0.0);
        assert_eq!(map.degree(c(2.0, 0.0)).unwrap(), 0);
        assert_eq!(map.degree(c(0.3, -1.7)).unwrap(), 0);
        assert_eq!(map.degree_excluding(c(2.0, 0.0), Some((c(-1.0, 0.0), 0.5))).unwrap(), 0);
    }

    #[test]
    fn zero_counts() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert_eq!(zero_count_integral(&fam, c(0.0, 0.0), t).unwrap(), 1);
            assert_eq!(zero_count_integral(&fam, c(5.0, 0.0), t).unwrap(), 0);
            assert_eq!(interior_roots(&fam, c(0.0, 0.0), t).unwrap().len(), 1);
        }
    }

    #[test]
    fn homology_examples() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        let h = homology_test(&fam).unwrap();
        assert!(!h.condition_a && !h.condition_iii && h.routes_agree);
        assert_eq!(h.common_point_counts_positive, Some(true));

        let fam = build_rotating_circles(2.0, 1.0, 64).unwrap();
        let h = homology_test(&fam).unwrap();
        assert!(h.condition_a && h.certified_by_probe, "{:?}", h.central_image_winding.iter().filter(|p| p.winding != 0).collect::<Vec<_>>());
        assert!(h.central_image_winding.iter().any(|p| p.b.norm() < 0.1 && p.winding == 1));

        let fam = build_translated_circles(1.0, &[c(0.0, 0.0), c(3.0, 0.0)], 64).unwrap();
        let h = homology_test(&fam).unwrap();
        assert!(h.condition_a && h.condition_iii && h.routes_agree);
    }
}
