//! Rank audits of `dG` and the closure-intersection test.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::raster::{nearest, Raster};
use super::{DiscFamily, ParamPoint};
use crate::error::{Error, Result};
use crate::numerics::poly;

/// Sampling density of [`regularity_audit_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub radial: usize,
    pub angular: usize,
    pub boundary_angular: usize,
    /// Parameter nodes are strided down to at most this many.
    pub max_param_samples: usize,
    /// Raster cells across the image for the boundary-of-Omega check.
    pub raster_cells: usize,
    pub rank_threshold: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            radial: 8,
            angular: 32,
            boundary_angular: 64,
            max_param_samples: 256,
            raster_cells: 256,
            rank_threshold: 1e-8,
        }
    }
}

/// Counts of boundary samples whose rank is `k`, `k - 1`, or lower.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankHistogram {
    pub full: usize,
    pub one_short: usize,
    pub lower: usize,
}

impl RankHistogram {
    pub fn total(&self) -> usize {
        self.full + self.one_short + self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub interior_rank_ok: bool,
    /// Expected rank `k` of `dG` on the boundary manifold.
    pub boundary_rank: usize,
    pub boundary_rank_histogram: RankHistogram,
    /// Every rank-deficient boundary sample maps near the boundary of Omega.
    /// Vacuously true when no deficient samples exist; false for n = 2 when
    /// some exist (the planar raster check does not apply there).
    pub critical_on_boundary: bool,
    /// Minimum over interior samples of the 2n-volume of `dG`.
    pub min_interior_jacobian: f64,
    pub singular_scale: f64,
    pub samples: usize,
}

fn to_real(columns: &[Vec<Complex64>]) -> DMatrix<f64> {
    let rows = 2 * columns[0].len();
    DMatrix::from_fn(rows, columns.len(), |r, c| {
        let v = columns[c][r / 2];
        if r % 2 == 0 {
            v.re
        } else {
            v.im
        }
    })
}

fn singular_values(columns: &[Vec<Complex64>]) -> Vec<f64> {
    let mut s: Vec<f64> = to_real(columns).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn sampled_nodes(family: &DiscFamily, max: usize) -> Vec<ParamPoint> {
    let stride = family.node_count().div_ceil(max.max(1)).max(1);
    (0..family.node_count()).step_by(stride).map(|j| family.node(j)).collect()
}

/// Boundary frame columns `d_psi G, d_t1 G, ...` at `(e^{i psi}, p)`.
fn boundary_columns(family: &DiscFamily, psi: f64, p: &ParamPoint) -> Vec<Vec<Complex64>> {
    let zeta = Complex64::from_polar(1.0, psi);
    let mut cols = vec![family
        .d_zeta_raw(zeta, p)
        .into_iter()
        .map(|d| Complex64::i() * zeta * d)
        .collect::<Vec<_>>()];
    for axis in 0..family.params().axes() {
        cols.push(family.d_t_raw(zeta, p, axis));
    }
    cols
}

/// `det[grad G, grad conj G]` on the boundary of a planar family, with the
/// gradient taken in the frame `(d_t, d_psi)`:
/// `G_t conj(G_psi) - G_psi conj(G_t)`.
pub fn boundary_jacobian(family: &DiscFamily, psi: f64, t: f64) -> Complex64 {
    let p = ParamPoint::scalar(t);
    let cols = boundary_columns(family, psi, &p);
    let (g_psi, g_t) = (cols[0][0], cols[1][0]);
    g_t * g_psi.conj() - g_psi * g_t.conj()
}

pub fn regularity_audit(family: &DiscFamily) -> RegularityReport {
    regularity_audit_with(family, &AuditOptions::default())
}

pub fn regularity_audit_with(family: &DiscFamily, opts: &AuditOptions) -> RegularityReport {
    let n = family.dim();
    let k = if n == 1 { 2 } else { 3 };
    let nodes = sampled_nodes(family, opts.max_param_samples);

    // interior: columns d_x G, d_y G, d_t G
    let interior: Vec<Vec<f64>> = nodes
        .par_iter()
        .flat_map_iter(|p| {
            let coeffs = family.coeffs_at(p);
            let dcoeffs: Vec<Vec<Vec<Complex64>>> = (0..family.params().axes()).map(|a| family.dt_coeffs_at(p, a)).collect();
            let mut out = Vec::with_capacity(opts.radial * opts.angular);
            for i in 0..opts.radial {
                let r = i as f64 / opts.radial as f64;
                for m in 0..opts.angular {
                    let z = Complex64::from_polar(r, 2.0 * PI * m as f64 / opts.angular as f64);
                    let gz: Vec<Complex64> = coeffs.iter().map(|c| poly::horner_with_derivative(c, z).1).collect();
                    let mut cols = vec![gz.clone(), gz.iter().map(|d| Complex64::i() * d).collect()];
                    for d in &dcoeffs {
                        cols.push(d.iter().map(|c| poly::horner(c, z)).collect());
                    }
                    out.push(singular_values(&cols));
                }
            }
            out
        })
        .collect();

    let boundary: Vec<(Complex64, Vec<Complex64>, Vec<f64>)> = nodes
        .par_iter()
        .flat_map_iter(|p| {
            (0..opts.boundary_angular)
                .map(|m| {
                    let psi = 2.0 * PI * m as f64 / opts.boundary_angular as f64;
                    let zeta = Complex64::from_polar(1.0, psi);
                    let cols = boundary_columns(family, psi, p);
                    (zeta, family.eval_raw(zeta, p), singular_values(&cols))
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let scale = interior
        .iter()
        .chain(boundary.iter().map(|b| &b.2))
        .map(|s| s[0])
        .fold(0.0, f64::max)
        .max(1e-300);
    let tol = opts.rank_threshold * scale;

    let interior_rank_ok = interior.iter().all(|s| s.len() >= 2 * n && s[2 * n - 1] > tol);
    let min_interior_jacobian = interior
        .iter()
        .map(|s| s.iter().take(2 * n).product::<f64>())
        .fold(f64::INFINITY, f64::min);

    let mut hist = RankHistogram::default();
    let mut deficient = Vec::new();
    for (_, image, s) in &boundary {
        let rank = s.iter().filter(|v| **v > tol).count();
        if rank >= k {
            hist.full += 1;
        } else {
            if rank + 1 == k {
                hist.one_short += 1;
            } else {
                hist.lower += 1;
            }
            deficient.push(image.clone());
        }
    }

    let critical_on_boundary = if deficient.is_empty() {
        true
    } else if n == 1 {
        let raster = omega_raster(family, opts.raster_cells);
        let tol = 2.0 * raster.cell_size();
        deficient.iter().all(|z| raster.near_boundary(z[0], tol))
    } else {
        false
    };

    RegularityReport {
        interior_rank_ok,
        boundary_rank: k,
        boundary_rank_histogram: hist,
        critical_on_boundary,
        min_interior_jacobian,
        singular_scale: scale,
        samples: boundary.len(),
    }
}

/// Painted raster of `Omega = G(b Sigma)` for a planar family.
pub(crate) fn omega_raster(family: &DiscFamily, cells: usize) -> Raster {
    let m = 256;
    let images: Vec<Vec<Complex64>> = (0..family.node_count())
        .into_par_iter()
        .map(|j| {
            let c = &family.taylor_data()[j][0];
            (0..m)
                .map(|i| poly::horner(c, Complex64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64)))
                .collect()
        })
        .collect();
    let (lo, hi) = bounding_box(images.iter().flatten());
    let diam = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
    let cell = diam / cells as f64;
    let pad = Complex64::new(3.0 * cell, 3.0 * cell);
    let mut raster = Raster::new(lo - pad, hi + pad, cell);
    let periodic = family.params().kind == super::ParamKind::Circle;
    for (j, curve) in images.iter().enumerate() {
        for i in 0..m {
            raster.paint_segment(curve[i], curve[(i + 1) % m]);
        }
        let next = if j + 1 < images.len() {
            Some(&images[j + 1])
        } else if periodic {
            Some(&images[0])
        } else {
            None
        };
        if let Some(next) = next {
            for i in 0..m {
                raster.paint_segment(curve[i], next[i]);
            }
        }
    }
    raster
}

pub(crate) fn bounding_box<'a>(points: impl Iterator<Item = &'a Complex64>) -> (Complex64, Complex64) {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for z in points {
        lo.re = lo.re.min(z.re);
        lo.im = lo.im.min(z.im);
        hi.re = hi.re.max(z.re);
        hi.im = hi.im.max(z.im);
    }
    (lo, hi)
}

/// Outcome of the rasterized intersection of all closed discs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureIntersection {
    pub empty: bool,
    pub witness: Option<Complex64>,
    pub surviving_cells: usize,
    pub cell_size: f64,
    pub resolution: usize,
}

/// Whether the closed discs `D_t` share no point, decided on a raster of
/// `512^2` cells over the first disc.
pub fn closure_intersection_empty(family: &DiscFamily) -> Result<ClosureIntersection> {
    closure_intersection_with(family, 512, 256)
}

pub(crate) fn closure_intersection_with(family: &DiscFamily, resolution: usize, boundary_points: usize) -> Result<ClosureIntersection> {
    if family.dim() != 1 {
        return Err(Error::Config("closure intersection is implemented for planar families".into()));
    }
    let polygon = |j: usize| -> Vec<Complex64> {
        let c = &family.taylor_data()[j][0];
        (0..boundary_points)
            .map(|i| poly::horner(c, Complex64::from_polar(1.0, 2.0 * PI * i as f64 / boundary_points as f64)))
            .collect()
    };
    let first = polygon(0);
    let (lo, hi) = bounding_box(first.iter());
    let diam = (hi.re - lo.re).max(hi.im - lo.im);
    let cell = diam / resolution as f64;
    let mut raster = Raster::new(lo, hi, cell);
    raster.fill_polygon(&first);
    let mask = (1..family.node_count())
        .into_par_iter()
        .fold(
            || None::<Vec<bool>>,
            |acc, j| {
                let m = raster.polygon_mask(&polygon(j));
                Some(match acc {
                    None => m,
                    Some(a) => a.iter().zip(m).map(|(x, y)| *x && y).collect(),
                })
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| *x && y).collect()),
                (a, None) => a,
                (None, b) => b,
            },
        );
    if let Some(mask) = mask {
        raster.intersect(&mask);
    }
    let cells = raster.set_cells();
    let witness = if cells.is_empty() {
        None
    } else {
        let centroid = cells.iter().sum::<Complex64>() / cells.len() as f64;
        nearest(&cells, centroid)
    };
    Ok(ClosureIntersection {
        empty: cells.is_empty(),
        witness,
        surviving_cells: cells.len(),
        cell_size: cell,
        resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn rotating_circle_boundary_jacobian() {
        let fam = build_rotating_circles(1.0, 2.0, 32).unwrap();
        for &(psi, t) in &[(0.3, 1.1), (2.0, 0.5), (4.4, 4.4)] {
            let expect = Complex64::new(0.0, 4.0 * f64::sin(t - psi));
            assert!((boundary_jacobian(&fam, psi, t) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn rotating_circles_audit() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        let rep = regularity_audit(&fam);
        assert!(rep.interior_rank_ok);
        assert!(rep.boundary_rank_histogram.one_short > 0);
        assert_eq!(rep.boundary_rank_histogram.total(), rep.samples);
        assert!(rep.critical_on_boundary);

        let still = build_rotating_circles(0.0, 1.0, 16).unwrap();
        let rep = regularity_audit(&still);
        assert!(rep.interior_rank_ok);
        assert_eq!(rep.boundary_rank_histogram.full, 0);
    }

    #[test]
    fn closure_examples() {
        let fam = build_rotating_circles(1.0, 2.0, 64).unwrap();
        let c = closure_intersection_empty(&fam).unwrap();
        assert!(!c.empty);
        assert!(c.witness.unwrap().norm() < 1e-2);
        let far = build_rotating_circles(2.0, 1.0, 64).unwrap();
        assert!(closure_intersection_empty(&far).unwrap().empty);
        let line = build_translated_circles(1.0, &[Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)], 32).unwrap();
        assert!(closure_intersection_empty(&line).unwrap().empty);
    }
}
