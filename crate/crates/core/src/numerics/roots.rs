//! Argument-principle root isolation for polynomials.
//!
//! Roots are isolated by recursive subdivision of a square covering the
//! disc, counting zeros in each cell through the winding of `p` along the
//! cell boundary, then polished by Newton iteration. Cells that shrink
//! below the cluster size with a count above one are reported as a single
//! root of that multiplicity.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::poly;
use crate::error::{Error, Result};

/// Root location with its multiplicity (winding count of the isolating cell).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyRoot {
    pub z: Complex64,
    pub multiplicity: usize,
}

const MAX_REFINE_DEPTH: u32 = 48;

/// Total argument change of `f(s)` for `s` running over `[s0, s1]`,
/// refining adaptively wherever the image turns or shrinks too fast.
///
/// Fails with [`Error::NearSingularWinding`] when `f` vanishes (to
/// resolution) on the path.
pub fn adaptive_argument_change(
    f: &impl Fn(f64) -> Complex64,
    s0: f64,
    s1: f64,
    initial: usize,
) -> Result<f64> {
    let initial = initial.max(2);
    let mut total = 0.0;
    let h = (s1 - s0) / initial as f64;
    let mut prev_s = s0;
    let mut prev_v = f(s0);
    check_value(prev_v, s0)?;
    for i in 1..=initial {
        let s = if i == initial { s1 } else { s0 + h * i as f64 };
        let v = f(s);
        check_value(v, s)?;
        total += refine_segment(f, prev_s, prev_v, s, v, 0)?;
        prev_s = s;
        prev_v = v;
    }
    Ok(total)
}

fn check_value(v: Complex64, s: f64) -> Result<()> {
    if !(v.norm() > 1e-280) || !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::NearSingularWinding {
            point: Complex64::new(s, 0.0),
            distance: v.norm(),
            mesh: 0.0,
        });
    }
    Ok(())
}

fn refine_segment(
    f: &impl Fn(f64) -> Complex64,
    sa: f64,
    va: Complex64,
    sb: f64,
    vb: Complex64,
    depth: u32,
) -> Result<f64> {
    // endpoints alone can alias a full turn past a close root pair, so the
    // midpoint has to agree with both halves too
    let sm = 0.5 * (sa + sb);
    let vm = f(sm);
    check_value(vm, sm)?;
    if let (Some(d1), Some(d2)) = (tame(va, vm), tame(vm, vb)) {
        if tame(va, vb).is_some() {
            return Ok(d1 + d2);
        }
    }
    if depth >= MAX_REFINE_DEPTH {
        return Err(Error::NearSingularWinding {
            point: Complex64::new(sm, 0.0),
            distance: va.norm().min(vb.norm()).min(vm.norm()),
            mesh: (sb - sa).abs(),
        });
    }
    Ok(refine_segment(f, sa, va, sm, vm, depth + 1)? + refine_segment(f, sm, vm, sb, vb, depth + 1)?)
}

/// Argument step from `va` to `vb` when it is small enough to trust.
fn tame(va: Complex64, vb: Complex64) -> Option<f64> {
    let darg = (vb / va).arg();
    let small = va.norm().min(vb.norm());
    (darg.abs() < PI / 8.0 && (vb - va).norm() < 0.5 * small).then_some(darg)
}

/// Zero count of the polynomial inside the circle `|z - center| = radius`.
pub fn count_in_circle(coeffs: &[Complex64], center: Complex64, radius: f64) -> Result<i64> {
    let f = |s: f64| poly::horner(coeffs, center + Complex64::from_polar(radius, 2.0 * PI * s));
    let turns = adaptive_argument_change(&f, 0.0, 1.0, 4 * coeffs.len().max(16))? / (2.0 * PI);
    super::round_winding(turns)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: Complex64,
    w: f64,
    h: f64,
    count: i64,
}

impl Cell {
    fn size(&self) -> f64 {
        self.w.max(self.h)
    }

    fn centre(&self) -> Complex64 {
        self.lo + Complex64::new(0.5 * self.w, 0.5 * self.h)
    }
}

fn count_in_rect(coeffs: &[Complex64], lo: Complex64, w: f64, h: f64) -> Result<i64> {
    let corners = [
        lo,
        lo + Complex64::new(w, 0.0),
        lo + Complex64::new(w, h),
        lo + Complex64::new(0.0, h),
    ];
    let per_edge = (coeffs.len() + 8).min(64);
    let mut total = 0.0;
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        let f = |s: f64| poly::horner(coeffs, a + (b - a) * s);
        total += adaptive_argument_change(&f, 0.0, 1.0, per_edge)?;
    }
    super::round_winding(total / (2.0 * PI))
}

// Off-centre split ratios so that lattice points such as 0 or +-1/2 never sit
// on a cell edge; later entries are retries when an edge grazes a root.
const SPLITS: [f64; 4] = [0.513_717_2, 0.479_313_9, 0.537_101_7, 0.461_930_3];

fn split(coeffs: &[Complex64], cell: Cell) -> Result<Vec<Cell>> {
    let mut last_err = None;
    for &ratio in &SPLITS {
        let (aw, ah) = (cell.w * ratio, cell.h * ratio);
        let (bw, bh) = (cell.w - aw, cell.h - ah);
        let parts = [
            (cell.lo, aw, ah),
            (cell.lo + Complex64::new(aw, 0.0), bw, ah),
            (cell.lo + Complex64::new(0.0, ah), aw, bh),
            (cell.lo + Complex64::new(aw, ah), bw, bh),
        ];
        let mut out = Vec::with_capacity(4);
        let mut total = 0;
        let mut failed = false;
        for (lo, w, h) in parts {
            match count_in_rect(coeffs, lo, w, h) {
                Ok(count) => {
                    total += count;
                    if count > 0 {
                        out.push(Cell { lo, w, h, count });
                    }
                }
                Err(e) => {
                    failed = true;
                    last_err = Some(e);
                    break;
                }
            }
        }
        if !failed && total == cell.count {
            return Ok(out);
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::RootFinder(format!(
            "inconsistent child counts for cell at {} (size {:.3e})",
            cell.lo,
            cell.size()
        ))
    }))
}

fn newton(coeffs: &[Complex64], start: Complex64, order: usize) -> Option<Complex64> {
    // Newton on the (order)-th derivative, used to polish clusters
    let mut p = coeffs.to_vec();
    for _ in 0..order {
        p = poly::derivative(&p);
    }
    if p.is_empty() {
        return None;
    }
    let mut z = start;
    for _ in 0..80 {
        let (v, dv) = poly::horner_with_derivative(&p, z);
        if v.norm() == 0.0 {
            return Some(z);
        }
        if dv.norm() == 0.0 {
            return None;
        }
        let step = v / dv;
        z -= step;
        if !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    Some(z)
}

fn inside(cell: &Cell, z: Complex64, pad: f64) -> bool {
    z.re >= cell.lo.re - pad
        && z.re <= cell.lo.re + cell.w + pad
        && z.im >= cell.lo.im - pad
        && z.im <= cell.lo.im + cell.h + pad
}

/// Options for [`roots_in_disc`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Cells below this size with count > 1 become a multiple root.
    pub cluster_size: f64,
    /// Extra margin around the disc that the search square covers.
    pub margin: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            cluster_size: 1e-7,
            margin: 2e-3,
        }
    }
}

/// All roots of `p` in the closed disc `|z| <= radius` (plus the search
/// margin), with multiplicities.
pub fn roots_in_disc(coeffs: &[Complex64], radius: f64, opts: RootOptions) -> Result<Vec<PolyRoot>> {
    if coeffs.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::RootFinder("polynomial is identically zero".into()));
    }
    let mut roots = Vec::new();
    // exact zeros at the origin are stripped before subdivision
    let lead = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    if lead > 0 {
        roots.push(PolyRoot {
            z: Complex64::new(0.0, 0.0),
            multiplicity: lead,
        });
    }
    let reduced = &coeffs[lead..];
    if reduced.len() <= 1 {
        return Ok(roots);
    }
    let half = radius + opts.margin;
    let lo = Complex64::new(-half + 1.37e-4 * radius, -half + 0.71e-4 * radius);
    let size = 2.0 * half;
    let count = count_in_rect(reduced, lo, size, size)?;
    let mut stack = Vec::new();
    if count > 0 {
        stack.push(Cell {
            lo,
            w: size,
            h: size,
            count,
        });
    }
    let cluster = opts.cluster_size * radius.max(1.0);
    while let Some(cell) = stack.pop() {
        if cell.count == 1 && cell.size() < 0.25 * radius {
            if let Some(z) = newton(reduced, cell.centre(), 0) {
                if inside(&cell, z, 1e-12 * radius) {
                    roots.push(PolyRoot { z, multiplicity: 1 });
                    continue;
                }
            }
        }
        if cell.size() < cluster {
            let m = cell.count as usize;
            let z = newton(reduced, cell.centre(), m - 1)
                .filter(|z| inside(&cell, *z, cell.size()))
                .unwrap_or_else(|| cell.centre());
            roots.push(PolyRoot { z, multiplicity: m });
            continue;
        }
        match split(reduced, cell) {
            Ok(children) => stack.extend(children),
            // a near-multiple root grazed by every split line: accept the
            // small cell as one cluster rather than give up
            Err(_) if cell.size() < 1e-2 * radius => {
                let m = cell.count as usize;
                let z = newton(reduced, cell.centre(), m.saturating_sub(1))
                    .filter(|z| inside(&cell, *z, cell.size()))
                    .unwrap_or_else(|| cell.centre());
                roots.push(PolyRoot { z, multiplicity: m });
            }
            Err(e) => return Err(e),
        }
    }
    let merged = merge_clusters(roots, 10.0 * opts.cluster_size * radius.max(1.0));
    let limit = radius + opts.margin;
    Ok(merged.into_iter().filter(|r| r.z.norm() <= limit).collect())
}

fn merge_clusters(mut roots: Vec<PolyRoot>, tol: f64) -> Vec<PolyRoot> {
    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    let mut out: Vec<PolyRoot> = Vec::new();
    for r in roots {
        if let Some(m) = out.iter_mut().find(|m| (m.z - r.z).norm() < tol) {
            let total = (m.multiplicity + r.multiplicity) as f64;
            m.z = (m.z * m.multiplicity as f64 + r.z * r.multiplicity as f64) / total;
            m.multiplicity += r.multiplicity;
        } else {
            out.push(r);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(rs: &[Complex64]) -> Vec<Complex64> {
        rs.iter()
            .fold(vec![c(1.0, 0.0)], |acc, r| poly::mul(&acc, &[-r, c(1.0, 0.0)]))
    }

    #[test]
    fn finds_simple_roots_inside_only() {
        let rs = [c(0.3, 0.2), c(-0.5, 0.1), c(0.0, -0.8), c(1.7, 0.0), c(-2.0, 1.0)];
        let p = from_roots(&rs);
        let mut found = roots_in_disc(&p, 1.0, RootOptions::default()).unwrap();
        found.sort_by(|a, b| a.z.re.total_cmp(&b.z.re));
        assert_eq!(found.len(), 3);
        for r in &found {
            assert_eq!(r.multiplicity, 1);
            assert!(rs[..3].iter().any(|t| (t - r.z).norm() < 1e-12), "{r:?}");
        }
    }

    #[test]
    fn origin_and_double_roots() {
        // zeta^2 (zeta - 0.5)^2 (zeta + 0.25i)
        let p = from_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, -0.25)]);
        let mut p = p;
        p[0] = c(0.0, 0.0);
        p[1] = c(0.0, 0.0);
        let found = roots_in_disc(&p, 1.0, RootOptions::default()).unwrap();
        let total: usize = found.iter().map(|r| r.multiplicity).sum();
        assert_eq!(total, 5);
        let at = |z: Complex64| found.iter().find(|r| (r.z - z).norm() < 1e-6).map(|r| r.multiplicity);
        assert_eq!(at(c(0.0, 0.0)), Some(2));
        assert_eq!(at(c(0.5, 0.0)), Some(2));
        assert_eq!(at(c(0.0, -0.25)), Some(1));
    }

    #[test]
    fn roots_on_the_unit_circle_are_found() {
        let rs = [c(1.0, 0.0), c(-1.0, 0.0), Complex64::from_polar(1.0, 2.0)];
        let p = from_roots(&rs);
        let found = roots_in_disc(&p, 1.0, RootOptions::default()).unwrap();
        assert_eq!(found.len(), 3);
        for r in &found {
            assert!((r.z.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn circle_count_matches() {
        let p = from_roots(&[c(0.1, 0.0), c(0.9, 0.0), c(0.0, 2.0)]);
        assert_eq!(count_in_circle(&p, c(0.0, 0.0), 1.0).unwrap(), 2);
        assert_eq!(count_in_circle(&p, c(0.0, 0.0), 0.5).unwrap(), 1);
        assert_eq!(count_in_circle(&p, c(0.0, 0.0), 3.0).unwrap(), 3);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert!(roots_in_disc(&[c(0.0, 0.0); 3], 1.0, RootOptions::default()).is_err());
    }
}
