//! Holomorphic extension of boundary traces along each disc.
//!
//! For every parameter node the trace `psi -> f(g_t(e^{i psi}))` is
//! transformed; the nonnegative modes define `F(., t)` and the l2 norm of
//! the negative modes measures the obstruction.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{DiscFamily, ParamPoint};
use crate::function::BoundaryFunction;
use crate::numerics::interp::CENTRAL6;
use crate::numerics::{fourier_coeffs, poly, CircleSamples, PeriodicGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    /// Circle grid size `N`.
    pub circle_points: usize,
    /// `residual < rel_tolerance * rms(trace)` counts as extendible.
    pub rel_tolerance: f64,
    /// Step of the sixth-order central differences in `t`.
    pub dt_step: f64,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        Self {
            circle_points: 256,
            rel_tolerance: 1e-8,
            dt_step: 1e-3,
        }
    }
}

/// Extension data at one parameter node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeExtension {
    /// Taylor coefficients `c_k`, `k = 0 .. N/2 - 1`.
    pub coeffs: Vec<Complex64>,
    pub residual: f64,
    pub rms: f64,
}

#[derive(Debug, Clone)]
pub struct ExtensionField {
    family: DiscFamily,
    function: Arc<BoundaryFunction>,
    grid: PeriodicGrid,
    opts: ExtensionOptions,
    nodes: Vec<NodeExtension>,
}

fn trace_spectrum(
    family: &DiscFamily,
    f: &BoundaryFunction,
    grid: PeriodicGrid,
    p: &ParamPoint,
    node: usize,
) -> Result<NodeExtension> {
    let coeffs = family.coeffs_at(p);
    let mut values = Vec::with_capacity(grid.size());
    let mut point = vec![Complex64::new(0.0, 0.0); coeffs.len()];
    for zeta in grid.unit_points() {
        for (slot, c) in point.iter_mut().zip(&coeffs) {
            *slot = poly::horner(c, zeta);
        }
        let v = f.eval(&point);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::FunctionSingular { zeta, node });
        }
        values.push(v);
    }
    let rms = (values.iter().map(|v| v.norm_sqr()).sum::<f64>() / values.len() as f64).sqrt();
    let spectrum = fourier_coeffs(&CircleSamples::new(grid, values)?)?;
    Ok(NodeExtension {
        coeffs: spectrum.nonnegative().to_vec(),
        residual: spectrum.negative_l2(),
        rms,
    })
}

/// Per-node extension analysis of `f` along `family`.
pub fn analyze(f: &BoundaryFunction, family: &DiscFamily) -> Result<ExtensionField> {
    analyze_with(f, family, ExtensionOptions::default())
}

pub fn analyze_with(f: &BoundaryFunction, family: &DiscFamily, opts: ExtensionOptions) -> Result<ExtensionField> {
    if f.dim() != family.dim() {
        return Err(Error::Config(format!(
            "function is defined on C^{} but the family lives in C^{}",
            f.dim(),
            family.dim()
        )));
    }
    let grid = PeriodicGrid::new(opts.circle_points)?;
    let nodes = (0..family.node_count())
        .into_par_iter()
        .map(|j| trace_spectrum(family, f, grid, &family.node(j), j))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtensionField {
        family: family.clone(),
        function: Arc::new(f.clone()),
        grid,
        opts,
        nodes,
    })
}

impl ExtensionField {
    pub fn family(&self) -> &DiscFamily {
        &self.family
    }

    pub fn function(&self) -> &BoundaryFunction {
        &self.function
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn options(&self) -> ExtensionOptions {
        self.opts
    }

    pub fn nodes(&self) -> &[NodeExtension] {
        &self.nodes
    }

    /// `max_t residual_t`.
    pub fn residual(&self) -> f64 {
        self.nodes.iter().map(|n| n.residual).fold(0.0, f64::max)
    }

    fn tolerance(&self, node: &NodeExtension) -> f64 {
        self.opts.rel_tolerance * node.rms
    }

    /// First node whose residual is above tolerance.
    pub fn first_failure(&self) -> Option<Error> {
        self.nodes.iter().enumerate().find_map(|(j, n)| {
            (n.residual > self.tolerance(n)).then(|| Error::NoExtension {
                node: j,
                residual: n.residual,
                tolerance: self.tolerance(n),
            })
        })
    }

    /// Condition (*) at every node.
    pub fn extends(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn node_coeffs(&self, j: usize) -> Result<&[Complex64]> {
        let n = &self.nodes[j];
        if n.residual > self.tolerance(n) {
            return Err(Error::NoExtension {
                node: j,
                residual: n.residual,
                tolerance: self.tolerance(n),
            });
        }
        Ok(&n.coeffs)
    }

    fn nearest_node(&self, p: &ParamPoint) -> usize {
        let params = self.family.params();
        match params.kind {
            crate::family::ParamKind::Box3 => 0,
            _ => {
                let j = (p.t[0] / params.spacing()).round() as i64;
                j.rem_euclid(self.nodes.len() as i64) as usize
            }
        }
    }

    /// Extension coefficients at an arbitrary parameter point (computed on
    /// demand from the trace there).
    pub fn coeffs_at(&self, p: &ParamPoint) -> Result<Vec<Complex64>> {
        let node = self.nearest_node(p);
        let ext = trace_spectrum(&self.family, &self.function, self.grid, p, node)?;
        if ext.residual > self.tolerance(&ext) {
            return Err(Error::NoExtension {
                node,
                residual: ext.residual,
                tolerance: self.tolerance(&ext),
            });
        }
        Ok(ext.coeffs)
    }

    /// `d/dt_axis` of the coefficients by sixth-order central differences.
    pub fn dt_coeffs_at(&self, p: &ParamPoint, axis: usize) -> Result<Vec<Complex64>> {
        let h = self.opts.dt_step;
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.size() / 2];
        for (k, w) in CENTRAL6 {
            let mut plus = *p;
            plus.t[axis] += k * h;
            let mut minus = *p;
            minus.t[axis] -= k * h;
            let cp = self.coeffs_at(&plus)?;
            let cm = self.coeffs_at(&minus)?;
            for (o, (a, b)) in out.iter_mut().zip(cp.iter().zip(&cm)) {
                *o += (a - b) * (w / h);
            }
        }
        Ok(out)
    }

    fn check_zeta(zeta: Complex64) -> Result<()> {
        if zeta.norm() > 1.0 + 1e-9 {
            return Err(Error::Domain(format!("|zeta| = {} exceeds 1", zeta.norm())));
        }
        Ok(())
    }

    /// `F(zeta, t)`.
    pub fn eval(&self, zeta: Complex64, p: &ParamPoint) -> Result<Complex64> {
        Self::check_zeta(zeta)?;
        Ok(poly::horner(&self.coeffs_at(p)?, zeta))
    }

    /// `dF/dzeta`.
    pub fn d_zeta(&self, zeta: Complex64, p: &ParamPoint) -> Result<Complex64> {
        Self::check_zeta(zeta)?;
        Ok(poly::horner_with_derivative(&self.coeffs_at(p)?, zeta).1)
    }

    /// `dF/dt_axis`.
    pub fn d_t(&self, zeta: Complex64, p: &ParamPoint, axis: usize) -> Result<Complex64> {
        Self::check_zeta(zeta)?;
        Ok(poly::horner(&self.dt_coeffs_at(p, axis)?, zeta))
    }

    /// `max |F - f(G)|` over boundary samples of every node.
    pub fn boundary_mismatch(&self) -> f64 {
        let points = self.grid.unit_points();
        (0..self.nodes.len())
            .into_par_iter()
            .map(|j| {
                let p = self.family.node(j);
                let coeffs = self.family.coeffs_at(&p);
                points
                    .iter()
                    .map(|z| {
                        let g: Vec<Complex64> = coeffs.iter().map(|c| poly::horner(c, *z)).collect();
                        (poly::horner(&self.nodes[j].coeffs, *z) - self.function.eval(&g)).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Largest moment found by [`moment_test`] and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub max_moment: f64,
    pub node: usize,
    /// Exponents of the monomial and the index `j` of `dz_j`.
    pub exponents: Vec<u32>,
    pub differential: usize,
}

/// `max |oint_{dD_t} f z^alpha dz_j|` over nodes and monomials `|alpha| <= degree`.
pub fn moment_test(f: &BoundaryFunction, family: &DiscFamily, degree: u32, circle_points: usize) -> Result<MomentReport> {
    let grid = PeriodicGrid::new(circle_points)?;
    let dim = family.dim();
    let mut monomials: Vec<Vec<u32>> = Vec::new();
    if dim == 1 {
        monomials.extend((0..=degree).map(|m| vec![m]));
    } else {
        for total in 0..=degree {
            monomials.extend((0..=total).map(|a| vec![a, total - a]));
        }
    }
    let dpsi = 2.0 * PI / grid.size() as f64;
    let per_node = (0..family.node_count())
        .into_par_iter()
        .map(|j| -> Result<(f64, usize, usize)> {
            let p = family.node(j);
            let coeffs = family.coeffs_at(&p);
            let mut sums = vec![Complex64::new(0.0, 0.0); monomials.len() * dim];
            for zeta in grid.unit_points() {
                let mut g = Vec::with_capacity(dim);
                let mut dz = Vec::with_capacity(dim);
                for c in &coeffs {
                    let (v, d) = poly::horner_with_derivative(c, zeta);
                    g.push(v);
                    dz.push(Complex64::i() * zeta * d * dpsi);
                }
                let fv = f.eval(&g);
                if !fv.re.is_finite() || !fv.im.is_finite() {
                    return Err(Error::FunctionSingular { zeta, node: j });
                }
                for (m, alpha) in monomials.iter().enumerate() {
                    let mono: Complex64 = alpha.iter().zip(&g).map(|(a, z)| z.powu(*a)).product();
                    for (jj, d) in dz.iter().enumerate() {
                        sums[m * dim + jj] += fv * mono * d;
                    }
                }
            }
            let (idx, best) = sums
                .iter()
                .enumerate()
                .map(|(i, s)| (i, s.norm()))
                .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            Ok((best, j, idx))
        })
        .collect::<Result<Vec<_>>>()?;
    let (max_moment, node, idx) = per_node
        .into_iter()
        .fold((0.0, 0, 0), |a, b| if b.0 > a.0 { b } else { a });
    Ok(MomentReport {
        max_moment,
        node,
        exponents: monomials[idx / dim].clone(),
        differential: idx % dim + 1,
    })
}
