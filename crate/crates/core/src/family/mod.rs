//! Parametrized families of analytic discs `G(zeta, t) = g_t(zeta)`.
//!
//! Each family stores per-node Taylor data of `g_t` and a generator that
//! produces coefficients (and their parameter derivatives) at arbitrary
//! parameter points. Builtin families carry closed-form generators;
//! tabulated families interpolate their node data.

pub mod audit;
pub mod raster;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::interp::{uniform_stencil, CubicSpline, TrigInterpolant};
use crate::numerics::poly;

pub use audit::{
    boundary_jacobian, closure_intersection_empty, regularity_audit, regularity_audit_with, AuditOptions,
    ClosureIntersection, RankHistogram, RegularityReport,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shape of the parameter manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    /// `t` in `[0, 2 pi)`, periodic.
    Circle,
    /// `t` in `[0, 1]`, endpoints included.
    Interval,
    /// Two stereographic charts `u` in `[-1, 1]^3` of the three-sphere.
    Box3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub kind: ParamKind,
    pub resolution: usize,
}

/// A point of the parameter manifold. One-parameter families use `t[0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPoint {
    pub chart: u8,
    pub t: [f64; 3],
}

impl ParamPoint {
    pub fn scalar(t: f64) -> Self {
        Self {
            chart: 0,
            t: [t, 0.0, 0.0],
        }
    }

    pub fn chart(chart: u8, u: [f64; 3]) -> Self {
        Self { chart, t: u }
    }
}

impl ParamSpace {
    pub fn new(kind: ParamKind, resolution: usize) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::Config(format!("parameter resolution must be >= 8, got {resolution}")));
        }
        if kind == ParamKind::Circle && resolution % 2 != 0 {
            return Err(Error::Config(format!(
                "periodic parameter resolution must be even, got {resolution}"
            )));
        }
        Ok(Self { kind, resolution })
    }

    pub fn axes(&self) -> usize {
        match self.kind {
            ParamKind::Box3 => 3,
            _ => 1,
        }
    }

    pub fn node_count(&self) -> usize {
        match self.kind {
            ParamKind::Box3 => 2 * self.resolution.pow(3),
            _ => self.resolution,
        }
    }

    /// Node spacing along each axis.
    pub fn spacing(&self) -> f64 {
        match self.kind {
            ParamKind::Circle => 2.0 * PI / self.resolution as f64,
            ParamKind::Interval => 1.0 / (self.resolution - 1) as f64,
            ParamKind::Box3 => 2.0 / (self.resolution - 1) as f64,
        }
    }

    pub fn node(&self, j: usize) -> ParamPoint {
        let h = self.spacing();
        match self.kind {
            ParamKind::Circle | ParamKind::Interval => ParamPoint::scalar(h * j as f64),
            ParamKind::Box3 => {
                let n = self.resolution;
                let chart = (j / n.pow(3)) as u8;
                let r = j % n.pow(3);
                let idx = [r / (n * n), (r / n) % n, r % n];
                ParamPoint::chart(chart, idx.map(|i| -1.0 + h * i as f64))
            }
        }
    }

    pub fn nodes(&self) -> Vec<ParamPoint> {
        (0..self.node_count()).map(|j| self.node(j)).collect()
    }

    /// Length of the one-dimensional parameter range.
    pub fn period(&self) -> f64 {
        match self.kind {
            ParamKind::Circle => 2.0 * PI,
            _ => 1.0,
        }
    }

    pub fn contains(&self, p: &ParamPoint) -> bool {
        let slack = 1e-9;
        match self.kind {
            ParamKind::Circle => p.t[0].is_finite(),
            ParamKind::Interval => p.t[0] >= -slack && p.t[0] <= 1.0 + slack,
            ParamKind::Box3 => p.chart < 2 && p.t.iter().all(|u| u.abs() <= 1.0 + slack),
        }
    }
}

/// Produces the Taylor coefficients of `g_t` per component, and their
/// derivative along a parameter axis, at arbitrary parameter points.
pub trait Generator: Send + Sync + fmt::Debug {
    fn coeffs(&self, p: &ParamPoint) -> Vec<Vec<Complex64>>;
    fn dt_coeffs(&self, p: &ParamPoint, axis: usize) -> Vec<Vec<Complex64>>;
}

/// Builder name and the numeric parameters it was called with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub builder: String,
    pub params: serde_json::Value,
}

/// A family of analytic discs over a parameter space.
#[derive(Clone)]
pub struct DiscFamily {
    dim: usize,
    params: ParamSpace,
    taylor: Arc<Vec<Vec<Vec<Complex64>>>>,
    generator: Arc<dyn Generator>,
    provenance: Provenance,
}

impl fmt::Debug for DiscFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscFamily")
            .field("dim", &self.dim)
            .field("params", &self.params)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl DiscFamily {
    fn from_generator(dim: usize, params: ParamSpace, generator: Arc<dyn Generator>, provenance: Provenance) -> Self {
        let taylor = params.nodes().iter().map(|p| generator.coeffs(p)).collect();
        Self {
            dim,
            params,
            taylor: Arc::new(taylor),
            generator,
            provenance,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> ParamSpace {
        self.params
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Stored Taylor data: node -> component -> coefficients.
    pub fn taylor_data(&self) -> &[Vec<Vec<Complex64>>] {
        &self.taylor
    }

    pub fn node_count(&self) -> usize {
        self.taylor.len()
    }

    pub fn node(&self, j: usize) -> ParamPoint {
        self.params.node(j)
    }

    /// Coefficients of `g_t` at an arbitrary parameter point.
    pub fn coeffs_at(&self, p: &ParamPoint) -> Vec<Vec<Complex64>> {
        self.generator.coeffs(p)
    }

    /// Parameter derivative of the coefficients along `axis`.
    pub fn dt_coeffs_at(&self, p: &ParamPoint, axis: usize) -> Vec<Vec<Complex64>> {
        self.generator.dt_coeffs(p, axis)
    }

    fn check(&self, zeta: Complex64, p: &ParamPoint) -> Result<()> {
        if zeta.norm() > 1.0 + 1e-9 {
            return Err(Error::Domain(format!("|zeta| = {} exceeds 1", zeta.norm())));
        }
        if !self.params.contains(p) {
            return Err(Error::Domain(format!("parameter {:?} outside {:?}", p, self.params.kind)));
        }
        Ok(())
    }

    /// `G(zeta, t)`.
    pub fn eval(&self, zeta: Complex64, p: &ParamPoint) -> Result<Vec<Complex64>> {
        self.check(zeta, p)?;
        Ok(self.eval_raw(zeta, p))
    }

    /// `d G / d zeta`.
    pub fn d_zeta(&self, zeta: Complex64, p: &ParamPoint) -> Result<Vec<Complex64>> {
        self.check(zeta, p)?;
        Ok(self.d_zeta_raw(zeta, p))
    }

    /// `d G / d t_axis`.
    pub fn d_t(&self, zeta: Complex64, p: &ParamPoint, axis: usize) -> Result<Vec<Complex64>> {
        self.check(zeta, p)?;
        if axis >= self.params.axes() {
            return Err(Error::Domain(format!("axis {axis} out of range")));
        }
        Ok(self.d_t_raw(zeta, p, axis))
    }

    pub(crate) fn eval_raw(&self, zeta: Complex64, p: &ParamPoint) -> Vec<Complex64> {
        self.coeffs_at(p).iter().map(|c| poly::horner(c, zeta)).collect()
    }

    pub(crate) fn d_zeta_raw(&self, zeta: Complex64, p: &ParamPoint) -> Vec<Complex64> {
        self.coeffs_at(p)
            .iter()
            .map(|c| poly::horner_with_derivative(c, zeta).1)
            .collect()
    }

    pub(crate) fn d_t_raw(&self, zeta: Complex64, p: &ParamPoint, axis: usize) -> Vec<Complex64> {
        self.dt_coeffs_at(p, axis)
            .iter()
            .map(|c| poly::horner(c, zeta))
            .collect()
    }

    /// Value, zeta-derivative and t-derivative of a planar family at a
    /// scalar parameter, without domain checks.
    pub(crate) fn planar_jet(&self, zeta: Complex64, t: f64) -> (Complex64, Complex64, Complex64) {
        let p = ParamPoint::scalar(t);
        let c = &self.coeffs_at(&p)[0];
        let (g, gz) = poly::horner_with_derivative(c, zeta);
        let gt = poly::horner(&self.dt_coeffs_at(&p, 0)[0], zeta);
        (g, gz, gt)
    }

    /// Newton solve of `G(e^{i psi}, t) = b` on the boundary of a planar
    /// family, starting from `(psi, t)`. Returns the converged point, with
    /// `t` reduced into the parameter range, or `None`.
    pub fn boundary_newton(&self, b: Complex64, psi: f64, t: f64) -> Option<(f64, f64)> {
        let (mut psi, mut t) = (psi, t);
        let scale = b.norm().max(1.0);
        let periodic = self.params.kind == ParamKind::Circle;
        for _ in 0..60 {
            let zeta = Complex64::from_polar(1.0, psi);
            let (g, gz, gt) = self.planar_jet(zeta, t);
            let r = g - b;
            let gp = Complex64::i() * zeta * gz;
            let det = gp.re * gt.im - gp.im * gt.re;
            if det.abs() < 1e-300 {
                return None;
            }
            let dpsi = (r.re * gt.im - r.im * gt.re) / det;
            let dt = (gp.re * r.im - gp.im * r.re) / det;
            psi -= dpsi;
            t -= dt;
            if !psi.is_finite() || !t.is_finite() {
                return None;
            }
            if !periodic && !(-0.5..=1.5).contains(&t) {
                return None;
            }
            if dpsi.abs() + dt.abs() < 1e-14 && r.norm() < 1e-11 * scale {
                break;
            }
        }
        let zeta = Complex64::from_polar(1.0, psi);
        if (self.planar_jet(zeta, t).0 - b).norm() > 1e-10 * scale {
            return None;
        }
        if periodic {
            t = t.rem_euclid(2.0 * PI);
        } else if !(-1e-12..=1.0 + 1e-12).contains(&t) {
            return None;
        }
        Some((psi.rem_euclid(2.0 * PI), t))
    }

    /// Rough size of the image: max `|g_t|` over boundary samples.
    pub fn image_radius(&self) -> f64 {
        let grid: Vec<Complex64> = (0..64).map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / 64.0)).collect();
        let stride = (self.node_count() / 64).max(1);
        (0..self.node_count())
            .step_by(stride)
            .flat_map(|j| {
                let coeffs = &self.taylor[j];
                grid.iter()
                    .map(move |z| coeffs.iter().map(|c| poly::horner(c, *z).norm_sqr()).sum::<f64>().sqrt())
            })
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// builtin generators

#[derive(Debug)]
struct RotatingCircles {
    big: f64,
    small: f64,
}

impl Generator for RotatingCircles {
    fn coeffs(&self, p: &ParamPoint) -> Vec<Vec<Complex64>> {
        vec![vec![Complex64::from_polar(self.big, p.t[0]), Complex64::new(self.small, 0.0)]]
    }

    fn dt_coeffs(&self, p: &ParamPoint, _axis: usize) -> Vec<Vec<Complex64>> {
        vec![vec![Complex64::i() * Complex64::from_polar(self.big, p.t[0]), ZERO]]
    }
}

#[derive(Debug)]
struct TranslatedCircles {
    radius: f64,
    path: CubicSpline,
}

impl Generator for TranslatedCircles {
    fn coeffs(&self, p: &ParamPoint) -> Vec<Vec<Complex64>> {
        vec![vec![self.path.eval(p.t[0]).0, Complex64::new(self.radius, 0.0)]]
    }

    fn dt_coeffs(&self, p: &ParamPoint, _axis: usize) -> Vec<Vec<Complex64>> {
        vec![vec![self.path.eval(p.t[0]).1, ZERO]]
    }
}

/// Point `(a, b)` of the unit three-sphere in a stereographic chart, with
/// its derivatives along the three chart axes.
pub fn sphere_chart(chart: u8, u: [f64; 3]) -> ((Complex64, Complex64), [(Complex64, Complex64); 3]) {
    let s2: f64 = u.iter().map(|x| x * x).sum();
    let q = s2 + 1.0;
    let sign = if chart == 0 { 1.0 } else { -1.0 };
    let x = [2.0 * u[0] / q, 2.0 * u[1] / q, 2.0 * u[2] / q, sign * (s2 - 1.0) / q];
    let point = (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
    let mut derivs = [(ZERO, ZERO); 3];
    for (k, d) in derivs.iter_mut().enumerate() {
        let mut dx = [0.0; 4];
        for i in 0..3 {
            dx[i] = -4.0 * u[i] * u[k] / (q * q);
        }
        dx[k] += 2.0 / q;
        dx[3] = sign * 4.0 * u[k] / (q * q);
        *d = (Complex64::new(dx[0], dx[1]), Complex64::new(dx[2], dx[3]));
    }
    (point, derivs)
}

#[derive(Debug)]
struct TangentLines {
    inner: f64,
    radius: f64,
}

impl Generator for TangentLines {
    fn coeffs(&self, p: &ParamPoint) -> Vec<Vec<Complex64>> {
        let ((a, b), _) = sphere_chart(p.chart, p.t);
        vec![
            vec![a * self.inner, -b.conj() * self.radius],
            vec![b * self.inner, a.conj() * self.radius],
        ]
    }

    fn dt_coeffs(&self, p: &ParamPoint, axis: usize) -> Vec<Vec<Complex64>> {
        let (_, d) = sphere_chart(p.chart, p.t);
        let (da, db) = d[axis];
        vec![
            vec![da * self.inner, -db.conj() * self.radius],
            vec![db * self.inner, da.conj() * self.radius],
        ]
    }
}

#[derive(Debug)]
struct HopfDiscs;

impl Generator for HopfDiscs {
    fn coeffs(&self, p: &ParamPoint) -> Vec<Vec<Complex64>> {
        let ((a, b), _) = sphere_chart(p.chart, p.t);
        vec![vec![ZERO, a], vec![ZERO, b]]
    }

    fn dt_coeffs(&self, p: &ParamPoint, axis: usize) -> Vec<Vec<Complex64>> {
        let (_, d) = sphere_chart(p.chart, p.t);
        let (da, db) = d[axis];
        vec![vec![ZERO, da], vec![ZERO, db]]
    }
}

/// Node data interpolated in the parameter: trigonometric interpolation on
/// the circle, five-point Lagrange stencils on the interval.
#[derive(Debug)]
struct Tabulated {
    params: ParamSpace,
    table: Arc<Vec<Vec<Vec<Complex64>>>>,
    // Circle only: interpolant per component per coefficient
    trig: Vec<Vec<TrigInterpolant>>,
}

impl Tabulated {
    fn new(params: ParamSpace, table: Arc<Vec<Vec<Vec<Complex64>>>>) -> Self {
        let trig = if params.kind == ParamKind::Circle {
            let comps = table[0].len();
            (0..comps)
                .map(|c| {
                    let len = table.iter().map(|node| node[c].len()).max().unwrap_or(0);
                    (0..len)
                        .map(|k| {
                            let column: Vec<Complex64> =
                                table.iter().map(|node| node[c].get(k).copied().unwrap_or(ZERO)).collect();
                            TrigInterpolant::new(&column)
                        })
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        Self { params, table, trig }
    }

    fn stencil_combine(&self, t: f64, derivative: bool) -> Vec<Vec<Complex64>> {
        let count = self.table.len();
        let (first, w, dw) = uniform_stencil(0.0, self.params.spacing(), count, t);
        let weights = if derivative { dw } else { w };
        let comps = self.table[0].len();
        (0..comps)
            .map(|c| {
                let len = (0..5).map(|j| self.table[first + j][c].len()).max().unwrap_or(0);
                let mut out = vec![ZERO; len];
                for (j, wj) in weights.iter().enumerate() {
                    for (k, v) in self.table[first + j][c].iter().enumerate() {
                        out[k] += v * *wj;
                    }
                }
                out
            })
            .collect()
    }
}

impl Generator for Tabulated {
    fn coeffs(&self, p: &ParamPoint) -> Vec<Vec<Complex64>> {
        match self.params.kind {
            ParamKind::Circle => self
                .trig
                .iter()
                .map(|comp| comp.iter().map(|ip| ip.value(p.t[0])).collect())
                .collect(),
            _ => self.stencil_combine(p.t[0], false),
        }
    }

    fn dt_coeffs(&self, p: &ParamPoint, _axis: usize) -> Vec<Vec<Complex64>> {
        match self.params.kind {
            ParamKind::Circle => self
                .trig
                .iter()
                .map(|comp| comp.iter().map(|ip| ip.derivative(p.t[0])).collect())
                .collect(),
            _ => self.stencil_combine(p.t[0], true),
        }
    }
}

// ---------------------------------------------------------------------------
// builders

/// `g_t(zeta) = R e^{it} + r zeta` over the circle.
pub fn build_rotating_circles(big: f64, small: f64, resolution: usize) -> Result<DiscFamily> {
    if !(small > 0.0) {
        return Err(Error::Config(format!("rotating_circles: r must be > 0, got {small}")));
    }
    if !(big >= 0.0) {
        return Err(Error::Config(format!("rotating_circles: R must be >= 0, got {big}")));
    }
    let params = ParamSpace::new(ParamKind::Circle, resolution)?;
    Ok(DiscFamily::from_generator(
        1,
        params,
        Arc::new(RotatingCircles { big, small }),
        Provenance {
            builder: "rotating_circles".into(),
            params: serde_json::json!({ "R": big, "r": small, "resolution": resolution }),
        },
    ))
}

/// `g_t(zeta) = a(t) + rho zeta` over `[0, 1]`, with `a` the natural cubic
/// spline through the given centers.
pub fn build_translated_circles(radius: f64, center_path: &[Complex64], resolution: usize) -> Result<DiscFamily> {
    if !(radius > 0.0) {
        return Err(Error::Config(format!("translated_circles: rho must be > 0, got {radius}")));
    }
    if center_path.len() < 2 {
        return Err(Error::Config("translated_circles: center_path needs at least 2 nodes".into()));
    }
    let params = ParamSpace::new(ParamKind::Interval, resolution)?;
    let path: Vec<[f64; 2]> = center_path.iter().map(|c| [c.re, c.im]).collect();
    Ok(DiscFamily::from_generator(
        1,
        params,
        Arc::new(TranslatedCircles {
            radius,
            path: CubicSpline::new(center_path.to_vec()),
        }),
        Provenance {
            builder: "translated_circles".into(),
            params: serde_json::json!({ "rho": radius, "center_path": path, "resolution": resolution }),
        },
    ))
}

/// Discs of the ball of radius `ball_radius` lying in the complex lines
/// tangent to the sphere of radius `inner` (n = 2, Box3 parameters).
pub fn build_tangent_lines(ball_radius: f64, inner: f64, resolution: usize) -> Result<DiscFamily> {
    if !(inner > 0.0 && inner < ball_radius) {
        return Err(Error::Config(format!(
            "tangent_lines: need 0 < inner_radius < ball_radius, got {inner} and {ball_radius}"
        )));
    }
    let params = ParamSpace::new(ParamKind::Box3, resolution)?;
    let radius = (ball_radius * ball_radius - inner * inner).sqrt();
    Ok(DiscFamily::from_generator(
        2,
        params,
        Arc::new(TangentLines { inner, radius }),
        Provenance {
            builder: "tangent_lines".into(),
            params: serde_json::json!({ "ball_radius": ball_radius, "inner_radius": inner, "resolution": resolution }),
        },
    ))
}

/// `g_t(zeta) = zeta (a(t), b(t))` with `(a, b)` on the unit sphere.
pub fn build_hopf_discs(resolution: usize) -> Result<DiscFamily> {
    let params = ParamSpace::new(ParamKind::Box3, resolution)?;
    Ok(DiscFamily::from_generator(
        2,
        params,
        Arc::new(HopfDiscs),
        Provenance {
            builder: "hopf_discs".into(),
            params: serde_json::json!({ "resolution": resolution }),
        },
    ))
}

/// Wraps user Taylor data (node -> component -> coefficients) verbatim.
pub fn build_custom(table: Vec<Vec<Vec<Complex64>>>, kind: ParamKind) -> Result<DiscFamily> {
    if kind == ParamKind::Box3 {
        return Err(Error::Config("custom families support Circle and Interval parameters".into()));
    }
    let params = ParamSpace::new(kind, table.len())?;
    let dim = table[0].len();
    if dim != 1 && dim != 2 {
        return Err(Error::Config(format!("taylor_table: 1 or 2 components per node, got {dim}")));
    }
    if let Some(j) = table.iter().position(|node| node.len() != dim) {
        return Err(Error::Config(format!("taylor_table: node {j} has {} components, expected {dim}", table[j].len())));
    }
    if table.iter().any(|node| node.iter().any(|c| c.is_empty() || c.len() > 65)) {
        return Err(Error::Config("taylor_table: each component needs 1..=65 coefficients".into()));
    }
    check_embedding(&table)?;
    check_smoothness(&table, params)?;
    let table = Arc::new(table);
    let generator = Arc::new(Tabulated::new(params, table.clone()));
    Ok(DiscFamily {
        dim,
        params,
        taylor: table,
        generator,
        provenance: Provenance {
            builder: "custom".into(),
            params: serde_json::json!({ "kind": kind, "nodes": params.resolution, "components": dim }),
        },
    })
}

fn check_embedding(table: &[Vec<Vec<Complex64>>]) -> Result<()> {
    for (node, comps) in table.iter().enumerate() {
        let derivs: Vec<Vec<Complex64>> = comps.iter().map(|c| poly::derivative(c)).collect();
        let scale = comps.iter().map(|c| poly::l1_norm(c)).fold(0.0, f64::max).max(1e-300);
        let mut min_derivative = f64::INFINITY;
        for i in 0..32 {
            let r = i as f64 / 31.0;
            for k in 0..32 {
                let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / 32.0);
                let d: f64 = derivs.iter().map(|c| poly::horner(c, z).norm_sqr()).sum::<f64>().sqrt();
                min_derivative = min_derivative.min(d);
            }
        }
        if min_derivative <= 1e-10 * scale {
            return Err(Error::DegenerateDisc { node, min_derivative });
        }
    }
    Ok(())
}

fn check_smoothness(table: &[Vec<Vec<Complex64>>], params: ParamSpace) -> Result<()> {
    let scale = table
        .iter()
        .flat_map(|n| n.iter().flat_map(|c| c.iter().map(|v| v.norm())))
        .fold(0.0, f64::max);
    let bound = 10.0 / params.resolution as f64 * scale.max(1e-300);
    let n = table.len();
    let pairs = if params.kind == ParamKind::Circle { n } else { n - 1 };
    for j in 0..pairs {
        let (a, b) = (&table[j], &table[(j + 1) % n]);
        for (ca, cb) in a.iter().zip(b) {
            let diff = poly::l1_norm(&poly::sub(ca, cb));
            if diff > bound * ca.len().max(cb.len()) as f64 {
                return Err(Error::Config(format!(
                    "taylor_table: coefficients jump by {diff:.3e} between nodes {j} and {}",
                    (j + 1) % n
                )));
            }
        }
    }
    Ok(())
}

/// Declarative family description as it appears in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    RotatingCircles {
        #[serde(rename = "R")]
        big: f64,
        r: f64,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
    TranslatedCircles {
        rho: f64,
        center_path: Vec<Complex64>,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
    TangentLines {
        ball_radius: f64,
        inner_radius: f64,
        #[serde(default = "default_box_resolution")]
        resolution: usize,
    },
    HopfDiscs {
        #[serde(default = "default_box_resolution")]
        resolution: usize,
    },
    Custom {
        kind: ParamKind,
        taylor_table: Vec<Vec<Vec<Complex64>>>,
    },
}

fn default_resolution() -> usize {
    256
}

fn default_box_resolution() -> usize {
    8
}

impl FamilySpec {
    pub fn build(&self) -> Result<DiscFamily> {
        match self {
            FamilySpec::RotatingCircles { big, r, resolution } => build_rotating_circles(*big, *r, *resolution),
            FamilySpec::TranslatedCircles {
                rho,
                center_path,
                resolution,
            } => build_translated_circles(*rho, center_path, *resolution),
            FamilySpec::TangentLines {
                ball_radius,
                inner_radius,
                resolution,
            } => build_tangent_lines(*ball_radius, *inner_radius, *resolution),
            FamilySpec::HopfDiscs { resolution } => build_hopf_discs(*resolution),
            FamilySpec::Custom { kind, taylor_table } => build_custom(taylor_table.clone(), *kind),
        }
    }

    /// Same family with every parameter grid multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            FamilySpec::RotatingCircles { resolution, .. }
            | FamilySpec::TranslatedCircles { resolution, .. }
            | FamilySpec::TangentLines { resolution, .. }
            | FamilySpec::HopfDiscs { resolution } => *resolution *= factor,
            FamilySpec::Custom { .. } => {}
        }
        out
    }
}
