//! The two-dimensional layer: Jacobi minors of `(G1, G2, F)`, reality of
//! the Cramer coefficients `K_mu` on a real hypersurface, and the
//! tangential Cauchy-Riemann operator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::ExtensionField;
use crate::family::DiscFamily;
use crate::function::BoundaryFunction;
use crate::numerics::poly;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A real hypersurface `rho = 0` in `C^2` with Hermitian quadratic `rho`:
/// `rho = a11 |z1|^2 + a22 |z2|^2 + 2 Re(a12 conj(z1) z2) + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Surface {
    Sphere {
        #[serde(default = "one")]
        radius: f64,
    },
    Quadric {
        a11: f64,
        a22: f64,
        #[serde(default)]
        a12: [f64; 2],
        c: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for Surface {
    fn default() -> Self {
        Surface::Sphere { radius: 1.0 }
    }
}

impl Surface {
    fn coefficients(&self) -> (f64, f64, Complex64, f64) {
        match *self {
            Surface::Sphere { radius } => (1.0, 1.0, ZERO, -radius * radius),
            Surface::Quadric { a11, a22, a12, c } => (a11, a22, Complex64::new(a12[0], a12[1]), c),
        }
    }

    /// The centred sphere through the first boundary point of `family`.
    pub fn through_boundary(family: &DiscFamily) -> Self {
        let g = family.eval_raw(Complex64::new(1.0, 0.0), &family.node(0));
        let radius = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        Surface::Sphere { radius }
    }

    pub fn label(&self) -> String {
        match self {
            Surface::Sphere { radius } => format!("sphere(radius={radius})"),
            Surface::Quadric { .. } => "quadric".into(),
        }
    }

    pub fn rho(&self, z: &[Complex64]) -> f64 {
        let (a11, a22, a12, c) = self.coefficients();
        a11 * z[0].norm_sqr() + a22 * z[1].norm_sqr() + 2.0 * (a12 * z[0].conj() * z[1]).re + c
    }

    /// `(d rho / d conj(z1), d rho / d conj(z2))`.
    pub fn dbar_rho(&self, z: &[Complex64]) -> [Complex64; 2] {
        let (a11, a22, a12, _) = self.coefficients();
        [z[0] * a11 + a12 * z[1], z[1] * a22 + a12.conj() * z[0]]
    }

    pub fn gradient_norm(&self, z: &[Complex64]) -> f64 {
        let d = self.dbar_rho(z);
        2.0 * (d[0].norm_sqr() + d[1].norm_sqr()).sqrt()
    }
}

fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// One sample of the four `3 x 3` minors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinorSample {
    pub node: usize,
    pub zeta: Complex64,
    /// `minors[k]` deletes row `k` of `[d_psi; d_t1; d_t2; d_t3]`, so
    /// `minors[0]` uses the three parameter rows only.
    pub minors: [Complex64; 4],
    /// Hadamard bound `|grad G1| |grad G2| |grad F|` at the sample.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorField {
    pub samples: Vec<MinorSample>,
    /// RMS per minor.
    pub scale: [f64; 4],
    /// RMS of the Hadamard bound; the size of the minors before cancellation.
    pub term_scale: f64,
}

impl MinorField {
    pub fn max_abs(&self, k: usize) -> f64 {
        self.samples.iter().map(|s| s.minors[k].norm()).fold(0.0, f64::max)
    }

    /// `max_k max |J^k| / term_scale`.
    pub fn j_max(&self) -> f64 {
        let m = (0..4).map(|k| self.max_abs(k)).fold(0.0, f64::max);
        if self.term_scale > 0.0 {
            m / self.term_scale
        } else {
            0.0
        }
    }

    /// `max |J^k(0, t)|` over `k = 1, 2, 3`.
    pub fn center_max(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.zeta == ZERO)
            .flat_map(|s| s.minors[1..].iter().map(|m| m.norm()))
            .fold(0.0, f64::max)
    }
}

/// The minors on a polar grid (radii `0, 1/2, 1` by `angles`) at every
/// parameter node of a two-dimensional family.
pub fn compute_minors(ext: &ExtensionField, angles: usize) -> Result<MinorField> {
    let family = ext.family();
    if family.dim() != 2 {
        return Err(Error::Config("minors are defined for families in C^2".into()));
    }
    if let Some(err) = ext.first_failure() {
        return Err(err);
    }
    let mut points = vec![ZERO];
    for r in [0.5, 1.0] {
        for k in 0..angles {
            points.push(Complex64::from_polar(r, 2.0 * PI * k as f64 / angles as f64));
        }
    }
    let axes = family.params().axes();
    if axes != 3 {
        return Err(Error::Config("minors need a three-parameter family".into()));
    }
    let per_node = (0..family.node_count())
        .into_par_iter()
        .map(|j| -> Result<Vec<MinorSample>> {
            let p = family.node(j);
            let g = family.coeffs_at(&p);
            let f = ext.node_coeffs(j)?;
            let gt: Vec<Vec<Vec<Complex64>>> = (0..3).map(|a| family.dt_coeffs_at(&p, a)).collect();
            let ft: Vec<Vec<Complex64>> = (0..3).map(|a| ext.dt_coeffs_at(&p, a)).collect::<Result<_>>()?;
            Ok(points
                .iter()
                .map(|&z| {
                    let iz = Complex64::i() * z;
                    let mut rows = [[ZERO; 3]; 4];
                    rows[0] = [
                        iz * poly::horner_with_derivative(&g[0], z).1,
                        iz * poly::horner_with_derivative(&g[1], z).1,
                        iz * poly::horner_with_derivative(f, z).1,
                    ];
                    for a in 0..3 {
                        rows[a + 1] = [poly::horner(&gt[a][0], z), poly::horner(&gt[a][1], z), poly::horner(&ft[a], z)];
                    }
                    let minors = std::array::from_fn(|k| {
                        let mut m = [[ZERO; 3]; 3];
                        let mut r = 0;
                        for (i, row) in rows.iter().enumerate() {
                            if i != k {
                                m[r] = *row;
                                r += 1;
                            }
                        }
                        det3(m)
                    });
                    let col = |c: usize| rows.iter().map(|r| r[c].norm_sqr()).sum::<f64>().sqrt();
                    MinorSample {
                        node: j,
                        zeta: z,
                        minors,
                        bound: col(0) * col(1) * col(2),
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<MinorSample> = per_node.into_iter().flatten().collect();
    let n = samples.len() as f64;
    let scale = std::array::from_fn(|k| (samples.iter().map(|s| s.minors[k].norm_sqr()).sum::<f64>() / n).sqrt());
    let term_scale = (samples.iter().map(|s| s.bound * s.bound).sum::<f64>() / n).sqrt();
    Ok(MinorField {
        samples,
        scale,
        term_scale,
    })
}

/// Whether vanishing of the three minors with a `d_psi` row forces the
/// remaining one to vanish on the sampled grid (vacuously true otherwise).
pub fn minor_implication_check(minors: &MinorField) -> bool {
    let small = (1..4).all(|k| minors.max_abs(k) < 1e-8 * minors.term_scale.max(f64::MIN_POSITIVE));
    !small || minors.max_abs(0) < 1e-6 * minors.term_scale.max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KReality {
    /// Max `|Im K_mu| / |K_mu|` for `mu = 1, 2`.
    pub max_relative_imag: [f64; 2],
    pub samples: [usize; 2],
    /// Max `|rho|` on the boundary samples.
    pub incidence: f64,
}

impl KReality {
    pub fn worst(&self) -> f64 {
        self.max_relative_imag[0].max(self.max_relative_imag[1])
    }
}

/// `K_mu = det[grad G1, grad G2, grad conj(G_nu)] / dbar_mu rho` (`nu != mu`)
/// with gradient rows `(d_psi, d_t1, d_t2)` at boundary samples.
pub fn k_mu_reality(family: &DiscFamily, surface: &Surface, angles: usize) -> Result<KReality> {
    if family.dim() != 2 || family.params().axes() != 3 {
        return Err(Error::Config("K_mu is defined for three-parameter families in C^2".into()));
    }
    let per_node: Vec<(f64, [f64; 2], [usize; 2])> = (0..family.node_count())
        .into_par_iter()
        .map(|j| {
            let p = family.node(j);
            let g = family.coeffs_at(&p);
            let gt: Vec<Vec<Vec<Complex64>>> = (0..2).map(|a| family.dt_coeffs_at(&p, a)).collect();
            let mut incidence = 0.0f64;
            let mut worst = [0.0f64; 2];
            let mut count = [0usize; 2];
            for k in 0..angles {
                let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / angles as f64);
                let pt = [poly::horner(&g[0], z), poly::horner(&g[1], z)];
                incidence = incidence.max(surface.rho(&pt).abs());
                let iz = Complex64::i() * z;
                let rows = [
                    [iz * poly::horner_with_derivative(&g[0], z).1, iz * poly::horner_with_derivative(&g[1], z).1],
                    [poly::horner(&gt[0][0], z), poly::horner(&gt[0][1], z)],
                    [poly::horner(&gt[1][0], z), poly::horner(&gt[1][1], z)],
                ];
                let dbar = surface.dbar_rho(&pt);
                for mu in 0..2 {
                    if dbar[mu].norm() <= 1e-6 {
                        continue;
                    }
                    let nu = 1 - mu;
                    let m = rows.map(|r| [r[0], r[1], r[nu].conj()]);
                    let k_mu = det3(m) / dbar[mu];
                    if k_mu.norm() < 1e-12 {
                        continue;
                    }
                    worst[mu] = worst[mu].max(k_mu.im.abs() / k_mu.norm());
                    count[mu] += 1;
                }
            }
            (incidence, worst, count)
        })
        .collect();
    let incidence = per_node.iter().map(|r| r.0).fold(0.0, f64::max);
    if incidence >= 1e-8 {
        return Err(Error::SurfaceIncidence { max_rho: incidence });
    }
    let mut out = KReality {
        max_relative_imag: [0.0; 2],
        samples: [0; 2],
        incidence,
    };
    for (_, w, c) in per_node {
        for mu in 0..2 {
            out.max_relative_imag[mu] = out.max_relative_imag[mu].max(w[mu]);
            out.samples[mu] += c[mu];
        }
    }
    Ok(out)
}

/// `dbar_{1,2} f` and `dbar_{2,1} f` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentialSample {
    pub point: [Complex64; 2],
    pub d12: Complex64,
    pub d21: Complex64,
}

/// Tangential operators at each point, from central differences of `f`
/// with step `1e-5` times the point scale.
pub fn tangential_samples(f: &BoundaryFunction, surface: &Surface, points: &[[Complex64; 2]]) -> Result<Vec<TangentialSample>> {
    if f.dim() != 2 {
        return Err(Error::Config("the tangential operator acts on functions of two variables".into()));
    }
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let rho = surface.rho(p);
            if rho.abs() > 1e-6 {
                return Err(Error::OffSurface { index, rho });
            }
            if surface.gradient_norm(p) <= 1e-6 {
                return Err(Error::Domain(format!("grad rho vanishes at sample {index}")));
            }
            let scale = p[0].norm().max(p[1].norm()).max(1.0);
            let d = f.dbar_fd(p, 1e-5 * scale);
            let r = surface.dbar_rho(p);
            Ok(TangentialSample {
                point: *p,
                d12: r[0] * d[1] - r[1] * d[0],
                d21: r[1] * d[0] - r[0] * d[1],
            })
        })
        .collect()
}

/// `max |dbar_b f|` over the points.
pub fn tangential_cr_residual(f: &BoundaryFunction, surface: &Surface, points: &[[Complex64; 2]]) -> Result<f64> {
    Ok(tangential_samples(f, surface, points)?
        .iter()
        .map(|s| s.d12.norm())
        .fold(0.0, f64::max))
}

/// Boundary points `G(e^{i psi}, t)` of a two-dimensional family, taking
/// every `node_stride`-th node and `angles` angles.
pub fn boundary_points(family: &DiscFamily, node_stride: usize, angles: usize) -> Vec<[Complex64; 2]> {
    (0..family.node_count())
        .step_by(node_stride.max(1))
        .flat_map(|j| {
            let g = family.coeffs_at(&family.node(j));
            (0..angles)
                .map(move |k| {
                    let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / angles as f64);
                    [poly::horner(&g[0], z), poly::horner(&g[1], z)]
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Largest deviation of a boundary trace `f o g_t` from its mean circle value.
pub fn trace_spread(f: &BoundaryFunction, family: &DiscFamily, angles: usize) -> f64 {
    (0..family.node_count())
        .into_par_iter()
        .map(|j| {
            let g = family.coeffs_at(&family.node(j));
            let values: Vec<Complex64> = (0..angles)
                .map(|k| {
                    let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / angles as f64);
                    let pt: Vec<Complex64> = g.iter().map(|c| poly::horner(c, z)).collect();
                    f.eval(&pt)
                })
                .collect();
            let mean = values.iter().sum::<Complex64>() / values.len() as f64;
            values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
