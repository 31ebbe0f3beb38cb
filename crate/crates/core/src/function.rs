//! Boundary functions `f` on `C^n`: a small builtin catalog plus user
//! expressions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Builtin catalog entries, or a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    /// `z^2` (first coordinate when n = 2).
    ZSq,
    /// `conj(z)`.
    Zbar,
    /// `z^n / conj(z)`.
    Globevnik { power: i32 },
    /// `|z_1|^2`.
    AbsZ1Sq,
    Const(Complex64),
    Expr(Expr),
}

/// Serializable description of a boundary function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub name: String,
    /// Integer power for `globevnik_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i32>,
    /// Value for `const` as `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<[f64; 2]>,
}

impl FunctionSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            n: None,
            value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    kind: FunctionKind,
    dim: usize,
    label: String,
    pub smoothness_note: String,
}

impl BoundaryFunction {
    pub fn new(kind: FunctionKind, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("ambient dimension must be 1 or 2, got {dim}")));
        }
        if let FunctionKind::Expr(e) = &kind {
            if e.dim() != dim {
                return Err(Error::Config(format!(
                    "expression parsed for n = {} used in n = {dim}",
                    e.dim()
                )));
            }
        }
        let (label, note) = match &kind {
            FunctionKind::ZSq => ("z_sq".to_string(), "entire"),
            FunctionKind::Zbar => ("zbar".to_string(), "real-analytic, anti-holomorphic"),
            FunctionKind::Globevnik { power } => (format!("globevnik_n(n={power})"), "real-analytic off z = 0"),
            FunctionKind::AbsZ1Sq => ("abs_z1_sq".to_string(), "real polynomial"),
            FunctionKind::Const(c) => (format!("const({},{})", c.re, c.im), "constant"),
            FunctionKind::Expr(e) => (format!("expr:{}", e.source()), "user expression"),
        };
        Ok(Self {
            kind,
            dim,
            label,
            smoothness_note: note.to_string(),
        })
    }

    /// Resolves a catalog name (`z_sq`, `zbar`, `globevnik_n`, `abs_z1_sq`,
    /// `const`) or an `expr:` string.
    pub fn from_spec(spec: &FunctionSpec, dim: usize) -> Result<Self> {
        let kind = if let Some(src) = spec.name.strip_prefix("expr:") {
            FunctionKind::Expr(Expr::parse(src, dim)?)
        } else {
            match spec.name.as_str() {
                "z_sq" => FunctionKind::ZSq,
                "zbar" => FunctionKind::Zbar,
                "globevnik_n" => FunctionKind::Globevnik {
                    power: spec
                        .n
                        .ok_or_else(|| Error::Config("function.n is required for globevnik_n".into()))?,
                },
                "abs_z1_sq" => FunctionKind::AbsZ1Sq,
                "const" => {
                    let [re, im] = spec.value.unwrap_or([1.0, 0.0]);
                    FunctionKind::Const(Complex64::new(re, im))
                }
                other => return Err(Error::Config(format!("function.name: unknown function '{other}'"))),
            }
        };
        Self::new(kind, dim)
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let z1 = z[0];
        match &self.kind {
            FunctionKind::ZSq => z1 * z1,
            FunctionKind::Zbar => z1.conj(),
            FunctionKind::Globevnik { power } => z1.powi(*power) / z1.conj(),
            FunctionKind::AbsZ1Sq => Complex64::new(z1.norm_sqr(), 0.0),
            FunctionKind::Const(c) => *c,
            FunctionKind::Expr(e) => e.eval(z),
        }
    }

    /// Closed-form `dbar_j f` where the catalog knows it.
    pub fn dbar_exact(&self, z: &[Complex64]) -> Option<Vec<Complex64>> {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.dim];
        let z1 = z[0];
        match &self.kind {
            FunctionKind::ZSq | FunctionKind::Const(_) => {}
            FunctionKind::Zbar => out[0] = Complex64::new(1.0, 0.0),
            FunctionKind::Globevnik { power } => {
                let zb = z1.conj();
                out[0] = -z1.powi(*power) / (zb * zb);
            }
            FunctionKind::AbsZ1Sq => out[0] = z1,
            FunctionKind::Expr(_) => return None,
        }
        Some(out)
    }

    /// Central-difference Wirtinger derivatives `(1/2)(d/dx_j + i d/dy_j) f`.
    pub fn dbar_fd(&self, z: &[Complex64], h: f64) -> Vec<Complex64> {
        (0..self.dim)
            .map(|j| {
                let shifted = |dz: Complex64| {
                    let mut p = z.to_vec();
                    p[j] += dz;
                    self.eval(&p)
                };
                let dx = (shifted(Complex64::new(h, 0.0)) - shifted(Complex64::new(-h, 0.0))) / (2.0 * h);
                let dy = (shifted(Complex64::new(0.0, h)) - shifted(Complex64::new(0.0, -h))) / (2.0 * h);
                (dx + Complex64::i() * dy) * 0.5
            })
            .collect()
    }
}
