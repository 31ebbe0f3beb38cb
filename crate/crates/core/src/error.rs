use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical layers.
///
/// Verdict-level outcomes (degeneracy, failed preconditions) are not errors;
/// they are folded into [`crate::verify::Verdict`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("near-singular winding: curve passes within {distance:.3e} of {point} (mesh {mesh:.3e})")]
    NearSingularWinding {
        point: Complex64,
        distance: f64,
        mesh: f64,
    },

    #[error("non-closed curve: accumulated argument {turns:.4} turns is not near an integer")]
    NonClosedCurve { turns: f64 },

    #[error("degenerate disc at node {node}: |g'| = {min_derivative:.3e}")]
    DegenerateDisc { node: usize, min_derivative: f64 },

    #[error("function singular on the image at zeta = {zeta}, node {node}")]
    FunctionSingular { zeta: Complex64, node: usize },

    #[error("no extension at node {node}: residual {residual:.3e} above tolerance {tolerance:.3e}")]
    NoExtension {
        node: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("tracking instability between nodes {from} and {to}: root count {before} -> {after}; refine the parameter grid")]
    TrackingInstability {
        from: usize,
        to: usize,
        before: usize,
        after: usize,
    },

    #[error("fiber hits critical point at t = {t:.6}, zeta = {zeta}")]
    FiberCriticalPoint { t: f64, zeta: Complex64 },

    #[error("degenerate preimage at (psi, t) = ({psi:.6}, {t:.6}): |det| = {det:.3e}")]
    DegeneratePreimage { psi: f64, t: f64, det: f64 },

    #[error("surface incidence fails: max |rho(G)| = {max_rho:.3e}")]
    SurfaceIncidence { max_rho: f64 },

    #[error("sample {index} lies off the surface: |rho| = {rho:.3e}")]
    OffSurface { index: usize, rho: f64 },

    #[error("path hits critical image on segment {segment}")]
    PathHitsCriticalImage { segment: usize },

    #[error("root finder failed: {0}")]
    RootFinder(String),

    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },
}

impl Error {
    /// Stable snake_case name of the variant, for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::NearSingularWinding { .. } => "near_singular_winding",
            Error::NonClosedCurve { .. } => "non_closed_curve",
            Error::DegenerateDisc { .. } => "degenerate_disc",
            Error::FunctionSingular { .. } => "function_singular",
            Error::NoExtension { .. } => "no_extension",
            Error::TrackingInstability { .. } => "tracking_instability",
            Error::FiberCriticalPoint { .. } => "fiber_critical_point",
            Error::DegeneratePreimage { .. } => "degenerate_preimage",
            Error::SurfaceIncidence { .. } => "surface_incidence",
            Error::OffSurface { .. } => "off_surface",
            Error::PathHitsCriticalImage { .. } => "path_hits_critical_image",
            Error::RootFinder(_) => "root_finder",
            Error::Expression { .. } => "expression",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
