//! Run configuration: schema, parsing with located errors, validation.
//!
//! A config is a JSON document:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "task": "verdict",
//!   "family": { "builder": "rotating_circles", "params": { "R": 1, "r": 2 } },
//!   "function": { "name": "globevnik_n", "n": 2 },
//!   "grid": { "circle_points": 256, "resolution": 256 },
//!   "tolerances": { "j_degenerate": 1e-8 },
//!   "seed": 7
//! }
//! ```
//!
//! `family.builder` is one of `rotating_circles` (`R`, `r`),
//! `translated_circles` (`rho`, `center_path` as `[[re, im], ...]`),
//! `tangent_lines` (`ball_radius`, `inner_radius`), `hopf_discs` (no
//! parameters) or `custom` (`kind`, `taylor_table`). `function.name` is a
//! catalog name or `expr:<expression>` in `z` / `zbar` (`z1`, `z2`, ... in
//! two dimensions). Complex numbers are `[re, im]` pairs everywhere.
//!
//! Optional sections:
//!
//! | key | meaning |
//! |---|---|
//! | `grid` | `circle_points`, `resolution` (overrides the family's), `raster_cells`, `fiber_steps`, `seed_grid`, `angles` |
//! | `tolerances` | `extension`, `j_degenerate`, `fiber_spread`, `dbar`, `rank`, `corrector` |
//! | `probes` | `points` (explicit `b` values) or `random` (count), `symmetry` (verdict probes) |
//! | `path` | `vertices` and `samples` of the jump-profile path |
//! | `jacobian` | `synthetic`: Taylor coefficients of a `t`-independent `J` replacing the computed one |
//! | `surface` | `{ "name": "sphere", "params": { "radius": 1 } }` or a `quadric` |
//! | `moments` | degree of the moment test in `extend` |
//! | `output` | `csv`: whether to write CSV dumps |

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::family::{DiscFamily, FamilySpec, ParamKind};
use crate::function::{BoundaryFunction, FunctionSpec};
use crate::hypersurface::Surface;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Extend,
    Jacobian,
    Fibers,
    Homology,
    Symmetry,
    Jumps,
    Verdict,
    Counterexamples,
    Hypersurface,
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::Extend,
        Task::Jacobian,
        Task::Fibers,
        Task::Homology,
        Task::Symmetry,
        Task::Jumps,
        Task::Verdict,
        Task::Counterexamples,
        Task::Hypersurface,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Extend => "extend",
            Task::Jacobian => "jacobian",
            Task::Fibers => "fibers",
            Task::Homology => "homology",
            Task::Symmetry => "symmetry",
            Task::Jumps => "jumps",
            Task::Verdict => "verdict",
            Task::Counterexamples => "counterexamples",
            Task::Hypersurface => "hypersurface",
        }
    }

    fn needs_function(self) -> bool {
        matches!(self, Task::Extend | Task::Verdict)
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub circle_points: usize,
    /// Overrides the parameter resolution of a builtin family.
    pub resolution: Option<usize>,
    pub raster_cells: usize,
    pub fiber_steps: usize,
    pub seed_grid: usize,
    /// Boundary angles sampled by the hypersurface layer.
    pub angles: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            circle_points: 256,
            resolution: None,
            raster_cells: 256,
            fiber_steps: 1024,
            seed_grid: 256,
            angles: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative extension residual below which `f` extends.
    pub extension: f64,
    pub j_degenerate: f64,
    pub fiber_spread: f64,
    pub dbar: f64,
    /// Relative singular-value threshold of the rank audit.
    pub rank: f64,
    /// Newton correction bound of the level-curve tracer.
    pub corrector: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let t = crate::verify::Thresholds::default();
        Self {
            extension: 1e-8,
            j_degenerate: t.j_degenerate,
            fiber_spread: t.fiber_spread,
            dbar: t.dbar,
            rank: 1e-8,
            corrector: 1e-6,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("extension", self.extension),
            ("j_degenerate", self.j_degenerate),
            ("fiber_spread", self.fiber_spread),
            ("dbar", self.dbar),
            ("rank", self.rank),
            ("corrector", self.corrector),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Explicit values `b`; when empty, `random` regular values are drawn.
    pub points: Vec<Complex64>,
    pub random: usize,
    /// Symmetry probes attached to a verdict.
    pub symmetry: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            random: 20,
            symmetry: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub vertices: Vec<Complex64>,
    #[serde(default = "default_path_samples")]
    pub samples: usize,
}

fn default_path_samples() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobianConfig {
    /// Taylor coefficients of a synthetic `J`, constant in `t`.
    pub synthetic: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub probes: ProbeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<JacobianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<Surface>,
    #[serde(default = "default_moments")]
    pub moments: u32,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_moments() -> u32 {
    4
}

impl RunConfig {
    /// A minimal config for `task` on `family`.
    pub fn new(task: Task, family: Option<FamilySpec>, function: Option<FunctionSpec>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            task,
            family,
            function,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            seed: 0,
            probes: ProbeConfig::default(),
            path: None,
            jacobian: None,
            surface: None,
            moments: default_moments(),
            output: OutputConfig::default(),
        }
    }

    /// The same run with every grid multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut out = self.clone();
        out.grid.circle_points *= factor;
        out.grid.raster_cells *= factor;
        out.grid.fiber_steps *= factor;
        out.grid.seed_grid *= factor;
        out.grid.angles *= factor;
        out.grid.resolution = out.grid.resolution.map(|r| r * factor);
        if out.grid.resolution.is_none() {
            out.family = out.family.map(|f| f.refined(factor));
        }
        if let Some(p) = &mut out.path {
            p.samples = (p.samples - 1) * factor + 1;
        }
        out
    }

    /// Family with the grid's resolution override applied.
    pub fn build_family(&self) -> crate::Result<DiscFamily> {
        let spec = self
            .family
            .as_ref()
            .ok_or_else(|| Error::Config("family: required for this task".into()))?;
        match self.grid.resolution {
            Some(r) => with_resolution(spec, r).build(),
            None => spec.build(),
        }
    }

    pub fn build_function(&self, dim: usize) -> crate::Result<Option<BoundaryFunction>> {
        self.function.as_ref().map(|s| BoundaryFunction::from_spec(s, dim)).transpose()
    }
}

fn with_resolution(spec: &FamilySpec, r: usize) -> FamilySpec {
    let mut out = spec.clone();
    match &mut out {
        FamilySpec::RotatingCircles { resolution, .. }
        | FamilySpec::TranslatedCircles { resolution, .. }
        | FamilySpec::TangentLines { resolution, .. }
        | FamilySpec::HopfDiscs { resolution } => *resolution = r,
        FamilySpec::Custom { .. } => {}
    }
    out
}

/// A parse or validation failure, located in the config text.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    /// Dotted path of the offending key, when known.
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        if let Some(k) = &self.key {
            write!(f, "key `{k}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Line and column of the dotted `path` in `text`, found by scanning for
/// each segment's quoted key in turn; `(1, 1)` when nothing matches.
pub fn locate(text: &str, path: &str) -> (usize, usize) {
    let mut offset = 0;
    let mut found = None;
    for seg in path.split('.').filter(|s| !s.is_empty() && !s.starts_with('[')) {
        let needle = format!("\"{seg}\"");
        match text[offset..].find(&needle) {
            Some(i) => {
                offset += i + needle.len();
                found = Some(offset - needle.len());
            }
            None => break,
        }
    }
    match found {
        Some(pos) => {
            let before = &text[..pos];
            let line = before.matches('\n').count() + 1;
            let column = pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (1, 1),
    }
}

fn located(text: &str, key: &str, message: impl Into<String>) -> ConfigError {
    let (line, column) = locate(text, key);
    ConfigError {
        line,
        column,
        key: Some(key.to_string()),
        message: message.into(),
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.to_string();
        let suffix = format!(" at line {} column {}", inner.line(), inner.column());
        ConfigError {
            line: inner.line(),
            column: inner.column(),
            key: (path != "." && !path.is_empty()).then_some(path),
            message: message.strip_suffix(&suffix).unwrap_or(&message).to_string(),
        }
    })?;
    validate(&cfg, text)?;
    Ok(cfg)
}

/// Checks that do not fit the type system; the text locates keys.
pub fn validate(cfg: &RunConfig, text: &str) -> Result<(), ConfigError> {
    if cfg.schema != SCHEMA_VERSION {
        return Err(located(
            text,
            "schema",
            format!("unsupported schema {} (expected {SCHEMA_VERSION})", cfg.schema),
        ));
    }
    for (name, value) in cfg.tolerances.entries() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(located(text, &format!("tolerances.{name}"), format!("must be positive, got {value}")));
        }
    }
    let g = cfg.grid;
    for (name, value, min) in [
        ("circle_points", g.circle_points, 8),
        ("raster_cells", g.raster_cells, 8),
        ("fiber_steps", g.fiber_steps, 16),
        ("seed_grid", g.seed_grid, 8),
        ("angles", g.angles, 4),
    ] {
        if value < min {
            return Err(located(text, &format!("grid.{name}"), format!("must be at least {min}, got {value}")));
        }
    }
    if g.circle_points % 2 != 0 {
        return Err(located(text, "grid.circle_points", "must be even"));
    }
    if cfg.task == Task::Counterexamples {
        return Ok(());
    }
    let family = cfg.build_family().map_err(|e| located(text, "family", strip(e)))?;
    let function = cfg
        .build_function(family.dim())
        .map_err(|e| located(text, "function", strip(e)))?;
    if function.is_none() && cfg.task.needs_function() {
        return Err(located(text, "task", format!("task '{}' needs a `function`", cfg.task.name())));
    }
    let planar = family.dim() == 1;
    let kind = family.params().kind;
    let synthetic = cfg.jacobian.is_some();
    let check = |ok: bool, key: &str, msg: &str| if ok { Ok(()) } else { Err(located(text, key, msg)) };
    match cfg.task {
        Task::Fibers => check(planar, "task", "fibers are traced for planar families")?,
        Task::Symmetry => {
            check(planar && kind == ParamKind::Circle, "task", "the symmetry relation needs a planar circle family")?;
            check(function.is_some() || synthetic, "task", "symmetry needs a `function` or `jacobian.synthetic`")?;
        }
        Task::Jumps => {
            check(planar && kind == ParamKind::Interval, "task", "jump profiles need a planar interval family")?;
            check(function.is_some() || synthetic, "task", "jumps need a `function` or `jacobian.synthetic`")?;
            let path = cfg.path.as_ref().ok_or_else(|| located(text, "task", "jumps need a `path`"))?;
            check(path.vertices.len() >= 2, "path.vertices", "needs at least two vertices")?;
            check(path.samples >= 2, "path.samples", "needs at least two samples")?;
        }
        Task::Jacobian => check(function.is_some() || synthetic, "task", "jacobian needs a `function` or `jacobian.synthetic`")?,
        Task::Hypersurface => check(!planar, "task", "the hypersurface layer needs a family in C^2")?,
        _ => {}
    }
    if let Some(j) = &cfg.jacobian {
        check(planar, "jacobian", "synthetic Jacobians are planar")?;
        check(j.synthetic.iter().any(|c| c.norm() > 0.0), "jacobian.synthetic", "coefficients are all zero")?;
    }
    Ok(())
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
  "schema": 1,
  "task": "verdict",
  "family": { "builder": "translated_circles",
              "params": { "rho": 1, "center_path": [[0, 0], [3, 0]], "resolution": 32 } },
  "function": { "name": "z_sq" }
}"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = parse_config(GOOD).unwrap();
        assert_eq!(cfg.task, Task::Verdict);
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.build_family().unwrap().node_count(), 32);
    }

    #[test]
    fn type_error_names_key_and_line() {
        let bad = GOOD.replace("\"rho\": 1", "\"rho\": \"one\"");
        let err = parse_config(&bad).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("family.params.rho"));
        assert_eq!(err.line, 5);
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = GOOD.replace("\"rho\": 1", "\"rh0\": 1");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("rh0"), "{err}");
        assert_eq!(err.line, 5);
    }

    #[test]
    fn validation_locates_keys() {
        let bad = GOOD.replace("\"schema\": 1", "\"schema\": 2");
        let err = parse_config(&bad).unwrap_err();
        assert_eq!((err.key.as_deref(), err.line), (Some("schema"), 2));

        let bad = GOOD.replace("\"z_sq\"", "\"z_cubed\"");
        let err = parse_config(&bad).unwrap_err();
        assert_eq!((err.key.as_deref(), err.line), (Some("function"), 6));

        let bad = GOOD.replace("\"rho\": 1", "\"rho\": -1");
        assert_eq!(parse_config(&bad).unwrap_err().key.as_deref(), Some("family"));

        let bad = GOOD.replace("\"task\": \"verdict\"", "\"task\": \"jumps\"");
        assert_eq!(parse_config(&bad).unwrap_err().key.as_deref(), Some("task"));

        let bad = GOOD.replace("\"schema\": 1,", "\"schema\": 1, \"tolerances\": { \"dbar\": 0 },");
        assert_eq!(parse_config(&bad).unwrap_err().key.as_deref(), Some("tolerances.dbar"));
    }

    #[test]
    fn refinement_doubles_grids() {
        let cfg = parse_config(GOOD).unwrap().refined(2);
        assert_eq!(cfg.grid.circle_points, 512);
        assert_eq!(cfg.build_family().unwrap().node_count(), 64);
    }
}
