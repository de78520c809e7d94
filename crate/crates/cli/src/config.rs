//! Scenario files: TOML with arithmetic expressions for warps, warping
//! factors and graph heights.

use std::fmt;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use tonebound::expr::Expr;

/// A configuration problem, located in the scenario file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { message: message.into(), line: None, column: None }
    }

    fn at(message: impl Into<String>, source: &str, offset: usize) -> Self {
        let (line, column) = line_column(source, offset);
        Self { message: message.into(), line: Some(line), column: Some(column) }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line and column of a byte offset.
fn line_column(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub base: BaseSpec,
    #[serde(default)]
    pub total: TotalSpec,
    #[serde(default)]
    pub immersion: Option<ImmersionSpec>,
    #[serde(default)]
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub spectral: Option<SpectralSpec>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BaseModel {
    Hyperbolic,
    WarpedLine,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum FiberKind {
    #[default]
    Flat,
    Sphere,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub model: BaseModel,
    /// Dimension of `ℍ^k`.
    pub k: Option<usize>,
    /// Curvature scale of `ℍ^k(−a²)`.
    pub a: Option<f64>,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default)]
    pub fiber: FiberKind,
    #[serde(default = "one")]
    pub fiber_dim: usize,
    #[serde(default = "one_f")]
    pub sphere_radius: f64,
    /// Warping function `w(s)`.
    pub warp: Option<Spanned<String>>,
    pub s_range: Option<[f64; 2]>,
    /// Declared `(a, b)` for the warped line.
    pub declared_bounds: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum TotalKind {
    /// The total space is the base and the submersion is the identity.
    #[default]
    Base,
    /// `B ×_ρ F` projecting onto `B`.
    Warped,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TotalSpec {
    #[serde(default)]
    pub kind: TotalKind,
    #[serde(default)]
    pub fiber: FiberKind,
    #[serde(default = "one")]
    pub fiber_dim: usize,
    #[serde(default = "one_f")]
    pub sphere_radius: f64,
    #[serde(default = "default_half_width")]
    pub fiber_half_width: f64,
    /// Warping factor `ρ` in base coordinates.
    pub rho: Option<Spanned<String>>,
    /// Declares `‖grad ρ‖/ρ ≤ 1`; `verify` then samples it.
    #[serde(default)]
    pub log_gradient_bounded: bool,
}

impl Default for TotalSpec {
    fn default() -> Self {
        Self {
            kind: TotalKind::Base,
            fiber: FiberKind::Flat,
            fiber_dim: 1,
            sphere_radius: 1.0,
            fiber_half_width: default_half_width(),
            rho: None,
            log_gradient_bounded: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ImmersionKind {
    /// Fix some total-space coordinates.
    Slice,
    /// `u ↦ (u, φ(u))` over the first `n − 1` coordinates.
    Graph,
    Identity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmersionSpec {
    pub kind: ImmersionKind,
    /// `(target index, value)` pairs for slices.
    #[serde(default)]
    pub fixed: Vec<(usize, f64)>,
    pub height: Option<Spanned<String>>,
    /// Declared bound `‖H‖ ≤ α`.
    pub alpha: Option<f64>,
    /// Fraction of the inferred source box kept on each side.
    #[serde(default)]
    pub shrink: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_verify_points")]
    pub verify_points: usize,
    #[serde(default = "one_u64")]
    pub seed: u64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self { points: default_points(), verify_points: default_verify_points(), seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    #[default]
    Radial,
    Fem,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    #[serde(default)]
    pub method: SpectralMethod,
    /// Dimension of the space-form ball (radial).
    pub dim: Option<usize>,
    /// Curvature scale of the space form; `0` is flat (radial).
    #[serde(default)]
    pub curvature: f64,
    /// Custom volume factor `S(r)` (radial).
    pub volume: Option<Spanned<String>>,
    pub radii: Vec<f64>,
    /// Radial grid sizes; one row per radius and grid.
    #[serde(default)]
    pub grids: Vec<usize>,
    #[serde(default = "default_cells")]
    pub cells_per_unit: usize,
    /// FEM ring counts; one row per radius and ring count.
    #[serde(default)]
    pub rings: Vec<usize>,
    pub center: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "default_residual")]
    pub residual: f64,
    /// Largest acceptable Richardson estimate for radial eigenvalues.
    pub eigen: Option<f64>,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self { residual: default_residual(), eigen: None }
    }
}

fn default_half_width() -> f64 {
    3.0
}
fn one() -> usize {
    1
}
fn one_u64() -> u64 {
    1
}
fn one_f() -> f64 {
    1.0
}
fn default_points() -> usize {
    tonebound::bounds::DEFAULT_SAMPLES
}
fn default_verify_points() -> usize {
    100
}
fn default_cells() -> usize {
    100
}
fn default_residual() -> f64 {
    1e-6
}

/// A scenario together with its source text, for locating errors.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub source: String,
}

pub fn parse_scenario(source: &str) -> Result<LoadedScenario, ConfigError> {
    let scenario: Scenario = toml::from_str(source).map_err(|e| match e.span() {
        Some(span) => ConfigError::at(e.message().trim().to_string(), source, span.start),
        None => ConfigError::new(e.message().trim().to_string()),
    })?;
    Ok(LoadedScenario { scenario, source: source.to_string() })
}

impl LoadedScenario {
    /// Parse an expression field, reporting errors at their position in the file.
    pub fn expression(&self, field: &Spanned<String>, vars: &[&str]) -> Result<Expr, ConfigError> {
        Expr::parse(field.get_ref(), vars).map_err(|e| {
            let Range { start, .. } = field.span();
            // skip the opening quote
            ConfigError::at(format!("{} (variables: {})", e.message, vars.join(", ")), &self.source, start + 1 + e.offset)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_scenario("name = \"x\"\n[base]\nmodel = = 3\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.column.is_some());
    }

    #[test]
    fn expression_errors_carry_position() {
        let src = "name = \"x\"\n[base]\nmodel = \"warped_line\"\nwarp = \"s + * 2\"\n";
        let loaded = parse_scenario(src).unwrap();
        let err = loaded.expression(loaded.scenario.base.warp.as_ref().unwrap(), &["s"]).unwrap_err();
        assert_eq!(err.line, Some(4));
        assert_eq!(err.column, Some(13));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse_scenario("name = \"x\"\n[base]\nmodel = \"hyperbolic\"\nkk = 2\n").unwrap_err();
        assert!(err.message.contains("kk"), "{}", err.message);
    }
}
