use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use tonebound::bounds::{bound_inputs, quasi_random_points, verdict, BoundReport, Verdict, REFINEMENT_FACTOR};
use tonebound::expr::Expr;
use tonebound::geometry::{self, AffineVectorField, BoxDomain, ChartedMetric};
use tonebound::immersion::gulliver_residual;
use tonebound::linalg;
use tonebound::models::{check_hessian_sandwich, check_laplacian_floor, BusemannModel};
use tonebound::spectral::{
    fem_ball_lambda1, radial_lambda1, tone_estimate, CurvePoint, EigenResult, RadialProblem, RadialVolume, SpaceFormVolume,
    ToneEstimate,
};

use crate::config::{ConfigError, LoadedScenario, SpectralMethod};
use crate::output::{write_csv, write_json, Cell, Stamp};
use crate::spaces::{BaseSpace, TotalSpace, World};

/// Failure to run a command (as opposed to a failed check).
#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Runtime(tonebound::Error),
    Io(std::io::Error),
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "configuration error: {e}"),
            Self::Runtime(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<tonebound::Error> for CommandError {
    fn from(e: tonebound::Error) -> Self {
        Self::Runtime(e)
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

pub struct Context {
    pub loaded: LoadedScenario,
    pub world: World,
    pub stamp: Stamp,
    pub seed: u64,
    pub tolerance: f64,
    pub samples: usize,
    pub verify_points: usize,
    pub out: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    /// `None` for sampled inequalities, which carry their own slack.
    pub tolerance: Option<f64>,
    pub max_residual: f64,
    pub passed: bool,
    pub details: serde_json::Value,
}

fn random_points(domain: &BoxDomain, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let inner = domain.shrunk(0.1);
    (0..n).map(|_| inner.sample(rng)).collect()
}

fn random_vector(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn random_field(d: usize, center: &[f64], rng: &mut ChaCha8Rng) -> AffineVectorField {
    AffineVectorField {
        constant: random_vector(d, 1.0, rng),
        linear: (0..d).map(|_| random_vector(d, 0.5, rng)).collect(),
        center: center.to_vec(),
    }
}

fn busemann_check(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<CheckResult, CommandError> {
    let base = &ctx.world.base;
    let f = base.busemann();
    let k = base.dim();
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for p in random_points(base.domain(), ctx.verify_points, rng) {
        let grad = geometry::gradient(base, &f, &p)?;
        let hess = geometry::hessian(base, &f, &p)?;
        let unit = (grad.norm(base) - 1.0).abs();
        let geodesic = (0..k)
            .map(|i| hess.apply(&grad.components, &linalg::unit(k, i)).abs())
            .fold(0.0, f64::max);
        let closed_form = match base {
            BaseSpace::Hyperbolic(h) => {
                (geometry::laplacian(base, &f, &p)? - (k - 1) as f64 * h.curvature_scale()).abs()
            }
            BaseSpace::WarpedLine(_) => 0.0,
        };
        worst = (worst.0.max(unit), worst.1.max(geodesic), worst.2.max(closed_form));
    }
    let max_residual = worst.0.max(worst.1).max(worst.2);
    Ok(CheckResult {
        name: "busemann".into(),
        samples: ctx.verify_points,
        tolerance: Some(ctx.tolerance),
        max_residual,
        passed: max_residual < ctx.tolerance,
        details: json!({
            "unit_gradient": worst.0,
            "hessian_along_gradient": worst.1,
            "laplacian_closed_form": worst.2,
        }),
    })
}

fn sampled_check(name: &str, report: tonebound::models::CheckReport) -> CheckResult {
    CheckResult {
        name: name.into(),
        samples: report.samples,
        tolerance: None,
        max_residual: (-report.worst_lower_margin).max(-report.worst_upper_margin).max(0.0),
        passed: report.passed,
        details: serde_json::to_value(&report).expect("serialisable report"),
    }
}

fn submersion_check(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<CheckResult, CommandError> {
    let sub = &ctx.world.submersion;
    let base = &ctx.world.base;
    let f = base.busemann();
    let (n, k) = (sub.total_dim(), sub.base_dim());
    let mut worst = [0.0_f64; 8];
    for p in random_points(sub.total().domain(), ctx.verify_points, rng) {
        let q: Vec<f64> = p[..k].to_vec();
        let x = random_field(k, &q, rng);
        let y = random_field(k, &q, rng);
        let (v, w) = (random_vector(n, 1.0, rng), random_vector(n, 1.0, rng));
        let r = sub.lemma_residuals(&f, &x, &y, &v, &w, &p)?;
        let c = sub.basic_connection_residual(&p, &x, &y)?;
        let defect = sub.isometry_defect(&p)?;
        let values = [r.divergence, r.laplacian, r.hessian_horizontal, r.hessian_vertical, r.hessian_mixed, c.horizontal, c.vertical, defect];
        for (w, v) in worst.iter_mut().zip(values) {
            *w = w.max(v);
        }
    }
    let max_residual = worst.iter().copied().fold(0.0, f64::max);
    Ok(CheckResult {
        name: "submersion".into(),
        samples: ctx.verify_points,
        tolerance: Some(ctx.tolerance),
        max_residual,
        passed: max_residual < ctx.tolerance,
        details: json!({
            "divergence": worst[0],
            "laplacian": worst[1],
            "hessian_horizontal": worst[2],
            "hessian_vertical": worst[3],
            "hessian_mixed": worst[4],
            "basic_connection_horizontal": worst[5],
            "basic_connection_vertical": worst[6],
            "isometry_defect": worst[7],
        }),
    })
}

fn log_gradient_check(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Option<CheckResult>, CommandError> {
    let TotalSpace::Warped(w) = ctx.world.submersion.total() else { return Ok(None) };
    if !ctx.loaded.scenario.total.log_gradient_bounded {
        return Ok(None);
    }
    let mut sup = 0.0_f64;
    for x in random_points(w.base().domain(), ctx.verify_points, rng) {
        sup = sup.max(w.log_gradient_norm(&x)?);
    }
    let max_residual = (sup - 1.0).max(0.0);
    Ok(Some(CheckResult {
        name: "warping_log_gradient".into(),
        samples: ctx.verify_points,
        tolerance: Some(ctx.tolerance),
        max_residual,
        passed: max_residual < ctx.tolerance,
        details: json!({ "sup_log_gradient": sup }),
    }))
}

fn gulliver_check(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Option<CheckResult>, CommandError> {
    let Some(f) = &ctx.world.immersion else { return Ok(None) };
    let busemann = ctx.world.base.busemann();
    let lifted = ctx.world.submersion.lift_function(&busemann);
    let mut max_residual = 0.0_f64;
    let mut max_h = 0.0_f64;
    for p in random_points(f.domain(), ctx.verify_points, rng) {
        max_residual = max_residual.max(gulliver_residual(f, &lifted, &p)?);
        max_h = max_h.max(tonebound::immersion::mean_curvature(f, &p)?.norm);
    }
    Ok(Some(CheckResult {
        name: "gulliver".into(),
        samples: ctx.verify_points,
        tolerance: Some(ctx.tolerance),
        max_residual,
        passed: max_residual < ctx.tolerance,
        details: json!({ "sup_mean_curvature": max_h }),
    }))
}

/// Run every applicable check and write one JSON file per check.
pub fn verify(ctx: &Context) -> Result<Vec<CheckResult>, CommandError> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let base = &ctx.world.base;
    let mut checks = vec![busemann_check(ctx, &mut rng)?];
    checks.push(sampled_check("hessian_sandwich", check_hessian_sandwich(base, ctx.verify_points, ctx.seed)?));
    checks.push(sampled_check("laplacian_floor", check_laplacian_floor(base, ctx.verify_points, ctx.seed)?));
    if ctx.world.submersion.fiber_dim() > 0 {
        checks.push(submersion_check(ctx, &mut rng)?);
    }
    if let Some(c) = log_gradient_check(ctx, &mut rng)? {
        checks.push(c);
    }
    if let Some(c) = gulliver_check(ctx, &mut rng)? {
        checks.push(c);
    }
    for c in &checks {
        write_json(&ctx.out.join("verify").join(format!("{}.json", c.name)), &ctx.stamp, c)?;
    }
    Ok(checks)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenRow {
    pub r: f64,
    pub grid: usize,
    pub lambda1: f64,
    pub mesh_parameter: f64,
    pub error_estimate: f64,
    pub extrapolated: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToneOutcome {
    Estimate(ToneEstimate),
    Declined(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenOutput {
    pub rows: Vec<EigenRow>,
    /// Finest row per radius.
    pub curve: Vec<CurvePoint>,
    pub tone: ToneOutcome,
}

fn row(r: f64, grid: usize, e: &EigenResult<f64>) -> EigenRow {
    EigenRow {
        r,
        grid,
        lambda1: e.lambda1,
        mesh_parameter: e.mesh_parameter,
        error_estimate: e.error_estimate.unwrap_or(f64::NAN),
        extrapolated: e.extrapolated.unwrap_or(f64::NAN),
    }
}

fn radial_rows<V: RadialVolume + Clone>(dim: usize, volume: V, radii: &[f64], grids: &[usize], cells: usize, tol: Option<f64>) -> Result<Vec<EigenRow>, CommandError> {
    let mut rows = Vec::new();
    for &r in radii {
        let sizes: Vec<usize> = if grids.is_empty() { vec![((cells as f64) * r).ceil() as usize] } else { grids.to_vec() };
        for n in sizes {
            let mut problem = RadialProblem::new(dim, volume.clone(), r, n)?;
            if let Some(t) = tol {
                problem = problem.with_tolerance(t);
            }
            rows.push(row(r, n, &radial_lambda1::<f64, _>(&problem)?));
        }
    }
    Ok(rows)
}

/// Compute `λ₁(r)` on every radius and grid, write `eigen.csv` and `tone.json`.
pub fn eigen(ctx: &Context) -> Result<EigenOutput, CommandError> {
    let spec = ctx
        .loaded
        .scenario
        .spectral
        .as_ref()
        .ok_or_else(|| ConfigError::new("the scenario has no [spectral] section"))?;
    if spec.radii.is_empty() || spec.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(ConfigError::new("spectral.radii must be a non-empty list of positive radii").into());
    }
    let rows = match spec.method {
        SpectralMethod::Radial => {
            let dim = spec
                .dim
                .or_else(|| ctx.world.immersion.as_ref().map(|f| f.source_dim()))
                .unwrap_or_else(|| ctx.world.base.dim());
            match &spec.volume {
                Some(v) => {
                    let expr: Expr = ctx.loaded.expression(v, &["r"])?;
                    radial_rows(dim, expr, &spec.radii, &spec.grids, spec.cells_per_unit, ctx.loaded.scenario.tolerances.eigen)?
                }
                None => radial_rows(
                    dim,
                    SpaceFormVolume { dim, a: spec.curvature },
                    &spec.radii,
                    &spec.grids,
                    spec.cells_per_unit,
                    ctx.loaded.scenario.tolerances.eigen,
                )?,
            }
        }
        SpectralMethod::Fem => {
            let rings = if spec.rings.is_empty() { vec![8] } else { spec.rings.clone() };
            let mut rows = Vec::new();
            let mut run = |metric: &dyn Fn(f64, usize) -> tonebound::Result<EigenResult<f64>>| -> Result<(), CommandError> {
                for &r in &spec.radii {
                    for &n in &rings {
                        rows.push(row(r, n, &metric(r, n)?));
                    }
                }
                Ok(())
            };
            match &ctx.world.immersion {
                Some(f) if f.source_dim() == 2 => {
                    let d = f.domain();
                    let center = spec.center.unwrap_or([0.5 * (d.lower[0] + d.upper[0]), 0.5 * (d.lower[1] + d.upper[1])]);
                    run(&|r, n| fem_ball_lambda1(f, center, r, n))?;
                }
                None if ctx.world.base.dim() == 2 => {
                    let base = &ctx.world.base;
                    let d = base.domain();
                    let center = spec.center.unwrap_or([0.5 * (d.lower[0] + d.upper[0]), 0.5 * (d.lower[1] + d.upper[1])]);
                    run(&|r, n| fem_ball_lambda1(base, center, r, n))?;
                }
                _ => return Err(ConfigError::new("the finite-element method needs a two-dimensional manifold").into()),
            }
            rows
        }
    };
    let mut curve: Vec<CurvePoint> = Vec::new();
    for r in &rows {
        let point = CurvePoint { r: r.r, lambda1: r.lambda1, mesh_parameter: r.mesh_parameter, error_estimate: r.error_estimate };
        match curve.last_mut() {
            Some(last) if last.r == r.r => {
                if r.mesh_parameter <= last.mesh_parameter {
                    *last = point;
                }
            }
            _ => curve.push(point),
        }
    }
    let tone = if curve.len() < 3 {
        ToneOutcome::Declined(format!("{} radius value(s); the asymptotic fit needs at least 3", curve.len()))
    } else {
        match tone_estimate(&curve, ctx.tolerance) {
            Ok(t) => ToneOutcome::Estimate(t),
            Err(e) => ToneOutcome::Declined(e.to_string()),
        }
    };
    let cells: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::Real(r.r),
                Cell::Int(r.grid as u64),
                Cell::Real(r.lambda1),
                Cell::Real(r.mesh_parameter),
                Cell::Real(r.error_estimate),
                Cell::Real(r.extrapolated),
            ]
        })
        .collect();
    write_csv(
        &ctx.out.join("eigen.csv"),
        &ctx.stamp,
        &["r", "grid", "lambda1", "mesh_parameter", "error_estimate", "extrapolated"],
        &cells,
    )?;
    write_json(&ctx.out.join("tone.json"), &ctx.stamp, &tone)?;
    Ok(EigenOutput { rows, curve, tone })
}

/// Sample the geometric terms, evaluate `c` and compare with the curve.
pub fn bound(ctx: &Context, curve: &[CurvePoint]) -> Result<BoundReport, CommandError> {
    let f = ctx
        .world
        .immersion
        .as_ref()
        .ok_or_else(|| ConfigError::new("the scenario has no [immersion] section"))?;
    let points = quasi_random_points(&f.domain().shrunk(0.02), ctx.samples * REFINEMENT_FACTOR);
    let mut inputs = bound_inputs(f, &ctx.world.submersion, &points)?;
    if let Some(alpha) = ctx.world.alpha {
        inputs = inputs.with_alpha(alpha)?;
    }
    let report = verdict(&inputs, ctx.samples, curve)?;
    write_json(&ctx.out.join("bound.json"), &ctx.stamp, &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub checks: Vec<CheckSummary>,
    pub verify_passed: bool,
    pub bound: Option<f64>,
    pub c: f64,
    pub min_margin: Option<f64>,
    pub verdict: Verdict,
    pub tone: ToneOutcome,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
}

pub fn report(ctx: &Context) -> Result<(Vec<CheckResult>, EigenOutput, BoundReport, ReportSummary), CommandError> {
    let checks = verify(ctx)?;
    let eigen_out = eigen(ctx)?;
    let bound_report = bound(ctx, &eigen_out.curve)?;
    let verify_passed = checks.iter().all(|c| c.passed);
    let ok = verify_passed && matches!(bound_report.verdict, Verdict::Pass | Verdict::NotApplicable);
    let summary = ReportSummary {
        checks: checks.iter().map(|c| CheckSummary { name: c.name.clone(), passed: c.passed, max_residual: c.max_residual }).collect(),
        verify_passed,
        bound: bound_report.bound,
        c: bound_report.c.value,
        min_margin: bound_report.min_margin,
        verdict: bound_report.verdict,
        tone: eigen_out.tone.clone(),
        exit_code: if ok { 0 } else { 1 },
    };
    write_json(&ctx.out.join("report.json"), &ctx.stamp, &summary)?;
    Ok((checks, eigen_out, bound_report, summary))
}
