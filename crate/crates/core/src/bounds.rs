//! Lower-bound constants for `λ₁(M)` from sampled geometric data, the
//! classical comparison bounds, and the verdict against computed eigenvalues.
//!
//! `c` is an infimum over all of `M`; here it is a minimum over a finite
//! point sample, so it estimates the true infimum from above. The verdict
//! recomputes it on a sample [`REFINEMENT_FACTOR`] times larger (a superset of
//! the first) and demands agreement within [`REFINEMENT_AGREEMENT`].

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoxDomain, ChartedMetric, SmoothMap};
use crate::immersion::{self, ImmersionMap};
use crate::models::BusemannModel;
use crate::spectral::CurvePoint;
use crate::submersion::SubmersionMap;

pub const DEFAULT_SAMPLES: usize = 500;
pub const REFINEMENT_FACTOR: usize = 4;
/// Relative agreement required between `c` on the base and refined samples.
pub const REFINEMENT_AGREEMENT: f64 = 0.01;
/// Slack when checking sampled `‖H‖` against a declared bound.
const DECLARED_SLACK: f64 = 1e-9;

/// Norms of the geometric tensors at one point of `M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointTerms {
    /// Point in the chart of `M`.
    pub point: Vec<f64>,
    /// `‖H‖` of `M` in `M̃`.
    pub mean_curvature: f64,
    /// `‖H^F‖` of the fiber through `f(p)`.
    pub fiber_mean_curvature: f64,
    /// `‖A‖` at `f(p)`.
    pub oneill_a: f64,
    /// `‖α^F‖` at `f(p)`.
    pub fiber_alpha: f64,
}

/// Everything needed to evaluate `c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundInputs {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    /// Upper Hessian comparison constant of the base Busemann function.
    pub a: f64,
    /// Lower Hessian comparison constant.
    pub b: f64,
    pub samples: Vec<PointTerms>,
    /// Declared bound `‖H‖ ≤ α`; when present it replaces the sampled `‖H‖`.
    pub alpha: Option<f64>,
}

impl BoundInputs {
    pub fn new(k: usize, m: usize, n: usize, a: f64, b: f64, samples: Vec<PointTerms>) -> Result<Self> {
        check_dimensions(k, m, n)?;
        if !(b <= a) || !b.is_finite() || !a.is_finite() {
            return Err(Error::InvalidProblem(format!("comparison constants need b <= a, got a={a}, b={b}")));
        }
        for t in &samples {
            let norms = [t.mean_curvature, t.fiber_mean_curvature, t.oneill_a, t.fiber_alpha];
            if norms.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidProblem(format!("negative or non-finite norm at {:?}", t.point)));
            }
        }
        Ok(Self { k, m, n, a, b, samples, alpha: None })
    }

    /// Use a declared mean-curvature bound. Every sampled `‖H‖` must respect it.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidProblem(format!("declared mean-curvature bound must be >= 0, got {alpha}")));
        }
        if let Some(t) = self.samples.iter().find(|t| t.mean_curvature > alpha + DECLARED_SLACK) {
            return Err(Error::InvalidProblem(format!(
                "sampled |H| = {} at {:?} exceeds declared bound {alpha}",
                t.mean_curvature, t.point
            )));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    /// The first `count` samples.
    pub fn truncated(&self, count: usize) -> Self {
        Self { samples: self.samples[..count.min(self.samples.len())].to_vec(), ..self.clone() }
    }
}

fn check_dimensions(k: usize, m: usize, n: usize) -> Result<()> {
    if !(2 <= m && m <= n && 2 <= k && k <= n) {
        return Err(Error::InvalidDimension(format!("need 2 <= m <= n and 2 <= k <= n, got k={k}, m={m}, n={n}")));
    }
    Ok(())
}

/// Which printed form of the constant to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantForm {
    /// `(k−1)b − ‖H^F‖ − (n−m)(a + 2‖A‖ + ‖α^F‖) − ‖H‖`.
    General,
    /// `k−1 − ‖H‖ − ‖H^F‖ − (n−m)(2‖A‖ + ‖α^F‖ + 1)`, the form for base `ℍ^k`.
    /// Coincides with [`ConstantForm::General`] when `a = b = 1`.
    HyperbolicBase,
}

/// The pointwise expression split into its terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermBreakdown {
    /// `(k−1)b`, or `k−1`.
    pub curvature: f64,
    pub fiber_mean_curvature: f64,
    /// `(n−m)(a + 2‖A‖ + ‖α^F‖)`, or with `1` in place of `a`.
    pub codimension_penalty: f64,
    pub mean_curvature: f64,
    pub value: f64,
}

pub fn pointwise_terms(inputs: &BoundInputs, t: &PointTerms, form: ConstantForm) -> TermBreakdown {
    let (curvature, shift) = match form {
        ConstantForm::General => ((inputs.k - 1) as f64 * inputs.b, inputs.a),
        ConstantForm::HyperbolicBase => ((inputs.k - 1) as f64, 1.0),
    };
    let codim = (inputs.n - inputs.m) as f64;
    let codimension_penalty = codim * (shift + 2.0 * t.oneill_a + t.fiber_alpha);
    let mean_curvature = inputs.alpha.unwrap_or(t.mean_curvature);
    // same evaluation order for both forms so they agree bit for bit when a = b = 1
    let value = curvature - t.fiber_mean_curvature - codimension_penalty - mean_curvature;
    TermBreakdown { curvature, fiber_mean_curvature: t.fiber_mean_curvature, codimension_penalty, mean_curvature, value }
}

/// `c` as the minimum of the pointwise expression over the sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantC {
    pub form: ConstantForm,
    pub value: f64,
    pub samples: usize,
    /// Sample index and point where the minimum is attained.
    pub index: usize,
    pub point: Vec<f64>,
    pub terms: TermBreakdown,
}

pub fn constant_c(inputs: &BoundInputs, form: ConstantForm) -> Result<ConstantC> {
    let (index, terms) = inputs
        .samples
        .iter()
        .map(|t| pointwise_terms(inputs, t, form))
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .ok_or(Error::EmptySampleSet)?;
    Ok(ConstantC {
        form,
        value: terms.value,
        samples: inputs.samples.len(),
        index,
        point: inputs.samples[index].point.clone(),
        terms,
    })
}

/// `c²/4` when `c > 0`.
pub fn eigenvalue_bound(c: f64) -> Option<f64> {
    (c > 0.0).then(|| c * c / 4.0)
}

/// A named classical bound with its hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalBound {
    pub name: String,
    pub formula: String,
    pub hypothesis: String,
    pub applicable: bool,
    /// `None` exactly when the hypothesis fails.
    pub value: Option<f64>,
}

fn classical(name: &str, formula: &str, hypothesis: String, applicable: bool, value: f64) -> ClassicalBound {
    ClassicalBound {
        name: name.into(),
        formula: formula.into(),
        hypothesis,
        applicable,
        value: applicable.then_some(value),
    }
}

/// McKean, Castillon and Cheung–Leung bounds for an `m`-dimensional `M` with
/// mean curvature `‖H‖ ≤ alpha`; `b` is the curvature scale of the ambient
/// Hadamard manifold (`K ≤ −b²`).
pub fn classical_bounds(m: usize, b: f64, alpha: f64) -> Vec<ClassicalBound> {
    let m1 = m as f64 - 1.0;
    vec![
        classical(
            "mckean",
            "(m-1)^2/4",
            "M simply connected with sectional curvature K_M <= -1".into(),
            m >= 2,
            m1 * m1 / 4.0,
        ),
        classical(
            "castillon",
            "(m-1)^2 (b-alpha)^2/4",
            format!("M immersed in a Hadamard manifold with K <= -b^2 and |H| <= alpha < b (alpha={alpha}, b={b})"),
            alpha >= 0.0 && alpha < b,
            m1 * m1 * (b - alpha).powi(2) / 4.0,
        ),
        classical(
            "cheung_leung",
            "(m-1-alpha)^2/4",
            format!("M immersed in hyperbolic space with |H| <= alpha < m-1 (alpha={alpha}, m-1={m1})"),
            alpha >= 0.0 && alpha < m1,
            (m1 - alpha).powi(2) / 4.0,
        ),
    ]
}

/// Floor estimate for `c` in one of the closed-form families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExampleFloor {
    pub value: f64,
    pub applicable: bool,
    /// `value²/4` when applicable.
    pub bound: Option<f64>,
}

impl ExampleFloor {
    fn new(value: f64) -> Self {
        let applicable = value > 0.0;
        Self { value, applicable, bound: applicable.then(|| value * value / 4.0) }
    }
}

/// Floors for `c` in the two closed-form families: warped products
/// `ℍ^k ×_{e^s} F` (`A = 0`, `‖α^F‖ ≤ 1`, `‖H^F‖ ≤ n−k`) give
/// `2(k+m) − 3n − 1 − α`; totally geodesic fibers give `k + m − n − 1 − α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExampleBounds {
    pub warped: ExampleFloor,
    pub totally_geodesic: ExampleFloor,
}

pub fn example_bounds(k: usize, m: usize, n: usize, alpha: f64) -> Result<ExampleBounds> {
    check_dimensions(k, m, n)?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidProblem(format!("alpha must be >= 0, got {alpha}")));
    }
    let (k, m, n) = (k as f64, m as f64, n as f64);
    Ok(ExampleBounds {
        warped: ExampleFloor::new(2.0 * (k + m) - 3.0 * n - 1.0 - alpha),
        totally_geodesic: ExampleFloor::new(k + m - n - 1.0 - alpha),
    })
}

/// Points of a Halton sequence mapped into `domain` (bases 2, 3, 5, …).
pub fn quasi_random_points(domain: &BoxDomain, count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    assert!(domain.dim() <= PRIMES.len(), "Halton points supported up to dimension {}", PRIMES.len());
    (1..=count as u64)
        .map(|i| {
            let t: Vec<f64> = PRIMES[..domain.dim()]
                .iter()
                .map(|&base| {
                    let (mut f, mut r, mut j) = (1.0, 0.0, i);
                    while j > 0 {
                        f /= base as f64;
                        r += f * (j % base) as f64;
                        j /= base;
                    }
                    r
                })
                .collect();
            domain.from_unit(&t)
        })
        .collect()
}

/// Sample `‖H‖`, `‖H^F‖`, `‖A‖`, `‖α^F‖` at `points` of `M`, one point per task.
pub fn sample_terms<T1, F, T2, B, P>(
    immersion: &ImmersionMap<T1, F>,
    submersion: &SubmersionMap<T2, B, P>,
    points: &[Vec<f64>],
) -> Result<Vec<PointTerms>>
where
    T1: ChartedMetric,
    F: SmoothMap,
    T2: ChartedMetric,
    B: ChartedMetric,
    P: SmoothMap,
{
    if immersion.target_dim() != submersion.total_dim() {
        return Err(Error::InvalidDimension(format!(
            "immersion into dimension {} but submersion from dimension {}",
            immersion.target_dim(),
            submersion.total_dim()
        )));
    }
    points
        .par_iter()
        .map(|p| {
            let h = immersion::mean_curvature(immersion, p)?;
            let q = immersion.map().apply(p);
            let fiber = submersion.fiber_geometry(&q)?;
            let tensors = submersion.oneill_tensors(&q)?;
            Ok(PointTerms {
                point: p.clone(),
                mean_curvature: h.norm,
                fiber_mean_curvature: fiber.mean_curvature_norm,
                oneill_a: tensors.a_norm,
                fiber_alpha: fiber.alpha_norm,
            })
        })
        .collect()
}

/// [`BoundInputs`] for `f: M → M̃` and `π: M̃ → B` sampled at `points`, with
/// `(a, b)` from the base model.
pub fn bound_inputs<T1, F, T2, B, P>(
    immersion: &ImmersionMap<T1, F>,
    submersion: &SubmersionMap<T2, B, P>,
    points: &[Vec<f64>],
) -> Result<BoundInputs>
where
    T1: ChartedMetric,
    F: SmoothMap,
    T2: ChartedMetric,
    B: BusemannModel,
    P: SmoothMap,
{
    let (a, b) = submersion.base().hessian_bounds();
    let samples = sample_terms(immersion, submersion, points)?;
    BoundInputs::new(submersion.base_dim(), immersion.source_dim(), submersion.total_dim(), a, b, samples)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

/// `λ₁(r)` compared with the bound at one radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveComparison {
    pub r: f64,
    pub lambda1: f64,
    pub error_estimate: f64,
    /// `λ₁(r) − c²/4`.
    pub margin: f64,
    pub holds: bool,
}

/// Full comparison of the bound with a computed eigenvalue curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub alpha: Option<f64>,
    /// `c` on the base sample; decides the verdict.
    pub c: ConstantC,
    /// `c` in the form for base `ℍ^k`, on the same sample.
    pub c_hyperbolic_form: ConstantC,
    /// `c` on the refined sample.
    pub c_refined: ConstantC,
    pub refinement_relative_difference: f64,
    pub refinement_agrees: bool,
    /// `c²/4`, absent when `c ≤ 0`.
    pub bound: Option<f64>,
    pub sup_mean_curvature: f64,
    pub sup_fiber_mean_curvature: f64,
    pub sup_oneill_a: f64,
    pub sup_fiber_alpha: f64,
    pub classical: Vec<ClassicalBound>,
    pub curve: Vec<CurveComparison>,
    pub min_margin: Option<f64>,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

fn sup(samples: &[PointTerms], f: impl Fn(&PointTerms) -> f64) -> f64 {
    samples.iter().map(f).fold(0.0, f64::max)
}

/// Compare `c²/4` with the curve. `refined` must hold the refined sample
/// (its first `inputs.samples.len()` entries being `inputs.samples`).
/// PASS iff `c > 0`, `c` agrees with the refined value, and every
/// `λ₁(r) ≥ c²/4 − ε(r)` with `ε(r)` the curve's error estimate.
pub fn verdict(refined: &BoundInputs, base_samples: usize, curve: &[CurvePoint]) -> Result<BoundReport> {
    if curve.is_empty() {
        return Err(Error::InvalidProblem("eigenvalue curve is empty".into()));
    }
    let inputs = refined.truncated(base_samples);
    let c = constant_c(&inputs, ConstantForm::General)?;
    let c_hyperbolic_form = constant_c(&inputs, ConstantForm::HyperbolicBase)?;
    let c_refined = constant_c(refined, ConstantForm::General)?;
    let refinement_relative_difference = if c.value == c_refined.value {
        0.0
    } else {
        (c.value - c_refined.value).abs() / c_refined.value.abs().max(c.value.abs())
    };
    let refinement_agrees = refinement_relative_difference <= REFINEMENT_AGREEMENT;
    let bound = eigenvalue_bound(c.value);
    let classical_alpha = inputs.alpha.unwrap_or_else(|| sup(&inputs.samples, |t| t.mean_curvature));
    let classical = classical_bounds(inputs.m, inputs.b, classical_alpha);

    let comparisons: Vec<CurveComparison> = curve
        .iter()
        .map(|p| {
            let margin = bound.map_or(f64::NAN, |bd| p.lambda1 - bd);
            CurveComparison {
                r: p.r,
                lambda1: p.lambda1,
                error_estimate: p.error_estimate,
                margin,
                holds: bound.map_or(true, |bd| p.lambda1 >= bd - p.error_estimate),
            }
        })
        .collect();
    let min_margin = bound.map(|_| comparisons.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min));

    let mut reasons = Vec::new();
    let verdict = if bound.is_none() {
        reasons.push(format!("c = {} <= 0: the bound is vacuous", c.value));
        Verdict::NotApplicable
    } else {
        if !refinement_agrees {
            reasons.push(format!(
                "c = {} on {} samples but {} on {} samples (relative difference {:.3e})",
                c.value, c.samples, c_refined.value, c_refined.samples, refinement_relative_difference
            ));
        }
        for p in comparisons.iter().filter(|p| !p.holds) {
            reasons.push(format!("lambda1({}) = {} below bound {}", p.r, p.lambda1, bound.unwrap_or_default()));
        }
        if reasons.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };
    Ok(BoundReport {
        k: inputs.k,
        m: inputs.m,
        n: inputs.n,
        a: inputs.a,
        b: inputs.b,
        alpha: inputs.alpha,
        sup_mean_curvature: sup(&inputs.samples, |t| t.mean_curvature),
        sup_fiber_mean_curvature: sup(&inputs.samples, |t| t.fiber_mean_curvature),
        sup_oneill_a: sup(&inputs.samples, |t| t.oneill_a),
        sup_fiber_alpha: sup(&inputs.samples, |t| t.fiber_alpha),
        c,
        c_hyperbolic_form,
        c_refined,
        refinement_relative_difference,
        refinement_agrees,
        bound,
        classical,
        curve: comparisons,
        min_margin,
        verdict,
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_terms(point: Vec<f64>) -> PointTerms {
        PointTerms { point, mean_curvature: 0.0, fiber_mean_curvature: 0.0, oneill_a: 0.0, fiber_alpha: 0.0 }
    }

    #[test]
    fn product_slice_constant() {
        let inputs = BoundInputs::new(4, 4, 5, 1.0, 1.0, vec![zero_terms(vec![0.0; 4])]).unwrap();
        let c = constant_c(&inputs, ConstantForm::General).unwrap();
        assert_eq!(c.value, 2.0);
        assert_eq!(eigenvalue_bound(c.value), Some(1.0));
        assert_eq!(c.terms.codimension_penalty, 1.0);
    }

    #[test]
    fn hyperbolic_form_matches_mckean() {
        let inputs = BoundInputs::new(5, 5, 5, 1.0, 1.0, vec![zero_terms(vec![0.0; 5])]).unwrap();
        let c = constant_c(&inputs, ConstantForm::HyperbolicBase).unwrap();
        assert_eq!(c.value, 4.0);
        assert_eq!(eigenvalue_bound(c.value), Some(4.0));
    }

    #[test]
    fn empty_sample_and_invalid_inputs() {
        let inputs = BoundInputs::new(2, 2, 3, 1.0, 1.0, vec![]).unwrap();
        assert_eq!(constant_c(&inputs, ConstantForm::General), Err(Error::EmptySampleSet));
        assert!(BoundInputs::new(2, 3, 2, 1.0, 1.0, vec![]).is_err());
        assert!(BoundInputs::new(1, 2, 3, 1.0, 1.0, vec![]).is_err());
        assert!(BoundInputs::new(2, 2, 3, 0.5, 1.0, vec![]).is_err());
        let mut bad = zero_terms(vec![0.0; 2]);
        bad.oneill_a = -1.0;
        assert!(BoundInputs::new(2, 2, 3, 1.0, 1.0, vec![bad]).is_err());
    }

    #[test]
    fn classical_examples() {
        let b = classical_bounds(3, 1.0, 0.0);
        assert_eq!(b[0].value, Some(1.0));
        assert_eq!(b[2].value, Some(1.0));
        let b = classical_bounds(2, 1.0, 0.5);
        assert_eq!(b[1].value, Some(0.0625));
        let b = classical_bounds(3, 1.0, 2.0);
        assert!(!b[2].applicable && b[2].value.is_none());
        assert!(!b[1].applicable);
    }

    #[test]
    fn example_floor_values() {
        let e = example_bounds(5, 5, 6, 0.5).unwrap();
        assert_eq!(e.warped.value, 0.5);
        assert_eq!(e.warped.bound, Some(0.0625));
        let e = example_bounds(4, 3, 4, 1.0).unwrap();
        assert_eq!(e.totally_geodesic.value, 1.0);
        assert_eq!(e.totally_geodesic.bound, Some(0.25));
        let e = example_bounds(5, 5, 6, 1.0).unwrap();
        assert_eq!(e.warped.value, 0.0);
        assert!(!e.warped.applicable);
    }

    #[test]
    fn declared_alpha_is_checked() {
        let mut t = zero_terms(vec![0.0; 2]);
        t.mean_curvature = 0.3;
        let inputs = BoundInputs::new(3, 2, 3, 1.0, 1.0, vec![t]).unwrap();
        assert!(inputs.clone().with_alpha(0.2).is_err());
        let with = inputs.with_alpha(0.5).unwrap();
        assert_eq!(constant_c(&with, ConstantForm::General).unwrap().terms.mean_curvature, 0.5);
    }

    #[test]
    fn halton_points_fill_the_box() {
        let d = BoxDomain::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let pts = quasi_random_points(&d, 64);
        assert_eq!(pts[0], vec![0.0, 2.0 / 3.0]);
        assert!(pts.iter().all(|p| d.contains(p)));
        let left = pts.iter().filter(|p| p[0] < 0.0).count();
        assert_eq!(left, 32);
    }

    #[test]
    fn verdict_paths() {
        let point = |lambda1: f64, r: f64| CurvePoint { r, lambda1, mesh_parameter: 0.01, error_estimate: 1e-4 };
        let inputs = BoundInputs::new(4, 4, 5, 1.0, 1.0, (0..8).map(|i| zero_terms(vec![i as f64; 4])).collect()).unwrap();
        let r = verdict(&inputs, 2, &[point(2.4, 4.0), point(2.3, 6.0)]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.bound, Some(1.0));
        assert!((r.min_margin.unwrap() - 1.3).abs() < 1e-12);
        let r = verdict(&inputs, 2, &[point(0.9, 4.0)]).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let vacuous = BoundInputs::new(2, 2, 4, 1.0, 1.0, vec![zero_terms(vec![0.0; 2])]).unwrap();
        let r = verdict(&vacuous, 1, &[point(0.3, 4.0)]).unwrap();
        assert_eq!(r.verdict, Verdict::NotApplicable);
        assert!(r.bound.is_none());
        assert!(verdict(&inputs, 2, &[]).is_err());
    }

    #[test]
    fn refinement_disagreement_fails() {
        let mut samples: Vec<PointTerms> = (0..8).map(|i| zero_terms(vec![i as f64; 4])).collect();
        samples[7].mean_curvature = 0.5;
        let inputs = BoundInputs::new(4, 4, 5, 1.0, 1.0, samples).unwrap();
        let curve = [CurvePoint { r: 4.0, lambda1: 2.4, mesh_parameter: 0.01, error_estimate: 1e-4 }];
        let r = verdict(&inputs, 2, &curve).unwrap();
        assert!(!r.refinement_agrees);
        assert_eq!(r.verdict, Verdict::Fail);
    }
}
