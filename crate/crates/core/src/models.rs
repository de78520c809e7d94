//! Model manifolds with explicit Busemann functions.
//!
//! Charts put the Busemann coordinate `s` last. The hyperbolic model uses
//! `h = e^{-2as} dx² + ds²`; on it the geodesic `s ↦ (x₀, s)` runs off to
//! `s = +∞` and its Busemann function is `-s`. The warped-line model uses
//! `h = e^{2w(s)} g + ds²` with Busemann function `s`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    self, BoxDomain, ChartedMetric, CoordinateField, Euclidean, ScalarField,
};
use crate::linalg::{self, Mat};
use crate::scalar::{Dual, Real};

/// Relative slack allowed when comparing sampled ratios to declared bounds.
const SANDWICH_SLACK: f64 = 1e-9;

/// A base manifold carrying an explicit Busemann function and Hessian
/// comparison constants `b ≤ Hess F̄(X,X)/‖X‖² ≤ a` on `grad F̄`'s complement.
pub trait BusemannModel: ChartedMetric {
    fn busemann(&self) -> CoordinateField;
    /// `(a, b)`.
    fn hessian_bounds(&self) -> (f64, f64);
}

/// `ℍ^k(−a²)` in horospherical coordinates `(x_1, …, x_{k−1}, s)`.
#[derive(Clone, Debug)]
pub struct HyperbolicModel {
    k: usize,
    a: f64,
    domain: BoxDomain,
}

impl HyperbolicModel {
    pub fn new(k: usize, a: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidDimension(format!("hyperbolic model needs k >= 2, got {k}")));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidCurvature(a));
        }
        let mut lower = vec![-50.0; k];
        let mut upper = vec![50.0; k];
        lower[k - 1] = -20.0 / a;
        upper[k - 1] = 20.0 / a;
        Ok(Self { k, a, domain: BoxDomain { lower, upper } })
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != self.k {
            return Err(Error::InvalidDimension(format!("domain of dimension {} for ℍ^{}", domain.dim(), self.k)));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn curvature_scale(&self) -> f64 {
        self.a
    }

    /// Radial volume factor `sinh^{k−1}(aρ)` of geodesic spheres.
    pub fn sphere_area_factor(&self, rho: f64) -> f64 {
        (self.a * rho).sinh().powi(self.k as i32 - 1)
    }
}

impl ChartedMetric for HyperbolicModel {
    fn dim(&self) -> usize {
        self.k
    }
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        let s = p[self.k - 1];
        let w = (S::from_f64(-2.0 * self.a) * s).exp();
        let mut d = vec![w; self.k];
        d[self.k - 1] = S::one();
        Mat::from_diagonal(&d)
    }
}

impl BusemannModel for HyperbolicModel {
    fn busemann(&self) -> CoordinateField {
        CoordinateField::negated(self.k - 1)
    }
    fn hessian_bounds(&self) -> (f64, f64) {
        (self.a, self.a)
    }
}

/// The round 2-sphere of radius `radius` in polar coordinates `(θ, φ)`,
/// `θ` kept away from the poles.
#[derive(Clone, Debug)]
pub struct RoundSphere {
    radius: f64,
    domain: BoxDomain,
}

impl RoundSphere {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidProblem(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(Self { radius, domain: BoxDomain { lower: vec![0.2, -3.0], upper: vec![std::f64::consts::PI - 0.2, 3.0] } })
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != 2 || domain.lower[0] <= 0.0 || domain.upper[0] >= std::f64::consts::PI {
            return Err(Error::InvalidDimension("sphere chart needs θ inside (0, π)".into()));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl ChartedMetric for RoundSphere {
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        let r2 = S::from_f64(self.radius * self.radius);
        let st = p[0].sin();
        Mat::from_diagonal(&[r2, r2 * st * st])
    }
}

/// Complete fibers used to build warped-line models.
#[derive(Clone, Debug)]
pub enum FiberChart {
    Flat(Euclidean),
    Sphere(RoundSphere),
}

impl ChartedMetric for FiberChart {
    fn dim(&self) -> usize {
        match self {
            Self::Flat(e) => e.dim(),
            Self::Sphere(s) => s.dim(),
        }
    }
    fn domain(&self) -> &BoxDomain {
        match self {
            Self::Flat(e) => e.domain(),
            Self::Sphere(s) => s.domain(),
        }
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        match self {
            Self::Flat(e) => e.metric(p),
            Self::Sphere(s) => s.metric(p),
        }
    }
}

/// `(N^{k−1} × ℝ, e^{2w(s)} g + ds²)`.
#[derive(Clone, Debug)]
pub struct WarpedLineModel<N, W> {
    fiber: N,
    warp: W,
    domain: BoxDomain,
    estimated: (f64, f64),
    declared: Option<(f64, f64)>,
}

/// Samples used when estimating `inf w′` and `sup w′`.
pub const WARP_DERIVATIVE_SAMPLES: usize = 4001;

/// `w′(s)` for a warping function given as a field of one variable.
pub fn warp_derivative<W: ScalarField>(warp: &W, s: f64) -> f64 {
    warp.value(&[Dual::variable(s)]).eps
}

/// Build a warped-line model over `fiber` and estimate the derivative bounds
/// `b = min w′`, `a = max w′` by dense sampling of `s_range`.
pub fn make_warped_line<N: ChartedMetric, W: ScalarField>(
    fiber: N,
    warp: W,
    s_range: (f64, f64),
) -> Result<WarpedLineModel<N, W>> {
    let (s0, s1) = s_range;
    if !(s0 < s1) {
        return Err(Error::InvalidProblem(format!("empty s-range [{s0}, {s1}]")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = WARP_DERIVATIVE_SAMPLES;
    for i in 0..n {
        let s = s0 + (s1 - s0) * i as f64 / (n - 1) as f64;
        let d = warp_derivative(&warp, s);
        if !(d > 0.0) {
            return Err(Error::NonPositiveDerivative { s, value: d });
        }
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let mut lower = fiber.domain().lower.clone();
    let mut upper = fiber.domain().upper.clone();
    lower.push(s0);
    upper.push(s1);
    Ok(WarpedLineModel { fiber, warp, domain: BoxDomain { lower, upper }, estimated: (hi, lo), declared: None })
}

impl<N: ChartedMetric, W: ScalarField> WarpedLineModel<N, W> {
    /// Replace the sampled bounds by declared ones. Declared bounds must
    /// contain the sampled range of `w′`.
    pub fn with_declared_bounds(mut self, a: f64, b: f64) -> Result<Self> {
        let (ea, eb) = self.estimated;
        if !(0.0 < b && b <= a) {
            return Err(Error::InvalidProblem(format!("declared bounds need 0 < b <= a, got a={a}, b={b}")));
        }
        if eb < b - SANDWICH_SLACK || ea > a + SANDWICH_SLACK {
            return Err(Error::InvalidProblem(format!(
                "sampled w' range [{eb}, {ea}] escapes declared [{b}, {a}]"
            )));
        }
        self.declared = Some((a, b));
        Ok(self)
    }

    /// Bounds found by sampling `w′`, as `(a, b)`.
    pub fn estimated_bounds(&self) -> (f64, f64) {
        self.estimated
    }

    pub fn fiber(&self) -> &N {
        &self.fiber
    }

    pub fn warp(&self) -> &W {
        &self.warp
    }

    pub fn k(&self) -> usize {
        self.fiber.dim() + 1
    }
}

impl<N: ChartedMetric, W: ScalarField> ChartedMetric for WarpedLineModel<N, W> {
    fn dim(&self) -> usize {
        self.fiber.dim() + 1
    }
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        let m = self.fiber.dim();
        let s = p[m];
        let scale = (S::from_f64(2.0) * self.warp.value(&[s])).exp();
        let gf = self.fiber.metric(&p[..m]);
        let mut g = Mat::zeros(m + 1, m + 1);
        for i in 0..m {
            for j in 0..m {
                g[(i, j)] = scale * gf[(i, j)];
            }
        }
        g[(m, m)] = S::one();
        g
    }
}

impl<N: ChartedMetric, W: ScalarField> BusemannModel for WarpedLineModel<N, W> {
    fn busemann(&self) -> CoordinateField {
        CoordinateField::new(self.fiber.dim())
    }
    fn hessian_bounds(&self) -> (f64, f64) {
        self.declared.unwrap_or(self.estimated)
    }
}

/// Warped product `B ×_ρ F` with metric `g_B ⊕ ρ² g_F`; `ρ` is a field on `B`.
#[derive(Clone, Debug)]
pub struct WarpedProduct<B, F, R> {
    base: B,
    fiber: F,
    rho: R,
    domain: BoxDomain,
}

impl<B: ChartedMetric, F: ChartedMetric, R: ScalarField> WarpedProduct<B, F, R> {
    pub fn new(base: B, fiber: F, rho: R) -> Self {
        let mut lower = base.domain().lower.clone();
        let mut upper = base.domain().upper.clone();
        lower.extend_from_slice(&fiber.domain().lower);
        upper.extend_from_slice(&fiber.domain().upper);
        Self { base, fiber, rho, domain: BoxDomain { lower, upper } }
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn fiber(&self) -> &F {
        &self.fiber
    }

    pub fn rho(&self) -> &R {
        &self.rho
    }

    /// `‖grad ρ‖/ρ` at a base point.
    pub fn log_gradient_norm(&self, x: &[f64]) -> Result<f64> {
        let grad = geometry::gradient(&self.base, &self.rho, x)?;
        Ok(grad.norm(&self.base) / self.rho.value(x).abs())
    }
}

impl<B: ChartedMetric, F: ChartedMetric, R: ScalarField> ChartedMetric for WarpedProduct<B, F, R> {
    fn dim(&self) -> usize {
        self.base.dim() + self.fiber.dim()
    }
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        let k = self.base.dim();
        let n = self.dim();
        let gb = self.base.metric(&p[..k]);
        let gf = self.fiber.metric(&p[k..]);
        let r = self.rho.value(&p[..k]);
        let r2 = r * r;
        let mut g = Mat::zeros(n, n);
        for i in 0..k {
            for j in 0..k {
                g[(i, j)] = gb[(i, j)];
            }
        }
        for i in k..n {
            for j in k..n {
                g[(i, j)] = r2 * gf[(i - k, j - k)];
            }
        }
        g
    }
}

/// Outcome of a sampled inequality check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// `min (value − lower_bound)`.
    pub worst_lower_margin: f64,
    /// `min (upper_bound − value)`.
    pub worst_upper_margin: f64,
    pub violations: usize,
    pub passed: bool,
}

impl CheckReport {
    fn from_values(name: &str, values: &[f64], lower: f64, upper: f64, slack: f64) -> Self {
        let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let violations = values.iter().filter(|&&v| v < lower - slack || v > upper + slack).count();
        Self {
            name: name.to_string(),
            samples: values.len(),
            lower_bound: lower,
            upper_bound: upper,
            min_value,
            max_value,
            worst_lower_margin: min_value - lower,
            worst_upper_margin: upper - max_value,
            violations,
            passed: violations == 0 && !values.is_empty(),
        }
    }
}

/// `Hess F̄(X,X)/‖X‖²` for a vector `X ⊥ grad F̄`.
pub fn sandwich_ratio<M: BusemannModel>(model: &M, p: &[f64], x: &[f64]) -> Result<f64> {
    if !model.domain().contains(p) {
        return Err(Error::SampleOutsideDomain { point: p.to_vec() });
    }
    let f = model.busemann();
    let g = model.metric(p);
    let grad = geometry::gradient(model, &f, p)?;
    let xx = linalg::inner(&g, x, x);
    let cos = linalg::inner(&g, x, &grad.components) / (xx.sqrt() * grad.norm(model));
    if cos.abs() > 1e-10 {
        return Err(Error::NotOrthogonal(cos.abs()));
    }
    let hess = geometry::hessian(model, &f, p)?;
    Ok(hess.apply(x, x) / xx)
}

/// A random vector at `p` orthogonal to `grad F̄`, by Gram–Schmidt.
pub fn random_orthogonal_vector<M: BusemannModel, R: rand::Rng>(model: &M, p: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let g = model.metric(p);
    let grad = geometry::gradient(model, &model.busemann(), p)?;
    let n = linalg::inner(&g, &grad.components, &grad.components).sqrt();
    let unit_grad = linalg::scaled(1.0 / n, &grad.components);
    loop {
        let mut x: Vec<f64> = (0..model.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = linalg::inner(&g, &x, &unit_grad);
        linalg::axpy(-c, &unit_grad, &mut x);
        if linalg::inner(&g, &x, &x) > 1e-6 {
            return Ok(x);
        }
    }
}

fn sample_points<M: ChartedMetric>(model: &M, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let inner = model.domain().shrunk(0.05);
    (0..n).map(|_| inner.sample(rng)).collect()
}

/// Check `b‖X‖² ≤ Hess F̄(X,X) ≤ a‖X‖²` at random points and random
/// `X ⊥ grad F̄` (fixed seed).
pub fn check_hessian_sandwich<M: BusemannModel>(model: &M, n_samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = model.hessian_bounds();
    let mut ratios = Vec::with_capacity(n_samples);
    for p in sample_points(model, n_samples, &mut rng) {
        let x = random_orthogonal_vector(model, &p, &mut rng)?;
        ratios.push(sandwich_ratio(model, &p, &x)?);
    }
    Ok(CheckReport::from_values("hessian_sandwich", &ratios, b, a, SANDWICH_SLACK * a.max(1.0)))
}

/// Check `Δ F̄ ≥ (k−1) b` at random points.
pub fn check_laplacian_floor<M: BusemannModel>(model: &M, n_samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, b) = model.hessian_bounds();
    let floor = (model.dim() - 1) as f64 * b;
    let f = model.busemann();
    let values = sample_points(model, n_samples, &mut rng)
        .iter()
        .map(|p| geometry::laplacian(model, &f, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::from_values("laplacian_floor", &values, floor, f64::INFINITY, 1e-8))
}

/// Sectional curvatures of random 2-planes at random points.
pub fn sampled_sectional_curvatures<M: ChartedMetric>(model: &M, n_planes: usize, seed: u64) -> Result<Vec<f64>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = model.dim();
    let inner = model.domain().shrunk(0.25);
    (0..n_planes)
        .map(|_| {
            let p = inner.sample(&mut rng);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            geometry::sectional_curvature(model, &p, &x, &y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    #[test]
    fn constructor_validation() {
        assert!(matches!(HyperbolicModel::new(1, 1.0), Err(Error::InvalidDimension(_))));
        assert_eq!(HyperbolicModel::new(2, 0.0).unwrap_err(), Error::InvalidCurvature(0.0));
        assert!(HyperbolicModel::new(2, -1.0).is_err());
    }

    #[test]
    fn metric_at_origin_is_identity() {
        let h = HyperbolicModel::new(2, 1.0).unwrap();
        assert_eq!(h.metric(&[0.3, 0.0]), Mat::identity(2));
    }

    #[test]
    fn hyperbolic_laplacian_of_busemann() {
        let h2 = HyperbolicModel::new(2, 1.0).unwrap();
        let v = geometry::laplacian(&h2, &h2.busemann(), &[0.1, 0.4]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let h3 = HyperbolicModel::new(3, 2.0).unwrap();
        let v = geometry::laplacian(&h3, &h3.busemann(), &[0.1, -0.2, 0.4]).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn warped_line_rejects_non_positive_derivative() {
        let w = Expr::parse_univariate("0.5*sin(s)", "s").unwrap();
        let err = make_warped_line(Euclidean::cube(1, 5.0), w, (-3.0, 3.0)).unwrap_err();
        match err {
            Error::NonPositiveDerivative { s, value } => {
                assert!(value <= 0.0);
                assert!(s <= -std::f64::consts::FRAC_PI_2 + 1e-2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn warped_line_bounds_by_dense_sampling() {
        // oracle: w' = 1 + 0.1 cos s attains 0.9 and 1.1 on [-4, 4]
        let w = Expr::parse_univariate("s + 0.1*sin(s)", "s").unwrap();
        let m = make_warped_line(Euclidean::cube(1, 5.0), w, (-4.0, 4.0)).unwrap();
        let (a, b) = m.hessian_bounds();
        assert!((a - 1.1).abs() < 1e-3 && (b - 0.9).abs() < 1e-3);
        assert!(m.clone().with_declared_bounds(1.05, 0.9).is_err());
        let m = m.with_declared_bounds(1.1, 0.9).unwrap();
        assert_eq!(m.hessian_bounds(), (1.1, 0.9));
    }

    #[test]
    fn sandwich_rejects_gradient_direction() {
        let h = HyperbolicModel::new(2, 1.0).unwrap();
        let p = [0.2, 0.3];
        let grad = geometry::gradient(&h, &h.busemann(), &p).unwrap();
        assert!(matches!(sandwich_ratio(&h, &p, &grad.components), Err(Error::NotOrthogonal(_))));
        assert!(matches!(sandwich_ratio(&h, &[0.0, 99.0], &[1.0, 0.0]), Err(Error::SampleOutsideDomain { .. })));
        // X ⊥ ∂_s gives exactly ‖X‖²
        let r = sandwich_ratio(&h, &p, &[1.7, 0.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_floor_on_h2() {
        let h = HyperbolicModel::new(2, 1.0).unwrap();
        let r = check_laplacian_floor(&h, 20, 3).unwrap();
        assert!(r.passed);
        assert_eq!(r.lower_bound, 1.0);
    }
}
