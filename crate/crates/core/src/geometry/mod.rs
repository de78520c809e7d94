//! Chart-based Riemannian geometry.
//!
//! A manifold is a single coordinate chart (an axis-aligned box) with a
//! metric-component function generic over [`Real`]. Derivatives come from
//! evaluating that function on dual numbers; [`fd`] holds the
//! finite-difference oracle used to cross-check them.

mod calculus;
mod connection;
pub mod diff;
pub mod fd;
pub mod norms;

pub use calculus::{
    covariant_derivative, directional_derivative, divergence, gradient, hessian, laplacian,
    laplacian_divergence_form,
};
pub use connection::{christoffel, christoffel_unchecked, riemann, sectional_curvature, Christoffel, Riemann};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::scalar::Real;

/// Axis-aligned coordinate box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidDimension(format!(
                "box bounds of lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidDimension("box has an empty side".into()));
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Self {
        Self { lower: vec![-half; dim], upper: vec![half; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (l, u))| *l <= *x && *x <= *u)
    }

    /// Smallest distance from `p` to a face of the box, scaled per axis by the
    /// finite-difference step `1e-4·(1+|x_i|)`. Values below 2 are too close.
    pub fn boundary_steps(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(x, (l, u))| (x - l).min(u - x) / fd_step(*x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Reject points within two finite-difference steps of the boundary.
    pub fn check_interior(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::InvalidDimension(format!(
                "point of length {} in a chart of dimension {}",
                p.len(),
                self.dim()
            )));
        }
        if !(self.boundary_steps(p) >= 2.0) {
            return Err(Error::DomainBoundary { point: p.to_vec(), margin: 2.0 * 1e-4 });
        }
        Ok(())
    }

    /// The box shrunk by `fraction` of its width on every side.
    pub fn shrunk(&self, fraction: f64) -> Self {
        let (lower, upper) = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| {
                let w = (u - l) * fraction;
                (l + w, u - w)
            })
            .unzip();
        Self { lower, upper }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| rng.gen_range(*l..*u)).collect()
    }

    /// Map a point of the unit cube into the box.
    pub fn from_unit(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (l, u))| l + t * (u - l))
            .collect()
    }
}

/// Central-difference step used by the oracle and by the boundary margin.
#[inline]
pub fn fd_step(x: f64) -> f64 {
    1e-4 * (1.0 + x.abs())
}

/// A coordinate chart with a smooth metric.
pub trait ChartedMetric: Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> &BoxDomain;
    /// Metric components `g_ij` at `p`.
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S>;
}

impl<M: ChartedMetric> ChartedMetric for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn domain(&self) -> &BoxDomain {
        (**self).domain()
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        (**self).metric(p)
    }
}

/// A smooth real function on a chart.
pub trait ScalarField: Sync {
    fn value<S: Real>(&self, p: &[S]) -> S;
}

impl<F: ScalarField> ScalarField for &F {
    fn value<S: Real>(&self, p: &[S]) -> S {
        (**self).value(p)
    }
}

/// A smooth vector field given by its chart components.
pub trait VectorField: Sync {
    fn components<S: Real>(&self, p: &[S]) -> Vec<S>;
}

impl<V: VectorField> VectorField for &V {
    fn components<S: Real>(&self, p: &[S]) -> Vec<S> {
        (**self).components(p)
    }
}

/// A smooth map between charts.
pub trait SmoothMap: Sync {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn apply<S: Real>(&self, p: &[S]) -> Vec<S>;
}

/// Tangent vector at a point, in chart components.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector<S> {
    pub base_point: Vec<S>,
    pub components: Vec<S>,
}

impl<S: Real> TangentVector<S> {
    pub fn new(base_point: Vec<S>, components: Vec<S>) -> Self {
        Self { base_point, components }
    }

    pub fn norm<M: ChartedMetric>(&self, metric: &M) -> S {
        let g = metric.metric(&self.base_point);
        linalg::inner(&g, &self.components, &self.components).sqrt()
    }

    pub fn inner<M: ChartedMetric>(&self, metric: &M, other: &[S]) -> S {
        let g = metric.metric(&self.base_point);
        linalg::inner(&g, &self.components, other)
    }
}

/// Covariant symmetric 2-tensor at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricForm<S> {
    pub base_point: Vec<S>,
    pub components: Mat<S>,
}

impl<S: Real> SymmetricForm<S> {
    pub fn apply(&self, u: &[S], v: &[S]) -> S {
        self.components.bilinear(u, v)
    }

    /// Trace with respect to the inverse metric `g^{ij}`.
    pub fn trace_with(&self, g_inv: &Mat<S>) -> S {
        let d = self.components.rows();
        let mut t = S::zero();
        for i in 0..d {
            for j in 0..d {
                t += g_inv[(i, j)] * self.components[(i, j)];
            }
        }
        t
    }
}

/// Flat `ℝ^d` in Cartesian coordinates.
#[derive(Clone, Debug)]
pub struct Euclidean {
    domain: BoxDomain,
}

impl Euclidean {
    pub fn new(domain: BoxDomain) -> Self {
        Self { domain }
    }

    pub fn cube(dim: usize, half: f64) -> Self {
        Self { domain: BoxDomain::cube(dim, half) }
    }
}

impl ChartedMetric for Euclidean {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn metric<S: Real>(&self, _p: &[S]) -> Mat<S> {
        Mat::identity(self.dim())
    }
}

/// The coordinate function `p ↦ sign·p[index]`.
#[derive(Clone, Copy, Debug)]
pub struct CoordinateField {
    pub index: usize,
    pub sign: f64,
}

impl CoordinateField {
    pub fn new(index: usize) -> Self {
        Self { index, sign: 1.0 }
    }

    pub fn negated(index: usize) -> Self {
        Self { index, sign: -1.0 }
    }
}

impl ScalarField for CoordinateField {
    fn value<S: Real>(&self, p: &[S]) -> S {
        S::from_f64(self.sign) * p[self.index]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantField(pub f64);

impl ScalarField for ConstantField {
    fn value<S: Real>(&self, _p: &[S]) -> S {
        S::from_f64(self.0)
    }
}

/// `F ∘ φ` for a scalar field `F` and a smooth map `φ`.
#[derive(Clone, Debug)]
pub struct Pullback<F, P> {
    pub field: F,
    pub map: P,
}

impl<F: ScalarField, P: SmoothMap> ScalarField for Pullback<F, P> {
    fn value<S: Real>(&self, p: &[S]) -> S {
        self.field.value(&self.map.apply(p))
    }
}

/// Vector field with constant chart components.
#[derive(Clone, Debug)]
pub struct ConstantVectorField(pub Vec<f64>);

impl VectorField for ConstantVectorField {
    fn components<S: Real>(&self, _p: &[S]) -> Vec<S> {
        self.0.iter().map(|&v| S::from_f64(v)).collect()
    }
}

/// Vector field `c + L (p - center)`, useful as a non-parallel test field.
#[derive(Clone, Debug)]
pub struct AffineVectorField {
    pub constant: Vec<f64>,
    pub linear: Vec<Vec<f64>>,
    pub center: Vec<f64>,
}

impl VectorField for AffineVectorField {
    fn components<S: Real>(&self, p: &[S]) -> Vec<S> {
        self.constant
            .iter()
            .zip(&self.linear)
            .map(|(&c, row)| {
                row.iter().zip(p.iter().zip(&self.center)).fold(S::from_f64(c), |acc, (&l, (&x, &x0))| {
                    acc + S::from_f64(l) * (x - S::from_f64(x0))
                })
            })
            .collect()
    }
}

/// Metric at `p` with a positive-definiteness check.
pub fn checked_metric<S: Real, M: ChartedMetric>(m: &M, p: &[S]) -> Result<(Mat<S>, linalg::Cholesky<S>)> {
    let g = m.metric(p);
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::NonPositiveDefiniteMetric { point: p.iter().map(|v| v.to_f64()).collect() })?;
    Ok((g, chol))
}

pub(crate) fn real_point<S: Real>(p: &[S]) -> Vec<f64> {
    p.iter().map(|v| v.to_f64()).collect()
}

/// Points where the chart is usable for differentiation.
pub fn check_point<M: ChartedMetric, S: Real>(m: &M, p: &[S]) -> Result<()> {
    m.domain().check_interior(&real_point(p))
}
