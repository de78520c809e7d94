use crate::error::Result;
use crate::linalg::{self, Mat};
use crate::scalar::Real;

use super::connection::christoffel_unchecked;
use super::diff::{field_derivative, field_jacobian, jet1, jet2};
use super::{check_point, checked_metric, ChartedMetric, ScalarField, SymmetricForm, TangentVector, VectorField};

/// `grad F` with components `g^{ij} ∂_j F`.
pub fn gradient<S: Real, M: ChartedMetric, F: ScalarField>(m: &M, f: &F, p: &[S]) -> Result<TangentVector<S>> {
    check_point(m, p)?;
    let (_, chol) = checked_metric(m, p)?;
    let (_, df) = jet1(f, p);
    Ok(TangentVector::new(p.to_vec(), chol.solve(&df)))
}

/// `Hess F` with components `∂_i∂_j F − Γ^k_ij ∂_k F`.
pub fn hessian<S: Real, M: ChartedMetric, F: ScalarField>(m: &M, f: &F, p: &[S]) -> Result<SymmetricForm<S>> {
    check_point(m, p)?;
    let gamma = christoffel_unchecked(m, p)?;
    let (_, df, ddf) = jet2(f, p);
    let d = m.dim();
    let components = Mat::from_fn(d, d, |i, j| {
        let mut h = ddf[(i, j)];
        for (k, &dk) in df.iter().enumerate() {
            h -= gamma.get(k, i, j) * dk;
        }
        h
    });
    Ok(SymmetricForm { base_point: p.to_vec(), components })
}

/// Laplace–Beltrami operator as the metric trace of the Hessian.
pub fn laplacian<S: Real, M: ChartedMetric, F: ScalarField>(m: &M, f: &F, p: &[S]) -> Result<S> {
    let hess = hessian(m, f, p)?;
    let (_, chol) = checked_metric(m, p)?;
    Ok(hess.trace_with(&chol.inverse()))
}

struct DensityFlux<'a, M, F> {
    metric: &'a M,
    field: &'a F,
}

impl<M: ChartedMetric, F: ScalarField> VectorField for DensityFlux<'_, M, F> {
    fn components<S: Real>(&self, p: &[S]) -> Vec<S> {
        let g = self.metric.metric(p);
        let chol = g.cholesky().expect("metric positive definite near a checked point");
        let (_, df) = jet1(self.field, p);
        let sqrt_det = chol.sqrt_det();
        linalg::scaled(sqrt_det, &chol.solve(&df))
    }
}

/// Laplace–Beltrami operator in divergence form,
/// `(1/√det g) ∂_i (√det g · g^{ij} ∂_j F)`. Independent of the Christoffel
/// route used by [`laplacian`].
pub fn laplacian_divergence_form<S: Real, M: ChartedMetric, F: ScalarField>(m: &M, f: &F, p: &[S]) -> Result<S> {
    check_point(m, p)?;
    let (_, chol) = checked_metric(m, p)?;
    let flux = DensityFlux { metric: m, field: f };
    let (_, jac) = field_jacobian(&flux, p);
    Ok(jac.trace() / chol.sqrt_det())
}

/// `div V = ∂_i V^i + Γ^i_ij V^j`.
pub fn divergence<S: Real, M: ChartedMetric, V: VectorField>(m: &M, v: &V, p: &[S]) -> Result<S> {
    check_point(m, p)?;
    let gamma = christoffel_unchecked(m, p)?;
    let (value, jac) = field_jacobian(v, p);
    let d = m.dim();
    let mut div = jac.trace();
    for i in 0..d {
        for (j, &vj) in value.iter().enumerate() {
            div += gamma.get(i, i, j) * vj;
        }
    }
    Ok(div)
}

/// `∇_u Y` at `p` for a vector field `Y` and a vector `u` at `p`.
pub fn covariant_derivative<S: Real, M: ChartedMetric, V: VectorField>(
    m: &M,
    y: &V,
    p: &[S],
    u: &[S],
) -> Result<Vec<S>> {
    let gamma = christoffel_unchecked(m, p)?;
    let (value, dy) = field_derivative(y, p, u);
    Ok(linalg::add(&dy, &gamma.contract(u, &value)))
}

/// `u(F)`, the derivative of `F` along `u`.
pub fn directional_derivative<S: Real, F: ScalarField>(f: &F, p: &[S], u: &[S]) -> S {
    super::diff::directional(f, p, u)
}
