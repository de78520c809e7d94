//! Forward-mode derivatives of fields, metrics and maps.
//!
//! Every function here is generic over the input scalar, so calling one with
//! `S = Dual<f64>` differentiates the result once more.

use crate::linalg::Mat;
use crate::scalar::{Dual, Real};

use super::{ChartedMetric, ScalarField, SmoothMap, VectorField};

fn seeded<S: Real>(p: &[S], dir: &[S]) -> Vec<Dual<S>> {
    p.iter().zip(dir).map(|(&x, &d)| Dual::new(x, d)).collect()
}

fn seeded_axis<S: Real>(p: &[S], axis: usize) -> Vec<Dual<S>> {
    p.iter()
        .enumerate()
        .map(|(i, &x)| if i == axis { Dual::variable(x) } else { Dual::constant(x) })
        .collect()
}

/// Value and coordinate gradient `∂_i F`.
pub fn jet1<S: Real, F: ScalarField>(f: &F, p: &[S]) -> (S, Vec<S>) {
    let d = p.len();
    let mut grad = Vec::with_capacity(d);
    let mut value = S::zero();
    for i in 0..d {
        let v = f.value(&seeded_axis(p, i));
        value = v.re;
        grad.push(v.eps);
    }
    if d == 0 {
        value = f.value(p);
    }
    (value, grad)
}

/// Value, coordinate gradient and coordinate Hessian `∂_i∂_j F` from
/// hyper-dual evaluations, one per unordered index pair.
pub fn jet2<S: Real, F: ScalarField>(f: &F, p: &[S]) -> (S, Vec<S>, Mat<S>) {
    let d = p.len();
    let mut grad = vec![S::zero(); d];
    let mut hess = Mat::zeros(d, d);
    let mut value = f.value(p);
    for i in 0..d {
        for j in i..d {
            let q: Vec<Dual<Dual<S>>> = p
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let inner = Dual::new(x, if k == j { S::one() } else { S::zero() });
                    let outer = if k == i { Dual::constant(S::one()) } else { Dual::constant(S::zero()) };
                    Dual::new(inner, outer)
                })
                .collect();
            let v = f.value(&q);
            value = v.re.re;
            grad[j] = v.re.eps;
            grad[i] = v.eps.re;
            hess[(i, j)] = v.eps.eps;
            hess[(j, i)] = v.eps.eps;
        }
    }
    (value, grad, hess)
}

/// Directional derivative of a scalar field along `dir`.
pub fn directional<S: Real, F: ScalarField>(f: &F, p: &[S], dir: &[S]) -> S {
    f.value(&seeded(p, dir)).eps
}

/// Metric and its coordinate derivatives `∂_k g_ij` (indexed `[k]`).
pub fn metric_jet<S: Real, M: ChartedMetric>(m: &M, p: &[S]) -> (Mat<S>, Vec<Mat<S>>) {
    let d = p.len();
    let mut dg = Vec::with_capacity(d);
    let mut g = None;
    for k in 0..d {
        let gk = m.metric(&seeded_axis(p, k));
        if g.is_none() {
            g = Some(gk.map(|v| v.re));
        }
        dg.push(gk.map(|v| v.eps));
    }
    (g.unwrap_or_else(|| m.metric(p)), dg)
}

/// Map value and Jacobian `J[(a, i)] = ∂_i f^a`.
pub fn jacobian<S: Real, F: SmoothMap>(f: &F, p: &[S]) -> (Vec<S>, Mat<S>) {
    let m = f.source_dim();
    let n = f.target_dim();
    let mut jac = Mat::zeros(n, m);
    let mut value = None;
    for i in 0..m {
        let out = f.apply(&seeded_axis(p, i));
        for (a, v) in out.iter().enumerate() {
            jac[(a, i)] = v.eps;
        }
        if value.is_none() {
            value = Some(out.iter().map(|v| v.re).collect());
        }
    }
    (value.unwrap_or_else(|| f.apply(p)), jac)
}

/// Map value, Jacobian and per-component Hessians `∂_i∂_j f^a`.
pub fn map_jet2<S: Real, F: SmoothMap>(f: &F, p: &[S]) -> (Vec<S>, Mat<S>, Vec<Mat<S>>) {
    let m = f.source_dim();
    let n = f.target_dim();
    let mut jac = Mat::zeros(n, m);
    let mut hess = vec![Mat::zeros(m, m); n];
    let mut value = f.apply(p);
    for i in 0..m {
        for j in i..m {
            let q: Vec<Dual<Dual<S>>> = p
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let inner = Dual::new(x, if k == j { S::one() } else { S::zero() });
                    Dual::new(inner, Dual::constant(if k == i { S::one() } else { S::zero() }))
                })
                .collect();
            let out = f.apply(&q);
            for (a, v) in out.iter().enumerate() {
                value[a] = v.re.re;
                jac[(a, j)] = v.re.eps;
                jac[(a, i)] = v.eps.re;
                hess[a][(i, j)] = v.eps.eps;
                hess[a][(j, i)] = v.eps.eps;
            }
        }
    }
    (value, jac, hess)
}

/// Vector-field value and its coordinate directional derivative along `dir`.
pub fn field_derivative<S: Real, V: VectorField>(v: &V, p: &[S], dir: &[S]) -> (Vec<S>, Vec<S>) {
    let out = v.components(&seeded(p, dir));
    (out.iter().map(|x| x.re).collect(), out.iter().map(|x| x.eps).collect())
}

/// Coordinate Jacobian of a vector field, `[(k, i)] = ∂_i V^k`.
pub fn field_jacobian<S: Real, V: VectorField>(v: &V, p: &[S]) -> (Vec<S>, Mat<S>) {
    let d = p.len();
    let mut jac = Mat::zeros(d, d);
    let mut value = Vec::new();
    for i in 0..d {
        let out = v.components(&seeded_axis(p, i));
        for (k, x) in out.iter().enumerate() {
            jac[(k, i)] = x.eps;
        }
        value = out.iter().map(|x| x.re).collect();
    }
    (value, jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly;
    impl ScalarField for Poly {
        fn value<S: Real>(&self, p: &[S]) -> S {
            // x² y + sin(y) z
            p[0] * p[0] * p[1] + p[1].sin() * p[2]
        }
    }

    #[test]
    fn jet2_matches_hand_derivatives() {
        let p = [0.3, -1.2, 2.0];
        let (v, g, h) = jet2(&Poly, &p);
        assert!((v - (0.09 * -1.2 + (-1.2f64).sin() * 2.0)).abs() < 1e-14);
        assert!((g[0] - 2.0 * 0.3 * -1.2).abs() < 1e-14);
        assert!((g[1] - (0.09 + (-1.2f64).cos() * 2.0)).abs() < 1e-14);
        assert!((g[2] - (-1.2f64).sin()).abs() < 1e-14);
        assert!((h[(0, 0)] - 2.0 * -1.2).abs() < 1e-14);
        assert!((h[(0, 1)] - 0.6).abs() < 1e-14);
        assert!((h[(1, 1)] + (-1.2f64).sin() * 2.0).abs() < 1e-14);
        assert!((h[(1, 2)] - (-1.2f64).cos()).abs() < 1e-14);
        assert_eq!(h[(0, 2)], 0.0);
        let (_, g1) = jet1(&Poly, &p);
        assert_eq!(g, g1);
    }
}
