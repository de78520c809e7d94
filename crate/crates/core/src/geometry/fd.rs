//! Central finite differences with step `h = 1e-4·(1+|x_i|)`.
//!
//! This is the cross-check oracle for the dual-number derivatives. It shares
//! no code with [`super::diff`] beyond calling the user functions on plain
//! `f64` points.

use crate::linalg::Mat;

use super::{fd_step, ChartedMetric, ScalarField};

fn shifted(p: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] += h;
    q
}

pub fn gradient<F: ScalarField>(f: &F, p: &[f64]) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let h = fd_step(p[i]);
            (f.value(&shifted(p, i, h)) - f.value(&shifted(p, i, -h))) / (2.0 * h)
        })
        .collect()
}

pub fn hessian<F: ScalarField>(f: &F, p: &[f64]) -> Mat<f64> {
    let d = p.len();
    let f0 = f.value(p);
    let mut h = Mat::zeros(d, d);
    for i in 0..d {
        let hi = fd_step(p[i]);
        h[(i, i)] = (f.value(&shifted(p, i, hi)) - 2.0 * f0 + f.value(&shifted(p, i, -hi))) / (hi * hi);
        for j in 0..i {
            let hj = fd_step(p[j]);
            let pp = shifted(&shifted(p, i, hi), j, hj);
            let pm = shifted(&shifted(p, i, hi), j, -hj);
            let mp = shifted(&shifted(p, i, -hi), j, hj);
            let mm = shifted(&shifted(p, i, -hi), j, -hj);
            let v = (f.value(&pp) - f.value(&pm) - f.value(&mp) + f.value(&mm)) / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// `∂_k g_ij`, indexed `[k]`.
pub fn metric_derivative<M: ChartedMetric>(m: &M, p: &[f64]) -> Vec<Mat<f64>> {
    (0..p.len())
        .map(|k| {
            let h = fd_step(p[k]);
            m.metric(&shifted(p, k, h)).sub(&m.metric(&shifted(p, k, -h))).scale(1.0 / (2.0 * h))
        })
        .collect()
}

/// `Γ^k_ij` from finite-difference metric derivatives, indexed `[k][(i, j)]`.
pub fn christoffel<M: ChartedMetric>(m: &M, p: &[f64]) -> Vec<Mat<f64>> {
    let d = p.len();
    let g_inv = m.metric(p).inverse().expect("invertible metric");
    let dg = metric_derivative(m, p);
    (0..d)
        .map(|k| {
            Mat::from_fn(d, d, |i, j| {
                (0..d)
                    .map(|l| 0.5 * g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                    .sum()
            })
        })
        .collect()
}
