use crate::error::Result;
use crate::linalg::{self, Mat};
use crate::scalar::{Dual, Real};

use super::diff::metric_jet;
use super::{check_point, checked_metric, ChartedMetric};

/// Levi-Civita connection coefficients `Γ^k_ij` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Real> Christoffel<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_ij`.
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> S {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    /// `Γ(u, v)^k = Γ^k_ij u^i v^j`.
    pub fn contract(&self, u: &[S], v: &[S]) -> Vec<S> {
        let d = self.dim;
        (0..d)
            .map(|k| {
                let mut s = S::zero();
                for i in 0..d {
                    if u[i] == S::zero() {
                        continue;
                    }
                    for j in 0..d {
                        s += self.get(k, i, j) * u[i] * v[j];
                    }
                }
                s
            })
            .collect()
    }

    /// Largest `|Γ^k_ij - Γ^k_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for k in 0..d {
            for i in 0..d {
                for j in 0..i {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).to_f64().abs());
                }
            }
        }
        worst
    }

    /// Worst residual of `∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il`.
    pub fn compatibility_residual(&self, g: &Mat<S>, dg: &[Mat<S>]) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut r = dg[k][(i, j)];
                    for l in 0..d {
                        r -= self.get(l, k, i) * g[(l, j)] + self.get(l, k, j) * g[(i, l)];
                    }
                    worst = worst.max(r.to_f64().abs());
                }
            }
        }
        worst
    }
}

/// Christoffel symbols without the chart-boundary check. Generic so that it
/// can itself be differentiated.
pub fn christoffel_unchecked<S: Real, M: ChartedMetric>(m: &M, p: &[S]) -> Result<Christoffel<S>> {
    let d = m.dim();
    let (_, chol) = checked_metric(m, p)?;
    let (_, dg) = metric_jet(m, p);
    let g_inv = chol.inverse();
    let half = S::from_f64(0.5);
    // first-kind symbols Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut first = vec![S::zero(); d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in i..d {
                let v = half * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                first[(l * d + i) * d + j] = v;
                first[(l * d + j) * d + i] = v;
            }
        }
    }
    let mut data = vec![S::zero(); d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut s = S::zero();
                for l in 0..d {
                    s += g_inv[(k, l)] * first[(l * d + i) * d + j];
                }
                data[(k * d + i) * d + j] = s;
                data[(k * d + j) * d + i] = s;
            }
        }
    }
    Ok(Christoffel { dim: d, data })
}

/// Christoffel symbols `Γ^k_ij` at an interior point of the chart.
pub fn christoffel<S: Real, M: ChartedMetric>(m: &M, p: &[S]) -> Result<Christoffel<S>> {
    check_point(m, p)?;
    christoffel_unchecked(m, p)
}

/// Riemann tensor `R^l_ijk`, with `R(∂_i, ∂_j)∂_k = R^l_ijk ∂_l`.
#[derive(Clone, Debug)]
pub struct Riemann<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Real> Riemann<S> {
    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> S {
        let d = self.dim;
        self.data[((l * d + i) * d + j) * d + k]
    }

    /// `R(x, y) z`.
    pub fn apply(&self, x: &[S], y: &[S], z: &[S]) -> Vec<S> {
        let d = self.dim;
        (0..d)
            .map(|l| {
                let mut s = S::zero();
                for i in 0..d {
                    for j in 0..d {
                        let xy = x[i] * y[j];
                        if xy == S::zero() {
                            continue;
                        }
                        for k in 0..d {
                            s += self.get(l, i, j, k) * xy * z[k];
                        }
                    }
                }
                s
            })
            .collect()
    }
}

pub fn riemann<S: Real, M: ChartedMetric>(m: &M, p: &[S]) -> Result<Riemann<S>> {
    check_point(m, p)?;
    let d = m.dim();
    let gamma = christoffel_unchecked(m, p)?;
    // ∂_i Γ^l_jk, one dual evaluation per coordinate direction
    let mut dgamma = Vec::with_capacity(d);
    for i in 0..d {
        let q: Vec<Dual<S>> = p
            .iter()
            .enumerate()
            .map(|(a, &x)| if a == i { Dual::variable(x) } else { Dual::constant(x) })
            .collect();
        dgamma.push(christoffel_unchecked(m, &q)?);
    }
    let mut data = vec![S::zero(); d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut r = dgamma[i].get(l, j, k).eps - dgamma[j].get(l, i, k).eps;
                    for mm in 0..d {
                        r += gamma.get(l, i, mm) * gamma.get(mm, j, k) - gamma.get(l, j, mm) * gamma.get(mm, i, k);
                    }
                    data[((l * d + i) * d + j) * d + k] = r;
                }
            }
        }
    }
    Ok(Riemann { dim: d, data })
}

/// Sectional curvature of the plane spanned by `x`, `y` at `p`.
pub fn sectional_curvature<S: Real, M: ChartedMetric>(m: &M, p: &[S], x: &[S], y: &[S]) -> Result<S> {
    let r = riemann(m, p)?;
    let g = m.metric(p);
    let rxyy = r.apply(x, y, y);
    let num = linalg::inner(&g, &rxyy, x);
    let xx = linalg::inner(&g, x, x);
    let yy = linalg::inner(&g, y, y);
    let xy = linalg::inner(&g, x, y);
    Ok(num / (xx * yy - xy * xy))
}
