//! Small dense linear algebra over [`Real`] scalars.
//!
//! Dimensions here are those of charts (rarely above 6), so everything is
//! plain row-major storage with straightforward loops. All routines work for
//! dual numbers, which is what lets derivatives flow through Cholesky solves
//! and Gram–Schmidt.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Real> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<S>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<T: Real>(&self, f: impl Fn(S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, s: S) -> Self {
        self.map(|v| v * s)
    }

    /// Bilinear form `uᵀ A v`.
    pub fn bilinear(&self, u: &[S], v: &[S]) -> S {
        dot(u, &self.mul_vec(v))
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Largest `|a_ij - a_ji|`, as `f64`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).to_f64().abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.to_f64().abs()))
    }

    /// Lower Cholesky factor, `None` when a pivot is not positive.
    pub fn cholesky(&self) -> Option<Cholesky<S>> {
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d.to_f64() > 0.0) {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(Cholesky { l })
    }

    /// Solve with partial pivoting on the real part. `None` if singular.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[(i, col)].to_f64().abs().total_cmp(&a[(j, col)].to_f64().abs())
                })
                .expect("non-empty range");
            if a[(pivot, col)].to_f64().abs() < 1e-300 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                x.swap(pivot, col);
            }
            let p = a[(col, col)];
            for i in col + 1..n {
                let f = a[(i, col)] / p;
                if f.to_f64() == 0.0 && f == S::zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(i, j)] -= f * v;
                }
                let xc = x[col];
                x[i] -= f * xc;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= a[(i, j)] * x[j];
            }
            x[i] = s / a[(i, i)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            cols.push(self.solve(&e)?);
        }
        Some(Self::from_columns(&cols))
    }
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Cholesky factorisation `A = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<S> {
    l: Mat<S>,
}

impl<S: Real> Cholesky<S> {
    pub fn factor(&self) -> &Mat<S> {
        &self.l
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> Mat<S> {
        let n = self.l.rows();
        let cols: Vec<Vec<S>> = (0..n)
            .map(|j| {
                let mut e = vec![S::zero(); n];
                e[j] = S::one();
                self.solve(&e)
            })
            .collect();
        Mat::from_columns(&cols)
    }

    pub fn det(&self) -> S {
        let n = self.l.rows();
        let mut d = S::one();
        for i in 0..n {
            d *= self.l[(i, i)];
        }
        d * d
    }

    /// `sqrt(det A)`, the Riemannian volume density.
    pub fn sqrt_det(&self) -> S {
        let n = self.l.rows();
        (0..n).fold(S::one(), |acc, i| acc * self.l[(i, i)])
    }
}

#[inline]
pub fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn axpy<S: Real>(alpha: S, x: &[S], y: &mut [S]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled<S: Real>(alpha: S, x: &[S]) -> Vec<S> {
    x.iter().map(|&v| alpha * v).collect()
}

pub fn sub<S: Real>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<S: Real>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn norm2<S: Real>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

pub fn unit<S: Real>(n: usize, i: usize) -> Vec<S> {
    let mut e = vec![S::zero(); n];
    e[i] = S::one();
    e
}

/// Inner product `uᵀ G v` in the metric `g`.
#[inline]
pub fn inner<S: Real>(g: &Mat<S>, u: &[S], v: &[S]) -> S {
    g.bilinear(u, v)
}

/// Orthonormalise `vectors` in the metric `g` by modified Gram–Schmidt.
///
/// Vectors whose residual norm falls below `drop_tol` (relative to their
/// original norm) are dropped, so the output spans the same space.
pub fn gram_schmidt<S: Real>(g: &Mat<S>, vectors: &[Vec<S>], drop_tol: f64) -> Vec<Vec<S>> {
    let mut basis: Vec<Vec<S>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let n0 = inner(g, v, v).to_f64().max(0.0).sqrt();
        let mut w = v.clone();
        for b in &basis {
            let c = inner(g, b, &w);
            axpy(-c, b, &mut w);
        }
        let nw = inner(g, &w, &w).sqrt();
        if nw.to_f64() > drop_tol * n0.max(f64::MIN_POSITIVE) {
            basis.push(scaled(S::one() / nw, &w));
        }
    }
    basis
}

/// Orthonormal completion of `seed` (assumed orthonormal in `g`) using the
/// coordinate axes, choosing at each step the axis with the largest residual.
pub fn complete_basis<S: Real>(g: &Mat<S>, seed: &[Vec<S>], target: usize) -> Vec<Vec<S>> {
    let n = g.rows();
    let mut basis = seed.to_vec();
    let mut used = vec![false; n];
    while basis.len() < target {
        let mut best: Option<(usize, Vec<S>, f64)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut w = unit::<S>(n, i);
            for b in &basis {
                let c = inner(g, b, &w);
                axpy(-c, b, &mut w);
            }
            let r = inner(g, &w, &w).to_f64();
            if best.as_ref().map_or(true, |(_, _, br)| r > *br) {
                best = Some((i, w, r));
            }
        }
        let (i, w, _) = best.expect("dimension leaves room for completion");
        used[i] = true;
        let nw = inner(g, &w, &w).sqrt();
        basis.push(scaled(S::one() / nw, &w));
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> Mat<f64> {
        Mat::from_fn(3, 3, |i, j| if i == j { 4.0 + i as f64 } else { 0.5 / (1.0 + (i + j) as f64) })
    }

    #[test]
    fn cholesky_solve_matches_lu() {
        let a = spd();
        let b = [1.0, -2.0, 0.5];
        let x1 = a.cholesky().unwrap().solve(&b);
        let x2 = a.solve(&b).unwrap();
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-13);
        }
        let r = sub(&a.mul_vec(&x1), &b);
        assert!(norm2(&r) < 1e-13);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Mat::from_diagonal(&[1.0, -1.0]);
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn gram_schmidt_is_orthonormal_in_metric() {
        let g = spd();
        let vs = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 1.0]];
        let b = gram_schmidt(&g, &vs, 1e-10);
        // third vector is dependent
        assert_eq!(b.len(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&g, &b[i], &b[j]) - want).abs() < 1e-13);
            }
        }
        let full = complete_basis(&g, &b, 3);
        assert_eq!(full.len(), 3);
        assert!(inner(&g, &full[2], &full[0]).abs() < 1e-13);
    }

    #[test]
    fn determinant_from_cholesky() {
        let a = Mat::from_diagonal(&[2.0, 3.0, 5.0]);
        let c = a.cholesky().unwrap();
        assert!((c.det() - 30.0).abs() < 1e-12);
        assert!((c.sqrt_det() - 30f64.sqrt()).abs() < 1e-12);
    }
}
