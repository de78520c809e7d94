//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

use crate::error::{Error, Result};
use crate::scalar::FloatScalar;

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`
/// (`e[i]` couples rows `i` and `i + 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal<S> {
    pub diag: Vec<S>,
    pub off: Vec<S>,
}

impl<S: FloatScalar> SymTridiagonal<S> {
    pub fn new(diag: Vec<S>, off: Vec<S>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidProblem(format!(
                "tridiagonal sizes {} and {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x` (signs of the `LDLᵀ` pivots).
    pub fn count_below(&self, x: S) -> usize {
        let tiny = S::min_positive_value();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let denom = if q.abs() < tiny { tiny } else { q };
                q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            }
            if q < S::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (S, S) {
        let n = self.len();
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for i in 0..n {
            let mut r = S::zero();
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection to machine precision.
    pub fn eigenvalue(&self, index: usize) -> S {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = (lo + hi) / S::of(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) / S::of(2.0)
    }

    /// Solve `(T − σI) x = b` by Gaussian elimination without pivoting, with
    /// zero pivots nudged so inverse iteration at an exact eigenvalue still works.
    pub fn solve_shifted(&self, sigma: S, b: &[S]) -> Vec<S> {
        let n = self.len();
        let eps = S::epsilon() * (self.gershgorin().1.abs() + S::one());
        let mut c = vec![S::zero(); n];
        let mut y = vec![S::zero(); n];
        let mut pivot = self.diag[0] - sigma;
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - sigma - self.off[i - 1] * c[i - 1];
            }
            if pivot.abs() < eps {
                pivot = eps;
            }
            if i + 1 < n {
                c[i] = self.off[i] / pivot;
            }
            let prev = if i > 0 { self.off[i - 1] * y[i - 1] } else { S::zero() };
            y[i] = (b[i] - prev) / pivot;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = y[i + 1];
            y[i] -= c[i] * next;
        }
        y
    }

    /// Unit eigenvector for the eigenvalue `lambda` by inverse iteration.
    pub fn eigenvector(&self, lambda: S) -> Vec<S> {
        let n = self.len();
        let mut x = vec![S::one(); n];
        for _ in 0..4 {
            x = self.solve_shifted(lambda, &x);
            let norm = x.iter().fold(S::zero(), |acc, v| acc + *v * *v).sqrt();
            for v in &mut x {
                *v = *v / norm;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal<f64> {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn second_difference_spectrum() {
        let n = 50;
        let t = laplacian(n);
        for k in [0, 1, 10, 49] {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-13);
        }
        assert_eq!(t.count_below(-0.1), 0);
        assert_eq!(t.count_below(4.1), n);
    }

    #[test]
    fn eigenvector_has_small_residual() {
        let t = laplacian(40);
        let l = t.eigenvalue(0);
        let v = t.eigenvector(l);
        let r: f64 = t.mul_vec(&v).iter().zip(&v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-12);
        assert!(v.iter().all(|x| *x > 0.0) || v.iter().all(|x| *x < 0.0));
    }

    #[test]
    fn single_precision_bisection() {
        let t = SymTridiagonal::<f32>::new(vec![2.0; 10], vec![-1.0; 9]).unwrap();
        let exact = 2.0 - 2.0 * (std::f32::consts::PI / 11.0).cos();
        assert!((t.eigenvalue(0) - exact).abs() < 1e-5);
    }
}
