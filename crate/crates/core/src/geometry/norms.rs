//! Sampled extrema and operator norms of bilinear maps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr_normal::standard_normal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Number of probe directions per argument slot.
pub const PROBE_DIRECTIONS: usize = 64;
/// Projected ascent steps applied to the best probe pair.
pub const ASCENT_STEPS: usize = 20;

/// An extremal sampled value and where it was attained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledExtremum {
    pub value: f64,
    pub index: usize,
    pub point: Vec<f64>,
}

fn extremum(
    sampler: impl Fn(&[f64]) -> f64,
    points: &[Vec<f64>],
    better: impl Fn(f64, f64) -> bool,
) -> Result<SampledExtremum> {
    let mut best: Option<SampledExtremum> = None;
    for (index, p) in points.iter().enumerate() {
        let value = sampler(p);
        if best.as_ref().map_or(true, |b| better(value, b.value)) {
            best = Some(SampledExtremum { value, index, point: p.clone() });
        }
    }
    best.ok_or(Error::EmptySampleSet)
}

/// Largest sampled value.
pub fn sup_norm(sampler: impl Fn(&[f64]) -> f64, points: &[Vec<f64>]) -> Result<SampledExtremum> {
    extremum(sampler, points, |a, b| a > b)
}

/// Smallest sampled value.
pub fn inf_norm(sampler: impl Fn(&[f64]) -> f64, points: &[Vec<f64>]) -> Result<SampledExtremum> {
    extremum(sampler, points, |a, b| a < b)
}

/// Bilinear map `B: ℝ^p × ℝ^q → ℝ^r` stored as `B[c][i][j]`, with all three
/// spaces expressed in orthonormal coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearMap {
    out_dim: usize,
    left_dim: usize,
    right_dim: usize,
    data: Vec<f64>,
}

impl BilinearMap {
    pub fn zeros(out_dim: usize, left_dim: usize, right_dim: usize) -> Self {
        Self { out_dim, left_dim, right_dim, data: vec![0.0; out_dim * left_dim * right_dim] }
    }

    /// Build from `f(i, j)`, the image of the basis pair `(e_i, e_j)`.
    pub fn from_basis_images(
        out_dim: usize,
        left_dim: usize,
        right_dim: usize,
        mut f: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Self {
        let mut b = Self::zeros(out_dim, left_dim, right_dim);
        for i in 0..left_dim {
            for j in 0..right_dim {
                let v = f(i, j);
                for (c, x) in v.into_iter().enumerate() {
                    b.set(c, i, j, x);
                }
            }
        }
        b
    }

    #[inline]
    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[(c * self.left_dim + i) * self.right_dim + j]
    }

    #[inline]
    pub fn set(&mut self, c: usize, i: usize, j: usize, v: f64) {
        self.data[(c * self.left_dim + i) * self.right_dim + j] = v;
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.out_dim, self.left_dim, self.right_dim)
    }

    pub fn apply(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|c| {
                let mut s = 0.0;
                for i in 0..self.left_dim {
                    if u[i] == 0.0 {
                        continue;
                    }
                    let mut t = 0.0;
                    for j in 0..self.right_dim {
                        t += self.get(c, i, j) * v[j];
                    }
                    s += u[i] * t;
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `sup ‖B(u, v)‖` over unit `u`, `v`: probe directions in each slot,
    /// then projected ascent from the best pair.
    pub fn operator_norm(&self) -> f64 {
        if self.out_dim == 0 || self.left_dim == 0 || self.right_dim == 0 {
            return 0.0;
        }
        let left = probe_directions(self.left_dim);
        let right = probe_directions(self.right_dim);
        let mut best = (0.0_f64, 0, 0);
        for (a, u) in left.iter().enumerate() {
            // contract the left slot once per probe
            let partial: Vec<Vec<f64>> = (0..self.out_dim)
                .map(|c| {
                    (0..self.right_dim)
                        .map(|j| (0..self.left_dim).map(|i| u[i] * self.get(c, i, j)).sum())
                        .collect()
                })
                .collect();
            for (b, v) in right.iter().enumerate() {
                let n2: f64 = partial
                    .iter()
                    .map(|row| {
                        let s: f64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
                        s * s
                    })
                    .sum();
                if n2 > best.0 {
                    best = (n2, a, b);
                }
            }
        }
        let mut u = left[best.1].clone();
        let mut v = right[best.2].clone();
        let mut value = best.0.sqrt();
        for _ in 0..ASCENT_STEPS {
            // gradient of ‖B(u,v)‖² in u is 2 M_vᵀ M_v u; step to its projection
            let w = self.apply(&u, &v);
            let gu: Vec<f64> =
                (0..self.left_dim).map(|i| (0..self.out_dim).map(|c| w[c] * self.slice_left(c, i, &v)).sum()).collect();
            if let Some(nu) = normalized(&gu) {
                u = nu;
            }
            let w = self.apply(&u, &v);
            let gv: Vec<f64> =
                (0..self.right_dim).map(|j| (0..self.out_dim).map(|c| w[c] * self.slice_right(c, j, &u)).sum()).collect();
            if let Some(nv) = normalized(&gv) {
                v = nv;
            }
            let n = self.apply(&u, &v).iter().map(|x| x * x).sum::<f64>().sqrt();
            value = value.max(n);
        }
        value
    }

    fn slice_left(&self, c: usize, i: usize, v: &[f64]) -> f64 {
        (0..self.right_dim).map(|j| self.get(c, i, j) * v[j]).sum()
    }

    fn slice_right(&self, c: usize, j: usize, u: &[f64]) -> f64 {
        (0..self.left_dim).map(|i| self.get(c, i, j) * u[i]).sum()
    }
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-300).then(|| v.iter().map(|x| x / n).collect())
}

/// Deterministic unit directions in `ℝ^d`: the circle for `d = 2`, a
/// Fibonacci sphere for `d = 3`, and fixed-seed Gaussian directions above.
pub fn probe_directions(d: usize) -> Vec<Vec<f64>> {
    let n = PROBE_DIRECTIONS;
    match d {
        0 => Vec::new(),
        1 => vec![vec![1.0]],
        2 => (0..n)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + d as u64);
            let mut dirs: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    e
                })
                .collect();
            while dirs.len() < n {
                let g: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
                if let Some(u) = normalized(&g) {
                    dirs.push(u);
                }
            }
            dirs
        }
    }
}

mod rand_distr_normal {
    use rand::Rng;

    /// Box–Muller standard normal draw.
    pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sample_set_is_an_error() {
        assert_eq!(sup_norm(|_| 1.0, &[]), Err(Error::EmptySampleSet));
        assert_eq!(inf_norm(|_| 1.0, &[]), Err(Error::EmptySampleSet));
    }

    #[test]
    fn constant_sampler() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert_eq!(sup_norm(|_| 3.0, &pts).unwrap().value, 3.0);
        let s = sup_norm(|p| p[0] * p[0], &pts).unwrap();
        assert_eq!((s.value, s.index), (4.0, 2));
        assert_eq!(inf_norm(|p| p[0] - 1.0, &pts).unwrap().value, -1.0);
    }

    #[test]
    fn operator_norm_of_scaled_inner_product() {
        // B(u, v) = 2 <u, v> e_0 has norm 2
        for d in 1..=5 {
            let b = BilinearMap::from_basis_images(1, d, d, |i, j| vec![if i == j { 2.0 } else { 0.0 }]);
            assert!((b.operator_norm() - 2.0).abs() < 1e-9, "d = {d}");
        }
    }

    #[test]
    fn operator_norm_of_rank_one_map() {
        // B(u, v) = (a·u)(b·v) n with |a| = 3, |b| = 0.5 -> norm 1.5
        let a = [1.0, 2.0, 2.0];
        let bvec = [0.3, 0.4];
        let b = BilinearMap::from_basis_images(2, 3, 2, |i, j| {
            let s = a[i] * bvec[j];
            vec![0.6 * s, 0.8 * s]
        });
        assert!((b.operator_norm() - 1.5).abs() < 1e-9);
    }
}
