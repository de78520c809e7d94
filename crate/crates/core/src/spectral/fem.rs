//! P1 finite elements for `−Δ_g φ = λφ` with Dirichlet conditions.
//!
//! Element matrices use the metric at the barycenter (one-point quadrature):
//! `K_ab = √det g · |T| · ∇λ_aᵀ g⁻¹ ∇λ_b` and the consistent mass matrix
//! `M_ab = √det g · |T| (1 + δ_ab)/12`. Boundary vertices are eliminated.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ChartedMetric;

use super::mesh::{geodesic_ball_mesh, signed_area2, TriangulatedDomain};
use super::sparse::{CsrMatrix, EnvelopeCholesky};
use super::EigenResult;

/// Iteration cap for inverse iteration.
pub const MAX_ITERATIONS: usize = 500;
/// Relative residual `‖Kx − λMx‖/‖λMx‖` accepted as converged.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Looser residual accepted for the deflated second eigenvalue, whose
/// eigenspace may be nearly degenerate on symmetric meshes.
pub const SECOND_RESIDUAL_TOLERANCE: f64 = 1e-7;

/// Stiffness and mass matrices on the interior vertices.
#[derive(Clone, Debug)]
pub struct FemSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Vertex index of each unknown.
    pub interior: Vec<usize>,
    /// Unknown index of each vertex, `None` on the boundary.
    pub unknown: Vec<Option<usize>>,
}

type ElementMatrices = ([[f64; 3]; 3], [[f64; 3]; 3]);

fn element(domain: &TriangulatedDomain, t: usize) -> Result<ElementMatrices> {
    let tri = domain.triangles[t];
    let [p0, p1, p2] = tri.map(|i| domain.vertices[i]);
    let det = signed_area2(&p0, &p1, &p2);
    if !(det > 0.0) {
        return Err(Error::SingularAssembly { triangle: t });
    }
    let grads = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    let [g11, g12, g22] = domain.metric_at_barycenter[t];
    let det_g = g11 * g22 - g12 * g12;
    if !(det_g > 0.0) {
        return Err(Error::SingularAssembly { triangle: t });
    }
    let inv = [g22 / det_g, -g12 / det_g, g11 / det_g];
    let weight = det_g.sqrt() * det / 2.0;
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let (u, v) = (grads[a], grads[b]);
            k[a][b] = weight * (inv[0] * u[0] * v[0] + inv[1] * (u[0] * v[1] + u[1] * v[0]) + inv[2] * u[1] * v[1]);
            m[a][b] = weight * if a == b { 2.0 } else { 1.0 } / 12.0;
        }
    }
    Ok((k, m))
}

/// Assemble in parallel over triangles, then reduce in triangle order.
pub fn assemble(domain: &TriangulatedDomain) -> Result<FemSystem> {
    let elements = (0..domain.triangles.len())
        .into_par_iter()
        .map(|t| element(domain, t))
        .collect::<Result<Vec<_>>>()?;
    let mut unknown = vec![None; domain.vertices.len()];
    let mut interior = Vec::new();
    for (v, b) in domain.boundary.iter().enumerate() {
        if !b {
            unknown[v] = Some(interior.len());
            interior.push(v);
        }
    }
    if interior.is_empty() {
        return Err(Error::InvalidProblem("triangulation has no interior vertex".into()));
    }
    let mut k_trip = Vec::with_capacity(9 * elements.len());
    let mut m_trip = Vec::with_capacity(9 * elements.len());
    for (tri, (k, m)) in domain.triangles.iter().zip(&elements) {
        for a in 0..3 {
            let Some(i) = unknown[tri[a]] else { continue };
            for b in 0..3 {
                let Some(j) = unknown[tri[b]] else { continue };
                k_trip.push((i, j, k[a][b]));
                m_trip.push((i, j, m[a][b]));
            }
        }
    }
    let n = interior.len();
    Ok(FemSystem {
        stiffness: CsrMatrix::from_triplets(n, &k_trip),
        mass: CsrMatrix::from_triplets(n, &m_trip),
        interior,
        unknown,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl FemSystem {
    fn relative_residual(&self, x: &[f64], lambda: f64) -> f64 {
        let kx = self.stiffness.mul_vec(x);
        let mx: Vec<f64> = self.mass.mul_vec(x).into_iter().map(|v| v * lambda).collect();
        let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - b).collect();
        norm(&r) / norm(&mx)
    }

    fn m_normalize(&self, x: &mut [f64]) {
        let s = self.mass.quadratic_form(x).sqrt();
        for v in x.iter_mut() {
            *v /= s;
        }
    }

    fn remove_component(&self, x: &mut [f64], basis: &[f64]) {
        let c = dot(&self.mass.mul_vec(x), basis);
        for (v, b) in x.iter_mut().zip(basis) {
            *v -= c * b;
        }
    }

    /// Inverse iteration with shift 0, optionally deflating M-orthonormal vectors.
    fn inverse_iteration(
        &self,
        chol: &EnvelopeCholesky,
        start: Vec<f64>,
        deflate: &[Vec<f64>],
        tolerance: f64,
    ) -> Result<(f64, Vec<f64>, f64, usize)> {
        let mut x = start;
        for d in deflate {
            self.remove_component(&mut x, d);
        }
        self.m_normalize(&mut x);
        let mut residual = f64::INFINITY;
        for it in 1..=MAX_ITERATIONS {
            let mut y = chol.solve(&self.mass.mul_vec(&x));
            for d in deflate {
                self.remove_component(&mut y, d);
            }
            self.m_normalize(&mut y);
            let lambda = self.stiffness.quadratic_form(&y);
            residual = self.relative_residual(&y, lambda);
            x = y;
            if residual < tolerance {
                return Ok((lambda, x, residual, it));
            }
        }
        Err(Error::NonConvergence { iterations: MAX_ITERATIONS, residual })
    }

    fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.unknown.iter().map(|u| u.map_or(0.0, |i| x[i])).collect()
    }

    fn restrict(&self, values: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&v| values[v]).collect()
    }
}

/// Smallest Dirichlet eigenvalue of the discrete problem and its positive
/// eigenvector (zero on the boundary), normalised to unit `L²` norm.
pub fn fem_lambda1(domain: &TriangulatedDomain) -> Result<EigenResult<f64>> {
    let system = assemble(domain)?;
    let chol = EnvelopeCholesky::factor(&system.stiffness)?;
    let start = vec![1.0; system.interior.len()];
    let (lambda, mut x, residual, iterations) = system.inverse_iteration(&chol, start, &[], RESIDUAL_TOLERANCE)?;
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(EigenResult {
        lambda1: lambda,
        eigenvector: system.expand(&x),
        residual_norm: residual,
        mesh_parameter: domain.mesh_parameter,
        error_estimate: None,
        extrapolated: None,
        iterations,
    })
}

/// Cyclic Jacobi on a small dense symmetric matrix: eigenvalues ascending and
/// the matching eigenvectors as columns.
fn symmetric_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| v.iter().map(|row| row[i]).collect()).collect();
    (values, vectors)
}

/// Width of the block used for `λ₂`; `λ₂` is often (nearly) double on
/// symmetric domains, so a single deflated vector converges too slowly.
const SECOND_BLOCK: usize = 4;

/// `(λ₁, λ₂)` of the discrete problem, `λ₂` by block inverse iteration with
/// Rayleigh–Ritz, deflated against the first eigenvector.
pub fn fem_first_two(domain: &TriangulatedDomain) -> Result<(f64, f64)> {
    let system = assemble(domain)?;
    let chol = EnvelopeCholesky::factor(&system.stiffness)?;
    let n = system.interior.len();
    let (l1, x1, _, _) = system.inverse_iteration(&chol, vec![1.0; n], &[], RESIDUAL_TOLERANCE)?;
    let width = SECOND_BLOCK.min(n - 1);
    if width == 0 {
        return Err(Error::InvalidProblem("second eigenvalue needs two unknowns".into()));
    }
    // deterministic start with components in every direction
    let mut block: Vec<Vec<f64>> = (0..width)
        .map(|k| {
            let k = k as f64;
            system
                .interior
                .iter()
                .map(|&v| {
                    let p = domain.vertices[v];
                    1.0 + (k + 1.0) * p[0] + (0.5 - k) * p[1] + 0.1 * ((17.0 + 3.0 * k) * p[0] + (5.0 + k) * p[1]).sin()
                })
                .collect()
        })
        .collect();
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mut y: Vec<Vec<f64>> = Vec::with_capacity(width);
        for x in &block {
            let mut z = chol.solve(&system.mass.mul_vec(x));
            for _ in 0..2 {
                system.remove_component(&mut z, &x1);
                for b in &y {
                    system.remove_component(&mut z, b);
                }
            }
            system.m_normalize(&mut z);
            y.push(z);
        }
        let ky: Vec<Vec<f64>> = y.iter().map(|v| system.stiffness.mul_vec(v)).collect();
        let h: Vec<Vec<f64>> = (0..width).map(|i| (0..width).map(|j| 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i]))).collect()).collect();
        let (values, vectors) = symmetric_eigen(h);
        block = vectors
            .iter()
            .map(|q| (0..n).map(|r| (0..width).map(|j| q[j] * y[j][r]).sum()).collect())
            .collect();
        residual = system.relative_residual(&block[0], values[0]);
        if residual < SECOND_RESIDUAL_TOLERANCE {
            return Ok((l1, values[0]));
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, residual })
}

/// `(φᵀKφ)/(φᵀMφ)` for nodal values on every vertex; boundary values must vanish.
pub fn rayleigh_quotient(domain: &TriangulatedDomain, values: &[f64]) -> Result<f64> {
    if values.len() != domain.vertices.len() {
        return Err(Error::InvalidDimension(format!(
            "{} nodal values for {} vertices",
            values.len(),
            domain.vertices.len()
        )));
    }
    if let Some(node) = (0..values.len()).find(|&v| domain.boundary[v] && values[v] != 0.0) {
        return Err(Error::NotAdmissible { node });
    }
    let system = assemble(domain)?;
    let x = system.restrict(values);
    let den = system.mass.quadratic_form(&x);
    if den == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(system.stiffness.quadratic_form(&x) / den)
}

/// `λ₁(B(center; radius))` on a geodesic polar mesh with `rings` rings, with
/// the estimate `(4/3)|λ_R − λ_{2R}|` from one refinement.
pub fn fem_ball_lambda1<M: ChartedMetric>(metric: &M, center: [f64; 2], radius: f64, rings: usize) -> Result<EigenResult<f64>> {
    let coarse = fem_lambda1(&geodesic_ball_mesh(metric, center, radius, rings)?)?;
    let fine = fem_lambda1(&geodesic_ball_mesh(metric, center, radius, 2 * rings)?)?;
    let diff = (coarse.lambda1 - fine.lambda1).abs();
    Ok(EigenResult {
        error_estimate: Some(4.0 / 3.0 * diff),
        extrapolated: Some((4.0 * fine.lambda1 - coarse.lambda1) / 3.0),
        ..coarse
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Euclidean;
    use crate::spectral::mesh::rectangle_mesh;

    #[test]
    fn square_converges_to_two() {
        let e = Euclidean::new(crate::geometry::BoxDomain::cube(2, 4.0));
        let pi = std::f64::consts::PI;
        let r = fem_lambda1(&rectangle_mesh(&e, [0.0, pi], [0.0, pi], 32, 32).unwrap()).unwrap();
        assert!((r.lambda1 - 2.0).abs() < 0.02, "{}", r.lambda1);
        assert!(r.residual_norm < RESIDUAL_TOLERANCE);
    }

    #[test]
    fn assembly_is_symmetric() {
        let e = Euclidean::cube(2, 4.0);
        let mesh = geodesic_ball_mesh(&e, [0.0, 0.0], 1.0, 5).unwrap();
        let s = assemble(&mesh).unwrap();
        assert!(s.stiffness.asymmetry() < 1e-14);
        assert!(s.mass.asymmetry() < 1e-14);
    }
}
