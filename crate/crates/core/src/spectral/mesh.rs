//! Triangulations of 2D chart regions carrying a metric.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{checked_metric, christoffel_unchecked, ChartedMetric};
use crate::linalg::{self, Mat};

/// Relative chart area below which a triangle counts as degenerate.
const DEGENERATE_AREA: f64 = 1e-14;
/// RK4 steps per ring spacing when shooting geodesics.
const STEPS_PER_RING: usize = 4;

/// A conforming, positively oriented triangulation with the metric sampled
/// at vertices and at triangle barycenters.
#[derive(Clone, Debug)]
pub struct TriangulatedDomain {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// `[g11, g12, g22]` per vertex.
    pub metric_at_vertex: Vec<[f64; 3]>,
    /// `[g11, g12, g22]` per triangle, at its barycenter.
    pub metric_at_barycenter: Vec<[f64; 3]>,
    /// Longest edge measured in the metric at the edge midpoint.
    pub mesh_parameter: f64,
}

fn packed(g: &Mat<f64>) -> [f64; 3] {
    [g[(0, 0)], g[(0, 1)], g[(1, 1)]]
}

fn metric_at<M: ChartedMetric>(m: &M, p: &[f64; 2]) -> Result<[f64; 3]> {
    if !m.domain().contains(p) {
        return Err(Error::SampleOutsideDomain { point: p.to_vec() });
    }
    Ok(packed(&checked_metric(m, p)?.0))
}

/// Twice the signed chart area.
pub fn signed_area2(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

impl TriangulatedDomain {
    pub fn new<M: ChartedMetric>(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
        metric: &M,
    ) -> Result<Self> {
        if metric.dim() != 2 {
            return Err(Error::InvalidDimension(format!("triangulation needs a 2D chart, got {}", metric.dim())));
        }
        if boundary.len() != vertices.len() {
            return Err(Error::InvalidProblem("one boundary flag per vertex is required".into()));
        }
        if triangles.iter().flatten().any(|&v| v >= vertices.len()) {
            return Err(Error::InvalidProblem("triangle refers to a missing vertex".into()));
        }
        let scale = vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
            .max(1.0);
        for (t, tri) in triangles.iter().enumerate() {
            let area2 = signed_area2(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if area2.abs() <= DEGENERATE_AREA * scale * scale {
                return Err(Error::SingularAssembly { triangle: t });
            }
            if area2 < 0.0 {
                return Err(Error::InvalidProblem(format!("triangle {t} is negatively oriented")));
            }
        }
        check_conforming(&triangles, &boundary)?;
        let metric_at_vertex = vertices.par_iter().map(|v| metric_at(metric, v)).collect::<Result<Vec<_>>>()?;
        let metric_at_barycenter = triangles
            .par_iter()
            .map(|t| {
                let c = [
                    (vertices[t[0]][0] + vertices[t[1]][0] + vertices[t[2]][0]) / 3.0,
                    (vertices[t[0]][1] + vertices[t[1]][1] + vertices[t[2]][1]) / 3.0,
                ];
                metric_at(metric, &c)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut mesh_parameter = 0.0_f64;
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (&vertices[t[k]], &vertices[t[(k + 1) % 3]]);
                let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                let g = metric_at(metric, &mid)?;
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                mesh_parameter = mesh_parameter.max((g[0] * dx * dx + 2.0 * g[1] * dx * dy + g[2] * dy * dy).sqrt());
            }
        }
        Ok(Self { vertices, triangles, boundary, metric_at_vertex, metric_at_barycenter, mesh_parameter })
    }

    pub fn interior_count(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    /// Total area `Σ √det g · |T|`.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .zip(&self.metric_at_barycenter)
            .map(|(t, g)| {
                let a = signed_area2(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]) / 2.0;
                (g[0] * g[2] - g[1] * g[1]).sqrt() * a
            })
            .sum()
    }
}

/// Every edge lies on one or two triangles, shared edges are traversed in
/// opposite directions, and edges on one triangle join boundary vertices.
fn check_conforming(triangles: &[[usize; 3]], boundary: &[bool]) -> Result<()> {
    let mut edges: HashMap<(usize, usize), Vec<bool>> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edges.entry((a.min(b), a.max(b))).or_default().push(a < b);
        }
    }
    for ((a, b), dirs) in &edges {
        match dirs.as_slice() {
            [_] => {
                if !(boundary[*a] && boundary[*b]) {
                    return Err(Error::InvalidProblem(format!("edge ({a}, {b}) is on the rim but not flagged as boundary")));
                }
            }
            [x, y] if x != y => {}
            _ => return Err(Error::InvalidProblem(format!("edge ({a}, {b}) is not shared consistently"))),
        }
    }
    Ok(())
}

/// Point reached by the geodesic from `p` with initial velocity `v` after unit time.
fn shoot<M: ChartedMetric>(m: &M, p: &[f64], v: &[f64], steps: usize) -> Result<Vec<f64>> {
    let dt = 1.0 / steps as f64;
    let rhs = |x: &[f64], u: &[f64]| -> Result<Vec<f64>> {
        if !m.domain().contains(x) {
            return Err(Error::SampleOutsideDomain { point: x.to_vec() });
        }
        let gamma = christoffel_unchecked(m, x)?;
        Ok(linalg::scaled(-1.0, &gamma.contract(u, u)))
    };
    let mut x = p.to_vec();
    let mut u = v.to_vec();
    for _ in 0..steps {
        let a1 = rhs(&x, &u)?;
        let (x2, u2) = (linalg::add(&x, &linalg::scaled(dt / 2.0, &u)), linalg::add(&u, &linalg::scaled(dt / 2.0, &a1)));
        let a2 = rhs(&x2, &u2)?;
        let (x3, u3) = (linalg::add(&x, &linalg::scaled(dt / 2.0, &u2)), linalg::add(&u, &linalg::scaled(dt / 2.0, &a2)));
        let a3 = rhs(&x3, &u3)?;
        let (x4, u4) = (linalg::add(&x, &linalg::scaled(dt, &u3)), linalg::add(&u, &linalg::scaled(dt, &a3)));
        let a4 = rhs(&x4, &u4)?;
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (u[i] + 2.0 * u2[i] + 2.0 * u3[i] + u4[i]);
            u[i] += dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
        }
    }
    if !m.domain().contains(&x) {
        return Err(Error::SampleOutsideDomain { point: x });
    }
    Ok(x)
}

/// Triangles between two closed rings whose nodes are evenly spaced in angle
/// starting at angle 0.
fn zipper(inner: &[usize], outer: &[usize], out: &mut Vec<[usize; 3]>) {
    let (ni, no) = (inner.len(), outer.len());
    let (mut a, mut b) = (0, 0);
    while a < ni || b < no {
        let ta = (a + 1) as f64 / ni as f64;
        let tb = (b + 1) as f64 / no as f64;
        if a < ni && (b == no || ta < tb) {
            out.push([inner[a], outer[b % no], inner[(a + 1) % ni]]);
            a += 1;
        } else {
            out.push([inner[a % ni], outer[b], outer[(b + 1) % no]]);
            b += 1;
        }
    }
}

/// Geodesic ball `B(center; radius)` meshed in geodesic polar coordinates:
/// ring `j` of `rings` lies at geodesic distance `j·radius/rings` and holds
/// `6j` nodes placed by shooting geodesics in an orthonormal frame at the center.
pub fn geodesic_ball_mesh<M: ChartedMetric>(metric: &M, center: [f64; 2], radius: f64, rings: usize) -> Result<TriangulatedDomain> {
    if rings < 1 || !(radius > 0.0) {
        return Err(Error::InvalidProblem(format!("ball mesh needs rings >= 1 and radius > 0, got {rings}, {radius}")));
    }
    let (g, _) = checked_metric(metric, &center)?;
    let frame = linalg::gram_schmidt(&g, &[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-12);
    let targets: Vec<(usize, usize)> = (1..=rings).flat_map(|j| (0..6 * j).map(move |l| (j, l))).collect();
    let outer: Vec<[f64; 2]> = targets
        .par_iter()
        .map(|&(j, l)| {
            let theta = std::f64::consts::TAU * l as f64 / (6 * j) as f64;
            let rho = radius * j as f64 / rings as f64;
            let v = linalg::add(&linalg::scaled(rho * theta.cos(), &frame[0]), &linalg::scaled(rho * theta.sin(), &frame[1]));
            shoot(metric, &center, &v, STEPS_PER_RING * j).map(|x| [x[0], x[1]])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut vertices = vec![center];
    vertices.extend(outer);
    let ring = |j: usize| -> Vec<usize> {
        if j == 0 {
            vec![0]
        } else {
            let start = 1 + 3 * j * (j - 1);
            (start..start + 6 * j).collect()
        }
    };
    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for j in 1..=rings {
        let outer = ring(j);
        if j == 1 {
            for l in 0..6 {
                triangles.push([0, outer[l], outer[(l + 1) % 6]]);
            }
        } else {
            zipper(&ring(j - 1), &outer, &mut triangles);
        }
    }
    let mut boundary = vec![false; vertices.len()];
    for v in ring(rings) {
        boundary[v] = true;
    }
    TriangulatedDomain::new(vertices, triangles, boundary, metric)
}

/// Structured triangulation of `[x0, x1] × [y0, y1]` with `nx × ny` cells.
pub fn rectangle_mesh<M: ChartedMetric>(metric: &M, x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> Result<TriangulatedDomain> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidProblem("rectangle mesh needs at least 2 cells per side".into()));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([x[0] + (x[1] - x[0]) * i as f64 / nx as f64, y[0] + (y[1] - y[0]) * j as f64 / ny as f64]);
            boundary.push(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriangulatedDomain::new(vertices, triangles, boundary, metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Euclidean;

    #[test]
    fn flat_ball_mesh_is_a_regular_polygon() {
        let e = Euclidean::cube(2, 5.0);
        let mesh = geodesic_ball_mesh(&e, [0.0, 0.0], 1.0, 4).unwrap();
        assert_eq!(mesh.vertices.len(), 1 + 3 * 4 * 5);
        assert_eq!(mesh.triangles.len(), 6 * 16);
        for (v, b) in mesh.vertices.iter().zip(&mesh.boundary) {
            if *b {
                assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 1.0).abs() < 1e-12);
            }
        }
        let polygon = 0.5 * 24.0 * (std::f64::consts::TAU / 24.0).sin();
        assert!(mesh.area() < std::f64::consts::PI && mesh.area() > 0.9 * polygon);
    }

    #[test]
    fn rectangle_mesh_counts() {
        let e = Euclidean::cube(2, 5.0);
        let mesh = rectangle_mesh(&e, [0.0, 3.0], [0.0, 2.0], 6, 4).unwrap();
        assert_eq!(mesh.vertices.len(), 35);
        assert_eq!(mesh.interior_count(), 15);
        assert!((mesh.area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn bad_triangulations_are_rejected() {
        let e = Euclidean::cube(2, 5.0);
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            TriangulatedDomain::new(v.clone(), vec![[0, 1, 1]], vec![true; 3], &e),
            Err(Error::SingularAssembly { triangle: 0 })
        ));
        assert!(TriangulatedDomain::new(v.clone(), vec![[0, 2, 1]], vec![true; 3], &e).is_err());
        assert!(TriangulatedDomain::new(v, vec![[0, 1, 2]], vec![true, true, false], &e).is_err());
    }
}
