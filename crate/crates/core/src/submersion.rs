//! Riemannian submersions `π: M̃^n → B^k` given in charts.
//!
//! Horizontal and vertical projections come from the Jacobian `J = dπ`:
//! `P_H = g̃⁻¹Jᵀ(J g̃⁻¹ Jᵀ)⁻¹J` and `P_V = I − P_H`. Tensors built from
//! covariant derivatives (`α^F`, `T`, `A`) use the extensions `x ↦ P(x)c`
//! of constant vectors, which is enough because they are tensorial.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::norms::BilinearMap;
use crate::geometry::{
    self, check_point, checked_metric, diff, BoxDomain, ChartedMetric, Pullback, ScalarField, SmoothMap,
    TangentVector, VectorField,
};
use crate::linalg::{self, Mat};
use crate::models::RoundSphere;
use crate::scalar::Real;

/// Relative residual below which a projected coordinate vector is dropped
/// while building frames.
const FRAME_TOLERANCE: f64 = 1e-8;

/// Projection onto the first `base_dim` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Projection {
    pub total_dim: usize,
    pub base_dim: usize,
}

impl SmoothMap for Projection {
    fn source_dim(&self) -> usize {
        self.total_dim
    }
    fn target_dim(&self) -> usize {
        self.base_dim
    }
    fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
        p[..self.base_dim].to_vec()
    }
}

/// A submersion between two charts.
#[derive(Clone, Debug)]
pub struct SubmersionMap<T, B, P> {
    total: T,
    base: B,
    map: P,
}

/// Pointwise linear algebra of the splitting.
#[derive(Clone, Debug)]
pub struct Splitting<S> {
    pub image: Vec<S>,
    pub metric: Mat<S>,
    pub jacobian: Mat<S>,
    /// `g̃⁻¹Jᵀ(J g̃⁻¹ Jᵀ)⁻¹`, mapping base vectors to their horizontal lifts.
    pub lift: Mat<S>,
    pub horizontal: Mat<S>,
    pub vertical: Mat<S>,
}

impl<T: ChartedMetric, B: ChartedMetric> SubmersionMap<T, B, Projection> {
    /// Submersion onto the first factor of a product-type chart.
    pub fn projection(total: T, base: B) -> Result<Self> {
        let map = Projection { total_dim: total.dim(), base_dim: base.dim() };
        Self::new(total, base, map)
    }
}

impl<T: ChartedMetric, B: ChartedMetric, P: SmoothMap> SubmersionMap<T, B, P> {
    pub fn new(total: T, base: B, map: P) -> Result<Self> {
        if map.source_dim() != total.dim() || map.target_dim() != base.dim() || base.dim() > total.dim() {
            return Err(Error::InvalidDimension(format!(
                "submersion {}→{} between charts of dimension {} and {}",
                map.source_dim(),
                map.target_dim(),
                total.dim(),
                base.dim()
            )));
        }
        Ok(Self { total, base, map })
    }

    pub fn total(&self) -> &T {
        &self.total
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn map(&self) -> &P {
        &self.map
    }

    pub fn total_dim(&self) -> usize {
        self.total.dim()
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.total_dim() - self.base_dim()
    }

    /// Lift `F̃ = F ∘ π` of a base function.
    pub fn lift_function<'a, F: ScalarField>(&'a self, f: &'a F) -> Pullback<&'a F, &'a P> {
        Pullback { field: f, map: &self.map }
    }

    fn splitting_unchecked<S: Real>(&self, x: &[S]) -> Result<Splitting<S>> {
        let (g, chol) = checked_metric(&self.total, x)?;
        let (image, jac) = diff::jacobian(&self.map, x);
        let g_inv = chol.inverse();
        let gij = g_inv.mul(&jac.transpose());
        let m = jac.mul(&gij);
        let rank = linalg::gram_schmidt(
            &Mat::identity(self.total_dim()),
            &(0..jac.rows()).map(|i| jac.row(i).to_vec()).collect::<Vec<_>>(),
            FRAME_TOLERANCE,
        )
        .len();
        let degenerate = || Error::DegenerateFiber {
            point: geometry_point(x),
            found: self.total_dim() - rank,
            expected: self.fiber_dim(),
        };
        if rank < self.base_dim() {
            return Err(degenerate());
        }
        let m_inv = m.cholesky().ok_or_else(degenerate)?.inverse();
        let lift = gij.mul(&m_inv);
        let horizontal = lift.mul(&jac);
        let vertical = Mat::identity(self.total_dim()).sub(&horizontal);
        Ok(Splitting { image, metric: g, jacobian: jac, lift, horizontal, vertical })
    }

    /// Projectors and lift matrix at `x`, with domain checks on both charts.
    pub fn splitting<S: Real>(&self, x: &[S]) -> Result<Splitting<S>> {
        check_point(&self.total, x)?;
        let s = self.splitting_unchecked(x)?;
        check_point(&self.base, &s.image)?;
        Ok(s)
    }

    /// `(v^V, v^H)`.
    pub fn split(&self, p: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let s = self.splitting(p)?;
        Ok((s.vertical.mul_vec(v), s.horizontal.mul_vec(v)))
    }

    /// Horizontal lift at `p` of a base vector at `π(p)`.
    pub fn horizontal_lift(&self, p: &[f64], x: &[f64]) -> Result<TangentVector<f64>> {
        let s = self.splitting(p)?;
        Ok(TangentVector::new(p.to_vec(), s.lift.mul_vec(x)))
    }

    /// `max |⟨lift e_i, lift e_j⟩ − g_B(e_i, e_j)|` relative to `max |g_B|`.
    pub fn isometry_defect(&self, p: &[f64]) -> Result<f64> {
        let s = self.splitting(p)?;
        let gb = self.base.metric(&s.image);
        let pulled = s.lift.transpose().mul(&s.metric).mul(&s.lift);
        Ok(pulled.sub(&gb).max_abs() / gb.max_abs().max(f64::MIN_POSITIVE))
    }

    /// Orthonormal horizontal and vertical frames at `p`. The vertical frame
    /// is optionally rotated by an orthogonal matrix of size `n − k`.
    pub fn frames(&self, p: &[f64], rotation: Option<&Mat<f64>>) -> Result<AdaptedFrame> {
        let s = self.splitting(p)?;
        let n = self.total_dim();
        let horizontal = linalg::gram_schmidt(
            &s.metric,
            &(0..self.base_dim()).map(|i| s.lift.column(i)).collect::<Vec<_>>(),
            FRAME_TOLERANCE,
        );
        let mut vertical = vertical_frame(&s.metric, &s.vertical, self.fiber_dim());
        if vertical.len() != self.fiber_dim() || horizontal.len() != self.base_dim() {
            return Err(Error::DegenerateFiber { point: p.to_vec(), found: vertical.len(), expected: self.fiber_dim() });
        }
        if let Some(q) = rotation {
            let r = vertical.len();
            if q.rows() != r || q.cols() != r {
                return Err(Error::InvalidDimension(format!("rotation of size {} for a fiber of dimension {r}", q.rows())));
            }
            vertical = (0..r)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    for j in 0..r {
                        linalg::axpy(q[(i, j)], &vertical[j], &mut v);
                    }
                    v
                })
                .collect();
        }
        Ok(AdaptedFrame { base_point: p.to_vec(), horizontal, vertical })
    }

    fn projected(&self, vector: &[f64], part: Part) -> ProjectedConstant<'_, T, B, P> {
        ProjectedConstant { sub: self, vector: vector.to_vec(), part }
    }

    /// Basic field on the total space lifting a base vector field.
    pub fn basic_field<'a, X: VectorField>(&'a self, field: &'a X) -> BasicLift<'a, T, B, P, X> {
        BasicLift { sub: self, field }
    }

    /// `α^F(v, w) = (∇̃_v W)^H` for vertical `v`, `w`.
    pub fn fiber_form(&self, p: &[f64], v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let s = self.splitting(p)?;
        let v = s.vertical.mul_vec(v);
        let dw = geometry::covariant_derivative(&self.total, &self.projected(w, Part::Vertical), p, &v)?;
        Ok(s.horizontal.mul_vec(&dw))
    }

    /// `T_E F = (∇̃_{E^V} F^V)^H + (∇̃_{E^V} F^H)^V`.
    pub fn tensor_t(&self, p: &[f64], e: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let s = self.splitting(p)?;
        let ev = s.vertical.mul_vec(e);
        let d_vert = geometry::covariant_derivative(&self.total, &self.projected(f, Part::Vertical), p, &ev)?;
        let d_hor = geometry::covariant_derivative(&self.total, &self.projected(f, Part::Horizontal), p, &ev)?;
        Ok(linalg::add(&s.horizontal.mul_vec(&d_vert), &s.vertical.mul_vec(&d_hor)))
    }

    /// `A_E F = (∇̃_{E^H} F^H)^V + (∇̃_{E^H} F^V)^H`.
    pub fn tensor_a(&self, p: &[f64], e: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let s = self.splitting(p)?;
        let eh = s.horizontal.mul_vec(e);
        let d_hor = geometry::covariant_derivative(&self.total, &self.projected(f, Part::Horizontal), p, &eh)?;
        let d_vert = geometry::covariant_derivative(&self.total, &self.projected(f, Part::Vertical), p, &eh)?;
        Ok(linalg::add(&s.vertical.mul_vec(&d_hor), &s.horizontal.mul_vec(&d_vert)))
    }

    pub fn fiber_geometry(&self, p: &[f64]) -> Result<FiberGeometry> {
        self.fiber_geometry_in_frame(p, None)
    }

    /// `α^F` in orthonormal frames and `H^F = Σ α^F(e_i, e_i)`.
    pub fn fiber_geometry_in_frame(&self, p: &[f64], rotation: Option<&Mat<f64>>) -> Result<FiberGeometry> {
        let frame = self.frames(p, rotation)?;
        let g = self.total.metric(p);
        let r = frame.vertical.len();
        let mut images = vec![vec![Vec::new(); r]; r];
        for i in 0..r {
            for j in 0..r {
                images[i][j] = self.fiber_form(p, &frame.vertical[i], &frame.vertical[j])?;
            }
        }
        let mut h = vec![0.0; p.len()];
        for (i, row) in images.iter().enumerate() {
            linalg::axpy(1.0, &row[i], &mut h);
        }
        let alpha = BilinearMap::from_basis_images(frame.horizontal.len(), r, r, |i, j| {
            frame.horizontal.iter().map(|e| linalg::inner(&g, e, &images[i][j])).collect()
        });
        let mean_curvature_norm = linalg::inner(&g, &h, &h).max(0.0).sqrt();
        Ok(FiberGeometry {
            base_point: p.to_vec(),
            alpha_norm: alpha.operator_norm(),
            alpha,
            mean_curvature: TangentVector::new(p.to_vec(), h),
            mean_curvature_norm,
            frame,
        })
    }

    /// `T` and `A` in the adapted orthonormal frame (horizontal first).
    pub fn oneill_tensors(&self, p: &[f64]) -> Result<ONeillTensors> {
        let frame = self.frames(p, None)?;
        let g = self.total.metric(p);
        let basis = frame.basis();
        let n = basis.len();
        let coords = |v: &[f64]| -> Vec<f64> { basis.iter().map(|e| linalg::inner(&g, e, v)).collect() };
        let mut t = BilinearMap::zeros(n, n, n);
        let mut a = BilinearMap::zeros(n, n, n);
        for i in 0..n {
            for j in 0..n {
                let ti = coords(&self.tensor_t(p, &basis[i], &basis[j])?);
                let ai = coords(&self.tensor_a(p, &basis[i], &basis[j])?);
                for c in 0..n {
                    t.set(c, i, j, ti[c]);
                    a.set(c, i, j, ai[c]);
                }
            }
        }
        Ok(ONeillTensors {
            base_point: p.to_vec(),
            horizontal_dim: frame.horizontal.len(),
            t_norm: t.operator_norm(),
            a_norm: a.operator_norm(),
            t,
            a,
            frame,
        })
    }

    /// Residuals of `∇̃_X̃ Ỹ = lift(∇_X Y) + ½[X̃, Ỹ]^V` for base fields `X`, `Y`.
    pub fn basic_connection_residual<X: VectorField, Y: VectorField>(&self, p: &[f64], x: &X, y: &Y) -> Result<BasicConnectionResidual> {
        let s = self.splitting(p)?;
        let xt = self.basic_field(x);
        let yt = self.basic_field(y);
        let xv = xt.components(p);
        let yv = yt.components(p);
        let lhs = geometry::covariant_derivative(&self.total, &yt, p, &xv)?;
        let xb: Vec<f64> = x.components(&s.image);
        let nabla_base = geometry::covariant_derivative(&self.base, y, &s.image, &xb)?;
        let lifted = s.lift.mul_vec(&nabla_base);
        let (_, dy) = diff::field_derivative(&yt, p, &xv);
        let (_, dx) = diff::field_derivative(&xt, p, &yv);
        let bracket = linalg::sub(&dy, &dx);
        let diff = linalg::sub(&lhs, &lifted);
        let norm = |v: &[f64]| linalg::inner(&s.metric, v, v).max(0.0).sqrt();
        let vertical_defect = linalg::sub(&s.vertical.mul_vec(&diff), &linalg::scaled(0.5, &s.vertical.mul_vec(&bracket)));
        Ok(BasicConnectionResidual {
            horizontal: norm(&s.horizontal.mul_vec(&diff)),
            vertical: norm(&vertical_defect),
            bracket_vertical_norm: norm(&s.vertical.mul_vec(&bracket)),
        })
    }

    pub fn lemma_residuals<F: ScalarField, X: VectorField, Y: VectorField>(
        &self,
        f: &F,
        x: &X,
        y: &Y,
        v: &[f64],
        w: &[f64],
        p: &[f64],
    ) -> Result<ResidualReport> {
        self.lemma_residuals_in_frame(f, x, y, v, w, p, None)
    }

    /// Absolute residuals of the divergence, Laplacian and Hessian identities
    /// for the lift `F̃ = F ∘ π`, basic lifts of `X`, `Y` and vertical parts of
    /// `v`, `w`, using the given vertical frame for `H^F`.
    #[allow(clippy::too_many_arguments)]
    pub fn lemma_residuals_in_frame<F: ScalarField, X: VectorField, Y: VectorField>(
        &self,
        f: &F,
        x: &X,
        y: &Y,
        v: &[f64],
        w: &[f64],
        p: &[f64],
        rotation: Option<&Mat<f64>>,
    ) -> Result<ResidualReport> {
        let s = self.splitting(p)?;
        let q = s.image.clone();
        let fiber = self.fiber_geometry_in_frame(p, rotation)?;
        let h = &fiber.mean_curvature.components;
        let g = &s.metric;
        let lifted_f = self.lift_function(f);
        let xt = self.basic_field(x);
        let xv: Vec<f64> = xt.components(p);

        let div_total = geometry::divergence(&self.total, &xt, p)?;
        let div_base = geometry::divergence(&self.base, x, &q)?;
        let divergence = (div_total - (div_base - linalg::inner(g, &xv, h))).abs();

        let grad = geometry::gradient(&self.total, &lifted_f, p)?.components;
        let lap_total = geometry::laplacian(&self.total, &lifted_f, p)?;
        let lap_base = geometry::laplacian(&self.base, f, &q)?;
        let laplacian = (lap_total - (lap_base - linalg::inner(g, &grad, h))).abs();

        let hess_total = geometry::hessian(&self.total, &lifted_f, p)?;
        let hess_base = geometry::hessian(&self.base, f, &q)?;
        let xb: Vec<f64> = x.components(&q);
        let yb: Vec<f64> = y.components(&q);
        let yv = s.lift.mul_vec(&yb);
        let hessian_horizontal = (hess_total.apply(&xv, &yv) - hess_base.apply(&xb, &yb)).abs();

        let vv = s.vertical.mul_vec(v);
        let wv = s.vertical.mul_vec(w);
        let alpha = self.fiber_form(p, &vv, &wv)?;
        let hessian_vertical = (hess_total.apply(&vv, &wv) + linalg::inner(g, &alpha, &grad)).abs();

        let a_xv = self.tensor_a(p, &xv, &vv)?;
        let hessian_mixed = (hess_total.apply(&xv, &vv) + linalg::inner(g, &a_xv, &grad)).abs();

        Ok(ResidualReport { divergence, laplacian, hessian_horizontal, hessian_vertical, hessian_mixed })
    }
}

/// Orthonormalised projections `P_V e_i`, longest first, with residuals
/// measured against the longest projection so round-off in horizontal
/// directions is never promoted to a frame vector.
fn vertical_frame(g: &Mat<f64>, vertical: &Mat<f64>, expected: usize) -> Vec<Vec<f64>> {
    let n = g.rows();
    let mut candidates: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|i| {
            let v = vertical.column(i);
            (linalg::inner(g, &v, &v).max(0.0).sqrt(), v)
        })
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    let scale = candidates.first().map_or(0.0, |c| c.0);
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(expected);
    for (_, v) in candidates {
        if frame.len() == expected {
            break;
        }
        let mut w = v;
        for _ in 0..2 {
            for b in &frame {
                let c = linalg::inner(g, b, &w);
                linalg::axpy(-c, b, &mut w);
            }
        }
        let nw = linalg::inner(g, &w, &w).max(0.0).sqrt();
        if nw > FRAME_TOLERANCE * scale {
            frame.push(linalg::scaled(1.0 / nw, &w));
        }
    }
    frame
}

fn geometry_point<S: Real>(p: &[S]) -> Vec<f64> {
    p.iter().map(|v| v.to_f64()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    Vertical,
    Horizontal,
}

/// The field `x ↦ P(x) c` for a constant vector `c`.
struct ProjectedConstant<'a, T, B, P> {
    sub: &'a SubmersionMap<T, B, P>,
    vector: Vec<f64>,
    part: Part,
}

impl<T: ChartedMetric, B: ChartedMetric, P: SmoothMap> VectorField for ProjectedConstant<'_, T, B, P> {
    fn components<S: Real>(&self, x: &[S]) -> Vec<S> {
        let s = self.sub.splitting_unchecked(x).expect("splitting was checked at the real point");
        let c: Vec<S> = self.vector.iter().map(|&v| S::from_f64(v)).collect();
        match self.part {
            Part::Vertical => s.vertical.mul_vec(&c),
            Part::Horizontal => s.horizontal.mul_vec(&c),
        }
    }
}

/// Horizontal lift `X̃(x) = lift_x(X(π(x)))` of a base vector field.
pub struct BasicLift<'a, T, B, P, X> {
    sub: &'a SubmersionMap<T, B, P>,
    field: &'a X,
}

impl<T: ChartedMetric, B: ChartedMetric, P: SmoothMap, X: VectorField> VectorField for BasicLift<'_, T, B, P, X> {
    fn components<S: Real>(&self, x: &[S]) -> Vec<S> {
        let s = self.sub.splitting_unchecked(x).expect("splitting was checked at the real point");
        s.lift.mul_vec(&self.field.components(&s.image))
    }
}

/// Orthonormal horizontal and vertical frames at a point.
#[derive(Clone, Debug, Serialize)]
pub struct AdaptedFrame {
    pub base_point: Vec<f64>,
    pub horizontal: Vec<Vec<f64>>,
    pub vertical: Vec<Vec<f64>>,
}

impl AdaptedFrame {
    /// Horizontal vectors followed by vertical ones.
    pub fn basis(&self) -> Vec<Vec<f64>> {
        self.horizontal.iter().chain(&self.vertical).cloned().collect()
    }
}

/// Second fundamental form and mean curvature of the fiber through a point.
#[derive(Clone, Debug)]
pub struct FiberGeometry {
    pub base_point: Vec<f64>,
    /// `α^F` with vertical slots and horizontal values, all in the frames of `frame`.
    pub alpha: BilinearMap,
    pub alpha_norm: f64,
    pub mean_curvature: TangentVector<f64>,
    pub mean_curvature_norm: f64,
    pub frame: AdaptedFrame,
}

/// `T` and `A` in an adapted orthonormal frame.
#[derive(Clone, Debug)]
pub struct ONeillTensors {
    pub base_point: Vec<f64>,
    pub horizontal_dim: usize,
    pub t: BilinearMap,
    pub a: BilinearMap,
    pub t_norm: f64,
    pub a_norm: f64,
    pub frame: AdaptedFrame,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasicConnectionResidual {
    /// `‖(∇̃_X̃ Ỹ − lift ∇_X Y)^H‖`.
    pub horizontal: f64,
    /// `‖(∇̃_X̃ Ỹ − lift ∇_X Y)^V − ½[X̃, Ỹ]^V‖`.
    pub vertical: f64,
    pub bracket_vertical_norm: f64,
}

impl BasicConnectionResidual {
    pub fn max(&self) -> f64 {
        self.horizontal.max(self.vertical)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `div X̃ = div X − ⟨X̃, H^F⟩`.
    pub divergence: f64,
    /// `Δ̃F̃ = ΔF − ⟨grad F̃, H^F⟩`, the divergence identity applied to
    /// `X̃ = grad F̃`.
    pub laplacian: f64,
    /// `Hess F̃(X̃, Ỹ) = Hess F(X, Y)`.
    pub hessian_horizontal: f64,
    /// `Hess F̃(V, W) = −⟨α^F(V, W), grad F̃⟩`.
    pub hessian_vertical: f64,
    /// `Hess F̃(X̃, V) = −⟨A_X̃ V, grad F̃⟩`.
    pub hessian_mixed: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [self.divergence, self.laplacian, self.hessian_horizontal, self.hessian_vertical, self.hessian_mixed]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Unit 3-sphere in Hopf coordinates `(η, ξ₁, ξ₂)`,
/// `(e^{iξ₁} sin η, e^{iξ₂} cos η) ∈ ℂ²`, metric `dη² + sin²η dξ₁² + cos²η dξ₂²`.
#[derive(Clone, Debug)]
pub struct HopfSphere {
    domain: BoxDomain,
}

impl Default for HopfSphere {
    fn default() -> Self {
        let margin = 0.1;
        Self {
            domain: BoxDomain {
                lower: vec![margin, -3.0, -3.0],
                upper: vec![std::f64::consts::FRAC_PI_2 - margin, 3.0, 3.0],
            },
        }
    }
}

impl ChartedMetric for HopfSphere {
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        let (s, c) = (p[0].sin(), p[0].cos());
        Mat::from_diagonal(&[S::one(), s * s, c * c])
    }
}

/// `(η, ξ₁, ξ₂) ↦ (θ, φ) = (2η, ξ₁ − ξ₂)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HopfMap;

impl SmoothMap for HopfMap {
    fn source_dim(&self) -> usize {
        3
    }
    fn target_dim(&self) -> usize {
        2
    }
    fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
        vec![p[0] + p[0], p[1] - p[2]]
    }
}

pub type HopfSubmersion = SubmersionMap<HopfSphere, RoundSphere, HopfMap>;

/// `S³(1) → S²(1/2)`, with the base chart widened to contain every image point.
pub fn hopf_submersion() -> HopfSubmersion {
    let base = RoundSphere::new(0.5)
        .and_then(|s| s.with_domain(BoxDomain { lower: vec![0.1, -7.0], upper: vec![std::f64::consts::PI - 0.1, 7.0] }))
        .expect("valid sphere chart");
    SubmersionMap::new(HopfSphere::default(), base, HopfMap).expect("dimensions match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConstantField, Euclidean};
    use crate::models::{BusemannModel, HyperbolicModel, WarpedProduct};

    fn product_h2_r() -> SubmersionMap<WarpedProduct<HyperbolicModel, Euclidean, ConstantField>, HyperbolicModel, Projection> {
        let h2 = HyperbolicModel::new(2, 1.0).unwrap();
        let total = WarpedProduct::new(h2.clone(), Euclidean::cube(1, 10.0), ConstantField(1.0));
        SubmersionMap::projection(total, h2).unwrap()
    }

    #[test]
    fn product_split_is_coordinate_split() {
        let sub = product_h2_r();
        let p = [0.3, -0.2, 1.0];
        let (v, h) = sub.split(&p, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!((v, h), (vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]));
        let (v, h) = sub.split(&p, &[1.0, 0.0, 0.0]).unwrap();
        assert!(linalg::norm2(&v) < 1e-15);
        assert!((h[0] - 1.0).abs() < 1e-15);
        let lift = sub.horizontal_lift(&p, &[1.0, 0.0]).unwrap();
        assert!(linalg::norm2(&linalg::sub(&lift.components, &[1.0, 0.0, 0.0])) < 1e-14);
    }

    #[test]
    fn product_fibers_are_totally_geodesic() {
        let sub = product_h2_r();
        let fg = sub.fiber_geometry(&[0.1, 0.4, -2.0]).unwrap();
        assert!(fg.alpha_norm < 1e-12 && fg.mean_curvature_norm < 1e-12);
        let on = sub.oneill_tensors(&[0.1, 0.4, -2.0]).unwrap();
        assert!(on.t_norm < 1e-12 && on.a_norm < 1e-12);
    }

    #[test]
    fn hopf_is_riemannian() {
        let hopf = hopf_submersion();
        let p = [0.6, 0.3, -0.8];
        assert!(hopf.isometry_defect(&p).unwrap() < 1e-12);
        let frame = hopf.frames(&p, None).unwrap();
        assert_eq!(frame.vertical.len(), 1);
    }

    #[test]
    fn identity_submersion_has_no_fiber() {
        let h2 = HyperbolicModel::new(2, 1.0).unwrap();
        let sub = SubmersionMap::projection(h2.clone(), h2.clone()).unwrap();
        let fg = sub.fiber_geometry(&[0.2, 0.1]).unwrap();
        assert_eq!(fg.alpha_norm, 0.0);
        assert_eq!(fg.mean_curvature_norm, 0.0);
        let f = h2.busemann();
        let x = geometry::ConstantVectorField(vec![1.0, 0.5]);
        let r = sub.lemma_residuals(&f, &x, &x, &[0.0, 0.0], &[0.0, 0.0], &[0.2, 0.1]).unwrap();
        assert!(r.max() < 1e-12);
    }

    #[test]
    fn degenerate_map_is_reported() {
        struct Squash;
        impl SmoothMap for Squash {
            fn source_dim(&self) -> usize {
                3
            }
            fn target_dim(&self) -> usize {
                2
            }
            fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
                vec![p[0] + p[1], p[0] + p[1]]
            }
        }
        let sub = SubmersionMap::new(Euclidean::cube(3, 5.0), Euclidean::cube(2, 20.0), Squash).unwrap();
        assert!(matches!(sub.split(&[0.1, 0.2, 0.3], &[1.0, 0.0, 0.0]), Err(Error::DegenerateFiber { .. })));
    }
}
