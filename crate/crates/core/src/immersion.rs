//! Isometric immersions `f: M^m → M̃^n` given by a parametrisation.
//!
//! The source chart carries the pulled-back metric, so an [`ImmersionMap`]
//! is itself a [`ChartedMetric`] and every intrinsic quantity on `M` comes
//! from the generic engine run on that chart.

use crate::error::{Error, Result};
use crate::geometry::{
    self, check_point, christoffel_unchecked, diff, BoxDomain, ChartedMetric, Pullback,
    ScalarField, SmoothMap, SymmetricForm, TangentVector,
};
use crate::linalg::{self, Mat};
use crate::scalar::Real;

impl<F: SmoothMap> SmoothMap for &F {
    fn source_dim(&self) -> usize {
        (**self).source_dim()
    }
    fn target_dim(&self) -> usize {
        (**self).target_dim()
    }
    fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
        (**self).apply(p)
    }
}

/// A parametrised immersion into a target chart.
#[derive(Clone, Debug)]
pub struct ImmersionMap<T, F> {
    source_domain: BoxDomain,
    target: T,
    map: F,
}

impl<T: ChartedMetric, F: SmoothMap> ImmersionMap<T, F> {
    pub fn new(source_domain: BoxDomain, target: T, map: F) -> Result<Self> {
        if source_domain.dim() != map.source_dim() || target.dim() != map.target_dim() {
            return Err(Error::InvalidDimension(format!(
                "map {}→{} between charts of dimension {} and {}",
                map.source_dim(),
                map.target_dim(),
                source_domain.dim(),
                target.dim()
            )));
        }
        if map.source_dim() > map.target_dim() {
            return Err(Error::InvalidDimension("source dimension exceeds target dimension".into()));
        }
        Ok(Self { source_domain, target, map })
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    pub fn map(&self) -> &F {
        &self.map
    }

    pub fn source_dim(&self) -> usize {
        self.map.source_dim()
    }

    pub fn target_dim(&self) -> usize {
        self.map.target_dim()
    }

    /// Restriction `F = F̃ ∘ f` of a target field.
    pub fn restrict<'a, G: ScalarField>(&'a self, field: &'a G) -> Pullback<&'a G, &'a F> {
        Pullback { field, map: &self.map }
    }

    fn check<S: Real>(&self, p: &[S]) -> Result<Vec<S>> {
        check_point(self, p)?;
        let fp = self.map.apply(p);
        check_point(&self.target, &fp)?;
        Ok(fp)
    }

    /// Jacobian and the Cholesky factor of the induced metric.
    fn frame_data<S: Real>(&self, p: &[S]) -> Result<(Vec<S>, Mat<S>, Mat<S>, Mat<S>)> {
        let (fp, jac) = diff::jacobian(&self.map, p);
        let gt = self.target.metric(&fp);
        let induced = jac.transpose().mul(&gt).mul(&jac);
        check_rank(&gt, &jac, p)?;
        Ok((fp, jac, gt, induced))
    }
}

/// Relative residual below which a Jacobian column counts as dependent.
const RANK_TOLERANCE: f64 = 1e-8;

fn check_rank<S: Real>(gt: &Mat<S>, jac: &Mat<S>, p: &[S]) -> Result<()> {
    let columns: Vec<Vec<S>> = (0..jac.cols()).map(|i| jac.column(i)).collect();
    if linalg::gram_schmidt(gt, &columns, RANK_TOLERANCE).len() < columns.len() {
        return Err(Error::RankDeficient { point: geometry_point(p), expected: columns.len() });
    }
    Ok(())
}

fn geometry_point<S: Real>(p: &[S]) -> Vec<f64> {
    p.iter().map(|v| v.to_f64()).collect()
}

impl<T: ChartedMetric, F: SmoothMap> ChartedMetric for ImmersionMap<T, F> {
    fn dim(&self) -> usize {
        self.map.source_dim()
    }
    fn domain(&self) -> &BoxDomain {
        &self.source_domain
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        let (fp, jac) = diff::jacobian(&self.map, p);
        let gt = self.target.metric(&fp);
        jac.transpose().mul(&gt).mul(&jac)
    }
}

/// `Jᵀ g̃ J`, the pulled-back metric.
pub fn induced_metric<S: Real, T: ChartedMetric, F: SmoothMap>(f: &ImmersionMap<T, F>, p: &[S]) -> Result<SymmetricForm<S>> {
    f.check(p)?;
    let (_, _, _, induced) = f.frame_data(p)?;
    Ok(SymmetricForm { base_point: p.to_vec(), components: induced })
}

/// Orthonormal frame of the normal space at `f(p)`.
#[derive(Clone, Debug)]
pub struct NormalFrame<S> {
    pub base_point: Vec<S>,
    pub vectors: Vec<Vec<S>>,
}

/// Normal frame by Gram–Schmidt on `[J | I]` in the target metric, choosing
/// the coordinate axis with the largest residual at each completion step.
pub fn normal_frame<S: Real, T: ChartedMetric, F: SmoothMap>(f: &ImmersionMap<T, F>, p: &[S]) -> Result<NormalFrame<S>> {
    f.check(p)?;
    let (fp, jac, gt, _) = f.frame_data(p)?;
    let m = f.source_dim();
    let tangent = linalg::gram_schmidt(&gt, &(0..m).map(|i| jac.column(i)).collect::<Vec<_>>(), RANK_TOLERANCE);
    let full = linalg::complete_basis(&gt, &tangent, f.target_dim());
    Ok(NormalFrame { base_point: fp, vectors: full[m..].to_vec() })
}

impl<S: Real> NormalFrame<S> {
    /// The frame `N'_i = Σ_j Q_ij N_j` for an orthogonal `Q`.
    pub fn rotated(&self, q: &Mat<S>) -> Self {
        let n = self.vectors.len();
        let vectors = (0..n)
            .map(|i| {
                let mut v = vec![S::zero(); self.base_point.len()];
                for j in 0..n {
                    linalg::axpy(q[(i, j)], &self.vectors[j], &mut v);
                }
                v
            })
            .collect();
        Self { base_point: self.base_point.clone(), vectors }
    }
}

/// Second fundamental form in source-coordinate slots, normal-valued.
#[derive(Clone, Debug)]
pub struct SecondFundamentalForm<S> {
    pub base_point: Vec<S>,
    /// `α(∂_i, ∂_j)` as target vectors, indexed `[i][j]`.
    pub components: Vec<Vec<Vec<S>>>,
    pub mean_curvature: MeanCurvatureValue<S>,
}

impl<S: Real> SecondFundamentalForm<S> {
    pub fn apply(&self, u: &[S], v: &[S]) -> Vec<S> {
        let n = self.mean_curvature.vector.components.len();
        let mut out = vec![S::zero(); n];
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                linalg::axpy(*ui * *vj, &self.components[i][j], &mut out);
            }
        }
        out
    }
}

/// Non-normalised mean curvature vector `H = tr α`.
#[derive(Clone, Debug)]
pub struct MeanCurvatureValue<S> {
    pub base_point: Vec<S>,
    pub vector: TangentVector<S>,
    pub norm: S,
}

/// `α(X,Y) = (∇̃_{df X} df Y)^⊥` and `H = g^{ij} α_ij`.
pub fn second_fundamental_form<S: Real, T: ChartedMetric, F: SmoothMap>(
    f: &ImmersionMap<T, F>,
    p: &[S],
) -> Result<SecondFundamentalForm<S>> {
    f.check(p)?;
    let (fp, jac, hess) = diff::map_jet2(&f.map, p);
    let gt = f.target.metric(&fp);
    check_rank(&gt, &jac, p)?;
    let induced = jac.transpose().mul(&gt).mul(&jac);
    let chol = induced
        .cholesky()
        .ok_or_else(|| Error::RankDeficient { point: geometry_point(p), expected: f.source_dim() })?;
    let gamma = christoffel_unchecked(&f.target, &fp)?;
    let m = f.source_dim();
    let n = f.target_dim();
    // normal projection v − J (JᵀG J)⁻¹ Jᵀ G v
    let project = |v: &[S]| -> Vec<S> {
        let jtgv = jac.transpose().mul_vec(&gt.mul_vec(v));
        let coeff = chol.solve(&jtgv);
        linalg::sub(v, &jac.mul_vec(&coeff))
    };
    let columns: Vec<Vec<S>> = (0..m).map(|i| jac.column(i)).collect();
    let mut components = vec![vec![Vec::new(); m]; m];
    for i in 0..m {
        for j in i..m {
            let second: Vec<S> = (0..n).map(|a| hess[a][(i, j)]).collect();
            let acc = linalg::add(&second, &gamma.contract(&columns[i], &columns[j]));
            let a = project(&acc);
            components[i][j] = a.clone();
            components[j][i] = a;
        }
    }
    let g_inv = chol.inverse();
    let mut h = vec![S::zero(); n];
    for i in 0..m {
        for j in 0..m {
            linalg::axpy(g_inv[(i, j)], &components[i][j], &mut h);
        }
    }
    let norm = linalg::inner(&gt, &h, &h).sqrt();
    Ok(SecondFundamentalForm {
        base_point: p.to_vec(),
        components,
        mean_curvature: MeanCurvatureValue { base_point: fp.clone(), vector: TangentVector::new(fp, h), norm },
    })
}

pub fn mean_curvature<S: Real, T: ChartedMetric, F: SmoothMap>(f: &ImmersionMap<T, F>, p: &[S]) -> Result<MeanCurvatureValue<S>> {
    Ok(second_fundamental_form(f, p)?.mean_curvature)
}

/// The individual terms of `Δ̃F̃ = ΔF + Σ Hess F̃(N_i,N_i) − H(F̃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GulliverTerms {
    pub ambient_laplacian: f64,
    pub intrinsic_laplacian: f64,
    pub normal_hessian_sum: f64,
    /// `H(F̃) = ⟨grad F̃, H⟩`.
    pub mean_curvature_derivative: f64,
    pub residual: f64,
}

/// Evaluate both sides of the restriction identity with a given normal frame.
pub fn gulliver_terms_with_frame<T: ChartedMetric, F: SmoothMap, G: ScalarField>(
    f: &ImmersionMap<T, F>,
    field: &G,
    p: &[f64],
    frame: &NormalFrame<f64>,
) -> Result<GulliverTerms> {
    let fp = f.check(p)?;
    let ambient_laplacian = geometry::laplacian(&f.target, field, &fp)?;
    let hess = geometry::hessian(&f.target, field, &fp)?;
    let normal_hessian_sum: f64 = frame.vectors.iter().map(|nv| hess.apply(nv, nv)).sum();
    let intrinsic_laplacian = geometry::laplacian(f, &f.restrict(field), p)?;
    let h = mean_curvature(f, p)?;
    let (_, df) = diff::jet1(field, &fp);
    // ⟨grad F̃, H⟩ = dF̃(H)
    let mean_curvature_derivative = linalg::dot(&df, &h.vector.components);
    let rhs = intrinsic_laplacian + normal_hessian_sum - mean_curvature_derivative;
    Ok(GulliverTerms {
        ambient_laplacian,
        intrinsic_laplacian,
        normal_hessian_sum,
        mean_curvature_derivative,
        residual: (ambient_laplacian - rhs).abs(),
    })
}

/// `|Δ̃F̃ − (ΔF + Σ Hess F̃(N_i,N_i) − H(F̃))|` at `p`, with `ΔF` computed
/// intrinsically on the source chart.
pub fn gulliver_residual<T: ChartedMetric, F: SmoothMap, G: ScalarField>(
    f: &ImmersionMap<T, F>,
    field: &G,
    p: &[f64],
) -> Result<f64> {
    let frame = normal_frame(f, p)?;
    Ok(gulliver_terms_with_frame(f, field, p, &frame)?.residual)
}

/// Inserts fixed values at given target coordinates: `u ↦ (…, u_i, …, c, …)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateSlice {
    target_dim: usize,
    fixed: Vec<(usize, f64)>,
}

impl CoordinateSlice {
    pub fn new(target_dim: usize, mut fixed: Vec<(usize, f64)>) -> Result<Self> {
        fixed.sort_by_key(|(i, _)| *i);
        if fixed.windows(2).any(|w| w[0].0 == w[1].0) || fixed.iter().any(|(i, _)| *i >= target_dim) {
            return Err(Error::InvalidDimension(format!("invalid fixed coordinates {fixed:?}")));
        }
        if fixed.len() >= target_dim {
            return Err(Error::InvalidDimension("slice fixes every coordinate".into()));
        }
        Ok(Self { target_dim, fixed })
    }
}

impl SmoothMap for CoordinateSlice {
    fn source_dim(&self) -> usize {
        self.target_dim - self.fixed.len()
    }
    fn target_dim(&self) -> usize {
        self.target_dim
    }
    fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
        let mut out = Vec::with_capacity(self.target_dim);
        let mut free = p.iter();
        let mut fixed = self.fixed.iter().peekable();
        for i in 0..self.target_dim {
            match fixed.peek() {
                Some((j, v)) if *j == i => {
                    out.push(S::from_f64(*v));
                    fixed.next();
                }
                _ => out.push(*free.next().expect("source dimension matches")),
            }
        }
        out
    }
}

/// Graph of a function over the first `n−1` target coordinates:
/// `u ↦ (u, φ(u))`.
#[derive(Clone, Debug)]
pub struct GraphMap<G> {
    height: G,
    source_dim: usize,
}

impl<G: ScalarField> GraphMap<G> {
    pub fn new(height: G, source_dim: usize) -> Self {
        Self { height, source_dim }
    }
}

impl<G: ScalarField> SmoothMap for GraphMap<G> {
    fn source_dim(&self) -> usize {
        self.source_dim
    }
    fn target_dim(&self) -> usize {
        self.source_dim + 1
    }
    fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
        let mut out = p.to_vec();
        out.push(self.height.value(p));
        out
    }
}

/// Circle of radius `r` in the plane, parametrised by angle.
#[derive(Clone, Copy, Debug)]
pub struct CircleMap {
    pub radius: f64,
}

impl SmoothMap for CircleMap {
    fn source_dim(&self) -> usize {
        1
    }
    fn target_dim(&self) -> usize {
        2
    }
    fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
        let r = S::from_f64(self.radius);
        vec![r * p[0].cos(), r * p[0].sin()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConstantField, Euclidean};
    use crate::models::{BusemannModel, HyperbolicModel};

    #[test]
    fn slice_inserts_fixed_coordinates() {
        let s = CoordinateSlice::new(4, vec![(3, 0.5), (1, -1.0)]).unwrap();
        assert_eq!(s.source_dim(), 2);
        assert_eq!(s.apply(&[2.0, 3.0]), vec![2.0, -1.0, 3.0, 0.5]);
        assert!(CoordinateSlice::new(2, vec![(0, 0.0), (1, 0.0)]).is_err());
        assert!(CoordinateSlice::new(2, vec![(2, 0.0)]).is_err());
    }

    #[test]
    fn unit_circle_induced_metric_is_dtheta_squared() {
        let f = ImmersionMap::new(BoxDomain::cube(1, 3.0), Euclidean::cube(2, 5.0), CircleMap { radius: 1.0 }).unwrap();
        let g = induced_metric(&f, &[0.7]).unwrap();
        assert!((g.components[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn horosphere_is_flat() {
        let h3 = HyperbolicModel::new(3, 1.0).unwrap();
        let f = ImmersionMap::new(BoxDomain::cube(2, 5.0), h3, CoordinateSlice::new(3, vec![(2, 0.0)]).unwrap()).unwrap();
        let g = induced_metric(&f, &[0.3, -0.4]).unwrap();
        assert!(g.components.sub(&Mat::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_map_is_rejected() {
        struct Collapse;
        impl SmoothMap for Collapse {
            fn source_dim(&self) -> usize {
                2
            }
            fn target_dim(&self) -> usize {
                3
            }
            fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
                vec![p[0] + p[1], p[0] + p[1], S::zero()]
            }
        }
        let f = ImmersionMap::new(BoxDomain::cube(2, 1.0), Euclidean::cube(3, 5.0), Collapse).unwrap();
        assert!(matches!(induced_metric(&f, &[0.1, 0.2]), Err(Error::RankDeficient { .. })));
        assert!(matches!(normal_frame(&f, &[0.1, 0.2]), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn constant_field_has_zero_residual() {
        let h3 = HyperbolicModel::new(3, 1.0).unwrap();
        let f = ImmersionMap::new(BoxDomain::cube(2, 5.0), h3, CoordinateSlice::new(3, vec![(2, 0.3)]).unwrap()).unwrap();
        assert_eq!(gulliver_residual(&f, &ConstantField(2.5), &[0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn horosphere_gulliver_terms_match_closed_forms() {
        let h3 = HyperbolicModel::new(3, 1.0).unwrap();
        let busemann = h3.busemann();
        let f = ImmersionMap::new(BoxDomain::cube(2, 5.0), h3, CoordinateSlice::new(3, vec![(2, 0.0)]).unwrap()).unwrap();
        let p = [0.4, -1.1];
        let frame = normal_frame(&f, &p).unwrap();
        let t = gulliver_terms_with_frame(&f, &busemann, &p, &frame).unwrap();
        assert!(t.intrinsic_laplacian.abs() < 1e-12);
        assert!((t.ambient_laplacian - 2.0).abs() < 1e-12);
        assert!(t.normal_hessian_sum.abs() < 1e-12);
        assert!((t.mean_curvature_derivative + 2.0).abs() < 1e-12);
        assert!(t.residual < 1e-10);
    }
}
