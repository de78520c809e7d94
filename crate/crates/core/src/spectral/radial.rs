//! Radial Dirichlet problem `−(1/S)(S φ′)′ = λφ` on `(0, r)`, `φ′(0) = 0`, `φ(r) = 0`.
//!
//! Finite volumes on the nodes `ρ_i = i·h`, `h = r/N`: the cell of node `i`
//! is `[(i−½)h, (i+½)h] ∩ [0, r]` with weight `W_i = ∫ S`, and neighbouring
//! nodes are coupled by the flux coefficient `S((i+½)h)/h`. Node `N` carries
//! the Dirichlet condition. The symmetrised matrix `W^{-½} K W^{-½}` is
//! tridiagonal and solved by Sturm bisection.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::FloatScalar;

use super::tridiag::SymTridiagonal;
use super::EigenResult;

/// Smallest accepted number of unknowns.
pub const MIN_GRID: usize = 16;

/// Area factor `S(ρ)` of geodesic spheres.
pub trait RadialVolume: Sync {
    fn value(&self, rho: f64) -> f64;
}

impl RadialVolume for Expr {
    fn value(&self, rho: f64) -> f64 {
        self.eval1(rho)
    }
}

impl<F: Fn(f64) -> f64 + Sync> RadialVolume for F {
    fn value(&self, rho: f64) -> f64 {
        self(rho)
    }
}

/// Space form of curvature `−a²` (`a = 0` is flat) in dimension `m`:
/// `S(ρ) = (sinh(aρ)/a)^{m−1}` or `ρ^{m−1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceFormVolume {
    pub dim: usize,
    pub a: f64,
}

impl RadialVolume for SpaceFormVolume {
    fn value(&self, rho: f64) -> f64 {
        let base = if self.a == 0.0 { rho } else { (self.a * rho).sinh() / self.a };
        base.powi(self.dim as i32 - 1)
    }
}

#[derive(Clone, Debug)]
pub struct RadialProblem<V> {
    pub dim: usize,
    pub volume: V,
    pub radius: f64,
    /// Number of unknowns (nodes `0..grid_n`; node `grid_n` is on the boundary).
    pub grid_n: usize,
    /// Largest acceptable discretisation error estimate, if any.
    pub tolerance: Option<f64>,
}

impl<V: RadialVolume> RadialProblem<V> {
    pub fn new(dim: usize, volume: V, radius: f64, grid_n: usize) -> Result<Self> {
        if grid_n < MIN_GRID {
            return Err(Error::InvalidProblem(format!("radial grid needs at least {MIN_GRID} nodes, got {grid_n}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidProblem(format!("radius must be positive, got {radius}")));
        }
        if dim == 0 {
            return Err(Error::InvalidDimension("radial problem of dimension 0".into()));
        }
        Ok(Self { dim, volume, radius, grid_n, tolerance: None })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }

    pub fn mesh_parameter(&self) -> f64 {
        self.radius / self.grid_n as f64
    }

    /// Cell weights and flux coefficients on `n` unknowns.
    pub fn discretize(&self, n: usize) -> Result<RadialDiscretization> {
        let h = self.radius / n as f64;
        // three-point Gauss–Legendre on each half cell
        let nodes = [-(0.6_f64).sqrt(), 0.0, (0.6_f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let integrate = |a: f64, b: f64| -> Result<f64> {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let mut sum = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                let v = self.volume.value(mid + half * x);
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidProblem(format!("volume factor {v} at ρ = {}", mid + half * x)));
                }
                sum += w * v;
            }
            Ok(half * sum)
        };
        let mut half_cells = Vec::with_capacity(n);
        for i in 0..n {
            let a = i as f64 * h;
            half_cells.push((integrate(a, a + 0.5 * h)?, integrate(a + 0.5 * h, a + h)?));
        }
        let cell_weights: Vec<f64> = (0..n)
            .map(|i| half_cells[i].0 + if i > 0 { half_cells[i - 1].1 } else { 0.0 })
            .collect();
        let mut flux = Vec::with_capacity(n);
        for i in 0..n {
            let rho = (i as f64 + 0.5) * h;
            let v = self.volume.value(rho);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidProblem(format!("volume factor {v} at ρ = {rho}")));
            }
            flux.push(v / h);
        }
        Ok(RadialDiscretization { h, weights: cell_weights, flux })
    }
}

/// Finite-volume data: `weights[i] = W_i`, `flux[i]` couples nodes `i` and `i+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialDiscretization {
    pub h: f64,
    pub weights: Vec<f64>,
    pub flux: Vec<f64>,
}

impl RadialDiscretization {
    pub fn unknowns(&self) -> usize {
        self.weights.len()
    }

    fn symmetrized<S: FloatScalar>(&self) -> Result<SymTridiagonal<S>> {
        let n = self.unknowns();
        let diag = (0..n)
            .map(|i| S::of((self.flux[i] + if i > 0 { self.flux[i - 1] } else { 0.0 }) / self.weights[i]))
            .collect();
        let off = (0..n - 1)
            .map(|i| S::of(-self.flux[i] / (self.weights[i] * self.weights[i + 1]).sqrt()))
            .collect();
        SymTridiagonal::new(diag, off)
    }

    /// `(φᵀKφ)/(φᵀWφ)` for nodal values `φ_0..φ_N`; `φ_N` must vanish.
    pub fn rayleigh_quotient<S: FloatScalar>(&self, values: &[S]) -> Result<S> {
        let n = self.unknowns();
        if values.len() != n + 1 {
            return Err(Error::InvalidDimension(format!("{} nodal values for {} nodes", values.len(), n + 1)));
        }
        if values[n] != S::zero() {
            return Err(Error::NotAdmissible { node: n });
        }
        let mut num = S::zero();
        let mut den = S::zero();
        for i in 0..n {
            let d = values[i + 1] - values[i];
            num += S::of(self.flux[i]) * d * d;
            den += S::of(self.weights[i]) * values[i] * values[i];
        }
        if den == S::zero() {
            return Err(Error::ZeroFunction);
        }
        Ok(num / den)
    }

    /// Smallest eigenvalue with its one-signed eigenvector (boundary node appended).
    pub fn solve<S: FloatScalar>(&self) -> Result<(S, Vec<S>, S)> {
        let t = self.symmetrized::<S>()?;
        let lambda = t.eigenvalue(0);
        let y = t.eigenvector(lambda);
        let n = self.unknowns();
        let mut phi: Vec<S> = (0..n).map(|i| y[i] / S::of(self.weights[i].sqrt())).collect();
        let peak = phi.iter().fold(S::zero(), |m, v| if v.abs() > m.abs() { *v } else { m });
        for v in &mut phi {
            *v = *v / peak;
        }
        // relative residual of the generalized problem K φ = λ W φ
        let mut r2 = S::zero();
        let mut b2 = S::zero();
        for i in 0..n {
            let left = if i > 0 { S::of(self.flux[i - 1]) * (phi[i] - phi[i - 1]) } else { S::zero() };
            let right = if i + 1 < n { S::of(self.flux[i]) * (phi[i] - phi[i + 1]) } else { S::of(self.flux[i]) * phi[i] };
            let mw = lambda * S::of(self.weights[i]) * phi[i];
            r2 += (left + right - mw) * (left + right - mw);
            b2 += mw * mw;
        }
        phi.push(S::zero());
        Ok((lambda, phi, (r2 / b2).sqrt()))
    }
}

/// First Dirichlet eigenvalue of the radial problem, with the error estimate
/// `(4/3)|λ_N − λ_{2N}|` from one grid doubling.
pub fn radial_lambda1<S: FloatScalar, V: RadialVolume>(problem: &RadialProblem<V>) -> Result<EigenResult<S>> {
    let coarse = problem.discretize(problem.grid_n)?;
    let fine = problem.discretize(2 * problem.grid_n)?;
    let (lambda, phi, residual) = coarse.solve::<S>()?;
    let (lambda_fine, _, _) = fine.solve::<S>()?;
    let diff = (lambda - lambda_fine).abs();
    let estimate = S::of(4.0 / 3.0) * diff;
    if let Some(tol) = problem.tolerance {
        if estimate > S::of(tol) {
            return Err(Error::GridTooCoarse { estimate: estimate.to_f64().unwrap_or(f64::NAN), tolerance: tol });
        }
    }
    let extrapolated = (S::of(4.0) * lambda_fine - lambda) / S::of(3.0);
    Ok(EigenResult {
        lambda1: lambda,
        eigenvector: phi,
        residual_norm: residual,
        mesh_parameter: S::of(problem.mesh_parameter()),
        error_estimate: Some(estimate),
        extrapolated: Some(extrapolated),
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_interval_matches_cosine_mode() {
        let p = RadialProblem::new(1, |_: f64| 1.0, 1.0, 200).unwrap();
        let r = radial_lambda1::<f64, _>(&p).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 4.0;
        assert!((r.lambda1 - exact).abs() < 1e-4);
        assert!((r.extrapolated.unwrap() - exact).abs() < 1e-8);
    }

    #[test]
    fn rejects_small_grids_and_bad_volumes() {
        assert!(RadialProblem::new(2, SpaceFormVolume { dim: 2, a: 0.0 }, 1.0, 8).is_err());
        let p = RadialProblem::new(2, |r: f64| 1.0 - r, 2.0, 32).unwrap();
        assert!(radial_lambda1::<f64, _>(&p).is_err());
    }

    #[test]
    fn tolerance_triggers_grid_too_coarse() {
        let p = RadialProblem::new(2, SpaceFormVolume { dim: 2, a: 0.0 }, 1.0, 16).unwrap().with_tolerance(1e-9);
        assert!(matches!(radial_lambda1::<f64, _>(&p), Err(Error::GridTooCoarse { .. })));
    }
}
