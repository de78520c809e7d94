//! Fundamental tone estimates from `λ₁(r)` curves.

use serde::Serialize;

use crate::error::{Error, Result};

/// One row of a `λ₁(r)` curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub r: f64,
    pub lambda1: f64,
    pub mesh_parameter: f64,
    pub error_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToneEstimate {
    /// `λ₁` at the largest radius.
    pub final_value: f64,
    /// `A` in the least-squares fit `λ₁(r) ≈ A + B/r²` over the last three points.
    pub asymptote: f64,
    pub fit_slope: f64,
}

/// Check domain monotonicity and fit the asymptote. An increase larger than
/// the two points' error estimates plus `tolerance` is reported as [`Error::NotMonotone`].
pub fn tone_estimate(curve: &[CurvePoint], tolerance: f64) -> Result<ToneEstimate> {
    if curve.len() < 3 {
        return Err(Error::InvalidProblem(format!("tone estimate needs at least 3 radii, got {}", curve.len())));
    }
    for w in curve.windows(2) {
        if !(w[1].r > w[0].r) {
            return Err(Error::InvalidProblem("radii must be strictly increasing".into()));
        }
        let increase = w[1].lambda1 - w[0].lambda1;
        if increase > w[0].error_estimate + w[1].error_estimate + tolerance {
            return Err(Error::NotMonotone { r_prev: w[0].r, r_next: w[1].r, increase });
        }
    }
    let tail = &curve[curve.len() - 3..];
    let xs: Vec<f64> = tail.iter().map(|p| 1.0 / (p.r * p.r)).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.lambda1).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(ToneEstimate { final_value: ys[2], asymptote: my - slope * mx, fit_slope: slope })
}

/// `λ₁(r)` recomputed at several centers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CenterComparison {
    pub values: Vec<f64>,
    pub spread: f64,
    pub tolerance: f64,
    pub consistent: bool,
}

/// Compare `(λ, error_estimate)` pairs computed at different centers.
pub fn compare_centers(results: &[(f64, f64)]) -> Result<CenterComparison> {
    if results.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let values: Vec<f64> = results.iter().map(|r| r.0).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tolerance = 2.0 * results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CenterComparison { spread: hi - lo, consistent: hi - lo <= tolerance, tolerance, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, l: f64) -> CurvePoint {
        CurvePoint { r, lambda1: l, mesh_parameter: 0.1, error_estimate: 0.0 }
    }

    #[test]
    fn exact_inverse_square_fit() {
        let c: Vec<CurvePoint> = [2.0, 3.0, 4.0, 5.0].iter().map(|&r| pt(r, 1.0 + 2.0 / (r * r))).collect();
        let t = tone_estimate(&c, 0.0).unwrap();
        assert!((t.asymptote - 1.0).abs() < 1e-12);
        assert!((t.fit_slope - 2.0).abs() < 1e-10);
    }

    #[test]
    fn increasing_curve_is_rejected() {
        let c = vec![pt(1.0, 3.0), pt(2.0, 2.0), pt(3.0, 2.5)];
        assert!(matches!(tone_estimate(&c, 1e-6), Err(Error::NotMonotone { .. })));
        assert!(tone_estimate(&c[..2], 0.0).is_err());
    }
}
