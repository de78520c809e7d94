use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tonebound::geometry::{BoxDomain, Euclidean};
use tonebound::models::HyperbolicModel;
use tonebound::spectral::{
    compare_centers, fem_ball_lambda1, fem_first_two, fem_lambda1, geodesic_ball_mesh, radial_lambda1, rayleigh_quotient,
    rectangle_mesh, tone_estimate, CurvePoint, RadialProblem, SpaceFormVolume,
};
use tonebound::Error;

/// First zero of `J₀` by RK4 shooting of `y'' + y'/x + y = 0` from the series
/// start near 0, then bisection on sign changes.
fn bessel_j0_first_zero_squared() -> f64 {
    let shoot_to = |x_end: f64| -> f64 {
        let x0 = 1e-6;
        let (mut x, mut y, mut dy) = (x0, 1.0 - x0 * x0 / 4.0, -x0 / 2.0);
        let steps = ((x_end - x0) / 1e-4).ceil() as usize;
        let h = (x_end - x0) / steps as f64;
        let f = |x: f64, y: f64, dy: f64| (dy, -dy / x - y);
        for _ in 0..steps {
            let (k1y, k1d) = f(x, y, dy);
            let (k2y, k2d) = f(x + h / 2.0, y + h / 2.0 * k1y, dy + h / 2.0 * k1d);
            let (k3y, k3d) = f(x + h / 2.0, y + h / 2.0 * k2y, dy + h / 2.0 * k2d);
            let (k4y, k4d) = f(x + h, y + h * k3y, dy + h * k3d);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            dy += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            x += h;
        }
        y
    };
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if shoot_to(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    z * z
}

fn disk_volume() -> SpaceFormVolume {
    SpaceFormVolume { dim: 2, a: 0.0 }
}

#[test]
fn bessel_oracle_is_accurate() {
    assert!((bessel_j0_first_zero_squared() - 5.783185962946784).abs() < 1e-7);
}

#[test]
fn radial_disk_matches_bessel_zero() {
    let oracle = bessel_j0_first_zero_squared();
    let p = RadialProblem::new(2, disk_volume(), 1.0, 400).unwrap();
    let r = radial_lambda1::<f64, _>(&p).unwrap();
    assert!((r.lambda1 - oracle).abs() < 1e-4);
    assert!((r.extrapolated.unwrap() - oracle).abs() < 1e-7);
    // the Richardson estimate is asymptotically exact for the unextrapolated value
    let ratio = r.error_estimate.unwrap() / (r.lambda1 - oracle).abs();
    assert!((0.8..1.25).contains(&ratio), "{ratio}");
}

#[test]
fn radial_solver_converges_at_second_order() {
    let oracle = bessel_j0_first_zero_squared();
    let errs: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&n| (radial_lambda1::<f64, _>(&RadialProblem::new(2, disk_volume(), 1.0, n).unwrap()).unwrap().lambda1 - oracle).abs())
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }
}

#[test]
fn radial_eigenvector_is_positive_and_rayleigh_consistent() {
    let p = RadialProblem::new(2, SpaceFormVolume { dim: 2, a: 1.0 }, 6.0, 300).unwrap();
    let r = radial_lambda1::<f64, _>(&p).unwrap();
    let n = r.eigenvector.len();
    assert!(r.eigenvector[..n - 1].iter().all(|v| *v > 0.0));
    assert_eq!(r.eigenvector[n - 1], 0.0);
    let d = p.discretize(300).unwrap();
    let q = d.rayleigh_quotient(&r.eigenvector).unwrap();
    assert!(((q - r.lambda1) / r.lambda1).abs() < 1e-8);
    assert!(r.residual_norm < 1e-8);
}

#[test]
fn radial_rayleigh_quotient_errors() {
    let d = RadialProblem::new(1, |_: f64| 1.0, 1.0, 16).unwrap().discretize(16).unwrap();
    assert!(matches!(d.rayleigh_quotient(&[0.0_f64; 17]), Err(Error::ZeroFunction)));
    let mut v = vec![1.0_f64; 17];
    assert!(matches!(d.rayleigh_quotient(&v), Err(Error::NotAdmissible { node: 16 })));
    v[16] = 0.0;
    assert!(d.rayleigh_quotient(&v).unwrap() > 0.0);
}

#[test]
fn tent_function_on_half_interval() {
    // symmetric problem on (−π/2, π/2): λ₁ = 1, tent quotient → 12/π²
    let l = std::f64::consts::FRAC_PI_2;
    let n = 400;
    let p = RadialProblem::new(1, |_: f64| 1.0, l, n).unwrap();
    let d = p.discretize(n).unwrap();
    let tent: Vec<f64> = (0..=n).map(|i| 1.0 - i as f64 / n as f64).collect();
    let q = d.rayleigh_quotient(&tent).unwrap();
    let lambda = radial_lambda1::<f64, _>(&p).unwrap().lambda1;
    assert!((lambda - 1.0).abs() < 1e-4);
    assert!(q >= lambda);
    assert!((q - 12.0 / std::f64::consts::PI.powi(2)).abs() < 1e-4);
}

#[test]
fn radial_single_precision() {
    let p = RadialProblem::new(2, disk_volume(), 1.0, 64).unwrap();
    let r32 = radial_lambda1::<f32, _>(&p).unwrap();
    let r64 = radial_lambda1::<f64, _>(&p).unwrap();
    assert!((r32.lambda1 as f64 - r64.lambda1).abs() < 1e-3);
}

#[test]
fn hyperbolic_space_tones() {
    // λ₁(ℍ³ ball of radius r) = 1 + π²/r² exactly
    let p = RadialProblem::new(3, SpaceFormVolume { dim: 3, a: 1.0 }, 10.0, 1000).unwrap();
    let r = radial_lambda1::<f64, _>(&p).unwrap();
    let exact = 1.0 + std::f64::consts::PI.powi(2) / 100.0;
    assert!((r.lambda1 - exact).abs() < 1e-4, "{}", r.lambda1);
    assert!((r.extrapolated.unwrap() - exact).abs() < 1e-7);
    // ℍ⁴ stays above 9/4
    let p = RadialProblem::new(4, SpaceFormVolume { dim: 4, a: 1.0 }, 10.0, 1000).unwrap();
    assert!(radial_lambda1::<f64, _>(&p).unwrap().lambda1 > 2.25);
}

fn h2_curve(radii: &[f64]) -> Vec<CurvePoint> {
    radii
        .iter()
        .map(|&r| {
            let p = RadialProblem::new(2, SpaceFormVolume { dim: 2, a: 1.0 }, r, (100.0 * r) as usize).unwrap();
            let e = radial_lambda1::<f64, _>(&p).unwrap();
            CurvePoint { r, lambda1: e.lambda1, mesh_parameter: e.mesh_parameter, error_estimate: e.error_estimate.unwrap() }
        })
        .collect()
}

#[test]
fn hyperbolic_plane_curve_and_tone() {
    let curve = h2_curve(&[4.0, 6.0, 8.0, 10.0]);
    for w in curve.windows(2) {
        assert!(w[1].lambda1 < w[0].lambda1);
    }
    assert!(curve.iter().all(|p| p.lambda1 >= 0.25));
    let t = tone_estimate(&curve, 1e-9).unwrap();
    assert!((t.asymptote - 0.25).abs() < 0.05, "{t:?}");
    // λ₁(B(10)) in ℍ²
    assert!((curve[3].lambda1 - 0.328271).abs() < 1e-4, "{}", curve[3].lambda1);
}

#[test]
fn flat_and_h3_tone_estimates() {
    let flat: Vec<CurvePoint> = [4.0, 8.0, 16.0, 32.0]
        .iter()
        .map(|&r| {
            let p = RadialProblem::new(2, disk_volume(), r, 400).unwrap();
            let e = radial_lambda1::<f64, _>(&p).unwrap();
            CurvePoint { r, lambda1: e.lambda1, mesh_parameter: e.mesh_parameter, error_estimate: e.error_estimate.unwrap() }
        })
        .collect();
    assert!(tone_estimate(&flat, 1e-9).unwrap().asymptote.abs() < 1e-3);
    let h3: Vec<CurvePoint> = [4.0, 6.0, 8.0, 10.0]
        .iter()
        .map(|&r| {
            let p = RadialProblem::new(3, SpaceFormVolume { dim: 3, a: 1.0 }, r, 800).unwrap();
            let e = radial_lambda1::<f64, _>(&p).unwrap();
            CurvePoint { r, lambda1: e.lambda1, mesh_parameter: e.mesh_parameter, error_estimate: e.error_estimate.unwrap() }
        })
        .collect();
    assert!((tone_estimate(&h3, 1e-9).unwrap().asymptote - 1.0).abs() < 0.1);
}

#[test]
fn fem_flat_disk_richardson() {
    let oracle = bessel_j0_first_zero_squared();
    let e = Euclidean::cube(2, 3.0);
    let values: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&rings| fem_lambda1(&geodesic_ball_mesh(&e, [0.0, 0.0], 1.0, rings).unwrap()).unwrap().lambda1)
        .collect();
    let order = ((values[0] - values[1]) / (values[1] - values[2])).log2();
    assert!((order - 2.0).abs() < 0.3, "order {order}");
    let extrapolated = (4.0 * values[2] - values[1]) / 3.0;
    assert!(((extrapolated - oracle) / oracle).abs() < 0.01, "{extrapolated}");
    let prev = (4.0 * values[1] - values[0]) / 3.0;
    assert!(((extrapolated - prev) / extrapolated).abs() < 0.005);
}

#[test]
fn fem_square_is_two() {
    let e = Euclidean::new(BoxDomain::cube(2, 4.0));
    let pi = std::f64::consts::PI;
    let coarse = fem_lambda1(&rectangle_mesh(&e, [0.0, pi], [0.0, pi], 24, 24).unwrap()).unwrap().lambda1;
    let fine = fem_lambda1(&rectangle_mesh(&e, [0.0, pi], [0.0, pi], 48, 48).unwrap()).unwrap().lambda1;
    assert!(((4.0 * fine - coarse) / 3.0 - 2.0).abs() < 1e-3);
}

#[test]
fn fem_eigenpair_properties() {
    let h2 = HyperbolicModel::new(2, 1.0).unwrap();
    let mesh = geodesic_ball_mesh(&h2, [0.0, 0.0], 2.0, 12).unwrap();
    let r = fem_lambda1(&mesh).unwrap();
    assert!(r.residual_norm < 1e-10);
    for (v, b) in r.eigenvector.iter().zip(&mesh.boundary) {
        if *b {
            assert_eq!(*v, 0.0);
        } else {
            assert!(*v > 0.0);
        }
    }
    let q = rayleigh_quotient(&mesh, &r.eigenvector).unwrap();
    assert!(((q - r.lambda1) / r.lambda1).abs() < 1e-10);
    let (l1, l2) = fem_first_two(&mesh).unwrap();
    assert!((l1 - r.lambda1).abs() < 1e-10 * l1);
    assert!(l2 > l1 * 1.5, "{l1} {l2}");
}

#[test]
fn fem_rayleigh_quotient_bounds_lambda1() {
    let e = Euclidean::cube(2, 3.0);
    let mesh = geodesic_ball_mesh(&e, [0.0, 0.0], 1.0, 10).unwrap();
    let lambda = fem_lambda1(&mesh).unwrap().lambda1;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let phi: Vec<f64> = mesh.boundary.iter().map(|b| if *b { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        assert!(rayleigh_quotient(&mesh, &phi).unwrap() >= lambda);
    }
    let zero = vec![0.0; mesh.vertices.len()];
    assert!(matches!(rayleigh_quotient(&mesh, &zero), Err(Error::ZeroFunction)));
    let ones = vec![1.0; mesh.vertices.len()];
    assert!(matches!(rayleigh_quotient(&mesh, &ones), Err(Error::NotAdmissible { .. })));
}

#[test]
fn fem_and_radial_agree_on_hyperbolic_ball() {
    let h2 = HyperbolicModel::new(2, 1.0).unwrap();
    let fem = fem_ball_lambda1(&h2, [0.0, 0.0], 3.0, 16).unwrap();
    let radial = radial_lambda1::<f64, _>(&RadialProblem::new(2, SpaceFormVolume { dim: 2, a: 1.0 }, 3.0, 600).unwrap()).unwrap();
    let tol = fem.error_estimate.unwrap() + radial.error_estimate.unwrap();
    assert!((fem.lambda1 - radial.lambda1).abs() <= tol, "{} vs {} (tol {tol})", fem.lambda1, radial.lambda1);
    assert!((fem.extrapolated.unwrap() - radial.lambda1).abs() < 0.01 * radial.lambda1);
}

#[test]
fn hyperbolic_ball_is_center_independent() {
    let h2 = HyperbolicModel::new(2, 1.0).unwrap();
    let results: Vec<(f64, f64)> = [[0.0, 0.0], [1.5, -0.7]]
        .iter()
        .map(|&c| {
            let r = fem_ball_lambda1(&h2, c, 2.0, 10).unwrap();
            (r.lambda1, r.error_estimate.unwrap())
        })
        .collect();
    let cmp = compare_centers(&results).unwrap();
    assert!(cmp.consistent, "{cmp:?}");
}
