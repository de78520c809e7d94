//! Concrete spaces and maps built from a scenario.

use tonebound::expr::Expr;
use tonebound::geometry::{BoxDomain, ChartedMetric, CoordinateField, Euclidean, SmoothMap};
use tonebound::immersion::{CoordinateSlice, GraphMap, ImmersionMap};
use tonebound::linalg::Mat;
use tonebound::models::{make_warped_line, BusemannModel, FiberChart, HyperbolicModel, RoundSphere, WarpedLineModel, WarpedProduct};
use tonebound::submersion::{Projection, SubmersionMap};
use tonebound::Real;

use crate::config::{BaseModel, ConfigError, FiberKind, ImmersionKind, LoadedScenario, TotalKind};

#[derive(Clone, Debug)]
pub enum BaseSpace {
    Hyperbolic(HyperbolicModel),
    WarpedLine(WarpedLineModel<FiberChart, Expr>),
}

impl ChartedMetric for BaseSpace {
    fn dim(&self) -> usize {
        match self {
            Self::Hyperbolic(h) => h.dim(),
            Self::WarpedLine(w) => w.dim(),
        }
    }
    fn domain(&self) -> &BoxDomain {
        match self {
            Self::Hyperbolic(h) => h.domain(),
            Self::WarpedLine(w) => w.domain(),
        }
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        match self {
            Self::Hyperbolic(h) => h.metric(p),
            Self::WarpedLine(w) => w.metric(p),
        }
    }
}

impl BusemannModel for BaseSpace {
    fn busemann(&self) -> CoordinateField {
        match self {
            Self::Hyperbolic(h) => h.busemann(),
            Self::WarpedLine(w) => w.busemann(),
        }
    }
    fn hessian_bounds(&self) -> (f64, f64) {
        match self {
            Self::Hyperbolic(h) => h.hessian_bounds(),
            Self::WarpedLine(w) => w.hessian_bounds(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum TotalSpace {
    Base(BaseSpace),
    Warped(WarpedProduct<BaseSpace, FiberChart, Expr>),
}

impl ChartedMetric for TotalSpace {
    fn dim(&self) -> usize {
        match self {
            Self::Base(b) => b.dim(),
            Self::Warped(w) => w.dim(),
        }
    }
    fn domain(&self) -> &BoxDomain {
        match self {
            Self::Base(b) => b.domain(),
            Self::Warped(w) => w.domain(),
        }
    }
    fn metric<S: Real>(&self, p: &[S]) -> Mat<S> {
        match self {
            Self::Base(b) => b.metric(p),
            Self::Warped(w) => w.metric(p),
        }
    }
}

#[derive(Clone, Debug)]
pub enum SurfaceMap {
    Slice(CoordinateSlice),
    Graph(GraphMap<Expr>),
}

impl SmoothMap for SurfaceMap {
    fn source_dim(&self) -> usize {
        match self {
            Self::Slice(s) => s.source_dim(),
            Self::Graph(g) => g.source_dim(),
        }
    }
    fn target_dim(&self) -> usize {
        match self {
            Self::Slice(s) => s.target_dim(),
            Self::Graph(g) => g.target_dim(),
        }
    }
    fn apply<S: Real>(&self, p: &[S]) -> Vec<S> {
        match self {
            Self::Slice(s) => s.apply(p),
            Self::Graph(g) => g.apply(p),
        }
    }
}

pub type Submersion = SubmersionMap<TotalSpace, BaseSpace, Projection>;
pub type Immersion = ImmersionMap<TotalSpace, SurfaceMap>;

/// Why a scenario could not be built.
#[derive(Debug)]
pub enum BuildError {
    Config(ConfigError),
    /// A hypothesis of the model fails, e.g. `w′ ≤ 0` somewhere.
    Hypothesis(tonebound::Error),
}

impl From<ConfigError> for BuildError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

fn invalid(e: tonebound::Error) -> BuildError {
    match e {
        tonebound::Error::NonPositiveDerivative { .. } => BuildError::Hypothesis(e),
        other => BuildError::Config(ConfigError::new(other.to_string())),
    }
}

pub struct World {
    pub base: BaseSpace,
    pub submersion: Submersion,
    pub immersion: Option<Immersion>,
    pub alpha: Option<f64>,
}

fn fiber_chart(kind: FiberKind, dim: usize, half_width: f64, radius: f64) -> Result<FiberChart, BuildError> {
    Ok(match kind {
        FiberKind::Flat => FiberChart::Flat(Euclidean::cube(dim, half_width)),
        FiberKind::Sphere => FiberChart::Sphere(RoundSphere::new(radius).map_err(invalid)?),
    })
}

fn names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

fn as_strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

pub fn build(loaded: &LoadedScenario) -> Result<World, BuildError> {
    let sc = &loaded.scenario;
    let b = &sc.base;
    let (base, base_names) = match b.model {
        BaseModel::Hyperbolic => {
            let k = b.k.ok_or_else(|| ConfigError::new("base.k is required for the hyperbolic model"))?;
            let a = b.a.unwrap_or(1.0);
            let h = HyperbolicModel::new(k, a)
                .and_then(|h| h.with_domain(BoxDomain::cube(k, b.half_width)))
                .map_err(invalid)?;
            let mut n = names("x", k - 1);
            n.push("s".into());
            (BaseSpace::Hyperbolic(h), n)
        }
        BaseModel::WarpedLine => {
            let warp = b.warp.as_ref().ok_or_else(|| ConfigError::new("base.warp is required for the warped-line model"))?;
            let w = loaded.expression(warp, &["s"])?;
            let fiber = fiber_chart(b.fiber, b.fiber_dim, b.half_width, b.sphere_radius)?;
            let mut n = match b.fiber {
                FiberKind::Flat => names("x", b.fiber_dim),
                FiberKind::Sphere => vec!["theta".into(), "phi".into()],
            };
            n.push("s".into());
            let [s0, s1] = b.s_range.unwrap_or([-b.half_width, b.half_width]);
            let mut model = make_warped_line(fiber, w, (s0, s1)).map_err(invalid)?;
            if let Some([a, bb]) = b.declared_bounds {
                model = model.with_declared_bounds(a, bb).map_err(invalid)?;
            }
            (BaseSpace::WarpedLine(model), n)
        }
    };

    let t = &sc.total;
    let (total, total_names) = match t.kind {
        TotalKind::Base => (TotalSpace::Base(base.clone()), base_names.clone()),
        TotalKind::Warped => {
            let rho = match &t.rho {
                Some(r) => loaded.expression(r, &as_strs(&base_names))?,
                None => Expr::parse("1", &[]).expect("constant expression"),
            };
            let fiber = fiber_chart(t.fiber, t.fiber_dim, t.fiber_half_width, t.sphere_radius)?;
            let fiber_dim = fiber.dim();
            let mut n = base_names.clone();
            n.extend(names("t", fiber_dim));
            (TotalSpace::Warped(WarpedProduct::new(base.clone(), fiber, rho)), n)
        }
    };
    let submersion = SubmersionMap::projection(total.clone(), base.clone()).map_err(invalid)?;

    let mut alpha = None;
    let immersion = match &sc.immersion {
        None => None,
        Some(spec) => {
            let n = total.dim();
            let domain = total.domain();
            let (map, lower, upper) = match spec.kind {
                ImmersionKind::Identity | ImmersionKind::Slice => {
                    let fixed = if spec.kind == ImmersionKind::Identity { Vec::new() } else { spec.fixed.clone() };
                    let slice = CoordinateSlice::new(n, fixed.clone()).map_err(invalid)?;
                    let free: Vec<usize> = (0..n).filter(|i| !fixed.iter().any(|(j, _)| j == i)).collect();
                    let lower = free.iter().map(|&i| domain.lower[i]).collect();
                    let upper = free.iter().map(|&i| domain.upper[i]).collect();
                    (SurfaceMap::Slice(slice), lower, upper)
                }
                ImmersionKind::Graph => {
                    let height = spec.height.as_ref().ok_or_else(|| ConfigError::new("immersion.height is required for a graph"))?;
                    let vars = as_strs(&total_names[..n - 1]);
                    let phi = loaded.expression(height, &vars)?;
                    (SurfaceMap::Graph(GraphMap::new(phi, n - 1)), domain.lower[..n - 1].to_vec(), domain.upper[..n - 1].to_vec())
                }
            };
            let source = BoxDomain::new(lower, upper).map_err(invalid)?.shrunk(spec.shrink);
            alpha = spec.alpha;
            Some(ImmersionMap::new(source, total.clone(), map).map_err(invalid)?)
        }
    };
    if let Some(f) = &immersion {
        if f.source_dim() < 2 {
            return Err(BuildError::Config(ConfigError::new("the immersed manifold must have dimension at least 2")));
        }
    }
    Ok(World { base, submersion, immersion, alpha })
}
